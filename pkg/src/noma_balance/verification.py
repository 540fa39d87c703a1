"""Bundled agreement checks: closed-form allocator versus the grid oracle.

Five fixed three-user populations (rates, weights, distances on the unit
disk) ship with the package; verifying a build means solving each one
analytically and exhaustively and comparing orders, outage probabilities,
and power splits.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import closed_form, model, oracle
from .model import Scenario
from .montecarlo import scenario_from_geometry

__all__ = ["VerifyRow", "builtin_scenarios", "verify_scenario", "verify_builtin"]

# case -> (rates, weights, distances); eta = 3.75, reference SNR 10 dB
BUILTIN_CASES: dict[str, tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]] = {
    "G1": ((0.57, 0.04, 1.39), (0.39, 0.30, 0.31), (0.453, 0.788, 0.417)),
    "G2": ((0.91, 0.35, 0.74), (0.11, 0.29, 0.60), (0.535, 0.981, 0.480)),
    "G3": ((0.47, 0.74, 0.79), (0.25, 0.35, 0.40), (0.904, 0.842, 0.208)),
    "G4": ((0.65, 0.23, 1.12), (0.45, 0.46, 0.09), (0.636, 0.550, 0.870)),
    "G5": ((0.73, 0.22, 1.05), (0.32, 0.26, 0.42), (0.951, 0.531, 0.784)),
}

DEFAULT_ETA = 3.75
DEFAULT_SNR_DB = 10.0
DEFAULT_RESOLUTION = 1.0 / 200.0
DEFAULT_OUTAGE_TOL = 2e-3
DEFAULT_PAF_TOL = 1e-2


@dataclass(frozen=True)
class VerifyRow:
    """Agreement between the analytical and exhaustive solutions."""

    case: str
    order_match: bool
    max_outage_diff: float
    max_paf_diff: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "order_match": self.order_match,
            "max_outage_diff": self.max_outage_diff,
            "max_paf_diff": self.max_paf_diff,
            "ok": self.ok,
        }


def builtin_scenarios(
    snr_db: float = DEFAULT_SNR_DB, eta: float = DEFAULT_ETA
) -> dict[str, Scenario]:
    return {
        name: scenario_from_geometry(d, r, w, snr_db, eta)
        for name, (r, w, d) in BUILTIN_CASES.items()
    }


def verify_scenario(
    scenario: Scenario,
    case: str = "custom",
    resolution: float = DEFAULT_RESOLUTION,
    outage_tol: float = DEFAULT_OUTAGE_TOL,
    paf_tol: float = DEFAULT_PAF_TOL,
) -> VerifyRow:
    """Compare closed-form and grid solutions of one scenario.

    The grid winner is re-evaluated through the exact evaluator so outage
    probabilities are compared on equal footing.
    """
    analytic = closed_form.solve(scenario)
    best = oracle.grid_search(scenario, oracle.GridSpec(resolution=resolution))
    grid_eval = model.evaluate(scenario, best.order, best.pafs)

    order_match = analytic.order.perm == best.order.perm
    max_outage = max(
        abs(a - b) for a, b in zip(analytic.outage, grid_eval.outage)
    )
    max_paf = max(abs(a - b) for a, b in zip(analytic.pafs.pafs, best.pafs.pafs))
    ok = order_match and max_outage <= outage_tol and max_paf <= paf_tol
    return VerifyRow(
        case=case,
        order_match=order_match,
        max_outage_diff=max_outage,
        max_paf_diff=max_paf,
        ok=ok,
    )


def verify_builtin(
    snr_db: float = DEFAULT_SNR_DB,
    resolution: float = DEFAULT_RESOLUTION,
    outage_tol: float = DEFAULT_OUTAGE_TOL,
    paf_tol: float = DEFAULT_PAF_TOL,
) -> list[VerifyRow]:
    """Run the agreement check on every bundled case."""
    return [
        verify_scenario(scen, case, resolution, outage_tol, paf_tol)
        for case, scen in builtin_scenarios(snr_db).items()
    ]
