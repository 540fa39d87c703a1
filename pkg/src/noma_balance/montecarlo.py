"""Seeded Monte-Carlo experiments over randomly placed users.

Users are dropped uniformly on a disk, rates are drawn uniformly on the
simplex of a fixed sum, and weights uniformly on (0, 1].  Outage is exact
under Rayleigh statistics, so trials randomize the population only; no
fading samples are ever drawn.

Reproducibility contract: all randomness comes from counter-based Philox
streams keyed by the master seed with counter ``trial*2**128 + stream*2**64``.
Stream 0 samples the scenario; stream L (the group size) seeds random
grouping, so every random-grouped scheme with the same L sees the same
partition in a given trial.  Averages accumulate in fixed trial order, and
re-running a configuration reproduces results bit for bit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .intergroup import DEFAULT_CONFIG, SolverConfig, SolverError
from .model import Scenario, UserStats
from .schemes import apply_scheme, parse_scheme

__all__ = [
    "GeometryConfig",
    "McConfig",
    "McSummary",
    "trial_stream",
    "sample_scenario",
    "scenario_from_geometry",
    "simulate_trials",
    "run_trials",
    "summary_to_csv",
    "required_snr",
    "required_snr_sweep",
    "sweep_to_csv",
    "bisect_required_snr",
]

THREADS_ENV = "NOMA_BALANCE_THREADS"


@dataclass(frozen=True)
class GeometryConfig:
    """User drop geometry: disk radius, pathloss exponent, transmit SNR."""

    radius: float = 1.0
    eta: float = 3.75
    snr_db: float = 10.0

    def __post_init__(self) -> None:
        if not (self.radius > 0 and self.eta > 0):
            raise ValueError("radius and eta must be positive")


@dataclass(frozen=True)
class McConfig:
    """One Monte-Carlo experiment: population size, rate budget, schemes."""

    k: int
    r_sum: float
    trials: int = 5000
    schemes: tuple[str, ...] = ("NOMA",)
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if self.k < 1 or self.trials < 1:
            raise ValueError("k and trials must be >= 1")
        if not self.r_sum > 0:
            raise ValueError("r_sum must be > 0")


@dataclass(frozen=True)
class McSummary:
    """Per-scheme, per-user average outage probabilities."""

    schemes: tuple[str, ...]
    avg_outage: tuple[tuple[float, ...], ...]
    trials: int
    seed: int


def trial_stream(seed: int, trial_index: int, stream: int = 0) -> np.random.Generator:
    """Independent Philox stream for (seed, trial, stream)."""
    counter = (int(trial_index) << 128) + (int(stream) << 64)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))


def sample_scenario(
    geometry: GeometryConfig, k: int, r_sum: float, seed: int, trial_index: int = 0
) -> Scenario:
    """Draw one population: disk-uniform distances, simplex-uniform rates
    summing to ``r_sum``, weights uniform on (0, 1]."""
    rng = trial_stream(seed, trial_index, stream=0)
    # sqrt of a uniform radius^2 fraction gives area-uniform placement;
    # 1 - U keeps the draw in (0, 1] so no user sits on the source
    d = geometry.radius * np.sqrt(1.0 - rng.random(k))
    raw = rng.standard_exponential(k)
    rates = (r_sum / raw.sum()) * raw
    weights = 1.0 - rng.random(k)
    return scenario_from_geometry(d, rates, weights, geometry.snr_db, geometry.eta)


def scenario_from_geometry(
    distances, rates, weights, snr_db: float, eta: float = 3.75
) -> Scenario:
    """Mean SNRs from pathloss: gamma_bar = 10**(snr_db/10) * d**(-eta)."""
    snr = 10.0 ** (snr_db / 10.0)
    users = tuple(
        UserStats(gamma_bar=snr * float(d) ** (-eta), rate=float(r), weight=float(w))
        for d, r, w in zip(distances, rates, weights)
    )
    return Scenario(users=users, snr_db=snr_db)


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def _partition_seed(mc_seed: int, trial: int, group_size: int) -> int:
    rng = trial_stream(mc_seed, trial, stream=group_size)
    return int(rng.integers(0, 2**63))


def simulate_trials(
    mc: McConfig,
    geometry: GeometryConfig,
    config: SolverConfig = DEFAULT_CONFIG,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial outage matrix (trials, schemes, users) and balance levels
    (trials, schemes).  The heavy lifting behind ``run_trials``; exposed so
    per-trial properties can be asserted directly."""
    specs = tuple(parse_scheme(s) for s in mc.schemes)
    outage = np.empty((mc.trials, len(specs), mc.k))
    levels = np.empty((mc.trials, len(specs)))

    def one(i: int) -> None:
        scen = sample_scenario(geometry, mc.k, mc.r_sum, mc.seed, i)
        for j, spec in enumerate(specs):
            seed_j = (
                _partition_seed(mc.seed, i, spec.group_size)
                if spec.needs_partition_seed
                else None
            )
            try:
                oc = apply_scheme(spec, scen, config, seed_j)
            except (SolverError, ValueError) as exc:
                raise SolverError(f"trial {i}, scheme {spec.name}: {exc}") from exc
            outage[i, j, :] = oc.outage
            levels[i, j] = oc.a0

    workers = _worker_count()
    if workers <= 1:
        for i in range(mc.trials):
            one(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(mc.trials)))
    return outage, levels


def run_trials(
    mc: McConfig,
    geometry: GeometryConfig,
    config: SolverConfig = DEFAULT_CONFIG,
) -> McSummary:
    """Average outage per scheme and user over seeded trials."""
    outage, _ = simulate_trials(mc, geometry, config)
    avg = outage.sum(axis=0) / mc.trials
    names = tuple(parse_scheme(s).name for s in mc.schemes)
    return McSummary(
        schemes=names,
        avg_outage=tuple(tuple(float(x) for x in row) for row in avg),
        trials=mc.trials,
        seed=mc.seed,
    )


def summary_to_csv(summary: McSummary) -> str:
    lines = ["scheme,user,avg_outage,trials,seed"]
    for scheme, row in zip(summary.schemes, summary.avg_outage):
        for user, value in enumerate(row, start=1):
            lines.append(
                f"{scheme},{user},{value:.17g},{summary.trials},{summary.seed}"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# required-SNR search
# ---------------------------------------------------------------------------


def bisect_required_snr(
    avg_outage_db,
    start_db: float,
    target: float,
    tol_db: float = 0.01,
    max_expand: int = 60,
) -> float:
    """Bisect a decreasing outage-vs-SNR curve to the target level.

    The bracket is grown geometrically from ``start_db`` until it straddles
    the target, then halved until its width drops below ``tol_db``.
    """
    if not (0.0 < target < 1.0):
        raise ValueError(f"target outage must lie in (0, 1), got {target}")
    lo = hi = float(start_db)
    step = 6.0
    if avg_outage_db(lo) >= target:
        for _ in range(max_expand):
            hi = lo + step
            if avg_outage_db(hi) < target:
                break
            lo = hi
            step *= 2.0
        else:
            raise SolverError("required-SNR bracket expansion failed upward")
    else:
        for _ in range(max_expand):
            lo = hi - step
            if avg_outage_db(lo) >= target:
                break
            hi = lo
            step *= 2.0
        else:
            raise SolverError("required-SNR bracket expansion failed downward")
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if avg_outage_db(mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def required_snr(
    scheme: str,
    mc: McConfig,
    geometry: GeometryConfig,
    target_outage: float,
    tol_db: float = 0.01,
    config: SolverConfig = DEFAULT_CONFIG,
) -> float:
    """Transmit SNR at which user 1's average outage hits ``target_outage``.

    Every balance level scales exactly as 1/SNR while orders, time shares,
    and power splits stay fixed, so one solve per trial at the reference SNR
    determines the whole outage-vs-SNR curve; bisection probes reuse the
    same trials by construction.
    """
    spec = parse_scheme(scheme)
    a0_ref = np.empty(mc.trials)
    w1 = np.empty(mc.trials)
    for i in range(mc.trials):
        scen = sample_scenario(geometry, mc.k, mc.r_sum, mc.seed, i)
        seed_i = (
            _partition_seed(mc.seed, i, spec.group_size)
            if spec.needs_partition_seed
            else None
        )
        oc = apply_scheme(spec, scen, config, seed_i)
        a0_ref[i] = oc.a0
        w1[i] = scen.user(1).weight

    def avg(snr_db: float) -> float:
        scale = 10.0 ** ((geometry.snr_db - snr_db) / 10.0)
        with np.errstate(over="ignore", invalid="ignore"):
            x = a0_ref * scale / w1
            vals = -np.expm1(-x)
        return float(np.mean(np.where(np.isnan(vals), 1.0, vals)))

    return bisect_required_snr(avg, geometry.snr_db, target_outage, tol_db)


def required_snr_sweep(
    schemes,
    k: int,
    r_sums,
    trials: int,
    seed: int,
    geometry: GeometryConfig,
    target_outage: float = 0.1,
    tol_db: float = 0.05,
    config: SolverConfig = DEFAULT_CONFIG,
) -> list[dict]:
    """Required SNR for every (scheme, r_sum) pair; rows for CSV export."""
    rows = []
    for r_sum in r_sums:
        mc = McConfig(k=k, r_sum=float(r_sum), trials=trials, schemes=tuple(schemes), seed=seed)
        for scheme in schemes:
            snr = required_snr(scheme, mc, geometry, target_outage, tol_db, config)
            rows.append(
                {
                    "scheme": parse_scheme(scheme).name,
                    "r_sum": float(r_sum),
                    "required_snr_db": snr,
                    "target_outage": target_outage,
                    "trials": trials,
                    "seed": seed,
                }
            )
    return rows


def sweep_to_csv(rows) -> str:
    lines = ["scheme,r_sum,required_snr_db,target_outage,trials,seed"]
    for r in rows:
        lines.append(
            f"{r['scheme']},{r['r_sum']:.17g},{r['required_snr_db']:.17g},"
            f"{r['target_outage']:.17g},{r['trials']},{r['seed']}"
        )
    return "\n".join(lines) + "\n"
