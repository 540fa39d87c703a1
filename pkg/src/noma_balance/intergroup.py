"""Inter-group power and time-resource allocation.

Each group behaves like a small NOMA block whose power demand, as a
function of its time share ``t``, is the strictly convex decreasing curve

    f(t) = t * [ sum_l c_l * (y_l - y_{l-1}) ],   y_l = 2**(S_l / t),

with ``c_l = weight/gamma_bar`` of the group's l-th user (sorted so that
``c`` is non-increasing) and ``S_l`` the cumulative rate.  Balancing all
groups at a common level ``A0 = sum_g f_g(t_g)`` with power shares
``p_g = f_g(t_g)/A0`` reduces time allocation to a separable convex
program, solved by bisection on the Lagrange multiplier with a safeguarded
Newton root-find per group.  TDMA is the special case of single-user
groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import closed_form
from .grouping import GroupPartition
from .model import AllocationResult, Scenario, UserStats

__all__ = [
    "SolverConfig",
    "SolverError",
    "GroupPlan",
    "f_g",
    "f_g_prime",
    "f_g_second",
    "inner_solve",
    "continuous_allocate",
    "equal_time_allocate",
    "discrete_allocate",
    "tdma_plan",
    "balance_level",
]

_LN2 = math.log(2.0)
_EXP_ARG_MAX = 709.0
# bracket width below this many ulps means the root is pinned as tightly as
# binary64 allows, even if the residual tolerance is out of reach
_WIDTH_EPS = 8 * 2.220446049250313e-16


class SolverError(RuntimeError):
    """Raised when an iterative solve exhausts its iteration budget."""


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and caps for the resource-allocation solvers.

    ``discrete_t`` is the number of sub-slots each original timeslot can be
    divided into (0 selects continuous allocation).
    """

    eps_outer: float = 1e-10
    eps_inner: float = 1e-12
    max_iter_outer: int = 200
    max_iter_inner: int = 100
    discrete_t: int = 0

    def __post_init__(self) -> None:
        if not (self.eps_outer > 0 and self.eps_inner > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter_outer < 1 or self.max_iter_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.discrete_t < 0:
            raise ValueError("discrete_t must be >= 0")


DEFAULT_CONFIG = SolverConfig()


# ---------------------------------------------------------------------------
# demand curves
# ---------------------------------------------------------------------------


def _sorted_positive(users: Sequence[UserStats]) -> list[UserStats]:
    live = [u for u in users if u.rate > 0.0]
    live.sort(key=lambda u: u.gamma_bar / u.weight)
    return live


class _Curve:
    """One group's demand curve in Abel-summed form.

    ``d`` holds the coefficient differences (non-negative for a sorted
    group), ``s`` the cumulative rates; saturating exponentials keep every
    value +inf instead of raising on overflow.
    """

    __slots__ = ("d", "s", "c1")

    def __init__(self, users: Sequence[UserStats]):
        c = [u.weight / u.gamma_bar for u in users]
        self.c1 = c[0]
        self.d = [c[i] - c[i + 1] for i in range(len(c) - 1)] + [c[-1]]
        s: list[float] = []
        acc = 0.0
        for u in users:
            acc += u.rate
            s.append(acc)
        self.s = s

    def f(self, t: float) -> float:
        total = -self.c1
        for dl, sl in zip(self.d, self.s):
            if dl != 0.0:
                x = sl * _LN2 / t
                total += dl * (math.exp(x) if x <= _EXP_ARG_MAX else math.inf)
        return t * total

    def fp(self, t: float) -> float:
        total = -self.c1
        for dl, sl in zip(self.d, self.s):
            if dl != 0.0:
                x = sl * _LN2 / t
                y = math.exp(x) if x <= _EXP_ARG_MAX else math.inf
                total -= dl * (y * (x - 1.0))
        return total

    def fp_fpp(self, t: float) -> tuple[float, float]:
        slope = -self.c1
        curv = 0.0
        for dl, sl in zip(self.d, self.s):
            if dl != 0.0:
                x = sl * _LN2 / t
                y = math.exp(x) if x <= _EXP_ARG_MAX else math.inf
                slope -= dl * (y * (x - 1.0))
                curv += dl * y * x * x
        return slope, curv / t


def _validate_group(users: Sequence[UserStats], t: float) -> None:
    if t <= 0.0:
        raise ValueError(f"time share must be > 0, got {t}")
    if not users:
        raise ValueError("group must contain at least one user")
    for u in users:
        if u.rate <= 0.0:
            raise ValueError("demand curves require all rates > 0")


def f_g(group: Sequence[UserStats], t: float) -> float:
    """Group power demand at time share ``t`` (users sorted by
    gamma_bar/weight ascending).  Strictly positive, strictly decreasing."""
    _validate_group(group, t)
    return _Curve(group).f(t)


def f_g_prime(group: Sequence[UserStats], t: float) -> float:
    """First derivative of ``f_g``; always negative, increasing to 0."""
    _validate_group(group, t)
    return _Curve(group).fp(t)


def f_g_second(group: Sequence[UserStats], t: float) -> float:
    """Second derivative of ``f_g``; strictly positive."""
    _validate_group(group, t)
    return _Curve(group).fp_fpp(t)[1]


# ---------------------------------------------------------------------------
# stationarity root-find and multiplier bisection
# ---------------------------------------------------------------------------


@dataclass
class _SolveStats:
    outer_iters: int = 0
    inner_evals: int = 0


def _solve_root(
    curve: _Curve,
    lam: float,
    lo: float,
    hi: float,
    config: SolverConfig,
    stats: _SolveStats,
) -> float:
    """Root of ``curve.fp(t) + lam = 0`` by bracketed Newton.

    The residual is strictly increasing in ``t``; ``lo``/``hi`` seed the
    bracket and are grown or shrunk geometrically until it changes sign.
    Converges on the residual tolerance or, failing that, on a bracket
    collapsed to machine precision.
    """
    for _ in range(config.max_iter_inner):
        stats.inner_evals += 1
        if curve.fp(hi) + lam >= 0.0:
            break
        hi *= 2.0
    else:
        raise SolverError(f"no upper bracket for multiplier {lam}")
    if lo > hi:
        lo = hi
    for _ in range(config.max_iter_inner):
        stats.inner_evals += 1
        if curve.fp(lo) + lam < 0.0:
            break
        lo *= 0.5
    else:
        raise SolverError(f"no lower bracket for multiplier {lam}")

    t = 0.5 * (lo + hi)
    for _ in range(config.max_iter_inner):
        stats.inner_evals += 1
        slope, curv = curve.fp_fpp(t)
        r = slope + lam
        if abs(r) <= config.eps_inner:
            return t
        if r >= 0.0:
            hi = t
        else:
            lo = t
        if hi - lo <= _WIDTH_EPS * hi:
            return t
        if curv > 0.0 and math.isfinite(r) and math.isfinite(curv):
            t_next = t - r / curv
        else:
            t_next = 0.5 * (lo + hi)
        t = t_next if lo < t_next < hi else 0.5 * (lo + hi)
    raise SolverError(
        f"stationarity solve hit the iteration cap; bracket=[{lo}, {hi}]"
    )


def _stationary_times(
    curves: Sequence[_Curve],
    lam: float,
    lo: Sequence[float],
    hi: Sequence[float],
    config: SolverConfig,
    stats: _SolveStats,
) -> list[float]:
    return [
        _solve_root(c, lam, lo_g, hi_g, config, stats)
        for c, lo_g, hi_g in zip(curves, lo, hi)
    ]


def _optimize_times(
    curves: Sequence[_Curve], config: SolverConfig
) -> tuple[list[float], float, _SolveStats]:
    """Bisection on the multiplier until the unit time budget binds.

    Maintains sum t(lam_hi) <= 1 <= sum t(lam_lo) and returns the
    feasible-side times with the final multiplier.
    """
    stats = _SolveStats()
    g = len(curves)
    t0 = 1.0 / g
    slopes = [c.fp(t0) for c in curves]
    stats.inner_evals += g
    lam_hi = max(-v for v in slopes)
    if not math.isfinite(lam_hi) or lam_hi <= 0.0:
        raise SolverError(f"demand slope unusable at equal shares: {lam_hi}")

    seed = [t0] * g
    t_hi = _stationary_times(curves, lam_hi, seed, seed, config, stats)

    lam_lo, t_lo = lam_hi, t_hi
    for _ in range(config.max_iter_outer):
        if sum(t_lo) > 1.0:
            break
        lam_lo *= 0.5
        t_lo = _stationary_times(
            curves, lam_lo, t_lo, [max(x, 1.0) for x in t_lo], config, stats
        )
    else:
        raise SolverError("could not bracket the time-budget multiplier from below")

    for _ in range(config.max_iter_outer):
        if lam_hi - lam_lo <= config.eps_outer:
            break
        stats.outer_iters += 1
        lam = 0.5 * (lam_hi + lam_lo)
        t = _stationary_times(curves, lam, t_hi, t_lo, config, stats)
        if sum(t) <= 1.0:
            lam_hi, t_hi = lam, t
        else:
            lam_lo, t_lo = lam, t
    else:
        raise SolverError("multiplier bisection hit the iteration cap")

    return t_hi, lam_hi, stats


# ---------------------------------------------------------------------------
# plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupPlan:
    """Complete inter-group allocation.

    ``t`` and ``p`` are per-group time and power shares; ``inner[i]`` is the
    solved allocation of group ``i`` with members indexed by their position
    in ``partition.groups[i]``.  Diagnostic fields (multiplier, iteration
    counts) are not part of the serialized form.
    """

    partition: GroupPartition
    t: tuple[float, ...]
    p: tuple[float, ...]
    a0: float
    inner: tuple[AllocationResult, ...]
    lambda_: float | None = None
    outer_iters: int = 0
    inner_evals: int = 0

    def user_outage(self) -> tuple[float, ...]:
        """Per-user outage probabilities indexed by (padded) user index."""
        out = [0.0] * self.partition.n_users
        for group, res in zip(self.partition.groups, self.inner):
            for pos, u in enumerate(group):
                out[u - 1] = res.outage[pos]
        return tuple(out)

    def user_wsp(self) -> tuple[float, ...]:
        out = [1.0] * self.partition.n_users
        for group, res in zip(self.partition.groups, self.inner):
            for pos, u in enumerate(group):
                out[u - 1] = res.wsp[pos]
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "partition": self.partition.to_list(),
            "t": list(self.t),
            "p": list(self.p),
            "a0": self.a0,
            "per_group": [res.to_dict() for res in self.inner],
        }


def inner_solve(
    group: Sequence[UserStats],
    lam: float,
    eps_inner: float = DEFAULT_CONFIG.eps_inner,
    max_iter: int = DEFAULT_CONFIG.max_iter_inner,
) -> float:
    """Unique root of f_g'(t) + lam = 0 for one group (lam > 0)."""
    _validate_group(group, 1.0)
    if lam <= 0.0:
        raise ValueError(f"multiplier must be > 0, got {lam}")
    config = SolverConfig(eps_inner=eps_inner, max_iter_inner=max_iter)
    return _solve_root(_Curve(group), lam, 1.0, 1.0, config, _SolveStats())


def _prepare_groups(
    partition: GroupPartition, scenario: Scenario
) -> list[list[UserStats]] | None:
    """Sorted positive-rate members per group; None when every group is
    pure zero-rate (degenerate, demand-free plan)."""
    if partition.n_users != scenario.k:
        raise ValueError(
            f"partition covers {partition.n_users} users, scenario has {scenario.k}"
        )
    sorted_groups = []
    empties = 0
    for g in partition.groups:
        live = _sorted_positive([scenario.user(u) for u in g])
        if not live:
            empties += 1
        sorted_groups.append(live)
    if empties == len(sorted_groups):
        return None
    if empties:
        raise ValueError("every group needs at least one positive-rate user")
    return sorted_groups


def _inner_results(
    partition: GroupPartition,
    scenario: Scenario,
    t: Sequence[float],
    p: Sequence[float],
) -> tuple[AllocationResult, ...]:
    """Per-group closed-form solves on the effective scenarios (mean SNR
    scaled by p/t, rates by 1/t)."""
    results = []
    for group, tg, pg in zip(partition.groups, t, p):
        boost = pg / tg
        users = tuple(
            UserStats(
                gamma_bar=scenario.user(u).gamma_bar * boost,
                rate=scenario.user(u).rate / tg,
                weight=scenario.user(u).weight,
            )
            for u in group
        )
        results.append(closed_form.solve(Scenario(users=users, snr_db=scenario.snr_db)))
    return tuple(results)


def _exact_unit_shares(raw: Sequence[float]) -> list[float]:
    """Normalize positive shares so a plain left-to-right sum is exactly 1."""
    total = sum(raw)
    shares = [x / total for x in raw]
    shares[-1] = 1.0 - sum(shares[:-1])
    return shares


def _degenerate_plan(partition: GroupPartition, scenario: Scenario) -> GroupPlan:
    g = partition.g
    t = [1.0 / g] * g
    p = _exact_unit_shares([1.0] * g)
    inner = _inner_results(partition, scenario, t, p)
    return GroupPlan(partition=partition, t=tuple(t), p=tuple(p), a0=0.0, inner=inner)


def _assemble(
    partition: GroupPartition,
    scenario: Scenario,
    groups: list[list[UserStats]],
    t: list[float],
    lam: float | None = None,
    stats: _SolveStats | None = None,
) -> GroupPlan:
    fs = [_Curve(g).f(tg) for g, tg in zip(groups, t)]
    a0 = sum(fs)
    if not math.isfinite(a0):
        raise SolverError(f"balance level overflowed at t={t}")
    p = _exact_unit_shares(fs)
    inner = _inner_results(partition, scenario, t, p)
    return GroupPlan(
        partition=partition,
        t=tuple(t),
        p=tuple(p),
        a0=a0,
        inner=inner,
        lambda_=lam,
        outer_iters=stats.outer_iters if stats else 0,
        inner_evals=stats.inner_evals if stats else 0,
    )


def continuous_allocate(
    partition: GroupPartition,
    scenario: Scenario,
    config: SolverConfig = DEFAULT_CONFIG,
) -> GroupPlan:
    """Jointly optimal time and power shares (the "PARA" mode).

    The bisection terminates on the feasible side (sum t <= 1); scaling the
    times up to an exact unit sum only lowers every demand curve, so the
    returned plan stays optimal to within the configured tolerances.
    """
    groups = _prepare_groups(partition, scenario)
    if groups is None:
        return _degenerate_plan(partition, scenario)
    if partition.g == 1:
        return _assemble(partition, scenario, groups, [1.0])
    curves = [_Curve(g) for g in groups]
    t_raw, lam, stats = _optimize_times(curves, config)
    t = _exact_unit_shares(t_raw)
    return _assemble(partition, scenario, groups, t, lam, stats)


def equal_time_allocate(
    partition: GroupPartition,
    scenario: Scenario,
    config: SolverConfig = DEFAULT_CONFIG,
) -> GroupPlan:
    """Equal time shares, optimal power split only (the "PA" mode)."""
    groups = _prepare_groups(partition, scenario)
    if groups is None:
        return _degenerate_plan(partition, scenario)
    t = [1.0 / partition.g] * partition.g
    return _assemble(partition, scenario, groups, t)


def discrete_allocate(
    partition: GroupPartition,
    scenario: Scenario,
    units_per_slot: int,
    config: SolverConfig = DEFAULT_CONFIG,
) -> GroupPlan:
    """Integer time allocation: G*units_per_slot equal sub-slots, each group
    getting at least one.

    Spare units go one at a time to the group whose demand drops the most;
    the marginal drops shrink as a group gains units (convexity), which
    makes the greedy assignment exactly optimal among integer allocations.
    """
    if units_per_slot < 1:
        raise ValueError(f"units_per_slot must be >= 1, got {units_per_slot}")
    groups = _prepare_groups(partition, scenario)
    if groups is None:
        return _degenerate_plan(partition, scenario)
    g = partition.g
    units = g * units_per_slot
    if units < g:
        raise ValueError("not enough sub-slots to give every group one")

    max_units = units - (g - 1)
    curves = [_Curve(grp) for grp in groups]
    table = [[c.f(n / units) for n in range(1, max_units + 1)] for c in curves]

    def gain(gi: int, n: int) -> float:
        # improvement when group gi goes from n to n+1 units
        prev, nxt = table[gi][n - 1], table[gi][n]
        if math.isinf(prev):
            return math.inf
        return prev - nxt

    n_units = [1] * g
    for _ in range(units - g):
        best = max(range(g), key=lambda gi: gain(gi, n_units[gi]))
        n_units[best] += 1

    t = [n / units for n in n_units]
    fs = [table[gi][n_units[gi] - 1] for gi in range(g)]
    a0 = sum(fs)
    if not math.isfinite(a0):
        raise SolverError("discrete allocation cannot make the demand finite")
    p = _exact_unit_shares(fs)
    inner = _inner_results(partition, scenario, t, p)
    return GroupPlan(partition=partition, t=tuple(t), p=tuple(p), a0=a0, inner=inner)


def tdma_plan(
    scenario: Scenario,
    mode: str = "para",
    config: SolverConfig = DEFAULT_CONFIG,
) -> GroupPlan:
    """Orthogonal baseline: every user is its own group.

    ``mode`` is "pa", "para", or "discrete" (sub-slot count taken from
    ``config.discrete_t``).
    """
    partition = GroupPartition(groups=tuple((u,) for u in range(1, scenario.k + 1)), l=1)
    if mode == "pa":
        return equal_time_allocate(partition, scenario, config)
    if mode == "para":
        return continuous_allocate(partition, scenario, config)
    if mode == "discrete":
        if config.discrete_t < 1:
            raise ValueError("discrete mode needs config.discrete_t >= 1")
        return discrete_allocate(partition, scenario, config.discrete_t, config)
    raise ValueError(f"unknown mode {mode!r}")


def balance_level(
    partition: GroupPartition,
    scenario: Scenario,
    allocation_mode: str = "para",
    config: SolverConfig | None = None,
    _memo: dict | None = None,
) -> float:
    """Global balance level of a partition without building the full plan.

    Used to score candidate partitions; "pa" scores are memoizable per
    group because equal time shares make them independent.
    """
    cfg = config or DEFAULT_CONFIG
    if allocation_mode == "pa":
        if all(u.rate == 0.0 for u in scenario.users):
            return 0.0
        share = 1.0 / partition.g
        total = 0.0
        for key in partition.groups:
            val = None if _memo is None else _memo.get(key)
            if val is None:
                live = _sorted_positive([scenario.user(u) for u in key])
                if not live:
                    raise ValueError("every group needs at least one positive-rate user")
                val = _Curve(live).f(share)
                if _memo is not None:
                    _memo[key] = val
            total += val
        return total
    if allocation_mode == "para":
        groups = _prepare_groups(partition, scenario)
        if groups is None:
            return 0.0
        if partition.g == 1:
            return _Curve(groups[0]).f(1.0)
        curves = [_Curve(g) for g in groups]
        t_raw, _, _ = _optimize_times(curves, cfg)
        t = _exact_unit_shares(t_raw)
        return sum(_Curve(g).f(tg) for g, tg in zip(groups, t))
    raise ValueError(f"unknown allocation_mode {allocation_mode!r}")
