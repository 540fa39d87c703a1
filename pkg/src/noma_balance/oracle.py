"""Brute-force verification: exhaustive search over decoding orders and a
simplex lattice of power splits.

The lattice enumerates every way of spending ``1/resolution`` power units
across the users, so candidate PAF vectors sum to one exactly and the
search can only approach the analytical optimum from below.  Everything is
scored through the exact evaluator semantics, which makes this module the
independent check on the closed-form solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .model import DecodingOrder, PowerAllocation, Scenario, exp2m1

__all__ = ["GridSpec", "GridResult", "grid_search", "swap_test"]

_MAX_USERS = 4


@dataclass(frozen=True)
class GridSpec:
    """Search grid: simplex step size and the orders to scan (None = all)."""

    resolution: float = 1.0 / 200.0
    order_set: tuple[DecodingOrder, ...] | None = None
    max_evals: int = 5_000_000

    def __post_init__(self) -> None:
        if not (0.0 < self.resolution <= 1.0):
            raise ValueError(f"resolution must be in (0, 1], got {self.resolution}")
        steps = round(1.0 / self.resolution)
        if abs(steps * self.resolution - 1.0) > 1e-9:
            raise ValueError("resolution must divide 1 into an integer step count")

    @property
    def steps(self) -> int:
        return round(1.0 / self.resolution)


@dataclass(frozen=True)
class GridResult:
    order: DecodingOrder
    pafs: PowerAllocation
    min_wsp: float


def _compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer vectors of length ``parts`` summing to
    ``total``, in lexicographic order."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total + 1):
        tail = _compositions(total - first, parts - 1)
        head = np.full((tail.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


def _min_wsp_over_lattice(
    scenario: Scenario, perm: tuple[int, ...], counts: np.ndarray, steps: int
) -> tuple[np.ndarray, np.ndarray]:
    """Min weighted success probability of every lattice point under one
    decoding order.  Returns (min_wsp per point, PAF matrix in decode order)."""
    m, k = counts.shape
    alpha = counts / steps
    suffix = (steps - np.cumsum(counts, axis=1)) / steps

    cum_threshold = np.zeros(m)
    min_wsp = np.ones(m)
    for i, u in enumerate(perm):
        stats = scenario.user(u)
        if stats.rate == 0.0:
            th = np.zeros(m)
        else:
            need = exp2m1(stats.rate)
            denom = alpha[:, i] - need * suffix[:, i]
            with np.errstate(divide="ignore", invalid="ignore"):
                th = np.where(denom > 0.0, need / denom, np.inf)
        cum_threshold = np.maximum(cum_threshold, th)
        with np.errstate(over="ignore"):
            wsp = np.exp(-(stats.weight / stats.gamma_bar) * cum_threshold)
        min_wsp = np.minimum(min_wsp, wsp)
    return min_wsp, alpha


def grid_search(scenario: Scenario, grid: GridSpec = GridSpec()) -> GridResult:
    """Best (order, PAF, min-WSP) over the full lattice.

    Deterministic tie-breaking: the first order in lexicographic permutation
    order and the first lattice point in lexicographic order win.
    """
    k = scenario.k
    if k > _MAX_USERS:
        raise ValueError(f"grid search supports at most {_MAX_USERS} users, got {k}")
    if grid.order_set is None:
        orders = [DecodingOrder(perm=p) for p in permutations(range(1, k + 1))]
    else:
        orders = list(grid.order_set)
        for o in orders:
            if o.k != k:
                raise ValueError("order_set entry does not match scenario size")
    steps = grid.steps
    n_points = math.comb(steps + k - 1, k - 1)
    if len(orders) * n_points > grid.max_evals:
        raise ValueError(
            f"{len(orders) * n_points} grid evaluations exceed max_evals="
            f"{grid.max_evals}; coarsen the resolution"
        )

    counts = _compositions(steps, k)
    best_wsp = -1.0
    best_order: DecodingOrder | None = None
    best_alpha: np.ndarray | None = None
    for order in orders:
        min_wsp, alpha = _min_wsp_over_lattice(scenario, order.perm, counts, steps)
        idx = int(np.argmax(min_wsp))
        if float(min_wsp[idx]) > best_wsp:
            best_wsp = float(min_wsp[idx])
            best_order = order
            best_alpha = alpha[idx]
    assert best_order is not None and best_alpha is not None

    by_user = [0.0] * k
    for i, u in enumerate(best_order.perm):
        by_user[u - 1] = float(best_alpha[i])
    return GridResult(
        order=best_order,
        pafs=PowerAllocation(pafs=tuple(by_user)),
        min_wsp=best_wsp,
    )


def swap_test(
    scenario: Scenario,
    order: DecodingOrder,
    m: int,
    grid: GridSpec = GridSpec(resolution=1.0 / 100.0),
    tol: float | None = None,
) -> bool:
    """Check the adjacent-swap improvement property at position ``m``.

    When the users at decode positions m and m+1 violate the sorted
    gamma_bar/weight order, swapping them must not lower the best
    grid min-WSP (within ``tol``, defaulting to one lattice step).
    Vacuously true for non-violating pairs.
    """
    k = scenario.k
    if not (1 <= m < k):
        raise ValueError(f"position must satisfy 1 <= m < {k}, got {m}")
    a, b = order.perm[m - 1], order.perm[m]
    ua, ub = scenario.user(a), scenario.user(b)
    if ua.gamma_bar / ua.weight <= ub.gamma_bar / ub.weight:
        return True
    swapped_perm = list(order.perm)
    swapped_perm[m - 1], swapped_perm[m] = swapped_perm[m], swapped_perm[m - 1]
    swapped = DecodingOrder(perm=tuple(swapped_perm))

    margin = grid.resolution if tol is None else tol
    base = grid_search(
        scenario, GridSpec(grid.resolution, order_set=(order,), max_evals=grid.max_evals)
    )
    other = grid_search(
        scenario, GridSpec(grid.resolution, order_set=(swapped,), max_evals=grid.max_evals)
    )
    return other.min_wsp >= base.min_wsp - margin
