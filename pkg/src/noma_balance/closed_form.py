"""Closed-form solution of the max-min weighted-success-probability problem.

For a single NOMA block the optimum is analytic: decode users in ascending
order of ``gamma_bar / weight``, pick the PAFs that equalize every user's
weighted outage exponent at a common balance level ``A``, and every user
ends up with weighted success probability ``exp(-A)``.
"""

from __future__ import annotations

import math
from typing import Sequence

from .model import (
    AllocationResult,
    DecodingOrder,
    PowerAllocation,
    Scenario,
    UserStats,
    exp2,
    exp2m1,
)

__all__ = ["optimal_order", "compute_balance", "optimal_pafs", "solve"]


def optimal_order(scenario: Scenario) -> DecodingOrder:
    """Decode-order permutation sorting users by gamma_bar/weight ascending,
    ties broken by user index."""
    keys = sorted(
        range(1, scenario.k + 1),
        key=lambda u: (scenario.user(u).gamma_bar / scenario.user(u).weight, u),
    )
    return DecodingOrder(perm=tuple(keys))


def _balance_terms(users: Sequence[UserStats]) -> list[float]:
    """Per-stage products alpha_k * A of the equalizing recursion, computed
    backwards so no division by A is needed.  Saturates to +inf on overflow."""
    n = len(users)
    s = [0.0] * n
    tail = 0.0
    for i in range(n - 1, -1, -1):
        u = users[i]
        c = u.weight / u.gamma_bar
        s[i] = (c + tail) * exp2m1(u.rate)
        tail += s[i]
    return s


def compute_balance(scenario: Scenario, order: DecodingOrder) -> float:
    """Equalized balance level A for the given decode order.

    Evaluated as a left-to-right sum with the cumulative-rate factor kept in
    the base-2 exponent domain; overflow saturates to +inf.
    """
    total = 0.0
    rate_prefix = 0.0
    for u in order.perm:
        stats = scenario.user(u)
        if stats.rate <= 0.0:
            raise ValueError("compute_balance requires all rates > 0")
        c = stats.weight / stats.gamma_bar
        factor = exp2(rate_prefix)
        if math.isinf(factor):
            return math.inf
        total += exp2m1(stats.rate) * c * factor
        rate_prefix += stats.rate
    return total


def optimal_pafs(
    scenario: Scenario, order: DecodingOrder, balance_a: float
) -> PowerAllocation:
    """PAFs from the backward equalizing recursion; the vector sums to one."""
    if not math.isfinite(balance_a) or balance_a <= 0.0:
        raise ValueError(f"balance_a must be finite and positive, got {balance_a}")
    users = [scenario.user(u) for u in order.perm]
    for u in users:
        if u.rate <= 0.0:
            raise ValueError("optimal_pafs requires all rates > 0")
    s = _balance_terms(users)
    alpha = [0.0] * scenario.k
    for pos, u in enumerate(order.perm):
        alpha[u - 1] = s[pos] / balance_a
    return PowerAllocation(pafs=tuple(alpha))


def solve(scenario: Scenario) -> AllocationResult:
    """Optimal order, PAFs, and balanced outage for one NOMA block.

    Zero-rate users are decoded first with zero power and zero outage; the
    remaining users share the whole power budget at the equalized level A,
    so each has weighted success probability exp(-A) and outage
    1 - exp(-A / weight).  If A overflows, the allocation is reported with
    outage one for every positive-rate user.
    """
    k = scenario.k
    zero = [u for u in range(1, k + 1) if scenario.user(u).rate == 0.0]
    live = [u for u in range(1, k + 1) if scenario.user(u).rate > 0.0]

    outage = [0.0] * k
    wsp = [1.0] * k
    alpha = [0.0] * k

    if not live:
        perm = tuple(zero)
        return AllocationResult(
            order=DecodingOrder(perm=perm),
            pafs=PowerAllocation(pafs=tuple(alpha)),
            balance_a=0.0,
            thresholds=(0.0,) * k,
            outage=tuple(outage),
            wsp=tuple(wsp),
        )

    live_sorted = sorted(
        live, key=lambda u: (scenario.user(u).gamma_bar / scenario.user(u).weight, u)
    )
    perm = tuple(zero + live_sorted)
    sub = [scenario.user(u) for u in live_sorted]

    a = compute_balance(
        Scenario(users=tuple(sub)), DecodingOrder(perm=tuple(range(1, len(sub) + 1)))
    )

    thresholds = [0.0] * len(zero)
    if math.isinf(a):
        # undeliverable rate demand: report the uniform simplex point
        share = 1.0 / len(live)
        for u in live:
            alpha[u - 1] = share
            outage[u - 1] = 1.0
            wsp[u - 1] = 0.0
        thresholds += [math.inf] * len(live)
    else:
        s = _balance_terms(sub)
        for pos, u in enumerate(live_sorted):
            stats = scenario.user(u)
            alpha[u - 1] = s[pos] / a
            thresholds.append(a * stats.gamma_bar / stats.weight)
            outage[u - 1] = -math.expm1(-a / stats.weight)
            wsp[u - 1] = math.exp(-a)

    return AllocationResult(
        order=DecodingOrder(perm=perm),
        pafs=PowerAllocation(pafs=tuple(alpha)),
        balance_a=a,
        thresholds=tuple(thresholds),
        outage=tuple(outage),
        wsp=tuple(wsp),
    )
