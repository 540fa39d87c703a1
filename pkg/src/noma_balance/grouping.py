"""Partitioning users into equal-size groups.

Groups are served orthogonally (one group per channel slice) while users
inside a group share their slice non-orthogonally.  When the group size
does not divide the user count, zero-rate virtual users pad the set; a
zero-rate user demands no power and never sees an outage, so padding is
exact rather than approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .model import Scenario, UserStats

if TYPE_CHECKING:  # pragma: no cover
    from .intergroup import SolverConfig

__all__ = [
    "GroupPartition",
    "pad_virtual_users",
    "random_partition",
    "enumerate_partitions",
    "partition_count",
    "optimal_partition",
]

ENUMERATION_CAP = 1_000_000


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint cover of users 1..G*l into G groups of l members each.

    Canonical form: members ascending inside each group, groups ordered by
    their smallest member.
    """

    groups: tuple[tuple[int, ...], ...]
    l: int
    virtual_count: int = 0

    def __post_init__(self) -> None:
        groups = tuple(tuple(int(u) for u in g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if self.l < 1:
            raise ValueError("group size must be >= 1")
        seen: list[int] = []
        for g in groups:
            if len(g) != self.l:
                raise ValueError(f"group {g} does not have size {self.l}")
            if list(g) != sorted(g):
                raise ValueError(f"group members must be ascending, got {g}")
            seen.extend(g)
        n = len(groups) * self.l
        if sorted(seen) != list(range(1, n + 1)):
            raise ValueError("groups must partition 1..G*l")
        firsts = [g[0] for g in groups]
        if firsts != sorted(firsts):
            raise ValueError("groups must be ordered by smallest member")

    @property
    def g(self) -> int:
        return len(self.groups)

    @property
    def n_users(self) -> int:
        return self.g * self.l

    def to_list(self) -> list[list[int]]:
        return [list(g) for g in self.groups]

    @classmethod
    def from_groups(
        cls, groups: Iterator[tuple[int, ...]], l: int, virtual_count: int = 0
    ) -> "GroupPartition":
        canonical = tuple(sorted((tuple(sorted(g)) for g in groups), key=lambda g: g[0]))
        return cls(groups=canonical, l=l, virtual_count=virtual_count)


def pad_virtual_users(scenario: Scenario, l: int) -> tuple[Scenario, int]:
    """Append zero-rate virtual users until the user count is a multiple of l.

    Virtual users get gamma_bar = 1 and weight = 1; with zero rate they draw
    no power and contribute nothing to any balance level, so every real
    user's outcome is unchanged.
    """
    if l < 1:
        raise ValueError("group size must be >= 1")
    k = scenario.k
    pad = (-k) % l
    if pad == 0:
        return scenario, 0
    users = scenario.users + tuple(
        UserStats(gamma_bar=1.0, rate=0.0, weight=1.0) for _ in range(pad)
    )
    return Scenario(users=users, snr_db=scenario.snr_db), pad


def random_partition(k: int, l: int, seed: int, virtual_count: int = 0) -> GroupPartition:
    """Uniformly random equal-size partition via a seeded shuffle.

    A uniform permutation chunked into consecutive blocks hits every
    unordered partition with equal probability.  Deterministic for a seed.
    """
    if k % l != 0:
        raise ValueError(f"group size {l} does not divide user count {k}; pad first")
    rng = np.random.Generator(np.random.Philox(key=seed))
    order = np.arange(1, k + 1)
    rng.shuffle(order)
    groups = (tuple(order[i : i + l].tolist()) for i in range(0, k, l))
    return GroupPartition.from_groups(groups, l=l, virtual_count=virtual_count)


def partition_count(k: int, l: int) -> int:
    """Number of ways to split k labelled users into unordered groups of l."""
    if k % l != 0:
        raise ValueError(f"group size {l} does not divide user count {k}")
    g = k // l
    return math.factorial(k) // (math.factorial(l) ** g * math.factorial(g))


def enumerate_partitions(
    k: int, l: int, virtual_count: int = 0
) -> Iterator[GroupPartition]:
    """Yield every equal-size partition exactly once, in canonical order.

    The smallest unplaced user anchors each new group, so no partition is
    produced twice and the stream is deterministic.
    """
    if k % l != 0:
        raise ValueError(f"group size {l} does not divide user count {k}; pad first")

    def rec(remaining: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
        if not remaining:
            yield ()
            return
        first, rest = remaining[0], remaining[1:]
        for mates in combinations(rest, l - 1):
            group = (first, *mates)
            chosen = set(mates)
            left = tuple(u for u in rest if u not in chosen)
            for tail in rec(left):
                yield (group, *tail)

    for groups in rec(tuple(range(1, k + 1))):
        yield GroupPartition(groups=groups, l=l, virtual_count=virtual_count)


@lru_cache(maxsize=8)
def _partition_table(k: int, l: int) -> tuple[GroupPartition, ...]:
    return tuple(enumerate_partitions(k, l))


def optimal_partition(
    scenario: Scenario,
    l: int,
    allocation_mode: str = "para",
    config: "SolverConfig | None" = None,
    cap: int = ENUMERATION_CAP,
    virtual_count: int = 0,
) -> tuple[GroupPartition, float]:
    """Exhaustively search all partitions for the lowest global balance level.

    ``allocation_mode`` selects how each candidate is scored: "pa" keeps
    equal time shares, "para" optimizes them.  The scenario must already be
    padded to a multiple of ``l``.  Ties go to the earliest candidate in
    enumeration order.
    """
    from .intergroup import balance_level

    k = scenario.k
    if k % l != 0:
        raise ValueError(f"group size {l} does not divide user count {k}; pad first")
    if allocation_mode not in ("pa", "para"):
        raise ValueError(f"allocation_mode must be 'pa' or 'para', got {allocation_mode!r}")
    n = partition_count(k, l)
    if n > cap:
        raise ValueError(
            f"{n} candidate partitions exceed the cap of {cap}; use random_partition"
        )

    # small spaces are cached; large ones stream to keep memory flat
    candidates = _partition_table(k, l) if n <= 20_000 else enumerate_partitions(k, l)
    memo: dict[tuple[int, ...], float] = {}
    best: GroupPartition | None = None
    best_a0 = math.inf
    for part in candidates:
        a0 = balance_level(part, scenario, allocation_mode, config, _memo=memo)
        if a0 < best_a0:
            best, best_a0 = part, a0
    assert best is not None
    if virtual_count:
        best = GroupPartition(groups=best.groups, l=best.l, virtual_count=virtual_count)
    return best, best_a0
