import math

import numpy as np
import pytest

from noma_balance import (
    GroupPartition,
    Scenario,
    UserStats,
    enumerate_partitions,
    optimal_partition,
    pad_virtual_users,
    partition_count,
    random_partition,
    solve,
)
from noma_balance.intergroup import balance_level

from helpers import random_scenario


class TestPadding:
    @pytest.mark.parametrize("k,l,expected", [(5, 2, 1), (6, 3, 0), (4, 3, 2)])
    def test_pad_counts(self, k, l, expected):
        rng = np.random.default_rng(41)
        padded, virtual = pad_virtual_users(random_scenario(rng, k), l)
        assert virtual == expected
        assert padded.k == k + expected
        assert padded.k % l == 0

    def test_virtual_users_are_zero_rate(self):
        rng = np.random.default_rng(42)
        padded, virtual = pad_virtual_users(random_scenario(rng, 4), 3)
        for u in padded.users[-virtual:]:
            assert u.rate == 0.0
            assert u.gamma_bar == 1.0
            assert u.weight == 1.0

    def test_virtual_users_never_change_real_outage(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            k = int(rng.integers(1, 6))
            s = random_scenario(rng, k)
            padded, virtual = pad_virtual_users(s, int(rng.integers(2, 5)))
            if virtual == 0:
                continue
            ref = solve(s)
            full = solve(padded)
            for u in range(k):
                assert abs(full.outage[u] - ref.outage[u]) < 1e-12


class TestRandomPartition:
    def test_structure(self):
        p = random_partition(6, 2, seed=9)
        assert p.g == 3
        assert sorted(u for g in p.groups for u in g) == list(range(1, 7))
        for g in p.groups:
            assert len(g) == 2 and g[0] < g[1]
        firsts = [g[0] for g in p.groups]
        assert firsts == sorted(firsts)

    def test_single_group(self):
        for seed in range(5):
            assert random_partition(4, 4, seed).groups == ((1, 2, 3, 4),)

    def test_deterministic(self):
        assert random_partition(8, 2, seed=123) == random_partition(8, 2, seed=123)

    def test_rejects_indivisible(self):
        with pytest.raises(ValueError):
            random_partition(5, 2, seed=0)

    def test_covers_all_partitions(self):
        seen = {random_partition(4, 2, seed=s).groups for s in range(200)}
        assert len(seen) == 3


class TestEnumeration:
    @pytest.mark.parametrize("k,l,expected", [(4, 2, 3), (6, 3, 10), (2, 2, 1)])
    def test_counts(self, k, l, expected):
        parts = list(enumerate_partitions(k, l))
        assert len(parts) == expected
        assert partition_count(k, l) == expected
        assert len({p.groups for p in parts}) == expected

    def test_count_formula_up_to_eight(self):
        for k in range(2, 9):
            for l in range(1, k + 1):
                if k % l:
                    continue
                assert len(list(enumerate_partitions(k, l))) == partition_count(k, l)

    def test_canonical_form(self):
        for p in enumerate_partitions(6, 2):
            for g in p.groups:
                assert list(g) == sorted(g)
            firsts = [g[0] for g in p.groups]
            assert firsts == sorted(firsts)

    def test_partition_validation(self):
        with pytest.raises(ValueError):
            GroupPartition(groups=((1, 2), (2, 3)), l=2)
        with pytest.raises(ValueError):
            GroupPartition(groups=((2, 1), (3, 4)), l=2)
        with pytest.raises(ValueError):
            GroupPartition(groups=((3, 4), (1, 2)), l=2)

    def test_serialization(self):
        p = random_partition(4, 2, seed=5)
        assert p.to_list() == [list(g) for g in p.groups]


class TestOptimalPartition:
    def test_trivial_single_partition(self):
        rng = np.random.default_rng(44)
        s = random_scenario(rng, 2)
        part, a0 = optimal_partition(s, 2, "para")
        assert part.groups == ((1, 2),)
        assert a0 > 0

    def test_identical_users_tie_to_first(self):
        users = tuple(UserStats(2.0, 0.5, 0.5) for _ in range(4))
        s = Scenario(users=users)
        part, _ = optimal_partition(s, 2, "pa")
        assert part.groups == ((1, 2), (3, 4))

    @pytest.mark.parametrize("mode", ["pa", "para"])
    def test_beats_every_random_partition(self, mode):
        rng = np.random.default_rng(45)
        s = random_scenario(rng, 4)
        _, best_a0 = optimal_partition(s, 2, mode)
        for seed in range(1000):
            p = random_partition(4, 2, seed)
            assert best_a0 <= balance_level(p, s, mode) + 1e-12

    def test_cap_guard_mentions_fallback(self):
        rng = np.random.default_rng(46)
        s = random_scenario(rng, 12)
        with pytest.raises(ValueError, match="random_partition"):
            optimal_partition(s, 2, "pa", cap=100)

    def test_rejects_unknown_mode(self):
        rng = np.random.default_rng(47)
        with pytest.raises(ValueError):
            optimal_partition(random_scenario(rng, 4), 2, "discrete")
