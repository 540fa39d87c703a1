import math
from itertools import permutations

import numpy as np
import pytest

from noma_balance import (
    DecodingOrder,
    Scenario,
    UserStats,
    compute_balance,
    evaluate,
    optimal_order,
    optimal_pafs,
    solve,
)
from noma_balance.model import exp2, exp2m1

from helpers import random_scenario


def _scenario(gammas, rates, weights):
    return Scenario(
        users=tuple(UserStats(g, r, w) for g, r, w in zip(gammas, rates, weights))
    )


class TestOptimalOrder:
    def test_sorts_by_gain(self):
        s = _scenario((4, 1, 2), (1, 1, 1), (1, 1, 1))
        assert optimal_order(s).perm == (2, 3, 1)

    def test_weighted_sort(self):
        s = _scenario((4, 1), (1, 1), (0.5, 1))
        assert optimal_order(s).perm == (2, 1)

    def test_tie_breaks_by_index(self):
        s = _scenario((1, 1), (1, 1), (1, 1))
        assert optimal_order(s).perm == (1, 2)


class TestComputeBalance:
    def test_single_user(self):
        s = _scenario((1,), (1,), (1,))
        assert compute_balance(s, DecodingOrder(perm=(1,))) == pytest.approx(1.0)

    def test_symmetric_pair_matches_double_rate_single(self):
        s = _scenario((1, 1), (1, 1), (1, 1))
        a = compute_balance(s, DecodingOrder(perm=(1, 2)))
        assert a == pytest.approx(3.0, rel=1e-15)
        single = _scenario((1,), (2,), (1,))
        assert a == pytest.approx(
            compute_balance(single, DecodingOrder(perm=(1,))), rel=1e-12
        )

    def test_worked_pair(self):
        s = _scenario((1, 4), (1, 1), (1, 1))
        assert compute_balance(s, DecodingOrder(perm=(1, 2))) == pytest.approx(
            1.5, rel=1e-15
        )

    def test_rejects_zero_rate(self):
        s = _scenario((1, 1), (0, 1), (1, 1))
        with pytest.raises(ValueError):
            compute_balance(s, DecodingOrder(perm=(1, 2)))

    def test_overflow_saturates(self):
        s = _scenario((1, 1), (2000.0, 2000.0), (1, 1))
        assert compute_balance(s, DecodingOrder(perm=(1, 2))) == math.inf


class TestOptimalPafs:
    def test_worked_pair(self):
        s = _scenario((1, 4), (1, 1), (1, 1))
        pafs = optimal_pafs(s, DecodingOrder(perm=(1, 2)), 1.5)
        assert pafs.pafs[0] == pytest.approx(5.0 / 6.0, rel=1e-12)
        assert pafs.pafs[1] == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_symmetric_pair(self):
        s = _scenario((1, 1), (1, 1), (1, 1))
        pafs = optimal_pafs(s, DecodingOrder(perm=(1, 2)), 3.0)
        assert pafs.pafs == pytest.approx((2.0 / 3.0, 1.0 / 3.0), rel=1e-12)

    def test_single_user_gets_everything(self):
        s = _scenario((1,), (1,), (1,))
        assert optimal_pafs(s, DecodingOrder(perm=(1,)), 1.0).pafs == (1.0,)

    def test_matches_expanded_closed_form(self):
        # expanded formula: alpha_k * A written with explicit rate-sum powers
        rng = np.random.default_rng(21)
        for _ in range(100):
            s = random_scenario(rng, int(rng.integers(2, 7)))
            order = optimal_order(s)
            a = compute_balance(s, order)
            pafs = optimal_pafs(s, order, a)
            users = [s.user(u) for u in order.perm]
            k = len(users)
            for pos in range(k):
                u = users[pos]
                c = u.weight / u.gamma_bar
                if pos == k - 1:
                    expect = exp2m1(u.rate) * c / a
                else:
                    nxt = users[pos + 1]
                    inner = c + exp2m1(nxt.rate) * (nxt.weight / nxt.gamma_bar)
                    prefix = nxt.rate
                    for j in range(pos + 2, k):
                        uj = users[j]
                        inner += (
                            exp2m1(uj.rate)
                            * (uj.weight / uj.gamma_bar)
                            * exp2(prefix)
                        )
                        prefix += uj.rate
                    expect = inner * exp2m1(u.rate) / a
                assert pafs.pafs[order.perm[pos] - 1] == pytest.approx(
                    expect, rel=1e-12
                )


class TestSolve:
    def test_worked_pair(self):
        s = _scenario((1, 4), (1, 1), (1, 1))
        res = solve(s)
        assert res.order.perm == (1, 2)
        assert res.balance_a == pytest.approx(1.5, rel=1e-15)
        assert res.pafs.pafs == pytest.approx((5.0 / 6.0, 1.0 / 6.0), rel=1e-12)
        expected = 1.0 - math.exp(-1.5)
        assert res.outage == pytest.approx((expected, expected), rel=1e-12)

    def test_equal_weights_equalize_outage(self):
        rng = np.random.default_rng(22)
        for _ in range(30):
            k = int(rng.integers(1, 7))
            users = tuple(
                UserStats(float(g), float(r), 0.7)
                for g, r in zip(
                    10.0 ** rng.uniform(-0.5, 1.5, k), rng.uniform(0.1, 1.2, k)
                )
            )
            res = solve(Scenario(users=users))
            assert max(res.outage) - min(res.outage) < 1e-12

    def test_zero_rate_users_are_free(self):
        s = _scenario((1, 5, 4), (1, 0, 1), (1, 1, 1))
        res = solve(s)
        assert res.pafs.pafs[1] == 0.0
        assert res.outage[1] == 0.0
        assert res.wsp[1] == 1.0
        # zero-rate user decodes first, positive users keep the sorted order
        assert res.order.perm == (2, 1, 3)
        live = _scenario((1, 4), (1, 1), (1, 1))
        ref = solve(live)
        assert res.outage[0] == ref.outage[0]
        assert res.outage[2] == ref.outage[1]

    def test_all_zero_rate(self):
        s = _scenario((1, 2), (0, 0), (1, 1))
        res = solve(s)
        assert res.balance_a == 0.0
        assert res.outage == (0.0, 0.0)
        assert sum(res.pafs.pafs) == 0.0

    def test_saturated_demand_reports_sure_outage(self):
        s = _scenario((1, 1), (1800.0, 1900.0), (1, 1))
        res = solve(s)
        assert res.balance_a == math.inf
        assert res.outage == (1.0, 1.0)
        assert res.wsp == (0.0, 0.0)
        assert sum(res.pafs.pafs) == pytest.approx(1.0)

    def test_round_trip_through_evaluator(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            s = random_scenario(rng, int(rng.integers(1, 8)))
            res = solve(s)
            ev = evaluate(s, res.order, res.pafs)
            for a, b in zip(ev.outage, res.outage):
                assert abs(a - b) < 1e-12


class TestOptimalityProperties:
    def test_equal_wsp_and_chain_and_unit_sum(self):
        rng = np.random.default_rng(24)
        for _ in range(200):
            s = random_scenario(rng, int(rng.integers(1, 9)))
            res = solve(s)
            ev = evaluate(s, res.order, res.pafs)
            assert max(ev.wsp) - min(ev.wsp) < 1e-12
            assert abs(sum(res.pafs.pafs) - 1.0) < 1e-12
            chain = res.thresholds
            assert all(a <= b * (1 + 1e-12) for a, b in zip(chain, chain[1:]))

    def test_snr_scaling_leaves_pafs_and_order(self):
        rng = np.random.default_rng(25)
        for _ in range(50):
            s = random_scenario(rng, int(rng.integers(1, 7)))
            c = float(10.0 ** rng.uniform(0.1, 2.0))
            scaled = Scenario(
                users=tuple(UserStats(u.gamma_bar * c, u.rate, u.weight) for u in s.users)
            )
            r1, r2 = solve(s), solve(scaled)
            assert r1.order.perm == r2.order.perm
            for a, b in zip(r1.pafs.pafs, r2.pafs.pafs):
                assert abs(a - b) < 1e-12
            assert r2.balance_a == pytest.approx(r1.balance_a / c, rel=1e-12)

    def test_sorted_order_beats_all_others(self):
        # equalized allocation per order, judged by the exact evaluator
        rng = np.random.default_rng(26)
        for _ in range(50):
            k = int(rng.integers(2, 5))
            s = random_scenario(rng, k)
            best = solve(s)
            reference = evaluate(s, best.order, best.pafs).min_wsp
            for perm in permutations(range(1, k + 1)):
                order = DecodingOrder(perm=perm)
                a = compute_balance(s, order)
                pafs = optimal_pafs(s, order, a)
                rival = evaluate(s, order, pafs).min_wsp
                assert rival <= reference + 1e-12
