import json
import math

import numpy as np
import pytest

from noma_balance import (
    DecodingOrder,
    PowerAllocation,
    Scenario,
    UserStats,
    decoding_snr,
    evaluate,
    snr_threshold,
    solve,
)
from noma_balance.verification import builtin_scenarios

from helpers import random_scenario


class TestSnrThreshold:
    def test_single_user_full_power(self):
        assert snr_threshold(1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_partial_power_no_interference(self):
        assert snr_threshold(1.0 / 3.0, 0.0, 1.0) == pytest.approx(3.0, rel=1e-12)

    def test_undecodable_split_is_infinite(self):
        assert snr_threshold(0.5, 0.5, 1.0) == math.inf

    def test_zero_rate_costs_nothing(self):
        assert snr_threshold(0.0, 1.0, 0.0) == 0.0
        assert snr_threshold(0.3, 0.7, 0.0) == 0.0

    def test_monotone_in_power_and_interference(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            rate = rng.uniform(0.1, 1.5)
            suffix = rng.uniform(0.0, 0.3)
            a = rng.uniform(0.4, 0.9)
            b = a + rng.uniform(0.01, 0.1)
            # more power helps, more residual interference hurts
            assert snr_threshold(b, suffix, rate) < snr_threshold(a, suffix, rate)
            assert snr_threshold(a, suffix + 0.05, rate) > snr_threshold(
                a, suffix, rate
            )


class TestDecodingSnr:
    def test_zero_channel(self):
        assert decoding_snr(0.0, 0.5, 0.5) == 0.0

    def test_interference_free(self):
        assert decoding_snr(10.0, 1.0, 0.0) == pytest.approx(10.0)

    def test_mixed(self):
        assert decoding_snr(10.0, 0.5, 0.5) == pytest.approx(5.0 / 6.0, rel=1e-12)

    def test_interference_ceiling(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            gamma = rng.uniform(0.1, 100.0)
            a = rng.uniform(0.1, 0.9)
            s = rng.uniform(0.05, 0.9)
            assert decoding_snr(gamma, a, s) <= a / s + 1e-12
        # vanishing interference approaches gamma * alpha
        assert decoding_snr(7.0, 0.3, 1e-14) == pytest.approx(2.1, rel=1e-9)


class TestEvaluate:
    def test_two_user_worked_example(self):
        s = Scenario(users=(UserStats(1.0, 1.0, 1.0), UserStats(4.0, 1.0, 1.0)))
        ev = evaluate(
            s, DecodingOrder(perm=(1, 2)), PowerAllocation(pafs=(0.7, 0.3))
        )
        assert ev.thresholds[0] == pytest.approx(2.5, rel=1e-12)
        assert ev.thresholds[1] == pytest.approx(10.0 / 3.0, rel=1e-12)
        assert ev.outage[0] == pytest.approx(1.0 - math.exp(-2.5), rel=1e-12)
        # user 2 inherits the cumulative threshold max(2.5, 10/3)
        assert ev.outage[1] == pytest.approx(
            1.0 - math.exp(-(10.0 / 3.0) / 4.0), rel=1e-12
        )
        assert ev.min_wsp == min(ev.wsp)

    def test_zero_rate_single_user(self):
        s = Scenario(users=(UserStats(1.0, 0.0, 1.0),))
        ev = evaluate(s, DecodingOrder(perm=(1,)), PowerAllocation(pafs=(1.0,)))
        assert ev.outage == (0.0,)
        assert ev.wsp == (1.0,)

    def test_infinite_threshold_means_sure_outage(self):
        s = Scenario(users=(UserStats(1.0, 1.0), UserStats(4.0, 2.0)))
        ev = evaluate(
            s, DecodingOrder(perm=(1, 2)), PowerAllocation(pafs=(0.5, 0.5))
        )
        assert ev.outage[0] == 1.0
        assert ev.wsp[0] == 0.0
        assert ev.min_wsp == 0.0

    def test_matches_closed_form_on_builtin_case(self):
        scenario = builtin_scenarios()["G1"]
        res = solve(scenario)
        ev = evaluate(scenario, res.order, res.pafs)
        for a, b in zip(ev.outage, res.outage):
            assert abs(a - b) < 1e-12

    def test_gain_scaling_never_raises_outage(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            s = random_scenario(rng, int(rng.integers(1, 6)))
            k = s.k
            perm = tuple(map(int, rng.permutation(np.arange(1, k + 1))))
            raw = rng.uniform(0.05, 1.0, k)
            raw = raw / raw.sum()
            pa = PowerAllocation(pafs=tuple(float(x) for x in raw))
            order = DecodingOrder(perm=perm)
            base = evaluate(s, order, pa)
            c = float(rng.uniform(1.5, 10.0))
            boosted = Scenario(
                users=tuple(
                    UserStats(u.gamma_bar * c, u.rate, u.weight) for u in s.users
                )
            )
            up = evaluate(boosted, order, pa)
            for lo, hi in zip(up.outage, base.outage):
                assert lo <= hi + 1e-15

    def test_equal_gain_outage_nondecreasing_in_decode_order(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            k = int(rng.integers(2, 6))
            users = tuple(
                UserStats(2.0, float(r), 1.0) for r in rng.uniform(0.1, 1.0, k)
            )
            s = Scenario(users=users)
            raw = rng.uniform(0.05, 1.0, k)
            raw = raw / raw.sum()
            perm = tuple(map(int, rng.permutation(np.arange(1, k + 1))))
            ev = evaluate(
                s, DecodingOrder(perm=perm), PowerAllocation(tuple(map(float, raw)))
            )
            ordered = [ev.outage[u - 1] for u in perm]
            assert all(a <= b + 1e-15 for a, b in zip(ordered, ordered[1:]))


class TestValidation:
    def test_user_stats_invariants(self):
        with pytest.raises(ValueError):
            UserStats(gamma_bar=0.0, rate=1.0)
        with pytest.raises(ValueError):
            UserStats(gamma_bar=1.0, rate=-0.1)
        with pytest.raises(ValueError):
            UserStats(gamma_bar=1.0, rate=1.0, weight=0.0)

    def test_order_must_be_permutation(self):
        with pytest.raises(ValueError):
            DecodingOrder(perm=(1, 1))
        with pytest.raises(ValueError):
            DecodingOrder(perm=(0, 1))

    def test_paf_bounds(self):
        with pytest.raises(ValueError):
            PowerAllocation(pafs=(1.2, 0.0))
        with pytest.raises(ValueError):
            PowerAllocation(pafs=(0.7, 0.7))
        PowerAllocation(pafs=(0.5, 0.5))  # boundary is fine

    def test_evaluate_size_mismatch(self):
        s = Scenario(users=(UserStats(1.0, 1.0),))
        with pytest.raises(ValueError):
            evaluate(s, DecodingOrder(perm=(1, 2)), PowerAllocation(pafs=(1.0, 0.0)))


class TestSerialization:
    def test_scenario_round_trip(self):
        s = Scenario(
            users=(UserStats(2.5, 0.8, 0.4), UserStats(1.0, 0.0, 1.0)), snr_db=12.0
        )
        data = json.loads(s.to_json())
        assert data == {
            "users": [
                {"gamma_bar": 2.5, "rate": 0.8, "weight": 0.4},
                {"gamma_bar": 1.0, "rate": 0.0, "weight": 1.0},
            ],
            "snr_db": 12.0,
        }
        assert Scenario.from_json(s.to_json()) == s

    def test_weight_defaults_on_load(self):
        s = Scenario.from_dict({"users": [{"gamma_bar": 1.0, "rate": 0.5}]})
        assert s.user(1).weight == 1.0

    def test_allocation_result_dict_keys(self):
        res = solve(Scenario(users=(UserStats(1.0, 1.0), UserStats(4.0, 1.0))))
        d = res.to_dict()
        assert set(d) == {"order", "pafs", "balance_a", "thresholds", "outage", "wsp"}
        assert d["order"] == [1, 2]
