"""Shared scenario generators for the test suite."""

import numpy as np

from noma_balance import Scenario, UserStats


def random_users(rng: np.random.Generator, k: int) -> tuple[UserStats, ...]:
    """Positive-rate users with moderate parameter ranges (no overflow)."""
    gammas = 10.0 ** rng.uniform(-0.7, 1.7, k)
    rates = rng.uniform(0.05, 1.5, k)
    weights = rng.uniform(0.05, 1.0, k)
    return tuple(
        UserStats(gamma_bar=float(g), rate=float(r), weight=float(w))
        for g, r, w in zip(gammas, rates, weights)
    )


def random_scenario(rng: np.random.Generator, k: int) -> Scenario:
    return Scenario(users=random_users(rng, k))
