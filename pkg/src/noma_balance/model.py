"""Core data model and the exact outage evaluator for downlink NOMA.

A source superposes independent user signals with per-user power
allocation factors (PAFs) and each receiver peels them off with SIC in a
common decoding order.  Channels are Rayleigh; the transmitter only knows
the mean channel SNR of each user, so outage probabilities follow from
the exponential CDF in closed form.  The evaluator in this module accepts
*any* (order, PAF) choice and is the ground truth the optimizers are
checked against.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "UserStats",
    "Scenario",
    "DecodingOrder",
    "PowerAllocation",
    "AllocationResult",
    "Evaluation",
    "snr_threshold",
    "decoding_snr",
    "evaluate",
    "exp2m1",
    "exp2",
]

_LN2 = math.log(2.0)
_EXP_ARG_MAX = 709.0  # exp() overflows binary64 beyond this


def exp2m1(x: float) -> float:
    """2**x - 1, accurate near zero and saturating to +inf instead of raising."""
    if x * _LN2 > _EXP_ARG_MAX:
        return math.inf
    return math.expm1(x * _LN2)


def exp2(x: float) -> float:
    """2**x saturating to +inf instead of raising OverflowError."""
    if x * _LN2 > _EXP_ARG_MAX:
        return math.inf
    return math.exp(x * _LN2)


@dataclass(frozen=True)
class UserStats:
    """One user's statistical description.

    gamma_bar -- mean channel SNR (linear scale), strictly positive.
    rate      -- target data rate in bits/s/Hz, non-negative.
    weight    -- fairness weight applied to the success probability.
    """

    gamma_bar: float
    rate: float
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.gamma_bar > 0.0:
            raise ValueError(f"gamma_bar must be > 0, got {self.gamma_bar}")
        if self.rate < 0.0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")
        if not self.weight > 0.0:
            raise ValueError(f"weight must be > 0, got {self.weight}")

    def to_dict(self) -> dict:
        return {"gamma_bar": self.gamma_bar, "rate": self.rate, "weight": self.weight}


@dataclass(frozen=True)
class Scenario:
    """A set of users sharing one downlink channel block.

    Users are indexed 1..K throughout the public API.  ``snr_db`` records
    the transmit SNR used when the mean SNRs were derived from geometry;
    it is informational once ``gamma_bar`` values are fixed.
    """

    users: tuple[UserStats, ...]
    snr_db: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "users", tuple(self.users))
        if len(self.users) < 1:
            raise ValueError("scenario needs at least one user")

    @property
    def k(self) -> int:
        return len(self.users)

    def user(self, index: int) -> UserStats:
        """Look up a user by 1-based index."""
        return self.users[index - 1]

    def to_dict(self) -> dict:
        d = {"users": [u.to_dict() for u in self.users]}
        if self.snr_db is not None:
            d["snr_db"] = self.snr_db
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        users = [
            UserStats(
                gamma_bar=float(u["gamma_bar"]),
                rate=float(u["rate"]),
                weight=float(u.get("weight", 1.0)),
            )
            for u in data["users"]
        ]
        snr_db = data.get("snr_db")
        return cls(users=tuple(users), snr_db=None if snr_db is None else float(snr_db))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DecodingOrder:
    """SIC decoding order: ``perm[i]`` is the 1-based index of the user whose
    signal is decoded at stage ``i`` (at every receiver)."""

    perm: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "perm", tuple(int(p) for p in self.perm))
        k = len(self.perm)
        if sorted(self.perm) != list(range(1, k + 1)):
            raise ValueError(f"perm must be a permutation of 1..{k}, got {self.perm}")

    @property
    def k(self) -> int:
        return len(self.perm)


@dataclass(frozen=True)
class PowerAllocation:
    """Power allocation factors indexed by user; entries in [0, 1], sum <= 1."""

    pafs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pafs", tuple(float(a) for a in self.pafs))
        for a in self.pafs:
            if not (0.0 <= a <= 1.0):
                raise ValueError(f"PAF entries must lie in [0, 1], got {a}")
        if sum(self.pafs) > 1.0 + 1e-12:
            raise ValueError(f"PAFs sum to {sum(self.pafs)} > 1")

    @property
    def k(self) -> int:
        return len(self.pafs)


@dataclass(frozen=True)
class AllocationResult:
    """Solved allocation: order, PAFs, the equalized balance level, and the
    induced per-user thresholds / outage probabilities.

    ``thresholds`` follows the decode order; ``outage`` and ``wsp`` are
    indexed by user (position ``k-1`` is user ``k``).
    """

    order: DecodingOrder
    pafs: PowerAllocation
    balance_a: float
    thresholds: tuple[float, ...]
    outage: tuple[float, ...]
    wsp: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "order": list(self.order.perm),
            "pafs": list(self.pafs.pafs),
            "balance_a": self.balance_a,
            "thresholds": list(self.thresholds),
            "outage": list(self.outage),
            "wsp": list(self.wsp),
        }


@dataclass(frozen=True)
class Evaluation:
    """Outcome of evaluating one (order, PAF) pair.

    ``thresholds`` holds the per-stage decode thresholds in decode order;
    ``outage``/``wsp`` are per user (1-based index k at position k-1).
    """

    thresholds: tuple[float, ...]
    outage: tuple[float, ...]
    wsp: tuple[float, ...]
    min_wsp: float


def snr_threshold(alpha_k: float, alpha_i_suffix: float, rate: float) -> float:
    """Channel SNR needed to decode a signal with PAF ``alpha_k`` against the
    residual interference power share ``alpha_i_suffix``.

    Returns 0 for a zero-rate signal and +inf when the power split makes the
    signal undecodable at any SNR.
    """
    if rate == 0.0:
        return 0.0
    need = exp2m1(rate)
    if math.isinf(need):
        return math.inf
    denom = alpha_k - need * alpha_i_suffix
    if denom <= 0.0:
        return math.inf
    return need / denom


def decoding_snr(gamma: float, alpha_i: float, alpha_suffix: float) -> float:
    """Effective SNR when decoding a signal of power share ``alpha_i`` while
    later-decoded signals (total share ``alpha_suffix``) remain as noise."""
    return gamma * alpha_i / (gamma * alpha_suffix + 1.0)


def evaluate(
    scenario: Scenario,
    order: DecodingOrder,
    pafs: PowerAllocation,
) -> Evaluation:
    """Exact per-user outage probabilities of an arbitrary allocation.

    A user is in outage when any SIC stage up to and including its own
    fails, so the effective threshold at stage ``i`` is the running maximum
    of the stage thresholds.  Rayleigh fading makes the outage probability
    ``1 - exp(-T / gamma_bar)`` exactly.
    """
    k = scenario.k
    if order.k != k or pafs.k != k:
        raise ValueError("order/pafs size does not match scenario")
    alpha = [pafs.pafs[u - 1] for u in order.perm]
    # residual interference share after each stage
    suffix = [0.0] * k
    acc = 0.0
    for i in range(k - 1, -1, -1):
        suffix[i] = acc
        acc += alpha[i]

    thresholds = []
    outage = [0.0] * k
    wsp = [1.0] * k
    running = 0.0
    for i, u in enumerate(order.perm):
        stats = scenario.user(u)
        th = snr_threshold(alpha[i], suffix[i], stats.rate)
        thresholds.append(th)
        running = max(running, th)
        if math.isinf(running):
            outage[u - 1] = 1.0
            wsp[u - 1] = 0.0
        else:
            x = running / stats.gamma_bar
            outage[u - 1] = -math.expm1(-x)
            wsp[u - 1] = math.exp(-stats.weight * x)
    return Evaluation(
        thresholds=tuple(thresholds),
        outage=tuple(outage),
        wsp=tuple(wsp),
        min_wsp=min(wsp),
    )
