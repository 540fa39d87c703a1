"""Named transmission schemes and their evaluation on one scenario.

Scheme grammar (case-insensitive):

    NOMA                      all users superposed in one block
    TDMA-PA                   orthogonal users, equal time, optimal power
    TDMA-PARA                 orthogonal users, optimal time and power
    TDMA-DISCRETE(T)          orthogonal users, T sub-slots per timeslot
    NOMA-R(L)[-PA|-PARA|-DISCRETE(T)]   random groups of L (default PARA)
    NOMA-O(L)[-PA|-PARA|-DISCRETE(T)]   exhaustively optimal groups of L

Aliases ``NOMA-PA(L)``, ``NOMA-PARA(L)``, and ``NOMA-DISCRETE(L,T)`` map to
the random-grouping forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from . import closed_form
from .grouping import GroupPartition, optimal_partition, pad_virtual_users, random_partition
from .intergroup import (
    DEFAULT_CONFIG,
    SolverConfig,
    continuous_allocate,
    discrete_allocate,
    equal_time_allocate,
    tdma_plan,
)
from .model import Scenario

__all__ = ["SchemeSpec", "SchemeOutcome", "parse_scheme", "apply_scheme"]


@dataclass(frozen=True)
class SchemeSpec:
    """Parsed scheme: family plus grouping and allocation choices."""

    family: str  # "noma" | "tdma" | "grouped"
    grouping: str = ""  # "random" | "optimal" for the grouped family
    allocation: str = ""  # "pa" | "para" | "discrete"
    group_size: int = 0
    sub_slots: int = 0

    @property
    def name(self) -> str:
        if self.family == "noma":
            return "NOMA"
        if self.family == "tdma":
            if self.allocation == "discrete":
                return f"TDMA-DISCRETE({self.sub_slots})"
            return f"TDMA-{self.allocation.upper()}"
        tag = "R" if self.grouping == "random" else "O"
        if self.allocation == "discrete":
            return f"NOMA-{tag}({self.group_size})-DISCRETE({self.sub_slots})"
        return f"NOMA-{tag}({self.group_size})-{self.allocation.upper()}"

    @property
    def needs_partition_seed(self) -> bool:
        return self.family == "grouped" and self.grouping == "random"


@dataclass(frozen=True)
class SchemeOutcome:
    """Per-user outage (real users only), the balance level, and min WSP."""

    outage: tuple[float, ...]
    a0: float
    min_wsp: float


_PATTERNS = [
    (re.compile(r"NOMA"), lambda m: SchemeSpec(family="noma")),
    (
        re.compile(r"TDMA-(PA|PARA)"),
        lambda m: SchemeSpec(family="tdma", allocation=m.group(1).lower()),
    ),
    (
        re.compile(r"TDMA-DISCRETE\((\d+)\)"),
        lambda m: SchemeSpec(family="tdma", allocation="discrete", sub_slots=int(m.group(1))),
    ),
    (
        re.compile(r"NOMA-(R|O)\((\d+)\)(?:-(PA|PARA))?"),
        lambda m: SchemeSpec(
            family="grouped",
            grouping="random" if m.group(1) == "R" else "optimal",
            allocation=(m.group(3) or "PARA").lower(),
            group_size=int(m.group(2)),
        ),
    ),
    (
        re.compile(r"NOMA-(R|O)\((\d+)\)-DISCRETE\((\d+)\)"),
        lambda m: SchemeSpec(
            family="grouped",
            grouping="random" if m.group(1) == "R" else "optimal",
            allocation="discrete",
            group_size=int(m.group(2)),
            sub_slots=int(m.group(3)),
        ),
    ),
    (
        re.compile(r"NOMA-(PA|PARA)\((\d+)\)"),
        lambda m: SchemeSpec(
            family="grouped",
            grouping="random",
            allocation=m.group(1).lower(),
            group_size=int(m.group(2)),
        ),
    ),
    (
        re.compile(r"NOMA-DISCRETE\((\d+),\s*(\d+)\)"),
        lambda m: SchemeSpec(
            family="grouped",
            grouping="random",
            allocation="discrete",
            group_size=int(m.group(1)),
            sub_slots=int(m.group(2)),
        ),
    ),
]


def parse_scheme(text: str) -> SchemeSpec:
    """Parse a scheme name; raises ValueError for unknown forms."""
    cleaned = text.strip().upper().replace(" ", "")
    for pattern, build in _PATTERNS:
        m = pattern.fullmatch(cleaned)
        if m:
            spec = build(m)
            if spec.family == "grouped" and spec.group_size < 1:
                raise ValueError(f"group size must be >= 1 in {text!r}")
            if spec.allocation == "discrete" and spec.sub_slots < 1:
                raise ValueError(f"sub-slot count must be >= 1 in {text!r}")
            return spec
    raise ValueError(f"unrecognized scheme {text!r}")


def _allocate(spec: SchemeSpec, partition: GroupPartition, scenario: Scenario, config: SolverConfig):
    if spec.allocation == "pa":
        return equal_time_allocate(partition, scenario, config)
    if spec.allocation == "para":
        return continuous_allocate(partition, scenario, config)
    return discrete_allocate(partition, scenario, spec.sub_slots, config)


def apply_scheme(
    spec: SchemeSpec,
    scenario: Scenario,
    config: SolverConfig = DEFAULT_CONFIG,
    partition_seed: int | None = None,
) -> SchemeOutcome:
    """Evaluate one scheme on one scenario.

    ``partition_seed`` drives random grouping and is required for the
    NOMA-R family; optimal grouping scores candidate partitions with the
    scheme's own allocation mode ("pa" stands in for discrete, which is
    not a supported scoring mode).
    """
    k = scenario.k
    if spec.family == "noma":
        res = closed_form.solve(scenario)
        return SchemeOutcome(outage=res.outage, a0=res.balance_a, min_wsp=min(res.wsp))

    if spec.family == "tdma":
        cfg = (
            replace(config, discrete_t=spec.sub_slots)
            if spec.allocation == "discrete"
            else config
        )
        plan = tdma_plan(scenario, spec.allocation, cfg)
        return SchemeOutcome(
            outage=plan.user_outage(), a0=plan.a0, min_wsp=min(plan.user_wsp())
        )

    padded, virtual = pad_virtual_users(scenario, spec.group_size)
    if spec.grouping == "random":
        if partition_seed is None:
            raise ValueError(f"{spec.name} requires a partition seed")
        partition = random_partition(
            padded.k, spec.group_size, partition_seed, virtual_count=virtual
        )
    else:
        scoring = "para" if spec.allocation == "para" else "pa"
        partition, _ = optimal_partition(
            padded, spec.group_size, scoring, config, virtual_count=virtual
        )
    plan = _allocate(spec, partition, padded, config)
    outage = plan.user_outage()[:k]
    wsp = plan.user_wsp()[:k]
    return SchemeOutcome(outage=outage, a0=plan.a0, min_wsp=min(wsp))
