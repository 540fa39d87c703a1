"""HTTP facade over the allocator: solve, verify, group, and experiment
endpoints with pydantic request/response models.

The service is stateless; every request carries its full problem.  The CLI
talks to this app in-process by default, or over the network against
``noma-balance serve``.
"""

from __future__ import annotations

from typing import Callable, Literal, TypeVar

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from . import closed_form
from .grouping import optimal_partition, pad_virtual_users, random_partition
from .intergroup import (
    SolverConfig,
    SolverError,
    continuous_allocate,
    discrete_allocate,
    equal_time_allocate,
)
from .model import Scenario, UserStats
from .montecarlo import (
    GeometryConfig,
    McConfig,
    required_snr_sweep,
    run_trials,
    summary_to_csv,
    sweep_to_csv,
)
from .verification import (
    DEFAULT_OUTAGE_TOL,
    DEFAULT_PAF_TOL,
    DEFAULT_RESOLUTION,
    DEFAULT_SNR_DB,
    verify_builtin,
    verify_scenario,
)

T = TypeVar("T")


class UserModel(BaseModel):
    gamma_bar: float
    rate: float
    weight: float = 1.0


class ScenarioModel(BaseModel):
    users: list[UserModel] = Field(min_length=1)
    snr_db: float | None = None

    def to_scenario(self) -> Scenario:
        return Scenario(
            users=tuple(
                UserStats(gamma_bar=u.gamma_bar, rate=u.rate, weight=u.weight)
                for u in self.users
            ),
            snr_db=self.snr_db,
        )


class AllocationModel(BaseModel):
    order: list[int]
    pafs: list[float]
    balance_a: float
    thresholds: list[float]
    outage: list[float]
    wsp: list[float]


class SolverOptions(BaseModel):
    eps_outer: float = 1e-10
    eps_inner: float = 1e-12
    max_iter_outer: int = 200
    max_iter_inner: int = 100

    def to_config(self, discrete_t: int = 0) -> SolverConfig:
        return SolverConfig(
            eps_outer=self.eps_outer,
            eps_inner=self.eps_inner,
            max_iter_outer=self.max_iter_outer,
            max_iter_inner=self.max_iter_inner,
            discrete_t=discrete_t,
        )


class VerifyRequest(BaseModel):
    scenario: ScenarioModel | None = None
    table1: bool = False
    snr_db: float = DEFAULT_SNR_DB
    resolution: float = DEFAULT_RESOLUTION
    outage_tol: float = DEFAULT_OUTAGE_TOL
    paf_tol: float = DEFAULT_PAF_TOL


class VerifyRowModel(BaseModel):
    case: str
    order_match: bool
    max_outage_diff: float
    max_paf_diff: float
    ok: bool


class VerifyResponse(BaseModel):
    ok: bool
    rows: list[VerifyRowModel]


class GroupRequest(BaseModel):
    scenario: ScenarioModel
    l: int = Field(ge=1)
    grouping: Literal["random", "optimal"] = "random"
    allocation: Literal["pa", "para", "discrete"] = "para"
    sub_slots: int = 0
    seed: int = 0
    solver: SolverOptions = SolverOptions()


class GroupPlanModel(BaseModel):
    partition: list[list[int]]
    t: list[float]
    p: list[float]
    a0: float
    per_group: list[AllocationModel]


class GroupResponse(BaseModel):
    virtual_count: int
    plan: GroupPlanModel


class McRequest(BaseModel):
    k: int = Field(ge=1)
    r_sum: float = Field(gt=0)
    trials: int = Field(default=5000, ge=1)
    seed: int = 0
    snr_db: float = 15.0
    radius: float = 1.0
    eta: float = 3.75
    schemes: list[str] = ["NOMA", "TDMA-PA", "TDMA-PARA"]
    solver: SolverOptions = SolverOptions()
    format: Literal["json", "csv"] = "json"


class McResponse(BaseModel):
    schemes: list[str]
    avg_outage: list[list[float]]
    trials: int
    seed: int


class SweepRequest(BaseModel):
    k: int = Field(ge=1)
    r_sums: list[float] = Field(min_length=1)
    trials: int = Field(default=500, ge=1)
    seed: int = 0
    snr_db: float = 15.0
    radius: float = 1.0
    eta: float = 3.75
    schemes: list[str] = ["NOMA", "TDMA-PA", "TDMA-PARA"]
    target_outage: float = 0.1
    tol_db: float = 0.05
    solver: SolverOptions = SolverOptions()
    format: Literal["json", "csv"] = "json"


class SweepRowModel(BaseModel):
    scheme: str
    r_sum: float
    required_snr_db: float
    target_outage: float
    trials: int
    seed: int


def _run(fn: Callable[[], T]) -> T:
    try:
        return fn()
    except SolverError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(
        title="noma-balance",
        description="Outage-balanced power, order, and time allocation for downlink NOMA",
    )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/solve", response_model=AllocationModel)
    def solve(scenario: ScenarioModel) -> AllocationModel:
        result = _run(lambda: closed_form.solve(scenario.to_scenario()))
        return AllocationModel(**result.to_dict())

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        def work():
            if req.table1:
                return verify_builtin(
                    req.snr_db, req.resolution, req.outage_tol, req.paf_tol
                )
            if req.scenario is None:
                raise ValueError("provide a scenario or set table1=true")
            return [
                verify_scenario(
                    req.scenario.to_scenario(),
                    "custom",
                    req.resolution,
                    req.outage_tol,
                    req.paf_tol,
                )
            ]

        rows = _run(work)
        return VerifyResponse(
            ok=all(r.ok for r in rows),
            rows=[VerifyRowModel(**r.to_dict()) for r in rows],
        )

    @app.post("/group", response_model=GroupResponse)
    def group(req: GroupRequest) -> GroupResponse:
        def work():
            scenario = req.scenario.to_scenario()
            config = req.solver.to_config(req.sub_slots)
            padded, virtual = pad_virtual_users(scenario, req.l)
            if req.grouping == "random":
                part = random_partition(padded.k, req.l, req.seed, virtual_count=virtual)
            else:
                scoring = "para" if req.allocation == "para" else "pa"
                part, _ = optimal_partition(
                    padded, req.l, scoring, config, virtual_count=virtual
                )
            if req.allocation == "pa":
                plan = equal_time_allocate(part, padded, config)
            elif req.allocation == "para":
                plan = continuous_allocate(part, padded, config)
            else:
                if req.sub_slots < 1:
                    raise ValueError("discrete allocation needs sub_slots >= 1")
                plan = discrete_allocate(part, padded, req.sub_slots, config)
            return virtual, plan

        virtual, plan = _run(work)
        return GroupResponse(
            virtual_count=virtual, plan=GroupPlanModel(**plan.to_dict())
        )

    @app.post("/mc")
    def mc(req: McRequest):
        def work():
            config = McConfig(
                k=req.k,
                r_sum=req.r_sum,
                trials=req.trials,
                schemes=tuple(req.schemes),
                seed=req.seed,
            )
            geometry = GeometryConfig(radius=req.radius, eta=req.eta, snr_db=req.snr_db)
            return run_trials(config, geometry, req.solver.to_config())

        summary = _run(work)
        if req.format == "csv":
            return Response(content=summary_to_csv(summary), media_type="text/csv")
        return McResponse(
            schemes=list(summary.schemes),
            avg_outage=[list(row) for row in summary.avg_outage],
            trials=summary.trials,
            seed=summary.seed,
        )

    @app.post("/snr-sweep")
    def snr_sweep(req: SweepRequest):
        def work():
            geometry = GeometryConfig(radius=req.radius, eta=req.eta, snr_db=req.snr_db)
            return required_snr_sweep(
                tuple(req.schemes),
                req.k,
                tuple(req.r_sums),
                req.trials,
                req.seed,
                geometry,
                req.target_outage,
                req.tol_db,
                req.solver.to_config(),
            )

        rows = _run(work)
        if req.format == "csv":
            return Response(content=sweep_to_csv(rows), media_type="text/csv")
        return [SweepRowModel(**row) for row in rows]

    return app


app = create_app()
