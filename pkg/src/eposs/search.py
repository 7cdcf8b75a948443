"""Quantile-search schedulers: binary search, interval splitting, and the
multi-objective grid variant.

The core move is shared by all three: pick a quantile order alpha, turn the
stochastic execution times into a deterministic table of per-task
alpha-quantiles, run constrained MOHEFT on it, and Monte-Carlo-evaluate the
cheapest resulting schedule.  Higher alpha means more conservative times,
hence likelier deadline compliance at higher cost; the searches navigate
that trade-off.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .cloud import ExecTimeModel, VmCatalog
from .dag import Workflow
from .montecarlo import EvalReport, evaluate
from .pareto import FrontPoint, ParetoFront, non_dominated
from .rng import derive_seed
from .schedule import Schedule
from .schedulers import Candidate, NoFeasibleSolution, SchedulerTimeout, moheft


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    """Knobs shared by the quantile searches.

    ``budget`` and ``p_c`` are only consulted by the multi-objective search;
    ``parallelism`` only by the interval-splitting one.
    """

    deadline: float
    p_t: float = 0.9
    epsilon: float = 0.02
    k: int = 10
    budget: float | None = None
    p_c: float | None = None
    parallelism: int = 4
    enforce_quotas: bool = True

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.5:
            raise ConfigError(f"epsilon must lie in (0, 0.5], got {self.epsilon}")
        if not 0.0 < self.p_t <= 1.0:
            raise ConfigError(f"p_t must lie in (0, 1], got {self.p_t}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.deadline <= 0:
            raise ConfigError("deadline must be positive")


@dataclass(frozen=True)
class StepRecord:
    """One probed quantile order and its outcome."""

    alpha: float
    feasible: bool
    p_hit: float | None
    mean_cost: float | None
    round_index: int = 0


@dataclass
class SearchResult:
    best: Schedule | None
    best_cost: float = field(default=math.inf)
    best_report: EvalReport | None = None
    trace: list[StepRecord] = field(default_factory=list)
    timed_out: bool = False

    @property
    def found(self) -> bool:
        return self.best is not None

    @property
    def steps(self) -> int:
        return len(self.trace)

    def to_json(self) -> dict:
        return {
            "found": self.found,
            "best_cost": None if not self.found else self.best_cost,
            "best_schedule": None if self.best is None else self.best.to_json(),
            "trace": [
                {
                    "alpha": s.alpha,
                    "feasible": s.feasible,
                    "p_hit": s.p_hit,
                    "mean_cost": s.mean_cost,
                    "round": s.round_index,
                }
                for s in self.trace
            ],
        }


class _Clock:
    """Tracks the remaining wall-clock budget across search steps."""

    def __init__(self, budget: float | None):
        self.budget = budget
        self.started = time.monotonic()

    def remaining(self) -> float | None:
        if self.budget is None:
            return None
        return self.budget - (time.monotonic() - self.started)

    def expired(self) -> bool:
        left = self.remaining()
        return left is not None and left <= 0


def _probe(
    workflow: Workflow,
    catalog: VmCatalog,
    model: ExecTimeModel,
    cfg: SearchConfig,
    alpha: float,
    seed: int,
    clock: _Clock,
) -> tuple[Candidate | None, EvalReport | None]:
    """One search step: quantile table -> constrained MOHEFT -> evaluate cheapest."""
    times = model.time_table(workflow, alpha)
    try:
        candidates = moheft(
            workflow, catalog, times,
            k=cfg.k, deadline=cfg.deadline, enforce_quotas=cfg.enforce_quotas,
            time_budget=clock.remaining(),
        )
    except NoFeasibleSolution:
        return None, None
    cheapest = candidates[0]
    report = evaluate(
        cheapest.schedule, workflow, model, cfg.deadline,
        budget=cfg.budget, seed=derive_seed(seed, alpha),
    )
    return cheapest, report


def eposs(
    workflow: Workflow,
    catalog: VmCatalog,
    model: ExecTimeModel,
    cfg: SearchConfig,
    seed: int = 0,
    time_budget: float | None = None,
) -> SearchResult:
    """Binary search on the quantile order.

    A step whose evaluated deadline-hit probability reaches ``p_t`` shrinks
    the interval to the lower half (cheaper quantiles) and updates the best
    solution on cost improvement; an infeasible step shrinks to the upper
    half.  Stops once the interval width is at most ``epsilon``, i.e. after
    ceil(log2(1/epsilon)) steps.
    """
    result = SearchResult(best=None)
    clock = _Clock(time_budget)
    lo, hi = 0.0, 1.0
    while True:
        if clock.expired():
            result.timed_out = True
            return result
        alpha = 0.5 * (lo + hi)
        try:
            candidate, report = _probe(workflow, catalog, model, cfg, alpha, seed, clock)
        except SchedulerTimeout:
            result.timed_out = True
            return result
        ok = report is not None and report.p_hit_deadline >= cfg.p_t
        result.trace.append(StepRecord(
            alpha=alpha,
            feasible=ok,
            p_hit=None if report is None else report.p_hit_deadline,
            mean_cost=None if report is None else report.mean_cost,
        ))
        if ok:
            hi = alpha
            if report.mean_cost < result.best_cost:
                result.best = candidate.schedule
                result.best_cost = report.mean_cost
                result.best_report = report
        else:
            lo = alpha
        if hi - lo <= cfg.epsilon:
            return result


def p_eposs(
    workflow: Workflow,
    catalog: VmCatalog,
    model: ExecTimeModel,
    cfg: SearchConfig,
    seed: int = 0,
    time_budget: float | None = None,
) -> SearchResult:
    """Interval-splitting search over ``parallelism`` probes per round.

    Each round splits the current interval into P uniform sub-intervals and
    probes every midpoint; the cheapest feasible probe selects the
    sub-interval to recurse into (ties toward lower alpha).  When no probe
    is feasible the search recurses into the highest sub-interval, the most
    conservative choice.  Stops once sub-intervals are at most ``epsilon``
    wide.  The probes of one round are independent and may run concurrently;
    the merge below is deterministic regardless of completion order.
    """
    if cfg.parallelism < 2:
        raise ConfigError("parallelism must be >= 2")
    result = SearchResult(best=None)
    clock = _Clock(time_budget)
    lo, hi = 0.0, 1.0
    round_index = 0
    while True:
        p = cfg.parallelism
        width = (hi - lo) / p
        round_best: tuple[float, float, Candidate, EvalReport, int] | None = None
        for i in range(p):
            if clock.expired():
                result.timed_out = True
                return result
            alpha = lo + (i + 0.5) * width
            try:
                candidate, report = _probe(workflow, catalog, model, cfg, alpha, seed, clock)
            except SchedulerTimeout:
                result.timed_out = True
                return result
            ok = report is not None and report.p_hit_deadline >= cfg.p_t
            result.trace.append(StepRecord(
                alpha=alpha,
                feasible=ok,
                p_hit=None if report is None else report.p_hit_deadline,
                mean_cost=None if report is None else report.mean_cost,
                round_index=round_index,
            ))
            if ok:
                key = (report.mean_cost, alpha)
                if round_best is None or key < (round_best[0], round_best[1]):
                    round_best = (report.mean_cost, alpha, candidate, report, i)
        if round_best is None:
            selected = p - 1
        else:
            cost, _, candidate, report, selected = round_best
            if cost < result.best_cost:
                result.best = candidate.schedule
                result.best_cost = cost
                result.best_report = report
        lo, hi = lo + selected * width, lo + (selected + 1) * width
        round_index += 1
        if hi - lo <= cfg.epsilon:
            return result


def quantile_grid(epsilon: float) -> list[float]:
    """The quantile orders {k*epsilon : k >= 1, k*epsilon < 1}."""
    count = int(math.floor((1.0 - 1e-12) / epsilon))
    return [k * epsilon for k in range(1, count + 1)]


def m_eposs(
    workflow: Workflow,
    catalog: VmCatalog,
    model: ExecTimeModel,
    cfg: SearchConfig,
    seed: int = 0,
    time_budget: float | None = None,
) -> ParetoFront:
    """Sweep an epsilon-spaced quantile grid and keep the non-dominated,
    constraint-satisfying schedules.

    Every MOHEFT candidate at every grid point is evaluated; those meeting
    both the deadline probability ``p_t`` and the budget probability ``p_c``
    enter the front as (mean makespan, mean cost) points.  Evaluation seeds
    depend only on (seed, alpha), so grid order does not affect the result.
    """
    if cfg.budget is None or cfg.p_c is None:
        raise ConfigError("multi-objective search requires budget and p_c")
    clock = _Clock(time_budget)
    points: list[FrontPoint] = []
    for alpha in quantile_grid(cfg.epsilon):
        if clock.expired():
            break
        times = model.time_table(workflow, alpha)
        try:
            candidates = moheft(
                workflow, catalog, times,
                k=cfg.k, deadline=cfg.deadline, enforce_quotas=cfg.enforce_quotas,
                time_budget=clock.remaining(),
            )
        except NoFeasibleSolution:
            continue
        except SchedulerTimeout:
            break
        alpha_seed = derive_seed(seed, alpha)
        for cand in candidates:
            report = evaluate(
                cand.schedule, workflow, model, cfg.deadline,
                budget=cfg.budget, seed=alpha_seed,
            )
            if report.p_hit_deadline >= cfg.p_t and report.p_hit_budget >= cfg.p_c:
                points.append(FrontPoint(
                    makespan=report.mean_makespan,
                    cost=report.mean_cost,
                    schedule=cand.schedule,
                ))
    return non_dominated(points)
