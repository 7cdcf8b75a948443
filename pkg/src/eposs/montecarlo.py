"""Monte Carlo evaluation of a fixed schedule under sampled task times.

Each run redraws every task's execution time and replays the schedule with
its assignment and per-VM order unchanged, recording the resulting makespan
and cost.  The timeline recursion is vectorized across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cloud import ExecTimeModel, sample_of_mean, transfer_time
from .dag import Workflow
from .rng import run_stream
from .schedule import Schedule, execution_order

MIN_RUNS = 1_000
MAX_RUNS = 100_000
CI_REL_TARGET = 0.02
VALIDATION_RUNS = 10_000
_Z95 = 1.959963984540054


class IncompleteSchedule(ValueError):
    pass


@dataclass(frozen=True)
class EvalReport:
    """Monte Carlo estimates for one schedule."""

    p_hit_deadline: float
    mean_makespan: float
    mean_cost: float
    runs: int
    ci_halfwidth_makespan: float
    p_hit_budget: float | None = None


@dataclass(frozen=True)
class ValidationResult:
    hits_percent: float
    mean_cost: float
    mean_makespan: float
    admissible: bool


class _SimPlan:
    """Static per-schedule arrays reused across simulation chunks."""

    def __init__(self, schedule: Schedule, workflow: Workflow, model: ExecTimeModel):
        if not schedule.is_complete(workflow):
            missing = sorted(set(workflow.tasks) - schedule.task_ids())
            raise IncompleteSchedule(f"schedule misses tasks: {missing[:5]}")
        order = execution_order(schedule, workflow)
        self.index = {tid: i for i, tid in enumerate(order)}
        self.order = order
        assigned = schedule.task_to_instance()
        inst_by_index = {inst.index: inst for inst in schedule.instances}
        self.distribution = model.distribution
        self.means = np.array([
            model.mean(workflow.tasks[tid], inst_by_index[assigned[tid]].vmtype)
            for tid in order
        ])
        queue_pred: dict[str, str] = {}
        for inst in schedule.instances:
            for a, b in zip(inst.task_list, inst.task_list[1:]):
                queue_pred[b] = a
        self.queue_pred = [
            self.index[queue_pred[tid]] if tid in queue_pred else -1 for tid in order
        ]
        self.dag_preds: list[list[tuple[int, float]]] = []
        for tid in order:
            inst = inst_by_index[assigned[tid]]
            preds = []
            for p in workflow.predecessors(tid):
                p_inst = inst_by_index[assigned[p]]
                delay = transfer_time(
                    workflow.tasks[p].output_mb,
                    p_inst.vmtype,
                    inst.vmtype,
                    co_located=p_inst.index == inst.index,
                )
                preds.append((self.index[p], delay))
            self.dag_preds.append(preds)
        self.inst_cols = [
            np.array([self.index[t] for t in inst.task_list], dtype=int)
            for inst in schedule.instances
            if inst.task_list
        ]
        self.inst_rates = np.array([
            inst.vmtype.price_per_hour / 3600.0
            for inst in schedule.instances
            if inst.task_list
        ])

    def simulate(self, seed: int, start_run: int, n_runs: int) -> tuple[np.ndarray, np.ndarray]:
        """Makespan and cost arrays for runs [start_run, start_run + n_runs)."""
        n_tasks = len(self.order)
        if self.distribution == "deterministic":
            times = np.broadcast_to(self.means, (n_runs, n_tasks))
        else:
            times = np.empty((n_runs, n_tasks))
            for r in range(n_runs):
                gen = run_stream(seed, start_run + r)
                times[r] = sample_of_mean(self.distribution, self.means, gen)
        est = np.empty((n_runs, n_tasks))
        eft = np.empty((n_runs, n_tasks))
        for i in range(n_tasks):
            qp = self.queue_pred[i]
            start = eft[:, qp].copy() if qp >= 0 else np.zeros(n_runs)
            for p, delay in self.dag_preds[i]:
                np.maximum(start, eft[:, p] + delay, out=start)
            est[:, i] = start
            eft[:, i] = start + times[:, i]
        makespans = eft.max(axis=1)
        costs = np.zeros(n_runs)
        for cols, rate in zip(self.inst_cols, self.inst_rates):
            costs += (eft[:, cols].max(axis=1) - est[:, cols].min(axis=1)) * rate
        return makespans, costs


def simulate_runs(
    schedule: Schedule,
    workflow: Workflow,
    model: ExecTimeModel,
    seed: int,
    start_run: int,
    n_runs: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Raw per-run (makespan, cost) samples; chunking-independent by stream design."""
    return _SimPlan(schedule, workflow, model).simulate(seed, start_run, n_runs)


def _halfwidth(values: np.ndarray) -> float:
    if len(values) < 2:
        return float("inf")
    sd = float(values.std(ddof=1))
    return _Z95 * sd / math.sqrt(len(values))


def evaluate(
    schedule: Schedule,
    workflow: Workflow,
    model: ExecTimeModel,
    deadline: float,
    budget: float | None = None,
    seed: int = 0,
    runs: int | None = None,
) -> EvalReport:
    """Estimate deadline-hit probability, mean cost, and mean makespan.

    With ``runs`` given, simulates exactly that many runs.  Otherwise runs
    until the 95% CI half-width of the mean makespan falls below 2% of the
    running mean, between 1,000 and 100,000 runs.
    """
    plan = _SimPlan(schedule, workflow, model)
    if runs is not None:
        if runs < 1:
            raise ValueError("runs must be >= 1")
        makespans, costs = plan.simulate(seed, 0, runs)
    else:
        makespans = np.empty(0)
        costs = np.empty(0)
        done = 0
        while True:
            target = min(max(MIN_RUNS, done * 2), MAX_RUNS)
            mk, cs = plan.simulate(seed, done, target - done)
            makespans = np.concatenate([makespans, mk])
            costs = np.concatenate([costs, cs])
            done = target
            hw = _halfwidth(makespans)
            mean = float(makespans.mean())
            if done >= MAX_RUNS or hw <= CI_REL_TARGET * mean or mean == 0.0:
                break
    n = len(makespans)
    hw = _halfwidth(makespans)
    return EvalReport(
        p_hit_deadline=float((makespans <= deadline).mean()),
        mean_makespan=float(makespans.mean()),
        mean_cost=float(costs.mean()),
        runs=n,
        ci_halfwidth_makespan=0.0 if math.isinf(hw) else hw,
        p_hit_budget=None if budget is None else float((costs <= budget).mean()),
    )


def validate_solution(
    schedule: Schedule,
    workflow: Workflow,
    model: ExecTimeModel,
    deadline: float,
    p_t: float,
    seed: int = 0,
) -> ValidationResult:
    """Independent 10,000-run check of the deadline-hit requirement."""
    report = evaluate(schedule, workflow, model, deadline, seed=seed, runs=VALIDATION_RUNS)
    hits = report.p_hit_deadline * 100.0
    return ValidationResult(
        hits_percent=hits,
        mean_cost=report.mean_cost,
        mean_makespan=report.mean_makespan,
        admissible=hits / 100.0 >= p_t,
    )
