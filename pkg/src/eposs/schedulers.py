"""Deterministic list schedulers: HEFT, GreedyCost, and constrained MOHEFT.

All three process tasks in B-Rank order and repeatedly extend partial
schedules by appending the next task to an open VM or to one fresh VM per
catalog type.  MOHEFT keeps the K most spread-out trade-off solutions
(crowding distance over makespan and cost) at every step and can prune
extensions that violate the deadline or the resource quotas.
"""

from __future__ import annotations

import time
import zlib
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass
from typing import Mapping

from .cloud import VmCatalog, VmType
from .dag import Workflow, b_rank
from .schedule import Schedule, VmInstance, _sweep_quotas


class NoFeasibleSolution(RuntimeError):
    def __init__(self, task_index: int, task_id: str):
        self.task_index = task_index
        self.task_id = task_id
        super().__init__(
            f"no feasible extension while scheduling task #{task_index} ({task_id!r})"
        )


class SchedulerTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class Candidate:
    """A complete schedule with its cached objective pair."""

    schedule: Schedule
    makespan: float
    cost: float


TimeTable = Mapping[tuple[str, str], float]


def _crc(value: str, seed: int = 0) -> int:
    return zlib.crc32(value.encode(), seed)


class _Partial:
    """Mutable partial schedule with cached times and running objectives.

    Queues are append-only, so adding a task never moves earlier ones;
    children share their parent's containers copy-on-write.  ``tails`` keeps
    each type's queue-tail finish times sorted for O(log n) target lookup,
    and ``sig`` is an order-independent fingerprint of the schedule used to
    drop duplicate solutions cheaply.
    """

    __slots__ = (
        "vm_types", "vm_tasks", "vm_start", "vm_stop", "vm_hash",
        "tails", "eft", "task_vm", "cost", "makespan", "sig",
    )

    def __init__(self):
        self.vm_types: list[VmType] = []
        self.vm_tasks: list[tuple[str, ...]] = []
        self.vm_start: list[float] = []
        self.vm_stop: list[float] = []
        self.vm_hash: list[int] = []
        self.tails: dict[str, list[tuple[float, int]]] = {}
        self.eft: dict[str, float] = {}
        self.task_vm: dict[str, int] = {}
        self.cost = 0.0
        self.makespan = 0.0
        self.sig = 0

    def child(self) -> "_Partial":
        c = _Partial.__new__(_Partial)
        c.vm_types = self.vm_types.copy()
        c.vm_tasks = self.vm_tasks.copy()
        c.vm_start = self.vm_start.copy()
        c.vm_stop = self.vm_stop.copy()
        c.vm_hash = self.vm_hash.copy()
        c.tails = self.tails.copy()  # lists replaced copy-on-write in apply()
        c.eft = self.eft.copy()
        c.task_vm = self.task_vm.copy()
        c.cost = self.cost
        c.makespan = self.makespan
        c.sig = self.sig
        return c

    def place(
        self,
        preds: list[str],
        mb8: Mapping[str, float],
        exec_t: float,
        inst: int | None,
        vmtype: VmType,
    ) -> tuple[float, float, float, float]:
        """Metrics of appending a task without mutating: (est, eft, cost', makespan')."""
        ready = 0.0
        bw_dst = vmtype.bandwidth_mbps
        for p in preds:
            pi = self.task_vm[p]
            t = self.eft[p]
            if pi != inst:
                megabits = mb8[p]
                if megabits:
                    src_bw = self.vm_types[pi].bandwidth_mbps
                    t += megabits / (src_bw if src_bw < bw_dst else bw_dst)
            if t > ready:
                ready = t
        if inst is None:
            est = ready
            delta = exec_t
        else:
            stop = self.vm_stop[inst]
            est = ready if ready > stop else stop
            delta = est + exec_t - stop
        eft = est + exec_t
        cost = self.cost + delta * vmtype.price_per_hour / 3600.0
        return est, eft, cost, max(self.makespan, eft)

    def apply(self, task_id: str, inst: int | None, vmtype: VmType,
              est: float, eft: float, cost: float, makespan: float) -> None:
        name = vmtype.name
        tail_list = self.tails.get(name)
        if inst is None:
            inst = len(self.vm_types)
            self.vm_types.append(vmtype)
            self.vm_tasks.append((task_id,))
            self.vm_start.append(est)
            self.vm_stop.append(eft)
            new_hash = _crc(task_id, _crc(name))
            self.vm_hash.append(new_hash)
            self.sig += new_hash
            new_tails = [] if tail_list is None else tail_list.copy()
            insort(new_tails, (eft, inst))
        else:
            old_stop = self.vm_stop[inst]
            pos = bisect_left(tail_list, (old_stop, inst))
            new_tails = tail_list.copy()
            del new_tails[pos]
            insort(new_tails, (eft, inst))
            self.vm_tasks[inst] = self.vm_tasks[inst] + (task_id,)
            self.vm_stop[inst] = eft
            old_hash = self.vm_hash[inst]
            new_hash = _crc(task_id, old_hash)
            self.vm_hash[inst] = new_hash
            self.sig += new_hash - old_hash
        self.tails[name] = new_tails
        self.eft[task_id] = eft
        self.task_vm[task_id] = inst
        self.cost = cost
        self.makespan = makespan

    def spans_with(self, inst: int | None, vmtype: VmType,
                   est: float, eft: float) -> list[tuple[float, float, VmType]]:
        spans = [
            (s, e if i != inst else eft, t)
            for i, (s, e, t) in enumerate(zip(self.vm_start, self.vm_stop, self.vm_types))
        ]
        if inst is None:
            spans.append((est, eft, vmtype))
        return spans

    def to_schedule(self) -> Schedule:
        return Schedule(instances=tuple(
            VmInstance(index=i, vmtype=t, task_list=tasks)
            for i, (t, tasks) in enumerate(zip(self.vm_types, self.vm_tasks))
        ))


def rank_order(workflow: Workflow, catalog: VmCatalog, times: TimeTable) -> list[str]:
    """B-Rank order using per-task means over the catalog types.

    Edge weights use the catalog-mean bandwidth, mirroring HEFT's averaging
    convention for heterogeneous machines.
    """
    n = len(catalog.types)
    mean_times = {
        tid: sum(times[(tid, t.name)] for t in catalog.types) / n
        for tid in workflow.tasks
    }
    mean_bw = catalog.mean_bandwidth()
    transfers = {
        (a, b): workflow.tasks[a].output_mb * 8.0 / mean_bw
        for a, b in workflow.edges
    }
    return list(b_rank(workflow, mean_times, transfers).order)


def _megabits(workflow: Workflow) -> dict[str, float]:
    return {tid: t.output_mb * 8.0 for tid, t in workflow.tasks.items()}


def _greedy(workflow: Workflow, catalog: VmCatalog, times: TimeTable, by_cost: bool) -> Schedule:
    workflow.validate()
    mb8 = _megabits(workflow)
    par = _Partial()
    for tid in rank_order(workflow, catalog, times):
        preds = workflow.predecessors(tid)
        best = None
        best_key = None
        targets = [(i, t) for i, t in enumerate(par.vm_types)]
        targets += [(None, t) for t in catalog.types]
        for pos, (inst, vmtype) in enumerate(targets):
            exec_t = times[(tid, vmtype.name)]
            est, eft, cost, mk = par.place(preds, mb8, exec_t, inst, vmtype)
            key = (cost, eft, pos) if by_cost else (eft, cost, pos)
            if best_key is None or key < best_key:
                best_key = key
                best = (inst, vmtype, est, eft, cost, mk)
        par.apply(tid, *best)
    return par.to_schedule()


def heft(workflow: Workflow, catalog: VmCatalog, times: TimeTable) -> Schedule:
    """Assign each ranked task to the VM minimizing its finish time."""
    return _greedy(workflow, catalog, times, by_cost=False)


def greedy_cost(workflow: Workflow, catalog: VmCatalog, times: TimeTable) -> Schedule:
    """Assign each ranked task to the VM minimizing the incremental cost."""
    return _greedy(workflow, catalog, times, by_cost=True)


def _crowding_indices(pairs: list[tuple[float, float]], k: int) -> list[int]:
    """Indices of the k most spread-out points in (makespan, cost) space.

    Extreme points per objective get infinite distance; interior points get
    the sum of min-max normalized neighbor gaps.  Ties break toward lower
    cost, then lower makespan.
    """
    n = len(pairs)
    if n <= k:
        return list(range(n))
    inf = float("inf")
    dist = [0.0] * n
    for obj in (0, 1):
        order = sorted(range(n), key=lambda i: pairs[i][obj])
        lo, hi = pairs[order[0]][obj], pairs[order[-1]][obj]
        span = hi - lo
        dist[order[0]] = inf
        dist[order[-1]] = inf
        if span <= 0.0:
            continue
        for j in range(1, n - 1):
            i = order[j]
            if dist[i] != inf:
                dist[i] += (pairs[order[j + 1]][obj] - pairs[order[j - 1]][obj]) / span
    chosen = sorted(range(n), key=lambda i: (-dist[i], pairs[i][1], pairs[i][0], i))
    return chosen[:k]


def crowding_select(candidates: list[Candidate], k: int) -> list[Candidate]:
    """Keep the k candidates with the highest crowding distance."""
    idx = _crowding_indices([(c.makespan, c.cost) for c in candidates], k)
    return [candidates[i] for i in idx]


def _extension_targets(
    par: _Partial,
    preds: list[str],
    mb8: Mapping[str, float],
    catalog: VmCatalog,
) -> list[tuple[int | None, VmType]]:
    """Open-VM targets worth appending the task to, plus one fresh per type.

    Appending to two same-typed instances that host none of the task's
    predecessors differs only through the queue tail: among tails at or
    before the task's ready time the latest one weakly dominates (same
    finish, less idle cost), and among tails after it the earliest one does
    (same cost, earlier finish).  Probing the two tails on each side of the
    ready time per type, every predecessor-hosting instance (co-location
    changes the ready time), and a fresh instance per type covers the
    extensions that can be single-step Pareto-optimal while keeping the
    work per task independent of pool size.
    """
    pred_insts = sorted({par.task_vm[p] for p in preds})
    pred_set = set(pred_insts)
    targets: list[tuple[int | None, VmType]] = [(i, par.vm_types[i]) for i in pred_insts]
    for vmtype in catalog.types:
        tail_list = par.tails.get(vmtype.name)
        if tail_list:
            rr = 0.0
            bw_dst = vmtype.bandwidth_mbps
            for p in preds:
                t = par.eft[p]
                megabits = mb8[p]
                if megabits:
                    src_bw = par.vm_types[par.task_vm[p]].bandwidth_mbps
                    t += megabits / (src_bw if src_bw < bw_dst else bw_dst)
                if t > rr:
                    rr = t
            pos = bisect_right(tail_list, (rr, float("inf")))
            for j in (pos - 1, pos - 2, pos, pos + 1):
                if 0 <= j < len(tail_list):
                    idx = tail_list[j][1]
                    if idx not in pred_set:
                        targets.append((idx, vmtype))
        targets.append((None, vmtype))
    seen: set[tuple] = set()
    out: list[tuple[int | None, VmType]] = []
    for inst, vmtype in targets:
        key = (inst, vmtype.name)
        if key not in seen:
            seen.add(key)
            out.append((inst, vmtype))
    return out


def moheft(
    workflow: Workflow,
    catalog: VmCatalog,
    times: TimeTable,
    k: int = 10,
    deadline: float | None = None,
    enforce_quotas: bool = True,
    time_budget: float | None = None,
) -> list[Candidate]:
    """Constraint-aware MOHEFT.

    Extends every surviving partial solution with the next ranked task onto
    open VMs and one fresh VM per type (narrowed to the targets that can be
    single-step Pareto-optimal, see ``_extension_targets``), discards
    extensions that break the deadline or the quotas, then keeps the K
    highest-crowding-distance candidates.  Returns the final complete
    schedules sorted by (cost, makespan).

    Raises ``NoFeasibleSolution`` when every extension of every survivor is
    infeasible at some step, and ``SchedulerTimeout`` when ``time_budget``
    seconds elapse before completion.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    workflow.validate()
    mb8 = _megabits(workflow)
    check_quotas = enforce_quotas and (
        catalog.quota_total is not None or bool(catalog.quota_per_type)
    )
    started = time.monotonic()
    population: list[_Partial] = [_Partial()]
    for rank_idx, tid in enumerate(rank_order(workflow, catalog, times)):
        if time_budget is not None and time.monotonic() - started > time_budget:
            raise SchedulerTimeout(f"time budget exceeded at task #{rank_idx}")
        preds = workflow.predecessors(tid)
        extensions: list[tuple[int, int | None, VmType, float, float, float, float]] = []
        for par_idx, par in enumerate(population):
            for inst, vmtype in _extension_targets(par, preds, mb8, catalog):
                exec_t = times[(tid, vmtype.name)]
                est, eft, cost, mk = par.place(preds, mb8, exec_t, inst, vmtype)
                if deadline is not None and mk > deadline:
                    continue
                if check_quotas and not _sweep_quotas(
                    par.spans_with(inst, vmtype, est, eft), catalog
                ):
                    continue
                extensions.append((par_idx, inst, vmtype, est, eft, cost, mk))
        if not extensions:
            raise NoFeasibleSolution(rank_idx, tid)
        keep = _crowding_indices([(e[6], e[5]) for e in extensions], k)
        survivors: list[_Partial] = []
        seen: set[int] = set()
        for i in keep:
            par_idx, inst, vmtype, est, eft, cost, mk = extensions[i]
            child = population[par_idx].child()
            child.apply(tid, inst, vmtype, est, eft, cost, mk)
            if child.sig in seen:
                continue
            seen.add(child.sig)
            survivors.append(child)
        population = survivors
    result = [Candidate(p.to_schedule(), p.makespan, p.cost) for p in population]
    result.sort(key=lambda c: (c.cost, c.makespan))
    return result
