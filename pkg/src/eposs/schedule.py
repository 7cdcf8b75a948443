"""Solution representation: timelines, expected cost, and constraint checking.

A schedule assigns every task to a concrete VM instance; tasks on one
instance execute serially in list order.  A VM is provisioned at its first
task's start and released at its last task's finish, and is billed pro rata
over that span.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .cloud import VmCatalog, VmType, transfer_time
from .dag import Workflow


class UnscheduledPredecessor(ValueError):
    pass


class MalformedSchedule(ValueError):
    pass


@dataclass(frozen=True)
class VmInstance:
    """One VM in the pool: its type and the ordered tasks it runs."""

    index: int
    vmtype: VmType
    task_list: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.task_list)) != len(self.task_list):
            raise MalformedSchedule(f"instance {self.index}: duplicate tasks in list")


@dataclass(frozen=True)
class Schedule:
    instances: tuple[VmInstance, ...]

    def task_to_instance(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for inst in self.instances:
            for tid in inst.task_list:
                if tid in out:
                    raise MalformedSchedule(f"task {tid!r} assigned to multiple instances")
                out[tid] = inst.index
        return out

    def task_ids(self) -> set[str]:
        return set(self.task_to_instance())

    def is_complete(self, workflow: Workflow) -> bool:
        return self.task_ids() == set(workflow.tasks)

    def signature(self) -> tuple:
        """Canonical identity ignoring instance numbering."""
        return tuple(sorted((i.vmtype.name, i.task_list) for i in self.instances))

    def to_json(self) -> list[dict]:
        return [{"type": i.vmtype.name, "tasks": list(i.task_list)} for i in self.instances]

    @classmethod
    def from_json(cls, data: list[dict], catalog: VmCatalog) -> "Schedule":
        instances = tuple(
            VmInstance(index=i, vmtype=catalog.type_named(d["type"]), task_list=tuple(d["tasks"]))
            for i, d in enumerate(data)
        )
        return cls(instances=instances)

    @classmethod
    def load(cls, path: str | Path, catalog: VmCatalog) -> "Schedule":
        with open(path) as fh:
            return cls.from_json(json.load(fh), catalog)

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


@dataclass(frozen=True)
class Timeline:
    """Expected start/finish times for every scheduled task and VM span."""

    est: dict[str, float]
    eft: dict[str, float]
    vm_start: tuple[float, ...]
    vm_stop: tuple[float, ...]
    makespan: float


def execution_order(schedule: Schedule, workflow: Workflow) -> list[str]:
    """Topological order of the DAG edges merged with each VM's queue order.

    Raises ``UnscheduledPredecessor`` when a scheduled task depends on an
    unscheduled one, and ``MalformedSchedule`` when queue order conflicts
    with the task dependencies (the combined graph has a cycle).
    """
    assigned = schedule.task_to_instance()
    indeg = {tid: 0 for tid in assigned}
    succs: dict[str, list[str]] = {tid: [] for tid in assigned}
    for tid in assigned:
        for p in workflow.predecessors(tid):
            if p not in assigned:
                raise UnscheduledPredecessor(f"task {tid!r} depends on unscheduled {p!r}")
            succs[p].append(tid)
            indeg[tid] += 1
    for inst in schedule.instances:
        for a, b in zip(inst.task_list, inst.task_list[1:]):
            succs[a].append(b)
            indeg[b] += 1
    ready = [tid for tid, d in indeg.items() if d == 0]
    order: list[str] = []
    while ready:
        tid = ready.pop()
        order.append(tid)
        for s in succs[tid]:
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
    if len(order) < len(assigned):
        raise MalformedSchedule("VM queue order conflicts with task dependencies")
    return order


def compute_timeline(
    schedule: Schedule,
    workflow: Workflow,
    times: Mapping[tuple[str, str], float],
) -> Timeline:
    """Expected start/finish times under deterministic ``times``.

    est(v) = max(finish of v's queue predecessor,
                 max over DAG predecessors u of eft(u) + transfer(u -> v));
    transfers are free between co-located tasks.
    """
    assigned = schedule.task_to_instance()
    inst_by_index = {inst.index: inst for inst in schedule.instances}
    queue_pred: dict[str, str] = {}
    for inst in schedule.instances:
        for a, b in zip(inst.task_list, inst.task_list[1:]):
            queue_pred[b] = a
    est: dict[str, float] = {}
    eft: dict[str, float] = {}
    for tid in execution_order(schedule, workflow):
        inst = inst_by_index[assigned[tid]]
        start = 0.0
        qp = queue_pred.get(tid)
        if qp is not None:
            start = eft[qp]
        for p in workflow.predecessors(tid):
            p_inst = inst_by_index[assigned[p]]
            delay = transfer_time(
                workflow.tasks[p].output_mb,
                p_inst.vmtype,
                inst.vmtype,
                co_located=p_inst.index == inst.index,
            )
            start = max(start, eft[p] + delay)
        est[tid] = start
        eft[tid] = start + times[(tid, inst.vmtype.name)]
    vm_start = []
    vm_stop = []
    for inst in schedule.instances:
        if inst.task_list:
            vm_start.append(min(est[t] for t in inst.task_list))
            vm_stop.append(max(eft[t] for t in inst.task_list))
        else:
            vm_start.append(0.0)
            vm_stop.append(0.0)
    makespan = max(eft.values()) if eft else 0.0
    return Timeline(
        est=est,
        eft=eft,
        vm_start=tuple(vm_start),
        vm_stop=tuple(vm_stop),
        makespan=makespan,
    )


def expected_cost(schedule: Schedule, timeline: Timeline) -> float:
    """Sum over instances of span length times the hourly price."""
    total = 0.0
    for inst, start, stop in zip(schedule.instances, timeline.vm_start, timeline.vm_stop):
        total += (stop - start) / 3600.0 * inst.vmtype.price_per_hour
    return total


def _sweep_quotas(
    spans: list[tuple[float, float, VmType]],
    catalog: VmCatalog,
) -> bool:
    """Sweep allocation/deallocation events accumulating resource usage.

    At equal timestamps deallocations are processed first, so a VM released
    at t frees capacity for one starting at t.
    """
    total_cap = catalog.quota_total
    per_type = catalog.quota_per_type
    if total_cap is None and not per_type:
        return True
    events: list[tuple[float, int, VmType]] = []
    for start, stop, vmtype in spans:
        events.append((start, +1, vmtype))
        events.append((stop, -1, vmtype))
    events.sort(key=lambda e: (e[0], e[1]))
    used = 0.0
    used_by_type: dict[str, int] = {}
    for _, delta, vmtype in events:
        weight = vmtype.vcpus if catalog.quota_unit == "vcpus" else 1
        used += delta * weight
        used_by_type[vmtype.name] = used_by_type.get(vmtype.name, 0) + delta
        if total_cap is not None and used > total_cap:
            return False
        cap = per_type.get(vmtype.name)
        if cap is not None and used_by_type[vmtype.name] > cap:
            return False
    return True


def feasible(
    schedule: Schedule,
    deadline: float | None,
    catalog: VmCatalog,
    timeline: Timeline,
) -> bool:
    """Deadline test plus the resource-quota sweep.

    With ``deadline=None`` and no quotas configured this always holds.
    Partial schedules are checked over their scheduled prefix only.
    """
    if deadline is not None and timeline.makespan > deadline:
        return False
    spans = [
        (start, stop, inst.vmtype)
        for inst, start, stop in zip(schedule.instances, timeline.vm_start, timeline.vm_stop)
        if inst.task_list
    ]
    return _sweep_quotas(spans, catalog)
