"""Workflow DAG model and the B-Rank task ordering used by the list schedulers."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping


class WorkflowError(ValueError):
    """Base class for workflow structure errors."""


class CycleDetected(WorkflowError):
    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__(f"workflow contains a cycle: {' -> '.join(self.cycle)}")


class DanglingEdge(WorkflowError):
    def __init__(self, task_id: str):
        self.task_id = task_id
        super().__init__(f"edge references unknown task {task_id!r}")


class MissingTime(WorkflowError):
    def __init__(self, task_id: str):
        self.task_id = task_id
        super().__init__(f"no mean time supplied for task {task_id!r}")


@dataclass(frozen=True)
class Task:
    """A workflow task.

    ``runtime`` is the mean execution time in seconds on a 1-vCPU reference
    machine; ``output_mb`` is the size of the data the task writes, in MB.
    """

    id: str
    runtime: float
    output_mb: float = 0.0

    def __post_init__(self):
        if self.runtime < 0:
            raise ValueError(f"task {self.id!r}: runtime must be >= 0")
        if self.output_mb < 0:
            raise ValueError(f"task {self.id!r}: output_mb must be >= 0")


class Workflow:
    """An immutable DAG of tasks.

    Construction only stores the graph; call :meth:`validate` to check the
    structural invariants (acyclic, no dangling edges).
    """

    def __init__(self, tasks: Iterable[Task], edges: Iterable[tuple[str, str]] = ()):
        task_map: dict[str, Task] = {}
        for t in tasks:
            if t.id in task_map:
                raise ValueError(f"duplicate task id {t.id!r}")
            task_map[t.id] = t
        self.tasks: dict[str, Task] = task_map
        # Duplicate edges carry no information; drop them but keep insertion order.
        self.edges: tuple[tuple[str, str], ...] = tuple(dict.fromkeys((a, b) for a, b in edges))
        self._preds: dict[str, list[str]] = {tid: [] for tid in task_map}
        self._succs: dict[str, list[str]] = {tid: [] for tid in task_map}
        for a, b in self.edges:
            if a in self._succs and b in self._preds:
                self._succs[a].append(b)
                self._preds[b].append(a)

    def __len__(self) -> int:
        return len(self.tasks)

    def predecessors(self, task_id: str) -> list[str]:
        return self._preds[task_id]

    def successors(self, task_id: str) -> list[str]:
        return self._succs[task_id]

    def sources(self) -> list[str]:
        return [tid for tid in self.tasks if not self._preds[tid]]

    def sinks(self) -> list[str]:
        return [tid for tid in self.tasks if not self._succs[tid]]

    def validate(self) -> None:
        """Raise ``DanglingEdge`` or ``CycleDetected`` if the graph is malformed."""
        for a, b in self.edges:
            if a not in self.tasks:
                raise DanglingEdge(a)
            if b not in self.tasks:
                raise DanglingEdge(b)
        self.topological_order()

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; raises ``CycleDetected`` naming one cycle."""
        indeg = {tid: len(ps) for tid, ps in self._preds.items()}
        ready = sorted(tid for tid, d in indeg.items() if d == 0)
        order: list[str] = []
        while ready:
            tid = ready.pop(0)
            order.append(tid)
            for s in self._succs[tid]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
        if len(order) < len(self.tasks):
            raise CycleDetected(self._find_cycle())
        return order

    def _find_cycle(self) -> list[str]:
        # DFS restricted to nodes that Kahn's algorithm could not clear.
        state: dict[str, int] = {}
        stack: list[str] = []

        def visit(tid: str) -> list[str] | None:
            state[tid] = 1
            stack.append(tid)
            for s in self._succs[tid]:
                if state.get(s) == 1:
                    return stack[stack.index(s):] + [s]
                if s not in state:
                    found = visit(s)
                    if found:
                        return found
            stack.pop()
            state[tid] = 2
            return None

        for tid in self.tasks:
            if tid not in state:
                found = visit(tid)
                if found:
                    return found
        return []

    def to_json(self) -> dict:
        return {
            "tasks": [
                {"id": t.id, "runtime": t.runtime, "output_mb": t.output_mb}
                for t in self.tasks.values()
            ],
            "edges": [[a, b] for a, b in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Workflow":
        tasks = [
            Task(id=str(d["id"]), runtime=float(d["runtime"]), output_mb=float(d.get("output_mb", 0.0)))
            for d in data["tasks"]
        ]
        edges = [(str(a), str(b)) for a, b in data.get("edges", [])]
        wf = cls(tasks, edges)
        wf.validate()
        return wf

    @classmethod
    def load(cls, path: str | Path) -> "Workflow":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


@dataclass(frozen=True)
class RankedTasks:
    """Task ids sorted by descending B-Rank (upward rank); ties by ascending id."""

    order: tuple[str, ...]
    ranks: dict[str, float]


def b_rank(
    workflow: Workflow,
    mean_times: Mapping[str, float],
    transfer_times: Mapping[tuple[str, str], float] | None = None,
) -> RankedTasks:
    """Compute the upward rank of every task.

    rank(v) = mean_time(v) + max over successors u of (rank(u) + transfer(v, u));
    sinks have rank(v) = mean_time(v).  The returned order is a topological
    order of the workflow (preceded tasks rank strictly higher when all times
    are positive).
    """
    for tid in workflow.tasks:
        if tid not in mean_times:
            raise MissingTime(tid)
    transfer_times = transfer_times or {}
    ranks: dict[str, float] = {}
    for tid in reversed(workflow.topological_order()):
        best = 0.0
        for s in workflow.successors(tid):
            best = max(best, ranks[s] + transfer_times.get((tid, s), 0.0))
        ranks[tid] = mean_times[tid] + best
    order = tuple(sorted(ranks, key=lambda t: (-ranks[t], t)))
    return RankedTasks(order=order, ranks=ranks)
