"""Parametric synthetic workflow generators.

The five named topologies are simplified skeletons of well-known scientific
workflows, keeping the makespan-relevant shape (parallelism width, critical
path depth) without reproducing any trace files.  Task runtime and output
magnitudes are drawn log-uniformly, since the realistic ranges span several
orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dag import Task, Workflow
from .rng import derive_seed

TOPOLOGIES = (
    "epigenomics",
    "montage",
    "sipht",
    "cybershake",
    "ligo",
    "random-layered",
)

#: Per-topology (runtime seconds, output MB) default ranges.
DEFAULT_RANGES: dict[str, tuple[tuple[float, float], tuple[float, float]]] = {
    "epigenomics": ((0.48, 201.89), (0.90, 242.29)),
    "montage": ((0.64, 384.49), (0.10, 775.45)),
    "sipht": ((0.03, 3311.12), (0.03, 567.01)),
    "ligo": ((0.13, 0.14), (0.01, 0.13)),
    "cybershake": ((0.55, 265.73), (0.02, 176.48)),
    "random-layered": ((1.0, 100.0), (1.0, 100.0)),
}


class BadSpec(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    """Recipe for one synthetic workflow.

    ``size`` is approximate: skeletons round to their structural grain.
    Ranges default to the topology's characteristic magnitudes.
    """

    topology: str
    size: int
    seed: int = 0
    runtime_range: tuple[float, float] | None = None
    output_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise BadSpec(f"unknown topology {self.topology!r}")
        if self.size < 1:
            raise BadSpec("size must be >= 1")
        for rng in (self.runtime_range, self.output_range):
            if rng is not None and not (0 <= rng[0] <= rng[1]):
                raise BadSpec(f"bad range {rng}")


def _epigenomics(size: int, rng) -> tuple[list[str], list[tuple[str, str]]]:
    # Head fans into parallel 4-stage pipelines that re-join at a tail.
    k = max(1, round((size - 2) / 4))
    ids = ["head"]
    edges = []
    for i in range(k):
        prev = "head"
        for s in range(4):
            tid = f"p{i}_s{s}"
            ids.append(tid)
            edges.append((prev, tid))
            prev = tid
        edges.append((prev, "tail"))
    ids.append("tail")
    return ids, edges


def _montage(size: int, rng) -> tuple[list[str], list[tuple[str, str]]]:
    # Fan-out, pairwise-overlap stage, then an aggregation chain.
    k = max(2, round((size - 4) / 2))
    ids = ["src"]
    edges = []
    for i in range(k):
        ids.append(f"proj{i}")
        edges.append(("src", f"proj{i}"))
    for i in range(k - 1):
        tid = f"diff{i}"
        ids.append(tid)
        edges.append((f"proj{i}", tid))
        edges.append((f"proj{i + 1}", tid))
    chain = ["agg0", "agg1", "agg2"]
    for i in range(k - 1):
        edges.append((f"diff{i}", "agg0"))
    for a, b in zip(chain, chain[1:]):
        edges.append((a, b))
    ids.extend(chain)
    return ids, edges


def _sipht(size: int, rng) -> tuple[list[str], list[tuple[str, str]]]:
    # Wide independent stage feeding a small aggregation tree.
    groups = max(1, size // 8)
    wide = max(groups, size - groups - 1)
    ids = [f"w{i}" for i in range(wide)]
    edges = []
    for g in range(groups):
        ids.append(f"agg{g}")
    ids.append("final")
    for i in range(wide):
        edges.append((f"w{i}", f"agg{i % groups}"))
    for g in range(groups):
        edges.append((f"agg{g}", "final"))
    return ids, edges


def _cybershake(size: int, rng) -> tuple[list[str], list[tuple[str, str]]]:
    # Two fan-out levels, then two fan-in sinks fed by every leaf.
    k = max(2, round(math.sqrt(max(size - 3, 1))))
    m = max(1, round((size - 3 - k) / k))
    ids = ["src"]
    edges = []
    for i in range(k):
        ids.append(f"l1_{i}")
        edges.append(("src", f"l1_{i}"))
        for j in range(m):
            tid = f"l2_{i}_{j}"
            ids.append(tid)
            edges.append((f"l1_{i}", tid))
            edges.append((tid, "zip"))
            edges.append((tid, "zip_p"))
    ids.extend(["zip", "zip_p"])
    return ids, edges


def _ligo(size: int, rng) -> tuple[list[str], list[tuple[str, str]]]:
    # Repeated fan-out/fan-in blocks in series.
    width = 4
    blocks = max(1, round(size / (width + 2)))
    ids = []
    edges = []
    prev_join = None
    for b in range(blocks):
        split, join = f"split{b}", f"join{b}"
        ids.append(split)
        if prev_join is not None:
            edges.append((prev_join, split))
        for i in range(width):
            tid = f"b{b}_t{i}"
            ids.append(tid)
            edges.append((split, tid))
            edges.append((tid, join))
        ids.append(join)
        prev_join = join
    return ids, edges


def _random_layered(size: int, rng) -> tuple[list[str], list[tuple[str, str]]]:
    ids = []
    edges = []
    layers: list[list[str]] = []
    count = 0
    while count < size:
        max_width = max(1, min(size - count, max(2, size // 4)))
        width = int(rng.integers(1, max_width + 1))
        layer = [f"t{count + i}" for i in range(width)]
        ids.extend(layer)
        if layers:
            prev = layers[-1]
            for tid in layer:
                n_parents = int(rng.integers(1, min(3, len(prev)) + 1))
                parents = rng.choice(len(prev), size=n_parents, replace=False)
                for p in sorted(parents):
                    edges.append((prev[p], tid))
        layers.append(layer)
        count += width
    return ids, edges


_BUILDERS = {
    "epigenomics": _epigenomics,
    "montage": _montage,
    "sipht": _sipht,
    "cybershake": _cybershake,
    "ligo": _ligo,
    "random-layered": _random_layered,
}


def _log_uniform(rng, lo: float, hi: float, n: int) -> np.ndarray:
    if lo <= 0 or hi <= 0:
        return rng.uniform(lo, hi, n)
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def generate(spec: GenSpec) -> Workflow:
    """Build a validated workflow from ``spec``; identical specs yield
    identical workflows."""
    rng = np.random.default_rng(derive_seed(spec.seed, spec.size, spec.topology))
    ids, edges = _BUILDERS[spec.topology](spec.size, rng)
    run_lo, run_hi = spec.runtime_range or DEFAULT_RANGES[spec.topology][0]
    out_lo, out_hi = spec.output_range or DEFAULT_RANGES[spec.topology][1]
    runtimes = _log_uniform(rng, run_lo, run_hi, len(ids))
    outputs = _log_uniform(rng, out_lo, out_hi, len(ids))
    tasks = [
        Task(id=tid, runtime=float(r), output_mb=float(o))
        for tid, r, o in zip(ids, runtimes, outputs)
    ]
    wf = Workflow(tasks, edges)
    wf.validate()
    return wf


def scale_series(base: GenSpec, sizes: list[int]) -> list[Workflow]:
    """The same topology at several sizes, deterministic per (seed, size)."""
    return [generate(replace(base, size=s)) for s in sizes]
