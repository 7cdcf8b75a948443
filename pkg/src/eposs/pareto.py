"""Dominance filtering and 2-D hypervolume for (makespan, cost) fronts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .schedule import Schedule


class BadReference(ValueError):
    pass


@dataclass(frozen=True)
class FrontPoint:
    makespan: float
    cost: float
    schedule: Schedule | None = None


@dataclass(frozen=True)
class ParetoFront:
    """Mutually non-dominated points in minimization sense."""

    points: tuple[FrontPoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def objectives(self) -> list[tuple[float, float]]:
        return [(p.makespan, p.cost) for p in self.points]


def _as_points(points: Iterable) -> list[FrontPoint]:
    out = []
    for p in points:
        if isinstance(p, FrontPoint):
            out.append(p)
        else:
            m, c = p[0], p[1]
            out.append(FrontPoint(makespan=float(m), cost=float(c)))
    return out


def non_dominated(points: Iterable) -> ParetoFront:
    """Drop every point that some other point beats on both objectives.

    Weakly dominated points (equal on one coordinate, worse on the other)
    and exact duplicates are dropped too.
    """
    pts = _as_points(points)
    pts.sort(key=lambda p: (p.makespan, p.cost))
    kept: list[FrontPoint] = []
    for p in pts:
        if kept and p.cost >= kept[-1].cost:
            continue
        kept.append(p)
    return ParetoFront(points=tuple(kept))


def hypervolume(
    front: ParetoFront | Sequence,
    reference: tuple[float, float] | None = None,
) -> float:
    """Area between the front's cost staircase and the reference cost.

    Points are sorted by makespan; each segment between consecutive points
    contributes (reference cost - cost) * makespan gap, and the span from
    the last point to the reference makespan contributes at the final cost
    level.  The default reference is (max makespan, max cost) over the
    front, under which both extreme points bound zero-area strips.
    """
    pts = _as_points(front.points if isinstance(front, ParetoFront) else front)
    if not pts:
        raise ValueError("front must be non-empty")
    if reference is None:
        ref_m = max(p.makespan for p in pts)
        ref_c = max(p.cost for p in pts)
    else:
        ref_m, ref_c = float(reference[0]), float(reference[1])
        for p in pts:
            if p.makespan > ref_m or p.cost > ref_c:
                raise BadReference(
                    f"point ({p.makespan}, {p.cost}) exceeds reference ({ref_m}, {ref_c})"
                )
    pts = list(non_dominated(pts).points)
    area = 0.0
    for prev, cur in zip(pts, pts[1:]):
        area += (cur.makespan - prev.makespan) * (ref_c - cur.cost)
    area += (ref_m - pts[-1].makespan) * (ref_c - pts[-1].cost)
    return area
