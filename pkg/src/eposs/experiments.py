"""Experiment plans: run algorithm grids, validate solutions, write result tables."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .cloud import (
    CATALOG_SUBSETS,
    DISTRIBUTIONS,
    SCENARIOS,
    ExecTimeModel,
    VmCatalog,
    catalog_subset,
)
from .dag import Workflow
from .generators import GenSpec, generate
from .montecarlo import validate_solution
from .pareto import ParetoFront
from .rng import derive_seed
from .schedule import Schedule
from .schedulers import NoFeasibleSolution, SchedulerTimeout, greedy_cost, heft, moheft
from .search import ConfigError, SearchConfig, eposs, m_eposs, p_eposs

ALGORITHMS = ("heft", "greedy-cost", "moheft", "eposs", "p-eposs", "m-eposs")


class LoadError(ValueError):
    pass


@dataclass(frozen=True)
class WorkflowRef:
    name: str
    path: Path | None = None
    genspec: GenSpec | None = None

    def load(self) -> Workflow:
        if self.path is not None:
            try:
                return Workflow.load(self.path)
            except OSError as exc:
                raise LoadError(f"workflow {self.name!r}: {exc}") from exc
        return generate(self.genspec)


@dataclass(frozen=True)
class VmSubsetRef:
    name: str
    type_names: tuple[str, ...] = ()  # empty means a named preset or all types

    def resolve(self, catalog: VmCatalog) -> VmCatalog:
        if self.type_names:
            return catalog.subset(list(self.type_names))
        if self.name.lower() in CATALOG_SUBSETS:
            return catalog_subset(catalog, self.name)
        if self.name == "all":
            return catalog
        raise ConfigError(f"vm_subsets: unknown subset {self.name!r}")


@dataclass
class ExperimentPlan:
    workflows: list[WorkflowRef]
    algorithms: list[str]
    vm_subsets: list[VmSubsetRef]
    p_t_values: list[float]
    deadlines: dict[str, float]
    distribution: str = "gamma"
    scenario: str = "A"
    repetitions: int = 1
    base_seed: int = 0
    epsilon: float = 0.02
    k: int = 10
    parallelism: int = 4
    budget: float = 10.0
    p_c: float = 0.9
    quota_vcpus: float | None = None
    quota_vms: int | None = None
    quota_per_type: dict[str, int] = field(default_factory=dict)
    timeout_s: float | None = None
    catalog_path: Path | None = None

    def validate(self) -> None:
        if not self.workflows:
            raise ConfigError("workflows: empty axis")
        if not self.algorithms:
            raise ConfigError("algorithms: empty axis")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"algorithms: unknown algorithm {a!r}")
        if not self.vm_subsets:
            raise ConfigError("vm_subsets: empty axis")
        if not self.p_t_values:
            raise ConfigError("p_t: empty axis")
        for ref in self.workflows:
            if ref.name not in self.deadlines:
                raise ConfigError(f"deadlines: no deadline for workflow {ref.name!r}")
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"distribution: unknown {self.distribution!r}")
        if self.scenario.upper() not in SCENARIOS:
            raise ConfigError(f"scenario: unknown {self.scenario!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions: must be >= 1")
        if self.quota_vcpus is not None and self.quota_vms is not None:
            raise ConfigError("quotas: set quota_vcpus or quota_vms, not both")


def load_plan(path: str | Path) -> ExperimentPlan:
    path = Path(path)
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read plan: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"malformed plan JSON: {exc}") from exc
    return plan_from_json(data, base_dir=path.parent)


def plan_from_json(data: dict, base_dir: Path | None = None) -> ExperimentPlan:
    base_dir = base_dir or Path.cwd()
    workflows = []
    for w in data.get("workflows", []):
        name = w.get("name")
        if not name:
            raise ConfigError("workflows: entry without a name")
        if "file" in w:
            workflows.append(WorkflowRef(name=name, path=base_dir / w["file"]))
        elif "generate" in w:
            g = dict(w["generate"])
            workflows.append(WorkflowRef(name=name, genspec=GenSpec(
                topology=g["topology"],
                size=int(g["size"]),
                seed=int(g.get("seed", 0)),
                runtime_range=tuple(g["runtime_range"]) if "runtime_range" in g else None,
                output_range=tuple(g["output_range"]) if "output_range" in g else None,
            )))
        else:
            raise ConfigError(f"workflows: {name!r} needs 'file' or 'generate'")
    subsets = []
    for s in data.get("vm_subsets", []):
        if isinstance(s, str):
            subsets.append(VmSubsetRef(name=s))
        else:
            subsets.append(VmSubsetRef(name=s["name"], type_names=tuple(s.get("types", ()))))
    plan = ExperimentPlan(
        workflows=workflows,
        algorithms=list(data.get("algorithms", [])),
        vm_subsets=subsets,
        p_t_values=[float(p) for p in data.get("p_t", [])],
        deadlines={str(k): float(v) for k, v in data.get("deadlines", {}).items()},
        distribution=data.get("distribution", "gamma"),
        scenario=data.get("scenario", "A"),
        repetitions=int(data.get("repetitions", 1)),
        base_seed=int(data.get("base_seed", 0)),
        epsilon=float(data.get("epsilon", 0.02)),
        k=int(data.get("k", 10)),
        parallelism=int(data.get("parallelism", 4)),
        budget=float(data.get("budget", 10.0)),
        p_c=float(data.get("p_c", 0.9)),
        quota_vcpus=data.get("quota_vcpus"),
        quota_vms=data.get("quota_vms"),
        quota_per_type={str(k): int(v) for k, v in data.get("quota_per_type", {}).items()},
        timeout_s=data.get("timeout_s"),
        catalog_path=(base_dir / data["catalog"]) if "catalog" in data else None,
    )
    plan.validate()
    return plan


@dataclass
class ResultRow:
    index: int
    workflow: str
    algorithm: str
    vm_subset: str
    p_t: float
    distribution: str
    scenario: str
    repetition: int
    seed: int
    deadline: float
    hits_percent: float
    admissible: bool
    mean_cost: float | None
    mean_makespan: float | None
    algo_runtime_seconds: float
    timeout: bool
    solution: Schedule | None = None
    front: ParetoFront | None = None


def run_algorithm(
    algorithm: str,
    workflow: Workflow,
    catalog: VmCatalog,
    model: ExecTimeModel,
    deadline: float,
    p_t: float,
    *,
    epsilon: float = 0.02,
    k: int = 10,
    parallelism: int = 4,
    budget: float = 10.0,
    p_c: float = 0.9,
    seed: int = 0,
    time_budget: float | None = None,
) -> tuple[Schedule | None, ParetoFront | None, bool]:
    """Run one scheduler; returns (schedule, front, timed_out).

    Deterministic baselines ignore ``seed``; MOHEFT and the searches enforce
    the deadline and any catalog quotas.
    """
    front = None
    timed_out = False
    schedule = None
    if algorithm in ("heft", "greedy-cost"):
        table = model.time_table(workflow)
        fn = heft if algorithm == "heft" else greedy_cost
        schedule = fn(workflow, catalog, table)
    elif algorithm == "moheft":
        table = model.time_table(workflow)
        try:
            candidates = moheft(
                workflow, catalog, table, k=k,
                deadline=deadline, time_budget=time_budget,
            )
            schedule = candidates[0].schedule
        except NoFeasibleSolution:
            schedule = None
        except SchedulerTimeout:
            timed_out = True
    elif algorithm in ("eposs", "p-eposs"):
        cfg = SearchConfig(
            deadline=deadline, p_t=p_t, epsilon=epsilon, k=k, parallelism=parallelism,
        )
        fn = eposs if algorithm == "eposs" else p_eposs
        result = fn(workflow, catalog, model, cfg, seed=seed, time_budget=time_budget)
        schedule = result.best
        timed_out = result.timed_out
    elif algorithm == "m-eposs":
        cfg = SearchConfig(
            deadline=deadline, p_t=p_t, epsilon=epsilon, k=k,
            parallelism=parallelism, budget=budget, p_c=p_c,
        )
        front = m_eposs(workflow, catalog, model, cfg, seed=seed, time_budget=time_budget)
        if front.points:
            cheapest = min(front.points, key=lambda p: (p.cost, p.makespan))
            schedule = cheapest.schedule
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    return schedule, front, timed_out


def run_plan(plan: ExperimentPlan) -> list[ResultRow]:
    """Execute every configuration x repetition and validate each solution.

    Timing covers the scheduling algorithm only; the 10,000-run validation
    is a separate protocol and excluded from ``algo_runtime_seconds``.
    """
    plan.validate()
    base_catalog = (
        VmCatalog.load(plan.catalog_path) if plan.catalog_path else VmCatalog.default()
    )
    rows: list[ResultRow] = []
    index = 0
    for wf_ref in plan.workflows:
        workflow = wf_ref.load()
        deadline = plan.deadlines[wf_ref.name]
        for subset_ref in plan.vm_subsets:
            catalog = subset_ref.resolve(base_catalog).with_scenario(plan.scenario)
            if plan.quota_vcpus is not None:
                catalog = catalog.with_quotas(
                    total=plan.quota_vcpus, unit="vcpus", per_type=plan.quota_per_type,
                )
            elif plan.quota_vms is not None:
                catalog = catalog.with_quotas(
                    total=plan.quota_vms, unit="vms", per_type=plan.quota_per_type,
                )
            elif plan.quota_per_type:
                catalog = catalog.with_quotas(total=None, per_type=plan.quota_per_type)
            model = ExecTimeModel(catalog=catalog, distribution=plan.distribution)
            for algorithm in plan.algorithms:
                for p_t in plan.p_t_values:
                    for rep in range(plan.repetitions):
                        seed = plan.base_seed + rep
                        started = time.perf_counter()
                        schedule, front, timed_out = run_algorithm(
                            algorithm, workflow, catalog, model, deadline, p_t,
                            epsilon=plan.epsilon, k=plan.k, parallelism=plan.parallelism,
                            budget=plan.budget, p_c=plan.p_c, seed=seed,
                            time_budget=plan.timeout_s,
                        )
                        elapsed = time.perf_counter() - started
                        if schedule is not None:
                            check = validate_solution(
                                schedule, workflow, model, deadline, p_t,
                                seed=derive_seed(seed, "validate", index),
                            )
                            hits = check.hits_percent
                            admissible = check.admissible
                            mean_cost = check.mean_cost
                            mean_makespan = check.mean_makespan
                        else:
                            hits, admissible = 0.0, False
                            mean_cost = mean_makespan = None
                        rows.append(ResultRow(
                            index=index,
                            workflow=wf_ref.name,
                            algorithm=algorithm,
                            vm_subset=subset_ref.name,
                            p_t=p_t,
                            distribution=plan.distribution,
                            scenario=plan.scenario.upper(),
                            repetition=rep,
                            seed=seed,
                            deadline=deadline,
                            hits_percent=hits,
                            admissible=admissible,
                            mean_cost=mean_cost,
                            mean_makespan=mean_makespan,
                            algo_runtime_seconds=elapsed,
                            timeout=timed_out,
                            solution=schedule,
                            front=front,
                        ))
                        index += 1
    return rows


CSV_COLUMNS = [
    "index", "workflow", "algorithm", "vm_subset", "p_t", "distribution",
    "scenario", "repetition", "seed", "deadline", "hits_percent", "admissible",
    "mean_cost", "mean_makespan", "algo_runtime_seconds", "timeout", "solution_ref",
]


def _format_row(row: ResultRow, solution_ref: str) -> dict[str, str]:
    return {
        "index": str(row.index),
        "workflow": row.workflow,
        "algorithm": row.algorithm,
        "vm_subset": row.vm_subset,
        "p_t": f"{row.p_t:g}",
        "distribution": row.distribution,
        "scenario": row.scenario,
        "repetition": str(row.repetition),
        "seed": str(row.seed),
        "deadline": f"{row.deadline:g}",
        "hits_percent": f"{row.hits_percent:.1f}",
        "admissible": "true" if row.admissible else "false",
        "mean_cost": "" if row.mean_cost is None else f"{row.mean_cost:.2f}",
        "mean_makespan": "" if row.mean_makespan is None else f"{row.mean_makespan:.2f}",
        "algo_runtime_seconds": f"{row.algo_runtime_seconds:.3f}",
        "timeout": "true" if row.timeout else "false",
        "solution_ref": solution_ref,
    }


def summarize(rows: list[ResultRow]) -> dict:
    """Per-configuration aggregates over repetitions."""
    grouped: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        key = (row.workflow, row.algorithm, row.vm_subset, row.p_t,
               row.distribution, row.scenario)
        grouped.setdefault(key, []).append(row)
    summary = []
    for key, group in grouped.items():
        costs = [r.mean_cost for r in group if r.mean_cost is not None]
        summary.append({
            "workflow": key[0],
            "algorithm": key[1],
            "vm_subset": key[2],
            "p_t": key[3],
            "distribution": key[4],
            "scenario": key[5],
            "repetitions": len(group),
            "feasible_percent": round(
                100.0 * sum(1 for r in group if r.admissible) / len(group), 1
            ),
            "mean_cost": None if not costs else round(sum(costs) / len(costs), 2),
            "mean_runtime_seconds": round(
                sum(r.algo_runtime_seconds for r in group) / len(group), 3
            ),
        })
    return {"configurations": summary}


def report(rows: list[ResultRow], out_dir: str | Path, make_plots: bool = True) -> dict[str, Path]:
    """Write results.csv, fronts.json, summary.json, solution files, and figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    solutions_dir = out / "solutions"
    refs: dict[int, str] = {}
    for row in rows:
        if row.solution is not None:
            solutions_dir.mkdir(exist_ok=True)
            ref = f"solutions/row{row.index:05d}.json"
            row.solution.save(out / ref)
            refs[row.index] = ref

    csv_path = out / "results.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(_format_row(row, refs.get(row.index, "")))
    paths["results"] = csv_path

    fronts = [
        {
            "row": row.index,
            "workflow": row.workflow,
            "vm_subset": row.vm_subset,
            "p_t": row.p_t,
            "points": [
                {
                    "mean_makespan": p.makespan,
                    "mean_cost": p.cost,
                    "schedule": None if p.schedule is None else p.schedule.to_json(),
                }
                for p in row.front.points
            ],
        }
        for row in rows
        if row.front is not None
    ]
    fronts_path = out / "fronts.json"
    with open(fronts_path, "w") as fh:
        json.dump(fronts, fh, indent=2)
    paths["fronts"] = fronts_path

    summary = summarize(rows)
    summary_path = out / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2)
    paths["summary"] = summary_path

    if make_plots:
        from . import plots

        paths.update(plots.render_report_figures(rows, summary, out))
    return paths


def parse_results(path: str | Path) -> list[dict]:
    """Read results.csv back into typed dicts (inverse of ``report``)."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append({
                "index": int(rec["index"]),
                "workflow": rec["workflow"],
                "algorithm": rec["algorithm"],
                "vm_subset": rec["vm_subset"],
                "p_t": float(rec["p_t"]),
                "distribution": rec["distribution"],
                "scenario": rec["scenario"],
                "repetition": int(rec["repetition"]),
                "seed": int(rec["seed"]),
                "deadline": float(rec["deadline"]),
                "hits_percent": float(rec["hits_percent"]),
                "admissible": rec["admissible"] == "true",
                "mean_cost": None if rec["mean_cost"] == "" else float(rec["mean_cost"]),
                "mean_makespan": (
                    None if rec["mean_makespan"] == "" else float(rec["mean_makespan"])
                ),
                "algo_runtime_seconds": float(rec["algo_runtime_seconds"]),
                "timeout": rec["timeout"] == "true",
                "solution_ref": rec["solution_ref"],
            })
    return out
