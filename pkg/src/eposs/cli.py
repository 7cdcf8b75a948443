"""Command-line front end.

Exit codes: 0 success, 2 configuration or load error, 3 no feasible
solution, 4 timeout.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .cloud import DISTRIBUTIONS, ExecTimeModel, VmCatalog, catalog_subset
from .dag import Workflow, WorkflowError
from .experiments import (
    ALGORITHMS,
    LoadError,
    load_plan,
    report,
    run_algorithm,
    run_plan,
)
from .generators import BadSpec
from .montecarlo import validate_solution
from .pareto import hypervolume
from .rng import derive_seed
from .schedule import Schedule, compute_timeline, expected_cost
from .search import ConfigError

EXIT_CONFIG = 2
EXIT_NO_SOLUTION = 3
EXIT_TIMEOUT = 4


def _load_catalog(catalog_path, vm_subset, scenario, quota_vcpus, quota_types) -> VmCatalog:
    catalog = VmCatalog.load(catalog_path) if catalog_path else VmCatalog.default()
    if vm_subset:
        catalog = catalog_subset(catalog, vm_subset)
    catalog = catalog.with_scenario(scenario)
    per_type = {}
    for spec in quota_types:
        name, _, value = spec.partition("=")
        if not value:
            raise ConfigError(f"--quota-type expects name=N, got {spec!r}")
        per_type[name] = int(value)
    if quota_vcpus is not None or per_type:
        catalog = catalog.with_quotas(total=quota_vcpus, unit="vcpus", per_type=per_type)
    return catalog


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Probabilistic scheduling of DAG workflows onto cloud VM pools."""


_common = [
    click.option("--workflow", "workflow_path", required=True, type=click.Path(exists=False)),
    click.option("--catalog", "catalog_path", default=None, type=click.Path(exists=False)),
    click.option("--vm-subset", default=None, help="named catalog slice, e.g. theta8"),
    click.option("--distribution", default="gamma", type=click.Choice(DISTRIBUTIONS)),
    click.option("--scenario", default="A", type=click.Choice(["A", "B", "C"], case_sensitive=False)),
    click.option("--quota-vcpus", default=None, type=float),
    click.option("--quota-type", "quota_types", multiple=True, help="per-type cap, name=N"),
    click.option("--seed", default=0, type=int),
]


def common_options(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@main.command()
@common_options
@click.option("--algo", required=True, type=click.Choice(ALGORITHMS))
@click.option("--deadline", required=True, type=float)
@click.option("--p-t", default=0.9, type=float)
@click.option("--epsilon", default=0.02, type=float)
@click.option("--k", default=10, type=int)
@click.option("--parallel", "parallelism", default=4, type=int)
@click.option("--budget", default=10.0, type=float)
@click.option("--p-c", default=0.9, type=float)
@click.option("--timeout-s", default=None, type=float)
@click.option("--out-dir", default=None, type=click.Path())
def schedule(workflow_path, catalog_path, vm_subset, distribution, scenario,
             quota_vcpus, quota_types, seed, algo, deadline, p_t, epsilon, k,
             parallelism, budget, p_c, timeout_s, out_dir):
    """Run one scheduling algorithm on one workflow and validate the result."""
    try:
        workflow = Workflow.load(workflow_path)
        catalog = _load_catalog(catalog_path, vm_subset, scenario, quota_vcpus, quota_types)
        model = ExecTimeModel(catalog=catalog, distribution=distribution)
        started = time.perf_counter()
        sched, front, timed_out = run_algorithm(
            algo, workflow, catalog, model, deadline, p_t,
            epsilon=epsilon, k=k, parallelism=parallelism,
            budget=budget, p_c=p_c, seed=seed, time_budget=timeout_s,
        )
        elapsed = time.perf_counter() - started
    except (OSError, json.JSONDecodeError, WorkflowError, ConfigError, LoadError,
            BadSpec, ValueError, KeyError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    if timed_out and sched is None:
        _fail(EXIT_TIMEOUT, f"{algo} hit the {timeout_s}s time budget")
    if sched is None:
        _fail(EXIT_NO_SOLUTION, f"{algo} found no feasible solution")
    check = validate_solution(
        sched, workflow, model, deadline, p_t, seed=derive_seed(seed, "validate"),
    )
    timeline = compute_timeline(sched, workflow, model.time_table(workflow))
    click.echo(f"algorithm:        {algo}")
    click.echo(f"runtime:          {elapsed:.3f} s")
    click.echo(f"instances:        {len(sched.instances)}")
    click.echo(f"expected makespan:{timeline.makespan:10.2f} s")
    click.echo(f"expected cost:    {expected_cost(sched, timeline):10.2f} $")
    click.echo(f"hits:             {check.hits_percent:10.1f} %")
    click.echo(f"mean cost:        {check.mean_cost:10.2f} $")
    click.echo(f"admissible:       {str(check.admissible).lower()}")
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        sched.save(out / "schedule.json")
        if front is not None:
            with open(out / "front.json", "w") as fh:
                json.dump([
                    {"mean_makespan": p.makespan, "mean_cost": p.cost}
                    for p in front.points
                ], fh, indent=2)
        click.echo(f"wrote {out / 'schedule.json'}")


@main.command()
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=False))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--plots/--no-plots", default=True)
def experiment(plan_path, out_dir, plots):
    """Run a full experiment plan and write results.csv, summaries, and figures."""
    try:
        plan = load_plan(plan_path)
        rows = run_plan(plan)
        paths = report(rows, out_dir, make_plots=plots)
    except (LoadError, ConfigError, BadSpec, WorkflowError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    for name, path in sorted(paths.items()):
        click.echo(f"wrote {path}")
    click.echo(f"{len(rows)} result rows")


@main.command()
@common_options
@click.option("--schedule", "schedule_path", required=True, type=click.Path(exists=False))
@click.option("--deadline", required=True, type=float)
@click.option("--p-t", default=0.9, type=float)
def validate(workflow_path, catalog_path, vm_subset, distribution, scenario,
             quota_vcpus, quota_types, seed, schedule_path, deadline, p_t):
    """Validate a stored schedule with 10,000 independent simulation runs."""
    try:
        workflow = Workflow.load(workflow_path)
        catalog = _load_catalog(catalog_path, vm_subset, scenario, quota_vcpus, quota_types)
        model = ExecTimeModel(catalog=catalog, distribution=distribution)
        sched = Schedule.load(schedule_path, catalog)
        check = validate_solution(sched, workflow, model, deadline, p_t, seed=seed)
    except (OSError, json.JSONDecodeError, WorkflowError, ConfigError, LoadError,
            ValueError, KeyError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    click.echo(f"hits:       {check.hits_percent:.1f} %")
    click.echo(f"mean cost:  {check.mean_cost:.2f} $")
    click.echo(f"admissible: {str(check.admissible).lower()}")


@main.command()
@common_options
@click.option("--deadline", required=True, type=float)
@click.option("--p-t", default=0.9, type=float)
@click.option("--budget", default=10.0, type=float)
@click.option("--p-c", default=0.9, type=float)
@click.option("--epsilon", default=0.02, type=float)
@click.option("--k", default=10, type=int)
@click.option("--baseline-front", default=None, type=click.Path(exists=False),
              help="front JSON to compare hypervolume against")
@click.option("--timeout-s", default=None, type=float)
@click.option("--out-dir", required=True, type=click.Path())
def front(workflow_path, catalog_path, vm_subset, distribution, scenario,
          quota_vcpus, quota_types, seed, deadline, p_t, budget, p_c, epsilon,
          k, baseline_front, timeout_s, out_dir):
    """Compute the multi-objective front and its hypervolume."""
    from .pareto import FrontPoint, ParetoFront
    from .search import SearchConfig, m_eposs

    try:
        workflow = Workflow.load(workflow_path)
        catalog = _load_catalog(catalog_path, vm_subset, scenario, quota_vcpus, quota_types)
        model = ExecTimeModel(catalog=catalog, distribution=distribution)
        cfg = SearchConfig(
            deadline=deadline, p_t=p_t, epsilon=epsilon, k=k, budget=budget, p_c=p_c,
        )
        result = m_eposs(workflow, catalog, model, cfg, seed=seed, time_budget=timeout_s)
    except (OSError, json.JSONDecodeError, WorkflowError, ConfigError, LoadError,
            ValueError, KeyError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    if not result.points:
        _fail(EXIT_NO_SOLUTION, "no schedule satisfied both probabilistic constraints")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "front.json", "w") as fh:
        json.dump([
            {
                "mean_makespan": p.makespan,
                "mean_cost": p.cost,
                "schedule": None if p.schedule is None else p.schedule.to_json(),
            }
            for p in result.points
        ], fh, indent=2)
    area = hypervolume(result)
    click.echo(f"front size:  {len(result)}")
    click.echo(f"hypervolume: {area:.6g}")
    fronts = [("m-eposs", result)]
    if baseline_front:
        try:
            with open(baseline_front) as fh:
                raw = json.load(fh)
            base = ParetoFront(points=tuple(
                FrontPoint(makespan=float(p["mean_makespan"]), cost=float(p["mean_cost"]))
                for p in raw
            ))
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            _fail(EXIT_CONFIG, f"baseline front: {exc}")
        ref = (
            max(p.makespan for f in (result, base) for p in f.points),
            max(p.cost for f in (result, base) for p in f.points),
        )
        base_area = hypervolume(base, ref)
        this_area = hypervolume(result, ref)
        ratio = float("inf") if base_area == 0 else 100.0 * this_area / base_area
        click.echo(f"baseline hv: {base_area:.6g}")
        click.echo(f"relative:    {ratio:.2f} % (baseline = 100%)")
        fronts.append(("baseline", base))
    from . import plots as _plots

    _plots.front_figure(fronts, out / "front.png")
    click.echo(f"wrote {out / 'front.json'}")
    click.echo(f"wrote {out / 'front.png'}")


if __name__ == "__main__":
    main()
