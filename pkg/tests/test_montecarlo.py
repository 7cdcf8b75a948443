import math

import numpy as np
import pytest

from eposs import (
    ExecTimeModel,
    IncompleteSchedule,
    Schedule,
    Task,
    VmInstance,
    Workflow,
    compute_timeline,
    evaluate,
    simulate_runs,
    validate_solution,
)
from eposs.cloud import quantile_of_mean

from conftest import chain_workflow


@pytest.fixture
def single_task_setup(unit_catalog):
    w = Workflow([Task(id="a", runtime=10.0)])
    s = Schedule(instances=(
        VmInstance(index=0, vmtype=unit_catalog.type_named("unit"), task_list=("a",)),
    ))
    return w, s, unit_catalog


def model_for(catalog, dist):
    return ExecTimeModel(catalog=catalog, distribution=dist)


class TestEvaluate:
    def test_deterministic_matches_timeline_exactly(self, unit_catalog):
        w = chain_workflow(10, 5, output_mb=3.0)
        model = model_for(unit_catalog, "deterministic")
        s = Schedule(instances=(
            VmInstance(index=0, vmtype=unit_catalog.type_named("unit"), task_list=("t0", "t1")),
        ))
        report = evaluate(s, w, model, deadline=100.0, seed=1)
        tl = compute_timeline(s, w, model.time_table(w))
        assert report.mean_makespan == tl.makespan
        assert report.p_hit_deadline == 1.0
        assert report.ci_halfwidth_makespan == 0.0
        assert report.runs == 1000
        tight = evaluate(s, w, model, deadline=tl.makespan - 1e-6, seed=1)
        assert tight.p_hit_deadline == 0.0

    def test_uniform_median_probability(self, single_task_setup):
        w, s, cat = single_task_setup
        report = evaluate(s, w, model_for(cat, "uniform"), deadline=10.0, seed=3, runs=10_000)
        assert report.p_hit_deadline == pytest.approx(0.5, abs=0.02)

    def test_gamma_median_probability(self, unit_catalog):
        w = Workflow([Task(id="a", runtime=1.0)])
        s = Schedule(instances=(
            VmInstance(index=0, vmtype=unit_catalog.type_named("unit"), task_list=("a",)),
        ))
        report = evaluate(s, w, model_for(unit_catalog, "gamma"),
                          deadline=math.log(2), seed=4, runs=10_000)
        assert report.p_hit_deadline == pytest.approx(0.5, abs=0.02)

    def test_reproducible(self, single_task_setup):
        w, s, cat = single_task_setup
        a = evaluate(s, w, model_for(cat, "gamma"), deadline=10.0, seed=42)
        b = evaluate(s, w, model_for(cat, "gamma"), deadline=10.0, seed=42)
        assert a == b

    def test_seed_changes_draws(self, single_task_setup):
        w, s, cat = single_task_setup
        a = evaluate(s, w, model_for(cat, "gamma"), deadline=10.0, seed=1, runs=2000)
        b = evaluate(s, w, model_for(cat, "gamma"), deadline=10.0, seed=2, runs=2000)
        assert a.mean_makespan != b.mean_makespan

    def test_deadline_monotonicity(self, single_task_setup):
        w, s, cat = single_task_setup
        deadlines = [2.0, 5.0, 10.0, 20.0]
        hits = [
            evaluate(s, w, model_for(cat, "gamma"), deadline=d, seed=7, runs=5000).p_hit_deadline
            for d in deadlines
        ]
        assert hits == sorted(hits)

    def test_budget_probability(self, single_task_setup):
        w, s, cat = single_task_setup
        # cost = makespan/3600 * 0.36 = makespan * 1e-4; uniform on [0, 2e-3]
        report = evaluate(s, w, model_for(cat, "uniform"), deadline=10.0,
                          budget=1e-3, seed=9, runs=10_000)
        assert report.p_hit_budget == pytest.approx(0.5, abs=0.02)
        no_budget = evaluate(s, w, model_for(cat, "uniform"), deadline=10.0, seed=9, runs=100)
        assert no_budget.p_hit_budget is None

    def test_ci_stopping_extends_runs(self, single_task_setup):
        w, s, cat = single_task_setup
        # single exponential task: CV = 1, needs about (1.96/0.02)^2 = 9604 runs
        report = evaluate(s, w, model_for(cat, "gamma"), deadline=10.0, seed=11)
        assert 1000 < report.runs <= 100_000
        assert report.ci_halfwidth_makespan <= 0.02 * report.mean_makespan

    def test_incomplete_schedule_rejected(self, unit_catalog):
        w = chain_workflow(1, 1)
        s = Schedule(instances=(
            VmInstance(index=0, vmtype=unit_catalog.type_named("unit"), task_list=("t0",)),
        ))
        with pytest.raises(IncompleteSchedule):
            evaluate(s, w, model_for(unit_catalog, "gamma"), deadline=10.0)

    def test_mean_cost_tracks_span_billing(self, unit_catalog):
        w = chain_workflow(10, 5)
        model = model_for(unit_catalog, "deterministic")
        s = Schedule(instances=(
            VmInstance(index=0, vmtype=unit_catalog.type_named("unit"), task_list=("t0", "t1")),
        ))
        report = evaluate(s, w, model, deadline=100.0, seed=1)
        assert report.mean_cost == pytest.approx(15 / 3600 * 0.36)


class TestStreamSplitting:
    def test_chunking_invariant(self, single_task_setup):
        w, s, cat = single_task_setup
        model = model_for(cat, "gamma")
        whole_mk, whole_cost = simulate_runs(s, w, model, seed=5, start_run=0, n_runs=1500)
        first_mk, first_cost = simulate_runs(s, w, model, seed=5, start_run=0, n_runs=700)
        rest_mk, rest_cost = simulate_runs(s, w, model, seed=5, start_run=700, n_runs=800)
        assert np.array_equal(whole_mk, np.concatenate([first_mk, rest_mk]))
        assert np.array_equal(whole_cost, np.concatenate([first_cost, rest_cost]))

    def test_runs_independent_of_order(self, single_task_setup):
        w, s, cat = single_task_setup
        model = model_for(cat, "halfnormal")
        tail = simulate_runs(s, w, model, seed=5, start_run=100, n_runs=10)[0]
        again = simulate_runs(s, w, model, seed=5, start_run=100, n_runs=10)[0]
        assert np.array_equal(tail, again)


class TestValidateSolution:
    def test_deterministic_always_admissible(self, unit_catalog):
        w = chain_workflow(10)
        model = model_for(unit_catalog, "deterministic")
        s = Schedule(instances=(
            VmInstance(index=0, vmtype=unit_catalog.type_named("unit"), task_list=("t0",)),
        ))
        check = validate_solution(s, w, model, deadline=11.0, p_t=1.0, seed=1)
        assert check.hits_percent == 100.0
        assert check.admissible

    def test_admissibility_is_strict_at_threshold(self, unit_catalog):
        w = Workflow([Task(id="a", runtime=1.0)])
        model = model_for(unit_catalog, "gamma")
        s = Schedule(instances=(
            VmInstance(index=0, vmtype=unit_catalog.type_named("unit"), task_list=("a",)),
        ))
        # deadline at the 87th percentile: empirical hits land near 87%,
        # below p_t=0.9, so the solution must be rejected
        deadline = quantile_of_mean("gamma", 1.0, 0.87)
        check = validate_solution(s, w, model, deadline=deadline, p_t=0.9, seed=13)
        assert check.hits_percent == pytest.approx(87.0, abs=2.0)
        assert not check.admissible

    def test_quantile_deadline_calibration(self, unit_catalog):
        w = Workflow([Task(id="a", runtime=1.0)])
        model = model_for(unit_catalog, "gamma")
        s = Schedule(instances=(
            VmInstance(index=0, vmtype=unit_catalog.type_named("unit"), task_list=("a",)),
        ))
        deadline = quantile_of_mean("gamma", 1.0, 0.75)
        check = validate_solution(s, w, model, deadline=deadline, p_t=0.75, seed=17)
        assert abs(check.hits_percent - 75.0) < 2.0

    def test_uses_exactly_10000_runs(self, single_task_setup):
        w, s, cat = single_task_setup
        report = evaluate(s, w, model_for(cat, "gamma"), deadline=10.0, seed=3, runs=10_000)
        check = validate_solution(s, w, model_for(cat, "gamma"), deadline=10.0, p_t=0.5, seed=3)
        assert check.hits_percent == pytest.approx(report.p_hit_deadline * 100)
