import pytest

from eposs import DEFAULT_RANGES, TOPOLOGIES, BadSpec, GenSpec, generate, scale_series


class TestGenerate:
    @pytest.mark.parametrize("topology", TOPOLOGIES)
    @pytest.mark.parametrize("size", [8, 24, 60])
    def test_valid_and_roughly_sized(self, topology, size):
        wf = generate(GenSpec(topology=topology, size=size, seed=1))
        wf.validate()
        assert 0.5 * size <= len(wf) <= 1.6 * size + 4

    @pytest.mark.parametrize("topology", TOPOLOGIES)
    def test_same_seed_same_workflow(self, topology):
        a = generate(GenSpec(topology=topology, size=30, seed=9))
        b = generate(GenSpec(topology=topology, size=30, seed=9))
        assert a.to_json() == b.to_json()

    @pytest.mark.parametrize("topology", TOPOLOGIES)
    def test_different_seed_different_values(self, topology):
        a = generate(GenSpec(topology=topology, size=30, seed=1))
        b = generate(GenSpec(topology=topology, size=30, seed=2))
        assert a.to_json() != b.to_json()

    def test_values_within_default_ranges(self):
        (run_lo, run_hi), (out_lo, out_hi) = DEFAULT_RANGES["epigenomics"]
        assert (run_lo, run_hi) == (0.48, 201.89)
        assert (out_lo, out_hi) == (0.90, 242.29)
        wf = generate(GenSpec(topology="epigenomics", size=40, seed=4))
        for t in wf.tasks.values():
            assert run_lo <= t.runtime <= run_hi
            assert out_lo <= t.output_mb <= out_hi

    def test_explicit_ranges_override(self):
        wf = generate(GenSpec(
            topology="montage", size=20, seed=4,
            runtime_range=(2.0, 3.0), output_range=(0.5, 0.6),
        ))
        for t in wf.tasks.values():
            assert 2.0 <= t.runtime <= 3.0
            assert 0.5 <= t.output_mb <= 0.6

    def test_table_ranges_for_all_named_topologies(self):
        expected = {
            "montage": ((0.64, 384.49), (0.10, 775.45)),
            "sipht": ((0.03, 3311.12), (0.03, 567.01)),
            "ligo": ((0.13, 0.14), (0.01, 0.13)),
            "cybershake": ((0.55, 265.73), (0.02, 176.48)),
        }
        for name, ranges in expected.items():
            assert DEFAULT_RANGES[name] == ranges

    def test_bad_specs_rejected(self):
        with pytest.raises(BadSpec):
            GenSpec(topology="nope", size=10)
        with pytest.raises(BadSpec):
            GenSpec(topology="ligo", size=0)
        with pytest.raises(BadSpec):
            GenSpec(topology="ligo", size=10, runtime_range=(5.0, 1.0))


class TestStructure:
    def test_epigenomics_parallel_pipelines(self):
        wf = generate(GenSpec(topology="epigenomics", size=24, seed=2))
        sources = wf.sources()
        sinks = wf.sinks()
        assert sources == ["head"] and sinks == ["tail"]
        # head fans into pipelines of four chained stages that re-join
        k = len(wf.successors("head"))
        assert k >= 1
        for first in wf.successors("head"):
            node, depth = first, 1
            while wf.successors(node) != ["tail"]:
                (node,) = wf.successors(node)
                depth += 1
            assert depth == 4

    def test_montage_stages(self):
        wf = generate(GenSpec(topology="montage", size=25, seed=2))
        assert wf.sources() == ["src"]
        projections = wf.successors("src")
        assert all(p.startswith("proj") for p in projections)
        diffs = [t for t in wf.tasks if t.startswith("diff")]
        assert len(diffs) == len(projections) - 1
        for d in diffs:
            assert len(wf.predecessors(d)) == 2
        assert wf.sinks() == ["agg2"]

    def test_sipht_wide_stage_into_aggregation(self):
        wf = generate(GenSpec(topology="sipht", size=30, seed=2))
        wide = [t for t in wf.tasks if t.startswith("w")]
        aggs = [t for t in wf.tasks if t.startswith("agg")]
        assert len(wide) > len(aggs) >= 1
        assert all(not wf.predecessors(t) for t in wide)
        assert wf.sinks() == ["final"]

    def test_cybershake_two_levels_and_dual_sinks(self):
        wf = generate(GenSpec(topology="cybershake", size=30, seed=2))
        assert wf.sources() == ["src"]
        assert sorted(wf.sinks()) == ["zip", "zip_p"]
        level1 = wf.successors("src")
        for l1 in level1:
            children = wf.successors(l1)
            assert children
            for l2 in children:
                assert sorted(wf.successors(l2)) == ["zip", "zip_p"]

    def test_ligo_blocks_in_series(self):
        wf = generate(GenSpec(topology="ligo", size=24, seed=2))
        splits = sorted(t for t in wf.tasks if t.startswith("split"))
        joins = sorted(t for t in wf.tasks if t.startswith("join"))
        assert len(splits) == len(joins) >= 2
        for b, join in enumerate(joins[:-1]):
            assert wf.successors(join) == [f"split{b + 1}"]
        for split in splits:
            assert len(wf.successors(split)) == 4

    def test_random_layered_single_task(self):
        wf = generate(GenSpec(topology="random-layered", size=1, seed=2))
        assert len(wf) == 1 and not wf.edges


class TestScaleSeries:
    def test_series_sizes(self):
        base = GenSpec(topology="epigenomics", size=24, seed=6)
        series = scale_series(base, [24, 100, 500, 997])
        counts = [len(w) for w in series]
        assert counts == sorted(counts)
        for target, count in zip([24, 100, 500, 997], counts):
            assert abs(count - target) <= max(4, 0.1 * target)

    def test_deterministic_per_seed_and_size(self):
        base = GenSpec(topology="cybershake", size=10, seed=6)
        a = scale_series(base, [10, 20])
        b = scale_series(base, [10, 20])
        assert [w.to_json() for w in a] == [w.to_json() for w in b]

    def test_single_size(self):
        base = GenSpec(topology="random-layered", size=5, seed=6)
        (only,) = scale_series(base, [1])
        assert len(only) == 1
