import csv
import json

import numpy as np
import pytest

from nonstat_aos.harness import (ExperimentResult, format_table, replicate_protocol,
                                 run_island, run_trajectory, sweep, write_csv_per_wsize,
                                 write_json_summary)
from nonstat_aos.island import IslandModel, top_mean
from nonstat_aos.roster import make_policy
from nonstat_aos.scenario import binary_scenario, epoch_scenario, fixed_scenario


class TestTrajectory:
    def test_gr_wsize3(self):
        for n1 in range(1, 9):
            assert run_trajectory(make_policy("GR"), binary_scenario(8, n1, 3)).total == 2.0

    def test_zero_horizon(self):
        tr = run_trajectory(make_policy("U"), binary_scenario(8, 2, 2, horizon=0))
        assert len(tr) == 0 and tr.total == 0.0

    def test_total_is_sum(self):
        tr = run_trajectory(make_policy("ARW"), binary_scenario(8, 3, 4), seed=3)
        assert len(tr) == 1000
        assert tr.total == pytest.approx(float(np.sum(tr.gains)), abs=1e-9)

    @pytest.mark.parametrize("name", ["EGR", "ARW", "AP", "OR", "U", "DMAB"])
    def test_kernel_and_object_paths_agree(self, name):
        cfg = binary_scenario(8, 4, 3, horizon=300)
        a = run_trajectory(make_policy(name), cfg, seed=17)
        b = run_trajectory(make_policy(name), cfg, seed=17, use_kernel=False)
        assert np.array_equal(a.operators, b.operators) and a.total == b.total

    def test_seed_determinism(self):
        cfg = binary_scenario(8, 2, 2)
        a = run_trajectory(make_policy("EGR"), cfg, seed=5)
        b = run_trajectory(make_policy("EGR"), cfg, seed=5)
        c = run_trajectory(make_policy("EGR"), cfg, seed=6)
        assert np.array_equal(a.operators, b.operators)
        assert not np.array_equal(a.operators, c.operators)

    def test_uniform_mean_all_ones(self):
        totals = [run_trajectory(make_policy("U"), binary_scenario(8, 8, 5), seed=s).total
                  for s in range(2000)]
        assert np.mean(totals) == pytest.approx(875, rel=0.02)

    def test_stochastic_scenarios(self):
        cfg = fixed_scenario([(0.9, 1.0), (0.1, 1.0)], horizon=500)
        tr = run_trajectory(make_policy("UCB"), cfg, seed=1)
        assert np.bincount(tr.operators)[1] > 400
        ep = epoch_scenario(3, 100, horizon=400)
        tr = run_trajectory(make_policy("AP"), ep, seed=2)
        assert len(tr) == 400 and 0 <= tr.gains.min() and tr.gains.max() <= 1


class TestProtocol:
    def test_deterministic_policy_has_zero_std(self):
        res = replicate_protocol("GR", binary_scenario(8, 2, 3))
        assert res.mean == 2.0 and res.std == 0.0 and len(res.replicate_values) == 20

    def test_plain_statistics(self):
        cfg = binary_scenario(8, 3, 2)
        res = replicate_protocol("U", cfg, reps=6, pool=1, top=1, master_seed=9)
        assert res.mean == pytest.approx(np.mean(res.replicate_values))
        assert res.std == pytest.approx(np.std(res.replicate_values, ddof=1))

    def test_selection_bias(self):
        cfg = binary_scenario(8, 4, 4)
        for name in ("U", "EGR", "ARW", "AP", "OR"):
            top = replicate_protocol(name, cfg, reps=3, pool=80, top=20, master_seed=1).mean
            everything = replicate_protocol(name, cfg, reps=3, pool=80, top=80, master_seed=1).mean
            assert top >= everything

    def test_island_uses_population(self):
        cfg = binary_scenario(8, 2, 1)
        model = IslandModel()
        res = replicate_protocol(model, cfg, reps=2, master_seed=4)
        assert res.seeds["pool"] == 80
        assert res.replicate_values[0] == pytest.approx(
            top_mean(run_island(model, cfg, np.random.SeedSequence(4, spawn_key=(
                res.seeds["tag"], 2, 1, 0)))[0], 20))

    def test_threads_do_not_change_results(self):
        cfg = binary_scenario(8, 3, 3)
        for name in ("EGR", "IM"):
            a = replicate_protocol(name, cfg, reps=6, master_seed=2, threads=1)
            b = replicate_protocol(name, cfg, reps=6, master_seed=2, threads=4)
            assert a.replicate_values == b.replicate_values

    def test_bad_protocol(self):
        with pytest.raises(ValueError):
            replicate_protocol("U", binary_scenario(8, 1, 1), pool=10, top=11)
        with pytest.raises(ValueError):
            replicate_protocol("U", binary_scenario(8, 1, 1), reps=0)
        with pytest.raises(ValueError):
            replicate_protocol(IslandModel(psize=10), binary_scenario(8, 1, 1), top=20)


class TestSweep:
    def test_grid_size(self):
        res = sweep(["GR", "U"], range(1, 3), range(1, 4), reps=2, pool=4, top=2)
        assert len(res) == 2 * 2 * 3

    def test_single_cell(self):
        res = sweep(["GR"], [1], [3], reps=2, pool=2, top=1)
        assert len(res) == 1 and res[0].mean == 2.0

    def test_wsize_ten(self):
        res = sweep(["GR", "OR"], [1], [10], reps=2, pool=2, top=1)
        assert res[0].mean == 5.5

    def test_writers(self, tmp_path):
        res = sweep(["UCB", "GR"], [1, 2], [1, 2], reps=2, pool=2, top=1)
        paths = write_csv_per_wsize(res, tmp_path / "out")
        assert [p.name for p in paths] == ["results_wsize1.csv", "results_wsize2.csv"]
        rows = list(csv.reader(paths[1].open()))
        assert rows[0] == ["policy", "N1", "mean", "std"]
        assert rows[1][0] == "GR"  # published row order
        js = write_json_summary(res, tmp_path / "out" / "s.json", {"seed": 0})
        doc = json.loads(js.read_text())
        assert len(doc["results"]) == 8 and "protocol" in doc["metadata"]
        assert len(doc["results"][0]["replicate_values"]) == 2
        assert "wsize = 1" in format_table(res)

    def test_result_roundtrip(self):
        r = ExperimentResult("U", 1, 2, 3.0, 0.5, [2.5, 3.5])
        assert ExperimentResult(**r.to_dict()) == r
