import csv
import io
import json
import math
import statistics

import pytest

from aeronet_ctr.errors import ScenarioError
from aeronet_ctr.experiment import (
    SUMMARY_COLUMNS,
    ExperimentPlan,
    plan_from_dict,
    plan_to_dict,
    result_to_json,
    run_experiment,
    summary_csv,
    trials_csv,
)
from aeronet_ctr.scenario import Area

SMALL = Area(300, 300)


def by_trial(result, metric):
    out = {}
    for t in result.trials:
        if t.metric == metric:
            out[(t.value, t.trial)] = t.range
    return out


class TestPlan:
    def test_validation(self):
        with pytest.raises(ScenarioError):
            ExperimentPlan("speed", (1,))
        with pytest.raises(ScenarioError):
            ExperimentPlan("node_count", ())
        with pytest.raises(ScenarioError):
            ExperimentPlan("node_count", (5,), trials_per_value=0)
        with pytest.raises(ScenarioError):
            ExperimentPlan("node_count", (5,), metrics=("nope",))

    def test_from_dict_aliases(self):
        p = plan_from_dict({"sweep": "delay", "values": [0, 2], "trials": 2, "R": 20,
                            "omega": {"num": 20, "den": 1, "pi_factor": False},
                            "area": {"w": 300, "h": 300}})
        assert p.trials_per_value == 2 and p.region_radii == (20,)
        assert p.area == SMALL and p.omega.value == 20

    def test_unknown_key(self):
        with pytest.raises(ScenarioError, match="unknown"):
            plan_from_dict({"sweep": "delay", "values": [0], "bogus": 1})

    def test_dict_round_trip(self):
        p = ExperimentPlan("region_radius", (20, 60), 3, n=8, area=SMALL)
        assert plan_from_dict(json.loads(json.dumps(plan_to_dict(p)))) == p


class TestRun:
    def test_node_sweep_deterministic_and_trending(self):
        plan = ExperimentPlan("node_count", (5, 10), 3, area=SMALL, metrics=("ctr",), rng_seed=1)
        a, b = run_experiment(plan), run_experiment(plan)
        assert summary_csv(a) == summary_csv(b)
        assert trials_csv(a) == trials_csv(b)
        means = {r.value: r.mean for r in a.rows}
        assert means[5] >= means[10]

    def test_parallel_same_output(self):
        plan = ExperimentPlan("node_count", (4, 6), 2, area=SMALL, metrics=("ctr", "ctr_d"),
                              delays=(0.5,))
        assert summary_csv(run_experiment(plan, jobs=2)) == summary_csv(run_experiment(plan))

    def test_delay_sweep_non_increasing_per_trial(self):
        plan = ExperimentPlan("delay", (0.0, 2.0), 3, n=6, area=SMALL, metrics=("ctr_d",))
        res = run_experiment(plan)
        lo = by_trial(res, "ctr_d[D=0P]")
        hi = by_trial(res, "ctr_d[D=2P]")
        for k in range(3):
            assert hi[(2.0, k)] <= lo[(0.0, k)] + plan.err

    def test_region_sweep_non_decreasing_per_trial(self):
        plan = ExperimentPlan("region_radius", (20, 60), 3, n=6, area=SMALL, metrics=("ctr_f",))
        res = run_experiment(plan)
        a = by_trial(res, "ctr_f[R=20]")
        b = by_trial(res, "ctr_f[R=60]")
        for k in range(3):
            assert a[(20, k)] <= b[(60, k)] + plan.err

    def test_same_fleet_across_parameter_sweeps(self):
        plan = ExperimentPlan("region_radius", (20, 60), 2, n=5, area=SMALL, metrics=("ctr",))
        res = run_experiment(plan)
        ctr = by_trial(res, "ctr")
        assert ctr[(20, 0)] == ctr[(60, 0)] and ctr[(20, 1)] == ctr[(60, 1)]

    def test_summary_statistics(self):
        plan = ExperimentPlan("node_count", (5,), 4, area=SMALL, metrics=("ctr",))
        res = run_experiment(plan)
        vals = [t.range for t in res.trials]
        row = res.rows[0]
        assert row.mean == pytest.approx(statistics.fmean(vals))
        assert row.stddev == pytest.approx(statistics.stdev(vals))
        assert row.trials == 4 and row.infeasible == 0

    def test_infeasible_counted_and_excluded(self):
        # 400 orbits do not fit in the area, so that trial cannot run
        plan = ExperimentPlan("node_count", (2, 400), 1, area=Area(100, 100), metrics=("ctr",))
        res = run_experiment(plan)
        rows = {r.value: r for r in res.rows}
        assert rows[2].infeasible == 0 and rows[2].trials == 1
        assert rows[400].infeasible == 1 and rows[400].trials == 0
        assert math.isnan(rows[400].mean)
        doc = result_to_json(res)
        assert doc["rows"][1]["mean"] is None

    def test_csv_columns(self):
        plan = ExperimentPlan("node_count", (3,), 1, area=SMALL, metrics=("ctr",))
        rows = list(csv.reader(io.StringIO(summary_csv(run_experiment(plan)))))
        assert tuple(rows[0]) == SUMMARY_COLUMNS
        assert rows[1][:3] == ["node_count", "3", "ctr"]


def test_series_follow_swept_parameter():
    plan = ExperimentPlan("delay", (0.0, 1.0), 1, n=4, area=SMALL, metrics=("ctr", "ctr_d"))
    res = run_experiment(plan)
    assert res.metrics == ["ctr", "ctr_d"]
    x, mean, _ = res.series("ctr_d")
    assert x == [0.0, 1.0] and mean[1] <= mean[0] + plan.err
    node = run_experiment(ExperimentPlan("node_count", (3,), 1, area=SMALL, metrics=("ctr_f",),
                                         region_radii=(20.0,)))
    assert node.metrics == ["ctr_f[R=20]"]
