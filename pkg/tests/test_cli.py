import csv
import json

import pytest

from aeronet_ctr.cli import main, parse_rate
from aeronet_ctr.scenario import Area, generate_random_scenario, pinned_scenario, serialize_scenario


@pytest.fixture
def fleet(tmp_path):
    p = tmp_path / "fleet.json"
    p.write_text(serialize_scenario(generate_random_scenario(5, 10, 20, Area(150, 150), 4)))
    return p


@pytest.fixture
def split(tmp_path):
    # the area claims a small diagonal, so no range can join these nodes
    from aeronet_ctr.kinematics import OrbitSpec
    from aeronet_ctr.scenario import Scenario

    sc = Scenario((OrbitSpec((0, 0), 0, 0), OrbitSpec((50, 0), 0, 0)), Area(10, 10))
    p = tmp_path / "split.json"
    p.write_text(serialize_scenario(sc))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_rate():
    assert parse_rate("20").ratio == 20
    w = parse_rate("1/4pi")
    assert w.pi_factor and w.ratio == 0.25
    assert not parse_rate("2.5").is_exact


def test_ctr(capsys, fleet):
    code, out, _ = run(capsys, "ctr", "--scenario", fleet, "--err", 0.01)
    doc = json.loads(out)
    assert code == 0
    assert doc["ctr"] - doc["lower"] <= 0.01
    assert len(doc["binding"]["components"]) >= 2


def test_ctr_infeasible(capsys, split):
    code, out, _ = run(capsys, "ctr", "--scenario", split)
    assert code == 2 and json.loads(out)["infeasible"]


def test_check(capsys, fleet):
    code, out, _ = run(capsys, "check", "--scenario", fleet, "--tr", 1)
    assert code == 2 and not json.loads(out)["connected"]
    code, out, _ = run(capsys, "check", "--scenario", fleet, "--tr", 300)
    assert code == 0 and json.loads(out)["connected"]


def test_ctrf(capsys, fleet):
    code, out, _ = run(capsys, "ctrf", "--scenario", fleet, "--region-radius", 20)
    doc = json.loads(out)
    assert code == 0 and doc["binding"]["fault_point"].startswith("I(")


def test_ctrd(capsys, fleet):
    code, out, _ = run(capsys, "ctrd", "--scenario", fleet, "--delay", 0.5, "--delay-unit", "period",
                       "--all-starts")
    doc = json.loads(out)
    assert code == 0
    assert all(s["feasible"] for s in doc["starts"])
    assert {"source", "target"} <= set(doc["binding"])


def test_timeline_csv_and_plot(capsys, fleet, tmp_path):
    fig = tmp_path / "tl.png"
    out_csv = tmp_path / "tl.csv"
    code, _, _ = run(capsys, "timeline", "--scenario", fleet, "--tr", 60, "--out", "csv",
                     "-o", out_csv, "--plot", fig)
    assert code == 0 and fig.stat().st_size > 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["time", "kind", "i", "j"]


def test_timeline_json(capsys, fleet):
    code, out, _ = run(capsys, "timeline", "--scenario", fleet, "--tr", 60, "--out", "json")
    assert code == 0 and "events" in json.loads(out)


def test_gen_deterministic(capsys):
    a = run(capsys, "gen", "--n", 4, "--seed", 9)[1]
    b = run(capsys, "gen", "--n", 4, "--seed", 9)[1]
    assert a == b and len(json.loads(a)["anps"]) == 4


def test_gen_packing_error(capsys):
    code, _, err = run(capsys, "gen", "--n", 500, "--area", 50, 50, "--seed", 1)
    assert code == 1 and "error" in err


def test_bad_scenario(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"area": {"w": 10, "h": 10}, "anps": [{"center": [0, 0]}]}))
    code, _, err = run(capsys, "ctr", "--scenario", p)
    assert code == 1 and "anps[0]" in err


def test_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "ctr", "--scenario", tmp_path / "nope.json")
    assert code == 1


def test_experiment(capsys, tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"sweep": "node_count", "values": [3, 5], "trials": 2,
                                "area": {"w": 200, "h": 200}, "metrics": ["ctr", "ctr_d"], "D": 1}))
    out, trials, fig, js = (tmp_path / x for x in ("r.csv", "t.csv", "f.png", "r.json"))
    code, _, _ = run(capsys, "experiment", "--plan", plan, "--out", out, "--trials-out", trials,
                     "--figure", fig, "--json", js)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["metric"] for r in rows] == ["ctr", "ctr_d[D=1P]"] * 2
    assert len(list(csv.DictReader(trials.open()))) == 8
    assert fig.stat().st_size > 0 and json.loads(js.read_text())["plan"]["sweep"] == "node_count"


def test_pinned_chain_ctr(capsys, tmp_path):
    p = tmp_path / "chain.json"
    p.write_text(serialize_scenario(pinned_scenario([(0, 0), (10, 0), (20, 0)])))
    doc = json.loads(run(capsys, "ctr", "--scenario", p)[1])
    assert doc["ctr"] == pytest.approx(10, abs=0.01)
