import csv
import hashlib
import io
import json
import subprocess
import sys

import pytest
from hypothesis import given

from offload_opt import io as oio
from offload_opt.cli import main
from offload_opt.errors import SchemaError
from offload_opt.graph import validate_graph
from offload_opt.plan import OffloadPlan

from conftest import call_dags

FIG8_SHA256 = "b0f5c001da27c2ca272f9b752925006aa4f9411dcf73087d6cee892725cb5d2d"


def fixture(name):
    return str(oio.fixture_path(name))


def test_fig8_fixture_pinned():
    data = oio.fixture_path("fig8").read_bytes()
    assert hashlib.sha256(data).hexdigest() == FIG8_SHA256


@pytest.mark.parametrize("name", ["fig8", "t2subtree", "chain3", "fig5_template"])
def test_fixtures_valid(name):
    assert validate_graph(oio.load_graph(fixture(name))) == []


@given(g=call_dags())
def test_graph_round_trip(g):
    back = oio.graph_from_dict(json.loads(json.dumps(oio.graph_to_dict(g))))
    assert back.nodes == g.nodes and back.edges == g.edges and back.root == g.root


def test_profile_round_trip(prof):
    assert oio.profile_from_dict(oio.profile_to_dict(prof)) == prof
    assert prof.snr_gain == pytest.approx(10 ** 2.7, rel=1e-15)


def test_plan_round_trip(tmp_path):
    plan = OffloadPlan({1: 0, 2: 1, 3: 0}, {(1, 2): 0.123456789})
    oio.save_plan(plan, tmp_path / "p.json")
    assert oio.load_plan(tmp_path / "p.json") == plan


@pytest.mark.parametrize("doc,where", [
    ({"nodes": [], "edges": [], "root": 1, "extra": 0}, "<root>"),
    ({"nodes": [{"id": 1, "cycles": 1, "colour": "red"}], "edges": [], "root": 1}, "nodes/0"),
    ({"nodes": [{"id": 1, "cycles": "lots"}], "edges": [], "root": 1}, "nodes/0/cycles"),
])
def test_schema_rejects(doc, where):
    with pytest.raises(SchemaError, match=where):
        oio.graph_from_dict(doc)


def test_profile_needs_gain():
    doc = oio.profile_to_dict(oio.load_profile(oio.default_profile_path()))
    del doc["snr_gain"]
    with pytest.raises(SchemaError):
        oio.profile_from_dict(doc)


def test_fmt_nine_digits():
    assert oio.fmt(1 / 3) == "0.333333333"
    assert oio.fmt(13.5) == "13.5"
    assert oio.fmt(float("inf")) == "inf"
    assert oio.fmt(7) == "7"


def test_json_non_finite_is_null():
    assert json.loads(oio.dumps_json({"a": float("inf"), "b": 2 / 3})) == {"a": None, "b": 0.666666667}


def test_parse_range():
    assert oio.parse_range("1,2.5") == [1.0, 2.5]
    assert oio.parse_range("0:1:3") == [0.0, 0.5, 1.0]
    r = oio.parse_range("0.01:10:log4")
    assert r[0] == pytest.approx(0.01) and r[-1] == pytest.approx(10) and r[1] == pytest.approx(0.1)
    for bad in ("1:2", "0:1:log3", "1:2:0"):
        with pytest.raises(SchemaError):
            oio.parse_range(bad)


def test_scenario(tmp_path):
    doc = {"graph": fixture("chain3"), "profile": str(oio.default_profile_path()), "mode": "parallel",
           "lmax": [2, 3], "conc": "auto"}
    (tmp_path / "s.json").write_text(json.dumps(doc))
    sc = oio.load_scenario(tmp_path / "s.json")
    assert sc.mode == "parallel" and sc.lmax == [2, 3] and sc.conc == "auto"
    doc["conc"] = 7
    (tmp_path / "s.json").write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        oio.load_scenario(tmp_path / "s.json")


# command line


def test_cli_validate(capsys, tmp_path):
    assert main(["validate", fixture("fig8")]) == 0
    doc = oio.graph_to_dict(oio.load_graph(fixture("chain3")))
    doc["edges"].append({"src": 3, "dst": 1, "bits": 1.0})
    (tmp_path / "cyc.json").write_text(json.dumps(doc))
    assert main(["validate", str(tmp_path / "cyc.json")]) == 1
    assert "cycle" in capsys.readouterr().err


def test_cli_bad_json(tmp_path):
    (tmp_path / "x.json").write_text("{nope")
    assert main(["validate", str(tmp_path / "x.json")]) == 1


def test_cli_solve_serial(tmp_path):
    out = tmp_path / "s.json"
    assert main(["solve", "serial", "--graph", fixture("fig8"), "--lambda", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) >= {"energy_J", "latency_s", "objective", "plan"}
    sep = tmp_path / "sep.json"
    assert main(["solve", "serial", "--graph", fixture("fig8"), "--lambda", "1", "--separate", "--out", str(sep)]) == 0
    sd = json.loads(sep.read_text())
    assert doc["objective"] <= sd["energy_J"] + sd["latency_s"] + 1e-8


def test_cli_infeasible_exit(capsys):
    assert main(["solve", "parallel", "--graph", fixture("fig8"), "--lmax", "1"]) == 2
    assert "infeasible" in capsys.readouterr().err


def test_cli_solve_parallel_then_evaluate(tmp_path):
    out = tmp_path / "p.json"
    assert main(["solve", "parallel", "--graph", fixture("chain3"), "--lmax", "1.5", "--eps", "0.05",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["latency_s"] <= 1.5 and doc["sim"]["latency_s"] > 0
    (tmp_path / "plan.json").write_text(json.dumps(doc["plan"]))
    ev = tmp_path / "e.json"
    assert main(["evaluate", "--graph", fixture("chain3"), "--plan", str(tmp_path / "plan.json"),
                 "--mode", "recursion", "--out", str(ev)]) == 0
    assert json.loads(ev.read_text())["energy_J"] == pytest.approx(doc["energy_J"], rel=1e-8)


def test_cli_serial_sweep(tmp_path):
    out = tmp_path / "sw.csv"
    assert main(["sweep", "serial", "--graph", fixture("fig8"), "--lambdas", "0.01:10:log20", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 20
    e = [float(r["energy_J"]) for r in rows]
    lat = [float(r["latency_s"]) for r in rows]
    assert all(b >= a for a, b in zip(e, e[1:])) and all(b <= a for a, b in zip(lat, lat[1:]))
    assert all(len(r["decisions_bitstring"]) == 15 for r in rows)
    again = tmp_path / "sw2.csv"
    main(["sweep", "serial", "--graph", fixture("fig8"), "--lambdas", "0.01:10:log20", "--out", str(again)])
    assert again.read_bytes() == out.read_bytes()


def test_cli_parallel_sweep(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["sweep", "parallel", "--graph", fixture("chain3"), "--lmax", "0.5,1.5,3", "--eps", "0.05",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert rows[0]["decisions_bitstring"] == "infeasible"
    assert float(rows[2]["dp_energy_J"]) <= float(rows[1]["dp_energy_J"])
    assert float(rows[1]["recursion_latency_s"]) <= 1.5


def test_cli_oracle_limit(tmp_path):
    assert main(["oracle", "serial", "--graph", fixture("fig8"), "--lambda", "1", "--limit", "3"]) == 3
    out = tmp_path / "o.json"
    assert main(["oracle", "serial", "--graph", fixture("chain3"), "--lambda", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["enumerated_count"] == 2


def test_cli_timeline(tmp_path):
    (tmp_path / "plan.json").write_text(json.dumps({"decisions": {"1": 0, "2": 1, "3": 0}, "powers": {"1-2": 0.5}}))
    out, summ = tmp_path / "tl.csv", tmp_path / "sum.json"
    assert main(["timeline", "--graph", fixture("chain3"), "--plan", str(tmp_path / "plan.json"),
                 "--eps-d", "0.01", "--out", str(out), "--summary", str(summ)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["state"] for r in rows] == ["CP_L", "UL", "CP_R", "DL", "CP_L"]
    assert json.loads(summ.read_text())["latency_s"] == pytest.approx(float(rows[-1]["end_s"]))


def test_cli_stalled_exit(tmp_path):
    (tmp_path / "plan.json").write_text(json.dumps({"decisions": {"1": 0, "2": 1, "3": 0}}))
    assert main(["timeline", "--graph", fixture("chain3"), "--plan", str(tmp_path / "plan.json")]) == 2


def test_entry_point_module():
    out = subprocess.run([sys.executable, "-m", "offload_opt.cli", "validate", fixture("chain3")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "ok"
