"""JSON scenario files, schema checks and CSV/JSON emitters."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import SchemaError
from .graph import CallGraph, Edge, TaskNode
from .physical import PlatformProfile
from .plan import OffloadPlan

_NUM = {"type": "number"}

GRAPH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["nodes", "edges", "root"],
    "properties": {
        "name": {"type": "string"},
        "note": {"type": "string"},
        "root": {"type": "integer"},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "cycles"],
                "properties": {"id": {"type": "integer"}, "cycles": _NUM, "data": {"type": "boolean"}},
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["src", "dst", "bits"],
                "properties": {"src": {"type": "integer"}, "dst": {"type": "integer"}, "bits": _NUM},
            },
        },
    },
}

PROFILE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["f_local", "f_remote", "p_local", "p_rf", "p_rx", "c_dl", "bandwidth"],
    "oneOf": [{"required": ["snr_gain_db"]}, {"required": ["snr_gain"]}],
    "properties": {k: _NUM for k in ("f_local", "f_remote", "p_local", "p_rf", "p_rx", "c_dl", "bandwidth",
                                     "snr_gain", "snr_gain_db", "dl_bandwidth", "p_max", "p_min")}
    | {"name": {"type": "string"}},
}

PLAN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["decisions"],
    "properties": {
        "decisions": {"type": "object", "patternProperties": {r"^\d+$": {"enum": [0, 1]}},
                      "additionalProperties": False},
        "powers": {"type": "object", "patternProperties": {r"^\d+-\d+$": _NUM}, "additionalProperties": False},
    },
}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["graph", "profile", "mode"],
    "properties": {
        "graph": {"type": ["string", "object"]},
        "profile": {"type": ["string", "object"]},
        "mode": {"enum": ["serial", "parallel"]},
        "lambdas": {"type": "array", "items": _NUM},
        "lmax": {"type": "array", "items": _NUM},
        "eps": _NUM,
        "eps_d": _NUM,
        "conc": {"oneOf": [{"type": "integer", "minimum": 1, "maximum": 4}, {"const": "auto"}]},
    },
}


def _check(doc, schema, what):
    v = jsonschema.Draft202012Validator(schema)
    errs = sorted(v.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{what}: {where}: {e.message}")


def fmt(x) -> str:
    """Nine significant digits; ints pass through."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".9g")
    return str(x)


def _round(x):
    if isinstance(x, float):
        return None if not math.isfinite(x) else float(format(x, ".9g"))
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def _read(src):
    if isinstance(src, dict):
        return src
    with open(src) as fh:
        return json.load(fh)


def graph_from_dict(doc) -> CallGraph:
    _check(doc, GRAPH_SCHEMA, "graph")
    nodes = tuple(TaskNode(n["id"], float(n["cycles"]), bool(n.get("data", False))) for n in doc["nodes"])
    edges = tuple(Edge(e["src"], e["dst"], float(e["bits"])) for e in doc["edges"])
    return CallGraph(nodes, edges, doc["root"])


def graph_to_dict(g: CallGraph) -> dict:
    return {
        "nodes": [{"id": n.id, "cycles": n.cycles, **({"data": True} if n.is_data else {})} for n in g.nodes],
        "edges": [{"src": e.src, "dst": e.dst, "bits": e.bits} for e in g.edges],
        "root": g.root,
    }


def load_graph(src) -> CallGraph:
    return graph_from_dict(_read(src))


def profile_from_dict(doc) -> PlatformProfile:
    _check(doc, PROFILE_SCHEMA, "profile")
    kw = {k: float(v) for k, v in doc.items() if k not in ("name", "snr_gain_db")}
    if "snr_gain_db" in doc:
        return PlatformProfile.from_db(float(doc["snr_gain_db"]), **kw)
    return PlatformProfile(**kw)


def profile_to_dict(prof: PlatformProfile) -> dict:
    return {
        "f_local": prof.f_local, "f_remote": prof.f_remote, "p_local": prof.p_local,
        "p_rf": prof.p_rf, "p_rx": prof.p_rx, "c_dl": prof.c_dl, "bandwidth": prof.bandwidth,
        "snr_gain": prof.snr_gain, "dl_bandwidth": prof.dl_bandwidth,
        "p_max": prof.p_max, "p_min": prof.p_min,
    }


def load_profile(src) -> PlatformProfile:
    return profile_from_dict(_read(src))


def default_profile_path():
    return resources.files("offload_opt") / "profiles" / "paper.json"


def fixture_path(name: str):
    return resources.files("offload_opt") / "fixtures" / f"{name}.json"


def plan_from_dict(doc) -> OffloadPlan:
    _check(doc, PLAN_SCHEMA, "plan")
    powers = {}
    for k, p in doc.get("powers", {}).items():
        m, n = k.split("-")
        powers[(int(m), int(n))] = float(p)
    return OffloadPlan({int(k): v for k, v in doc["decisions"].items()}, powers)


def plan_to_dict(plan: OffloadPlan) -> dict:
    return {
        "decisions": {str(n): plan.decisions[n] for n in sorted(plan.decisions)},
        "powers": {f"{m}-{n}": float(format(p, ".9g")) for (m, n), p in sorted(plan.powers.items())},
    }


def load_plan(src) -> OffloadPlan:
    return plan_from_dict(_read(src))


def save_plan(plan: OffloadPlan, path) -> None:
    dump_json(plan_to_dict(plan), path)


@dataclass
class Scenario:
    graph: CallGraph
    profile: PlatformProfile
    mode: str
    lambdas: list = field(default_factory=list)
    lmax: list = field(default_factory=list)
    eps: float = 0.1
    eps_d: float = 0.1
    conc: object = 1


def load_scenario(path) -> Scenario:
    doc = _read(path)
    _check(doc, SCENARIO_SCHEMA, "scenario")
    base = Path(path).parent if not isinstance(path, dict) else Path(".")

    def resolve(x):
        return x if isinstance(x, dict) else base / x

    return Scenario(
        graph=load_graph(resolve(doc["graph"])),
        profile=load_profile(resolve(doc["profile"])),
        mode=doc["mode"],
        lambdas=list(doc.get("lambdas", [])),
        lmax=list(doc.get("lmax", [])),
        eps=doc.get("eps", 0.1),
        eps_d=doc.get("eps_d", 0.1),
        conc=doc.get("conc", 1),
    )


def dumps_json(doc) -> str:
    return json.dumps(_round(doc), indent=2, sort_keys=False) + "\n"


def dump_json(doc, path) -> None:
    Path(path).write_text(dumps_json(doc))


def summary(energy, latency, flags=(), **extra) -> dict:
    out = {"energy_J": energy, "latency_s": latency}
    out.update(extra)
    fl = list(flags)
    if not math.isfinite(energy) or not math.isfinite(latency):
        fl.append("non-finite")
    if fl:
        out["flags"] = fl
    return out


def rows_to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


SERIAL_SWEEP_COLUMNS = ("lambda", "energy_J", "latency_s", "decisions_bitstring")


def serial_sweep_csv(g, points) -> str:
    rows = [{"lambda": p.lam, "energy_J": p.energy, "latency_s": p.latency,
             "decisions_bitstring": p.plan.bitstring(g)} for p in points]
    return rows_to_csv(SERIAL_SWEEP_COLUMNS, rows)


def parse_range(text: str) -> list[float]:
    """``a:b:logN`` (log-spaced), ``a:b:N`` (linear) or a comma list."""
    if ":" not in text:
        return [float(x) for x in text.split(",") if x.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise SchemaError(f"bad range {text!r}, expected a:b:N or a:b:logN")
    a, b = float(parts[0]), float(parts[1])
    n_txt = parts[2]
    log = n_txt.startswith("log")
    n = int(n_txt[3:] if log else n_txt)
    if n < 1:
        raise SchemaError(f"bad point count in {text!r}")
    if n == 1:
        return [a]
    if log:
        if a <= 0 or b <= 0:
            raise SchemaError("log range needs positive endpoints")
        la, lb = math.log(a), math.log(b)
        return [math.exp(la + (lb - la) * i / (n - 1)) for i in range(n)]
    return [a + (b - a) * i / (n - 1) for i in range(n)]
