"""Fixed-step simulation of a plan under parallel execution.

Every node carries an execution state.  Resource counts are read at the start
of a step and held for its whole duration, and every active operation is
charged for the full step, so the reported energy and latency are upper
bounds that tighten as the step shrinks.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import OffloadError, StalledScheduleError
from .graph import CallGraph, ensure_valid
from .physical import ConcurrencyProfile, PlatformProfile, ul_rate
from .plan import OffloadPlan, check_plan

# residual amounts below this fraction of the original are treated as drained
_RESIDUAL_TOL = 1e-12


class NodeExecState(str, enum.Enum):
    ID = "ID"
    CM = "CM"
    CP_L = "CP_L"
    CP_R = "CP_R"
    UL = "UL"
    DL = "DL"


ACTIVE = (NodeExecState.CP_L, NodeExecState.CP_R, NodeExecState.UL, NodeExecState.DL)


@dataclass
class SimState:
    eps_d: float
    k: int = 1
    x: dict = field(default_factory=dict)
    # per node: queue of [edge, remaining bits]; the head edge is the one transmitting
    ul_queue: dict = field(default_factory=dict)
    dl_bits: dict = field(default_factory=dict)
    cyc_local: dict = field(default_factory=dict)
    cyc_remote: dict = field(default_factory=dict)
    n_ul: int = 0
    n_dl: int = 0
    n_l: int = 0
    n_r: int = 0
    energy: float = 0.0
    e_ul: float = 0.0
    e_dl: float = 0.0
    e_local: float = 0.0
    processed: dict = field(default_factory=lambda: {"local": 0.0, "remote": 0.0, "ul": 0.0, "dl": 0.0})

    @property
    def t(self) -> float:
        return (self.k - 1) * self.eps_d

    def ul_bits(self, n) -> float:
        return sum(b for _, b in self.ul_queue.get(n, ()))


class Interval(NamedTuple):
    node: int
    state: str
    start: float
    end: float


@dataclass
class Timeline:
    rows: list = field(default_factory=list)
    _open: dict = field(default_factory=dict)

    def record(self, t: float, x: dict):
        for n, s in x.items():
            cur = self._open.get(n)
            if cur is not None and cur[0] == s:
                continue
            if cur is not None:
                self.rows.append(Interval(n, cur[0].value, cur[1], t))
                del self._open[n]
            if s in ACTIVE:
                self._open[n] = (s, t)

    def close(self, t: float):
        for n, (s, start) in sorted(self._open.items()):
            self.rows.append(Interval(n, s.value, start, t))
        self._open.clear()
        self.rows.sort(key=lambda r: (r.start, r.node))


class SimResult(NamedTuple):
    energy: float
    latency: float
    steps: int
    timeline: Timeline
    state: SimState


def init_sim(g: CallGraph, prof: PlatformProfile, plan: OffloadPlan, eps_d: float) -> SimState:
    check_plan(g, plan)
    if not eps_d > 0:
        raise OffloadError("eps_d must be > 0")
    I = plan.decisions
    s = SimState(eps_d)
    for n in g.ids:
        s.x[n] = NodeExecState.CP_L if n in g.data_nodes else NodeExecState.ID
        v = g.cycles(n)
        s.cyc_local[n] = v if I[n] == 0 else 0.0
        s.cyc_remote[n] = v if I[n] == 1 else 0.0
        q = []
        if I[n] == 0 and n not in g.data_nodes:
            # several offloaded children: uploads go one after another by child id
            q = [[(n, c), g.bits(n, c)] for c in g.children[n] if I[c] == 1]
        elif I[n] == 1:
            q = [[(m, n), g.bits(m, n)] for m in g.parents[n] if m in g.data_nodes]
        if q:
            s.ul_queue[n] = q
        for m in g.parents[n]:
            if I[m] == 1 and I[n] == 0:
                s.dl_bits[(m, n)] = g.bits(m, n)
    _count(s, g)
    return s


def _dl_streams(s: SimState, g: CallGraph):
    X = s.x
    return [(m, n) for n in g.ids if X[n] is NodeExecState.DL
            for m in g.parents[n] if s.dl_bits.get((m, n), 0.0) > 0 and X[m] is NodeExecState.CM]


def _count(s: SimState, g: CallGraph):
    states = list(s.x.values())
    s.n_ul = states.count(NodeExecState.UL)
    s.n_l = states.count(NodeExecState.CP_L)
    s.n_r = states.count(NodeExecState.CP_R)
    s.n_dl = len(_dl_streams(s, g))


def _drain(amount, rate, eps, total):
    done = min(amount, rate * eps)
    left = amount - done
    if left <= _RESIDUAL_TOL * max(total, 1.0):
        done, left = amount, 0.0
    return left, done


def step(s: SimState, g: CallGraph, prof: PlatformProfile, plan: OffloadPlan) -> SimState:
    """Advance one step in place and return ``s``."""
    S = NodeExecState
    I = plan.decisions
    eps = s.eps_d
    _count(s, g)
    X = dict(s.x)
    streams = _dl_streams(s, g)
    n_ul, n_dl, n_l, n_r = s.n_ul, s.n_dl, s.n_l, s.n_r

    if n_l:
        de = prof.p_local * eps
        s.e_local += de
        s.energy += de
    for n in g.ids:
        if X[n] is S.UL:
            edge, _ = s.ul_queue[n][0]
            de = (plan.power(*edge) + prof.p_rf) * eps
            s.e_ul += de
            s.energy += de
    de = len(streams) * (prof.p_rx + prof.p_rf) * eps
    s.e_dl += de
    s.energy += de

    for edge in streams:
        left, done = _drain(s.dl_bits[edge], prof.c_dl / n_dl, eps, g.bits(*edge))
        s.dl_bits[edge] = left
        s.processed["dl"] += done

    new = dict(X)
    for n in g.ids:
        st = X[n]
        if st is S.CM:
            continue
        if st is S.UL:
            head = s.ul_queue[n][0]
            p = plan.power(*head[0])
            rate = ul_rate(p, prof, ConcurrencyProfile(n_ul=n_ul)) if p > 0 else 0.0
            head[1], done = _drain(head[1], rate, eps, g.bits(*head[0]))
            s.processed["ul"] += done
            if head[1] == 0.0:
                s.ul_queue[n].pop(0)
                if not s.ul_queue[n]:
                    new[n] = S.CP_R if I[n] else S.CM
        elif st is S.CP_L:
            s.cyc_local[n], done = _drain(s.cyc_local[n], prof.f_local / n_l, eps, g.cycles(n))
            s.processed["local"] += done
            if s.cyc_local[n] == 0.0:
                up = n not in g.data_nodes and s.ul_queue.get(n)
                new[n] = S.UL if up else S.CM
        elif st is S.CP_R:
            s.cyc_remote[n], done = _drain(s.cyc_remote[n], prof.f_remote / n_r, eps, g.cycles(n))
            s.processed["remote"] += done
            if s.cyc_remote[n] == 0.0:
                new[n] = S.CM
        elif st is S.DL:
            parents = g.parents[n]
            if all(X[m] is S.CM for m in parents) and all(s.dl_bits.get((m, n), 0.0) == 0.0 for m in parents):
                new[n] = S.CP_L
        elif st is S.ID:
            new[n] = _leave_idle(n, g, I, X, s)

    s.x = new
    s.k += 1
    _count(s, g)
    return s


def _leave_idle(n, g, I, X, s):
    S = NodeExecState
    parents = g.parents[n]
    all_done = all(X[m] is S.CM for m in parents)
    if I[n] == 0:
        if any(I[m] == 1 and X[m] is S.CM and s.dl_bits.get((m, n), 0.0) > 0 for m in parents):
            return S.DL
        return S.CP_L if all_done else S.ID
    if not all_done:
        return S.ID
    return S.UL if s.ul_queue.get(n) else S.CP_R


def _guard(g, prof, plan, eps_d):
    from .serial import evaluate_serial

    lat = evaluate_serial(g, prof, plan).latency
    if not math.isfinite(lat):
        return None
    return int(10 * (lat + len(g.ids) * eps_d) / eps_d) + 10


def run(g: CallGraph, prof: PlatformProfile, plan: OffloadPlan, eps_d: float,
        max_steps: int | None = None) -> SimResult:
    ensure_valid(g)
    s = init_sim(g, prof, plan, eps_d)
    limit = max_steps if max_steps is not None else _guard(g, prof, plan, eps_d)
    tl = Timeline()
    tl.record(s.t, s.x)
    root = g.root
    while s.x[root] is not NodeExecState.CM:
        if limit is not None and s.k > limit:
            raise StalledScheduleError(f"stalled-schedule after {s.k - 1} steps", _stuck(s))
        before = _snapshot(s)
        step(s, g, prof, plan)
        tl.record(s.t, s.x)
        if _snapshot(s) == before:
            raise StalledScheduleError(f"stalled-schedule at t={s.t:.6g} s", _stuck(s))
    tl.close(s.t)
    return SimResult(s.energy, s.t, s.k - 1, tl, s)


def _snapshot(s):
    return (tuple(s.x.values()), tuple(b for q in s.ul_queue.values() for _, b in q),
            tuple(s.dl_bits.values()), tuple(s.cyc_local.values()), tuple(s.cyc_remote.values()))


def _stuck(s):
    return sorted(n for n, st in s.x.items() if st is not NodeExecState.CM)


def export_timeline(timeline: Timeline) -> str:
    from .io import fmt

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "state", "start_s", "end_s"])
    for r in timeline.rows:
        w.writerow([r.node, r.state, fmt(r.start), fmt(r.end)])
    return buf.getvalue()
