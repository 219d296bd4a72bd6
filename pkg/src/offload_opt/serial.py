"""Exact weighted energy+latency minimization for serial execution.

With the uplink power fixed at its closed-form optimum, the objective
``E + lambda * L`` becomes a sum of per-node factors over binary decisions.
On call trees those factors are minimized exactly by min-sum message passing
from the data leaves to the root; general graphs enumerate the decisions of
their map nodes and run the same recursion on each residual tree.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import NotATreeError, UnsupportedStructureError
from .graph import CallGraph, decompose, ensure_valid, topological_order
from .physical import (PlatformProfile, PowerSolution, optimal_serial_power,
                       required_power, transmit_energy, uplink_capacity)
from .plan import EnergyLatency, OffloadPlan, uplink_edges

INF = math.inf


@dataclass(frozen=True)
class NodeFactor:
    """Cost pieces owned by one node.

    ``node_term[x]`` is the compute cost of the node under decision ``x``;
    ``edges[m][y][x]`` is the transfer cost on edge ``(m, n)`` when the parent
    decides ``y`` and the node decides ``x``.
    """

    node_term: tuple[float, float]
    edges: dict[int, tuple[tuple[float, float], tuple[float, float]]] = field(default_factory=dict)


@dataclass(frozen=True)
class SerialFactors:
    lam: float
    power: PowerSolution
    nodes: dict[int, NodeFactor]
    powers: dict[tuple[int, int], float]

    @property
    def degenerate(self) -> bool:
        return self.power.degenerate

    def edge(self, m, n):
        return self.nodes[n].edges[m]

    def total(self, decisions) -> float:
        s = 0.0
        for n, f in self.nodes.items():
            x = decisions[n]
            s += f.node_term[x]
            for m, tab in f.edges.items():
                s += tab[decisions[m]][x]
        return s


@dataclass
class Message:
    e_local: float
    e_remote: float
    choice_local: dict[int, int] = field(default_factory=dict)
    choice_remote: dict[int, int] = field(default_factory=dict)

    def __getitem__(self, x):
        return self.e_remote if x else self.e_local

    def choice(self, x):
        return self.choice_remote if x else self.choice_local


class SerialSolution(NamedTuple):
    plan: OffloadPlan
    objective: float


class SweepPoint(NamedTuple):
    lam: float
    energy: float
    latency: float
    plan: OffloadPlan


def evaluate_serial(g: CallGraph, prof: PlatformProfile, plan: OffloadPlan) -> EnergyLatency:
    """Energy and latency when every operation runs one after another."""
    I = plan.decisions
    lat_terms, en_terms = [], []
    flags = []
    for n in g.ids:
        v = g.cycles(n)
        if I[n]:
            lat_terms.append(v / prof.f_remote)
        else:
            lat_terms.append(v / prof.f_local)
            en_terms.append(prof.p_local * v / prof.f_local)
    cdl = prof.c_dl
    for e in g.edges:
        im, in_ = I[e.src], I[e.dst]
        if im == 0 and in_ == 1:
            p = plan.power(e.src, e.dst)
            if p <= 0.0:
                lat_terms.append(INF)
                if "zero-power-edge" not in flags:
                    flags.append("zero-power-edge")
            else:
                lat_terms.append(e.bits / uplink_capacity(p, prof))
            en_terms.append(transmit_energy(p, e.bits, prof.p_rf, prof))
        elif im == 1 and in_ == 0:
            lat_terms.append(e.bits / cdl)
            en_terms.append((prof.p_rf + prof.p_rx) * e.bits / cdl)
    # fsum keeps sums of exact decimal inputs exact (13.5, not 13.499999999999998)
    energy = math.fsum(en_terms)
    latency = math.fsum(lat_terms)
    return EnergyLatency(energy, latency, tuple(flags))


def build_factors(g: CallGraph, prof: PlatformProfile, lam: float,
                  powers: dict | None = None) -> SerialFactors:
    """Per-node factors with uplink powers set to the common optimum.

    ``powers`` overrides the power per edge (used by the separate-design
    baseline); edges missing from it keep the optimum.
    """
    best = optimal_serial_power(prof, lam)
    c_up = prof.p_rf + lam
    c_dn = prof.p_rf + prof.p_rx + lam
    cdl = prof.c_dl
    edge_powers = {}
    nodes = {}
    for n in g.ids:
        v = g.cycles(n)
        node_term = ((prof.p_local + lam) * v / prof.f_local, lam * v / prof.f_remote)
        tabs = {}
        for m in g.parents[n]:
            b = g.bits(m, n)
            p = best.power if powers is None else powers.get((m, n), best.power)
            edge_powers[(m, n)] = p
            up = transmit_energy(p, b, c_up, prof)
            down = c_dn * b / cdl
            tabs[m] = ((0.0, up), (down, 0.0))
        nodes[n] = NodeFactor(node_term, tabs)
    return SerialFactors(lam, best, nodes, edge_powers)


def _min_sum(g: CallGraph, factors: SerialFactors, comp, clamp, order):
    """Leaf-to-sink min-sum over the nodes in ``comp``.

    Decisions in ``clamp`` are fixed; edges touching them fold into unary
    terms of the free endpoint.  Returns (value, messages, sink).
    """
    msgs: dict[int, Message] = {}
    forced = g.forced_local
    sink = None
    for n in order:
        if n not in comp:
            continue
        f = factors.nodes[n]
        vals = []
        choices = []
        for x in (0, 1):
            if x == 1 and n in forced:
                vals.append(INF)
                choices.append({})
                continue
            total = f.node_term[x]
            ch = {}
            for m, tab in f.edges.items():
                if m in comp:
                    pm = msgs[m]
                    a = pm.e_local + tab[0][x]
                    b = pm.e_remote + tab[1][x]
                    if a <= b:
                        total += a
                        ch[m] = 0
                    else:
                        total += b
                        ch[m] = 1
                else:
                    total += tab[clamp[m]][x]
            for c in g.children[n]:
                if c not in comp:
                    total += factors.nodes[c].edges[n][x][clamp[c]]
            vals.append(total)
            choices.append(ch)
        msgs[n] = Message(vals[0], vals[1], choices[0], choices[1])
        if all(c not in comp for c in g.children[n]):
            sink = n
    m = msgs[sink]
    return min(m.e_local, m.e_remote), msgs, sink


def _backtrack(g: CallGraph, msgs, sink, order, decisions):
    m = msgs[sink]
    decisions[sink] = 0 if m.e_local <= m.e_remote else 1
    for n in reversed(order):
        if n not in msgs or n not in decisions:
            continue
        for parent, y in msgs[n].choice(decisions[n]).items():
            decisions[parent] = y


def _plan_from(g, decisions, factors) -> OffloadPlan:
    powers = {k: factors.powers[k] for k in uplink_edges(g, decisions)}
    return OffloadPlan(decisions, powers)


def solve_with_factors(g: CallGraph, factors: SerialFactors) -> SerialSolution:
    rep = decompose(g)
    if not rep.forest_after_removal:
        raise UnsupportedStructureError("residual components are not trees (junction tree out of scope)")
    order = topological_order(g)
    seps = sorted(rep.separators)
    free_seps = [s for s in seps if s not in g.forced_local]
    best = None
    for bits in itertools.product((0, 1), repeat=len(free_seps)):
        clamp = {s: 0 for s in seps}
        clamp.update(zip(free_seps, bits))
        const = 0.0
        for s in seps:
            f = factors.nodes[s]
            const += f.node_term[clamp[s]]
            for m, tab in f.edges.items():
                if m in clamp:
                    const += tab[clamp[m]][clamp[s]]
        total = const
        runs = []
        for comp in rep.components:
            value, msgs, sink = _min_sum(g, factors, comp, clamp, order)
            total += value
            runs.append((msgs, sink))
        if best is None or total < best[0]:
            best = (total, clamp, runs)
    total, clamp, runs = best
    decisions = dict(clamp)
    for msgs, sink in runs:
        _backtrack(g, msgs, sink, order, decisions)
    return SerialSolution(_plan_from(g, decisions, factors), total)


def solve_serial_tree(g: CallGraph, prof: PlatformProfile, lam: float) -> SerialSolution:
    ensure_valid(g)
    if not decompose(g).is_tree:
        raise NotATreeError("not-a-tree, use solve_serial_general")
    return solve_with_factors(g, build_factors(g, prof, lam))


def solve_serial_general(g: CallGraph, prof: PlatformProfile, lam: float) -> SerialSolution:
    ensure_valid(g)
    return solve_with_factors(g, build_factors(g, prof, lam))


def sweep_lambda(g: CallGraph, prof: PlatformProfile, lambdas) -> list[SweepPoint]:
    out = []
    for lam in lambdas:
        plan, _ = solve_serial_general(g, prof, lam)
        el = evaluate_serial(g, prof, plan)
        out.append(SweepPoint(lam, el.energy, el.latency, plan))
    return out


def separate_powers(g: CallGraph, prof: PlatformProfile) -> tuple[dict, list[str]]:
    """Per-edge power that uploads the edge within the child's local compute time."""
    powers = {}
    flags = []
    for e in g.edges:
        t_local = g.cycles(e.dst) / prof.f_local
        if t_local <= 0:
            powers[e.key] = prof.p_max
            flags.append(f"zero-local-time:{e.src}-{e.dst}")
            continue
        p = required_power(e.bits, t_local, prof)
        powers[e.key] = max(min(p, prof.p_max), prof.p_min)
    return powers, flags


class BaselineResult(NamedTuple):
    plan: OffloadPlan
    energy: float
    latency: float
    flags: tuple


def separate_design_serial(g: CallGraph, prof: PlatformProfile, lam: float = 0.0) -> BaselineResult:
    ensure_valid(g)
    powers, flags = separate_powers(g, prof)
    plan, _ = solve_with_factors(g, build_factors(g, prof, lam, powers=powers))
    el = evaluate_serial(g, prof, plan)
    return BaselineResult(plan, el.energy, el.latency, tuple(flags) + el.flags)
