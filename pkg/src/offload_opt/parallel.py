"""Deadline-constrained energy minimization for parallel execution.

Concurrency counts are frozen (``ConcurrencyProfile``) so every stream sees a
fixed share of the uplink, downlink and both processors.  Completion times
then follow a max-plus recursion over the call graph, and the minimum energy
under a deadline is approximated by dynamic programming over an ``eps``-spaced
budget grid.

Budget bookkeeping: ``E[n][k]`` is the least energy to finish the subtree of
``n`` by ``t_k = (k - 1) * eps``.  An operation lasting ``x`` seconds consumes
``ceil(x / eps)`` grid steps, so every plan read back from the tables meets
its deadline under the exact recursion.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import InfeasibleError, NotATreeError, OffloadError, UnsupportedStructureError
from .graph import CallGraph, ancestors_closure, decompose, ensure_valid, topological_order
from .physical import (ConcurrencyProfile, PlatformProfile, clip_power, dl_rate,
                       optimal_ratio_power, required_power, transmit_energy, ul_rate)
from .plan import EnergyLatency, OffloadPlan, check_plan

INF = math.inf
POWER_NUDGE = 1.0 + 1e-10
# times within this many grid steps of a grid point count as on it
SNAP = 1e-9


@dataclass(frozen=True)
class QuantGrid:
    eps: float
    deadline: float

    def __post_init__(self):
        if not self.eps > 0:
            raise OffloadError("eps must be > 0")
        if not self.deadline >= 0:
            raise OffloadError("deadline must be >= 0")

    @property
    def k_max(self) -> int:
        # snap so that e.g. 6 / 0.1 = 59.999... still yields t_K = 6
        return int(math.floor(self.deadline / self.eps + SNAP)) + 1

    def t(self, k: int) -> float:
        return (k - 1) * self.eps

    def slots(self, x: float) -> int:
        """Grid steps consumed by an operation of ``x`` seconds."""
        if x <= 0:
            return 0
        if not math.isfinite(x):
            return self.k_max + 1
        return int(math.ceil(x / self.eps))


def grid_value(t: float, grid: QuantGrid) -> float:
    """Round ``t`` up to the grid: ``t_k`` for ``t`` in ``(t_{k-1}, t_k]``; inf past the deadline."""
    if t < 0:
        raise OffloadError(f"negative time {t}")
    k = max(0, math.ceil(t / grid.eps - SNAP)) + 1
    return grid.t(k) if k <= grid.k_max else INF


def quantize_up(t: float, grid: QuantGrid) -> int:
    """Index ``k`` with ``t`` in ``[t_{k-1}, t_k)``, capped at ``K + 1``."""
    if t < 0:
        raise OffloadError(f"negative time {t}")
    k = int(math.floor(t / grid.eps + SNAP)) + 2
    return min(k, grid.k_max + 1)


def _rates(prof, conc):
    return prof.f_local / conc.n_l, prof.f_remote / conc.n_r, dl_rate(prof, conc)


def latency_recursion(g: CallGraph, prof: PlatformProfile, conc: ConcurrencyProfile,
                      plan: OffloadPlan) -> float:
    """Completion time of the root when tasks start as soon as their inputs arrive."""
    return completion_times(g, prof, conc, plan)[g.root]


def completion_times(g, prof, conc, plan) -> dict[int, float]:
    f_l, f_r, cdl = _rates(prof, conc)
    I = plan.decisions
    done = {}
    for n in topological_order(g):
        compute = g.cycles(n) / (f_r if I[n] else f_l)
        ready = 0.0
        for m in g.parents[n]:
            t = done[m]
            b = g.bits(m, n)
            if I[m] == 0 and I[n] == 1:
                p = plan.power(m, n)
                t += b / ul_rate(p, prof, conc) if p > 0 else INF
            elif I[m] == 1 and I[n] == 0:
                t += b / cdl
            ready = max(ready, t)
        done[n] = ready + compute
    return done


def parallel_energy(g: CallGraph, prof: PlatformProfile, conc: ConcurrencyProfile,
                    plan: OffloadPlan) -> float:
    I = plan.decisions
    cdl = dl_rate(prof, conc)
    energy = sum(prof.p_local * g.cycles(n) / prof.f_local for n in g.ids if I[n] == 0)
    for e in g.edges:
        if I[e.src] == 0 and I[e.dst] == 1:
            energy += transmit_energy(plan.power(e.src, e.dst), e.bits, prof.p_rf, prof, conc)
        elif I[e.src] == 1 and I[e.dst] == 0:
            energy += (prof.p_rf + prof.p_rx) * e.bits / cdl
    return energy


def evaluate_parallel(g, prof, conc, plan) -> EnergyLatency:
    check_plan(g, plan)
    lat = latency_recursion(g, prof, conc, plan)
    flags = () if math.isfinite(lat) else ("zero-power-edge",)
    return EnergyLatency(parallel_energy(g, prof, conc, plan), lat, flags)


# --------------------------------------------------------------------------- DP


@dataclass(frozen=True)
class _Model:
    prof: PlatformProfile
    conc: ConcurrencyProfile
    grid: QuantGrid
    f_l: float
    f_r: float
    c_dl: float
    p_star: float
    frozen: dict | None
    cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def build(cls, prof, conc, grid, frozen=None):
        f_l, f_r, cdl = _rates(prof, conc)
        p_star = optimal_ratio_power(prof, prof.p_rf, conc).power
        return cls(prof, conc, grid, f_l, f_r, cdl, p_star, frozen)


class EdgeTable(NamedTuple):
    """Best uplink option per budget index for one local-parent/offloaded-child edge."""

    cost: np.ndarray
    slot: np.ndarray
    power: np.ndarray


@dataclass
class NodeTables:
    e_local: np.ndarray
    e_remote: np.ndarray
    choice_local: dict = field(default_factory=dict)
    choice_remote: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)


def _shift(arr: np.ndarray, s: int) -> np.ndarray:
    out = np.full_like(arr, INF)
    K = arr.shape[0] - 1
    if s <= 0:
        out[1:] = arr[1:]
    elif s < K:
        out[1 + s:] = arr[1:K + 1 - s]
    return out


def _uplink_candidates(bits, l_remote, model: _Model, kmax):
    """Per-slot uplink powers and energies for one edge.

    Slot ``j`` means upload plus remote compute fit in ``j`` grid steps.  The
    cheapest power inside the slot's power interval is the unconstrained
    minimizer clipped into it; slots past the one holding the minimizer are
    dominated and dropped.
    """
    prof, conc, eps = model.prof, model.conc, model.grid.eps
    j_lo = max(1, int(math.floor(l_remote / eps)) + 1)
    if j_lo > kmax - 1:
        return 0, np.empty(0), np.empty(0)
    j = np.arange(j_lo, kmax)
    dur = j * eps - l_remote
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        expo = conc.n_ul * bits / (prof.bandwidth * dur)
        lo = np.where(expo > 1000.0, INF,
                      np.expm1(np.minimum(expo, 1000.0) * math.log(2.0)) / (prof.snr_gain * conc.n_ul))
    lo = lo * POWER_NUDGE
    ok = lo <= prof.p_max
    if not ok.any():
        return 0, np.empty(0), np.empty(0)
    first = int(np.argmax(ok))
    j, lo = j[first:], lo[first:]
    target = clip_power(model.p_star, prof.p_min, prof.p_max)
    reach = np.nonzero(lo <= target)[0]
    if reach.size:
        j, lo = j[:reach[0] + 1], lo[:reach[0] + 1]
    hi = np.empty_like(lo)
    hi[0] = prof.p_max
    hi[1:] = lo[:-1]
    hi = np.minimum(hi, prof.p_max)
    power = np.clip(target, np.maximum(lo, prof.p_min), np.maximum(hi, prof.p_min))
    rate = prof.bandwidth * np.log2(1.0 + conc.n_ul * prof.snr_gain * power) / conc.n_ul
    tx = (power + prof.p_rf) * bits / rate
    return int(j[0]), tx, power


def edge_power_table(bits, l_remote, parent_local, model: _Model, power=None) -> EdgeTable:
    K = parent_local.shape[0] - 1
    if power is not None:
        if power <= 0:
            return EdgeTable(np.full(K + 1, INF), np.full(K + 1, -1, dtype=np.int64), np.zeros(K + 1))
        d = bits / ul_rate(power, model.prof, model.conc)
        j0 = model.grid.slots(l_remote + d)
        tx = np.array([transmit_energy(power, bits, model.prof.p_rf, model.prof, model.conc)])
        powers = np.array([power])
    else:
        key = (bits, l_remote, K)
        hit = model.cache.get(key)
        if hit is None:
            hit = model.cache[key] = _uplink_candidates(bits, l_remote, model, K)
        j0, tx, powers = hit
    cost = np.empty(K + 1)
    slot = np.empty(K + 1, dtype=np.int64)
    if tx.size == 0:
        cost[:] = INF
        slot[:] = -1
    else:
        kernels.minplus_select(np.ascontiguousarray(tx, dtype=np.float64), j0,
                               np.ascontiguousarray(parent_local, dtype=np.float64), cost, slot)
    pw = np.zeros(K + 1)
    hit = slot >= 0
    pw[hit] = powers[slot[hit] - j0]
    return EdgeTable(cost, slot, pw)


def edge_power_table_for(g, prof, conc, grid, parent_local, edge) -> EdgeTable:
    """Uplink power table for ``edge`` given the parent's local-energy table."""
    m, n = edge
    model = _Model.build(prof, conc, grid)
    return edge_power_table(g.bits(m, n), g.cycles(n) / model.f_r, np.asarray(parent_local, float), model)


def _node_tables(g: CallGraph, n: int, model: _Model, parent_tables, K: int) -> NodeTables:
    prof, grid = model.prof, model.grid
    v = g.cycles(n)
    l_loc = v / model.f_l
    e_comp = prof.p_local * v / prof.f_local
    if n in g.data_nodes:
        e_l = np.full(K + 1, INF)
        e_l[1 + grid.slots(l_loc):] = e_comp
        return NodeTables(e_l, np.full(K + 1, INF))

    s_l = grid.slots(l_loc)
    e_l = np.full(K + 1, e_comp)
    e_l[0] = INF
    tables = NodeTables(e_l, None)
    for m in g.parents[n]:
        pt = parent_tables[m]
        b = g.bits(m, n)
        a = _shift(pt.e_local, s_l)
        t_dl = b / model.c_dl
        r = _shift(pt.e_remote, grid.slots(l_loc + t_dl)) + (prof.p_rf + prof.p_rx) * t_dl
        pick = r < a
        e_l += np.where(pick, r, a)
        tables.choice_local[m] = pick

    if n in g.forced_local:
        tables.e_remote = np.full(K + 1, INF)
        return tables

    l_rem = v / model.f_r
    s_r = grid.slots(l_rem)
    e_r = np.zeros(K + 1)
    e_r[0] = INF
    for m in g.parents[n]:
        pt = parent_tables[m]
        frozen = None if model.frozen is None else model.frozen.get((m, n), 0.0)
        et = edge_power_table(g.bits(m, n), l_rem, pt.e_local, model, power=frozen)
        rr = _shift(pt.e_remote, s_r)
        pick = rr < et.cost
        e_r += np.where(pick, rr, et.cost)
        tables.choice_remote[m] = pick
        tables.edges[m] = et
    e_r[0] = INF
    tables.e_remote = e_r
    return tables


def _run_tree_dp(g, model, K, order, pseudo=None):
    tables = dict(pseudo or {})
    for n in order:
        if n in tables:
            continue
        tables[n] = _node_tables(g, n, model, tables, K)
    return tables


def _backtrack(g, model, tables, order, start_k, decisions, powers, skip=()):
    grid = model.grid
    budget = {g.root: start_k}
    decisions[g.root] = 0
    for n in reversed(order):
        if n not in budget or n in skip:
            continue
        k, x = budget[n], decisions[n]
        t = tables[n]
        v = g.cycles(n)
        for m in g.parents[n]:
            b = g.bits(m, n)
            if x == 0:
                l_loc = v / model.f_l
                if t.choice_local[m][k]:
                    y, used = 1, grid.slots(l_loc + b / model.c_dl)
                else:
                    y, used = 0, grid.slots(l_loc)
            else:
                if t.choice_remote[m][k]:
                    y, used = 1, grid.slots(v / model.f_r)
                else:
                    et = t.edges[m]
                    y, used = 0, int(et.slot[k])
                    powers[(m, n)] = float(et.power[k])
            if m not in skip:
                decisions[m] = y
            budget[m] = k - used
    return budget


class ParallelSolution(NamedTuple):
    plan: OffloadPlan
    energy: float


def dp_tables(g: CallGraph, prof, conc, grid, frozen=None) -> dict[int, NodeTables]:
    model = _Model.build(prof, conc, grid, frozen)
    return _run_tree_dp(g, model, grid.k_max, topological_order(g))


def solve_parallel_tree(g: CallGraph, prof: PlatformProfile, conc: ConcurrencyProfile,
                        grid: QuantGrid, frozen: dict | None = None) -> ParallelSolution:
    ensure_valid(g)
    if not decompose(g).is_tree:
        raise NotATreeError("not-a-tree, use solve_parallel_general")
    return _solve_tree(g, prof, conc, grid, frozen)


def _solve_tree(g, prof, conc, grid, frozen):
    model = _Model.build(prof, conc, grid, frozen)
    K = grid.k_max
    order = topological_order(g)
    tables = _run_tree_dp(g, model, K, order)
    energy = float(tables[g.root].e_local[K])
    if not math.isfinite(energy):
        raise InfeasibleError(f"no schedule meets the {grid.deadline} s deadline")
    decisions, powers = {}, {}
    _backtrack(g, model, tables, order, K, decisions, powers)
    return ParallelSolution(OffloadPlan(decisions, powers), energy)


# ------------------------------------------------------------- general graphs


def _core_uplink_candidates(bits, model: _Model, K, frozen_power):
    """Durations (one per grid step) and their cheapest power for a core uplink."""
    prof, conc, eps = model.prof, model.conc, model.grid.eps
    if frozen_power is not None:
        if frozen_power <= 0:
            return np.empty(0), np.empty(0), np.empty(0)
        d = bits / ul_rate(frozen_power, prof, conc)
        e = transmit_energy(frozen_power, bits, prof.p_rf, prof, conc)
        return np.array([d]), np.array([e]), np.array([frozen_power])
    target = clip_power(model.p_star, prof.p_min, prof.p_max)
    d_star = bits / ul_rate(target, prof, conc) if target > 0 else INF
    durs, ens, pws = [], [], []
    for j in range(1, K):
        d = j * eps
        p = required_power(bits, d, prof, conc) * POWER_NUDGE
        if p > prof.p_max:
            continue
        if d >= d_star:
            p = target
        p = max(p, prof.p_min)
        durs.append(bits / ul_rate(p, prof, conc))
        ens.append(transmit_energy(p, bits, prof.p_rf, prof, conc))
        pws.append(p)
        if d >= d_star:
            break
    return np.array(durs), np.array(ens), np.array(pws)


def _pseudo_tables(I_c, sigma, K):
    live = np.full(K + 1, INF)
    if sigma + 1 <= K:
        live[1 + sigma:] = 0.0
    dead = np.full(K + 1, INF)
    return NodeTables(dead, live) if I_c else NodeTables(live, dead)


def _local_value_at(g, n, k, model, parent_tables):
    """``E_local(n, k)`` without building the full table."""
    prof, grid = model.prof, model.grid
    v = g.cycles(n)
    l_loc = v / model.f_l
    total = prof.p_local * v / prof.f_local
    s_l = grid.slots(l_loc)
    for m in g.parents[n]:
        pt = parent_tables[m]
        t_dl = g.bits(m, n) / model.c_dl
        ka, kr = k - s_l, k - grid.slots(l_loc + t_dl)
        a = pt.e_local[ka] if ka >= 1 else INF
        r = pt.e_remote[kr] + (prof.p_rf + prof.p_rx) * t_dl if kr >= 1 else INF
        total += min(a, r)
    return total


class _Residual:
    """Memoized DP over the residual in-tree for varying pseudo-leaf offsets."""

    def __init__(self, g, model, K, order, core, pseudo, I_core):
        self.g, self.model, self.K = g, model, K
        self.order = [n for n in order if n not in core]
        self.core = core
        self.I = I_core
        self.upstream = {}
        for n in self.order:
            up = set()
            for m in g.parents[n]:
                up |= {m} if m in core else set(self.upstream[m])
            self.upstream[n] = tuple(sorted(up))
        self.memo = {}

    def _parents(self, n, sigma):
        out = {}
        for m in self.g.parents[n]:
            if m in self.core:
                out[m] = _pseudo_tables(self.I[m], sigma[m], self.K)
            else:
                out[m] = self.table(m, sigma)
        return out

    def table(self, n, sigma):
        key = (n, tuple(sigma[c] for c in self.upstream[n]))
        hit = self.memo.get(key)
        if hit is None:
            hit = _node_tables(self.g, n, self.model, self._parents(n, sigma), self.K)
            self.memo[key] = hit
        return hit

    def root_value(self, sigma):
        g = self.g
        return _local_value_at(g, g.root, self.K, self.model, self._parents(g.root, sigma))

    def full_tables(self, sigma):
        tables = {}
        for n in self.order:
            tables[n] = self.table(n, sigma) if n != self.g.root else _node_tables(
                self.g, n, self.model, self._parents(n, sigma), self.K)
        for c in self.core:
            tables[c] = _pseudo_tables(self.I[c], sigma.get(c, self.K), self.K)
        return tables


def solve_parallel_general(g: CallGraph, prof: PlatformProfile, conc: ConcurrencyProfile,
                           grid: QuantGrid, frozen: dict | None = None) -> ParallelSolution:
    """Enumerate decisions on the ancestors of the map nodes, DP on the rest.

    For each assignment of the core (map nodes plus their ancestors), core
    uplink durations are enumerated on the grid, core completion times come
    from the exact recursion, and the residual in-tree is solved by the DP
    with each core parent acting as a leaf available from its completion
    slot onward.
    """
    ensure_valid(g)
    rep = decompose(g)
    if rep.is_tree:
        return _solve_tree(g, prof, conc, grid, frozen)
    if not rep.forest_after_removal:
        raise UnsupportedStructureError("residual components are not trees (junction tree out of scope)")

    model = _Model.build(prof, conc, grid, frozen)
    K = grid.k_max
    order = topological_order(g)
    core = ancestors_closure(g, rep.separators)
    core_order = [n for n in order if n in core]
    pseudo = sorted({m for n in order if n not in core for m in g.parents[n] if m in core})
    free_core = [n for n in core_order if n not in g.forced_local]
    core_edges = [e for e in g.edges if e.src in core and e.dst in core]

    best = None
    for bits_ in itertools.product((0, 1), repeat=len(free_core)):
        I = {n: 0 for n in core_order}
        I.update(zip(free_core, bits_))
        up = [e for e in core_edges if I[e.src] == 0 and I[e.dst] == 1]
        cands = []
        for e in up:
            fp = None if frozen is None else frozen.get(e.key, 0.0)
            cands.append(_core_uplink_candidates(e.bits, model, K, fp))
        if any(c[0].size == 0 for c in cands):
            continue
        naxes = len(up)
        axis_of = {e.key: i for i, e in enumerate(up)}

        def along(arr, i):
            shape = [1] * naxes
            shape[i] = arr.size
            return arr.reshape(shape)

        const = sum(prof.p_local * g.cycles(n) / prof.f_local for n in core_order if I[n] == 0)
        energy = np.asarray(const, dtype=float)
        for i, c in enumerate(cands):
            energy = energy + along(c[1], i)
        done = {}
        for n in core_order:
            comp = g.cycles(n) / (model.f_r if I[n] else model.f_l)
            ready = np.asarray(0.0)
            for m in g.parents[n]:
                t = done[m]
                b = g.bits(m, n)
                if I[m] == 0 and I[n] == 1:
                    t = t + along(cands[axis_of[(m, n)]][0], axis_of[(m, n)])
                elif I[m] == 1 and I[n] == 0:
                    t = t + b / model.c_dl
                    energy = energy + (prof.p_rf + prof.p_rx) * b / model.c_dl
                ready = np.maximum(ready, t)
            done[n] = ready + comp
        shape = np.broadcast_shapes(energy.shape, *(np.shape(done[c]) for c in pseudo))
        energy_f = np.broadcast_to(energy, shape).ravel()
        sig = np.stack([np.ceil(np.broadcast_to(done[c], shape).ravel() / grid.eps)
                        for c in pseudo], axis=1) if pseudo else np.zeros((energy_f.size, 0))
        sig = np.where(np.isfinite(sig), sig, K + 1).astype(np.int64)
        sig = np.maximum(sig, 0)

        keep = {}
        for idx in np.argsort(energy_f, kind="stable"):
            key = tuple(sig[idx])
            if key not in keep:
                keep[key] = idx
        resid = _Residual(g, model, K, order, core, pseudo, I)
        for key, idx in keep.items():
            if any(s > K - 1 for s in key):
                continue
            sigma = dict(zip(pseudo, key))
            total = float(energy_f[idx]) + resid.root_value(sigma)
            if not math.isfinite(total):
                continue
            if best is None or total < best[0]:
                flat = np.unravel_index(idx, shape) if naxes else ()
                best = (total, dict(I), sigma, resid, up, cands, flat, shape)

    if best is None:
        raise InfeasibleError(f"no schedule meets the {grid.deadline} s deadline")
    total, I, sigma, resid, up, cands, flat, shape = best
    decisions = dict(I)
    powers = {}
    for i, e in enumerate(up):
        powers[e.key] = float(cands[i][2][int(flat[i])])
    tables = resid.full_tables(sigma)
    _backtrack(g, model, tables, order, K, decisions, powers, skip=core)
    return ParallelSolution(OffloadPlan(decisions, powers), total)


def solve_parallel(g, prof, conc, grid, frozen=None) -> ParallelSolution:
    """Tree DP when possible, core enumeration otherwise."""
    return solve_parallel_general(g, prof, conc, grid, frozen)


class AutoSolution(NamedTuple):
    plan: OffloadPlan
    energy: float
    conc: ConcurrencyProfile
    sim_energy: float
    sim_latency: float


def solve_parallel_auto(g, prof, grid, eps_d=0.01, levels=(1, 2, 3, 4)) -> AutoSolution:
    """Try uniform concurrency levels and keep the best simulated result.

    Among levels whose simulated latency meets the deadline the lowest
    simulated energy wins; if none does, the lowest simulated latency wins.
    """
    from .simulator import run

    results = []
    for n in levels:
        conc = ConcurrencyProfile.uniform(n)
        try:
            sol = solve_parallel(g, prof, conc, grid)
        except InfeasibleError:
            continue
        sim = run(g, prof, sol.plan, eps_d)
        results.append(AutoSolution(sol.plan, sol.energy, conc, sim.energy, sim.latency))
    if not results:
        raise InfeasibleError(f"no concurrency level meets the {grid.deadline} s deadline")
    ok = [r for r in results if r.sim_latency <= grid.deadline]
    if ok:
        return min(ok, key=lambda r: (r.sim_energy, r.conc.n_ul))
    return min(results, key=lambda r: (r.sim_latency, r.conc.n_ul))


class BaselineResult(NamedTuple):
    plan: OffloadPlan
    energy: float
    latency: float


def separate_design_parallel(g, prof, conc, grid) -> BaselineResult:
    """Decisions-only DP with uplink powers frozen by the local-time rule."""
    from .serial import separate_powers

    powers, _ = separate_powers(g, prof)
    try:
        plan, _ = solve_parallel(g, prof, conc, grid, frozen=powers)
    except InfeasibleError:
        plan = OffloadPlan.all_local(g)
        if latency_recursion(g, prof, conc, plan) > grid.deadline * (1 + 1e-12):
            raise
    el = evaluate_parallel(g, prof, conc, plan)
    return BaselineResult(plan, el.energy, el.latency)


# ----------------------------------------------------------------------- sweeps

SWEEP_COLUMNS = ("lmax_s", "eps_s", "conc", "dp_energy_J", "recursion_latency_s",
                 "sim_energy_J", "sim_latency_s", "decisions_bitstring")


def _sweep_point(args):
    g, prof, conc, lmax, eps, eps_d = args
    from .simulator import run

    grid = QuantGrid(eps, lmax)
    try:
        if conc == "auto":
            sol = solve_parallel_auto(g, prof, grid, eps_d)
            plan, energy, used = sol.plan, sol.energy, sol.conc
        else:
            plan, energy = solve_parallel(g, prof, conc, grid)
            used = conc
    except InfeasibleError:
        return {"lmax_s": lmax, "eps_s": eps, "conc": _conc_label(conc), "dp_energy_J": INF,
                "recursion_latency_s": INF, "sim_energy_J": INF, "sim_latency_s": INF,
                "decisions_bitstring": "infeasible"}
    sim = run(g, prof, plan, eps_d)
    return {
        "lmax_s": lmax,
        "eps_s": eps,
        "conc": _conc_label(used),
        "dp_energy_J": energy,
        "recursion_latency_s": latency_recursion(g, prof, used, plan),
        "sim_energy_J": sim.energy,
        "sim_latency_s": sim.latency,
        "decisions_bitstring": plan.bitstring(g),
    }


def _conc_label(conc):
    return conc if isinstance(conc, str) else str(conc.n_ul)


def sweep_deadline(g, prof, conc, lmaxs, eps, eps_d=0.01, workers=None) -> list[dict]:
    """One solve per deadline; rows keep the order of ``lmaxs``."""
    ensure_valid(g)
    jobs = [(g, prof, conc, float(l), eps, eps_d) for l in lmaxs]
    workers = workers or int(os.environ.get("OFFLOAD_OPT_THREADS", "1") or 1)
    if workers <= 1 or len(jobs) <= 1:
        return [_sweep_point(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_point, jobs))
