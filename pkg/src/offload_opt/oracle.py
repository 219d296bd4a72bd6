"""Exhaustive reference solvers, used only to check the optimizers.

Nothing here reuses optimizer code.  Powers come from a closed form (serial)
or a log-spaced grid (parallel), and every returned objective is recomputed
by the public evaluators on the returned plan.
"""
from __future__ import annotations

import itertools
import math
from typing import NamedTuple

import numpy as np
from scipy.special import lambertw

from .errors import InfeasibleError, LimitExceededError
from .graph import CallGraph, ensure_valid, topological_order
from .parallel import evaluate_parallel
from .physical import ConcurrencyProfile, PlatformProfile, required_power, transmit_energy
from .plan import OffloadPlan
from .serial import evaluate_serial


class OracleResult(NamedTuple):
    plan: OffloadPlan
    objective: float
    enumerated_count: int


def lambert_power(prof: PlatformProfile, c: float, n_ul: int = 1) -> float:
    """Stationary point of ``(p + c) / rate(p)`` in closed form, clipped to the power box.

    With ``u = 1 + n * g * p`` the first-order condition reads
    ``u (ln u - 1) = n * g * c - 1``, solved by the principal Lambert W branch.
    """
    gc = n_ul * prof.snr_gain * c
    z = (gc - 1.0) / math.e
    # branch point W0(-1/e) = -1; float -1/e sits just outside scipy's domain
    w = -1.0 if z <= -1.0 / math.e else lambertw(z, 0).real
    u = math.exp(1.0 + w)
    p = (u - 1.0) / (prof.snr_gain * n_ul)
    return min(max(p, prof.p_min), prof.p_max)


def brute_force_serial(g: CallGraph, prof: PlatformProfile, lam: float, limit: int = 20) -> OracleResult:
    ensure_valid(g)
    free = list(g.free_nodes)
    if len(free) > limit:
        raise LimitExceededError(f"{len(free)} free nodes > limit {limit}")
    p = lambert_power(prof, prof.p_rf + lam)
    base = {n: 0 for n in g.ids}
    best = None
    count = 0
    for bits in itertools.product((0, 1), repeat=len(free)):
        dec = dict(base)
        dec.update(zip(free, bits))
        powers = {e.key: p for e in g.edges if dec[e.src] == 0 and dec[e.dst] == 1}
        plan = OffloadPlan(dec, powers)
        obj = evaluate_serial(g, prof, plan).objective(lam)
        count += 1
        if best is None or obj < best[1]:
            best = (plan, obj)
    return OracleResult(best[0], best[1], count)


def brute_force_parallel(g: CallGraph, prof: PlatformProfile, conc: ConcurrencyProfile, lmax: float,
                         power_grid_points: int = 200, limit: int = 10, max_edges: int = 4) -> OracleResult:
    """Minimum parallel energy over decisions and a per-edge power grid.

    Each uplink edge gets ``power_grid_points`` log-spaced powers between the
    least power that could move its bits within ``lmax`` and ``p_max``.
    """
    ensure_valid(g)
    free = list(g.free_nodes)
    if len(free) > limit:
        raise LimitExceededError(f"{len(free)} free nodes > limit {limit}")
    order = topological_order(g)
    f_l, f_r = prof.f_local / conc.n_l, prof.f_remote / conc.n_r
    n_dl = conc.n_dl
    x = prof.c_dl / prof.dl_bandwidth
    c_dl = prof.dl_bandwidth * math.log2(1.0 + (2.0 ** x - 1.0) * n_dl) / n_dl if n_dl > 1 else prof.c_dl

    best = None
    count = 0
    base = {n: 0 for n in g.ids}
    for bits in itertools.product((0, 1), repeat=len(free)):
        dec = dict(base)
        dec.update(zip(free, bits))
        up = [e for e in g.edges if dec[e.src] == 0 and dec[e.dst] == 1]
        if len(up) > max_edges:
            raise LimitExceededError(f"{len(up)} uplink edges > limit {max_edges}")
        grids = []
        for e in up:
            lo = max(prof.p_min, required_power(e.bits, lmax, prof, conc)) if lmax > 0 else math.inf
            if lo > prof.p_max:
                grids = None
                break
            lo = max(lo, 1e-12)
            grids.append(np.geomspace(lo, prof.p_max, power_grid_points))
        count += 1
        if grids is None:
            continue
        found = _best_on_grid(g, prof, conc, order, dec, up, grids, lmax, f_l, f_r, c_dl)
        if found is None:
            continue
        powers = {e.key: float(p) for e, p in zip(up, found)}
        plan = OffloadPlan(dec, powers)
        el = evaluate_parallel(g, prof, conc, plan)
        if el.latency > lmax:
            continue
        if best is None or el.energy < best[1]:
            best = (plan, el.energy)
    if best is None:
        raise InfeasibleError(f"no grid point meets lmax={lmax}")
    return OracleResult(best[0], best[1], count)


def _best_on_grid(g, prof, conc, order, dec, up, grids, lmax, f_l, f_r, c_dl):
    naxes = len(up)
    const = 0.0
    for n in g.ids:
        if dec[n] == 0:
            const += prof.p_local * g.cycles(n) / prof.f_local
    for e in g.edges:
        if dec[e.src] == 1 and dec[e.dst] == 0:
            const += (prof.p_rf + prof.p_rx) * e.bits / c_dl
    axis = {e.key: i for i, e in enumerate(up)}
    dur, en = [], []
    for e, ps in zip(up, grids):
        rate = prof.bandwidth * np.log2(1.0 + conc.n_ul * prof.snr_gain * ps) / conc.n_ul
        dur.append(e.bits / rate)
        en.append((ps + prof.p_rf) * e.bits / rate)

    if naxes == 0:
        lat = _latency(g, order, dec, {}, f_l, f_r, c_dl, lambda i, a: a)
        return () if lat <= lmax else None

    # loop over the first axis, broadcast the rest
    rest = naxes - 1
    best_e, best_idx = math.inf, None
    for i0 in range(grids[0].size):
        def along(i, arr):
            if i == 0:
                return arr[i0]
            shape = [1] * rest
            shape[i - 1] = arr.size
            return arr.reshape(shape)

        lat = _latency(g, order, dec, axis, f_l, f_r, c_dl, lambda i, a: along(i, a), dur)
        energy = const
        for i in range(naxes):
            energy = energy + along(i, en[i])
        energy = np.broadcast_to(np.asarray(energy, float), np.broadcast_shapes(np.shape(energy), np.shape(lat)))
        energy = np.where(np.asarray(lat) <= lmax, energy, math.inf)
        j = int(np.argmin(energy))
        if energy.flat[j] < best_e:
            best_e = float(energy.flat[j])
            best_idx = (i0,) + (np.unravel_index(j, energy.shape) if rest else ())
    if best_idx is None:
        return None
    return tuple(grids[i][int(best_idx[i])] for i in range(naxes))


def _latency(g, order, dec, axis, f_l, f_r, c_dl, along, dur=()):
    done = {}
    for n in order:
        ready = 0.0
        for m in g.parents[n]:
            t = done[m]
            if dec[m] == 0 and dec[n] == 1:
                i = axis[(m, n)]
                t = t + along(i, dur[i])
            elif dec[m] == 1 and dec[n] == 0:
                t = t + g.bits(m, n) / c_dl
            ready = np.maximum(ready, t)
        done[n] = ready + g.cycles(n) / (f_r if dec[n] else f_l)
    return done[g.root]


def serial_edge_energy(prof: PlatformProfile, bits: float, lam: float) -> float:
    """Closed-form optimal uplink cost of one edge, ``min_p (p + P^rf + lam) * b / C(p)``."""
    return transmit_energy(lambert_power(prof, prof.p_rf + lam), bits, prof.p_rf + lam, prof)
