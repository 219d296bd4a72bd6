import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq, minimize_scalar

from offload_opt.errors import InfeasibleError, NotATreeError, OffloadError
from offload_opt.graph import CallGraph, Edge, TaskNode
from offload_opt.parallel import (QuantGrid, _Model, dp_tables, edge_power_table, edge_power_table_for,
                                  evaluate_parallel, grid_value, latency_recursion, quantize_up,
                                  separate_design_parallel, solve_parallel, solve_parallel_general,
                                  solve_parallel_tree, sweep_deadline)
from offload_opt.physical import ConcurrencyProfile, PlatformProfile, optimal_ratio_power
from offload_opt.plan import OffloadPlan

from conftest import call_trees

C1 = ConcurrencyProfile.uniform(1)


def rate(p, prof=None, n=1, g=501.18723362727246, B=1e6):
    return B * math.log2(1 + n * g * p) / n


def test_grid_size():
    assert QuantGrid(0.1, 6).k_max == 61
    assert QuantGrid(0.05, 2).k_max == 41
    assert QuantGrid(0.1, 6).t(61) == pytest.approx(6.0)
    with pytest.raises(OffloadError):
        QuantGrid(0.0, 1.0)


def test_quantizers():
    grid = QuantGrid(0.1, 6)
    assert grid_value(0.25, grid) == pytest.approx(0.3)
    assert quantize_up(0.25, grid) == 4
    # exactly on t_4 = 0.3
    assert grid_value(0.3, grid) == pytest.approx(0.3)
    assert quantize_up(0.3, grid) == 5
    assert grid_value(0.0, grid) == 0.0
    # half-open [t_1, t_2) puts 0 at index 2
    assert quantize_up(0.0, grid) == 2
    assert quantize_up(100.0, grid) == 62
    assert grid_value(6.05, grid) == math.inf
    with pytest.raises(OffloadError):
        quantize_up(-0.1, grid)


def test_slots_are_conservative():
    grid = QuantGrid(0.1, 6)
    assert grid.slots(0) == 0
    assert grid.slots(0.25) == 3
    for x in np.linspace(0.001, 5, 300):
        assert grid.slots(x) * grid.eps >= x * (1 - 1e-15)


def test_latency_all_local_chain(chain3, prof):
    assert latency_recursion(chain3, prof, C1, OffloadPlan.all_local(chain3)) == pytest.approx(2.0)
    conc = ConcurrencyProfile.uniform(2)
    assert latency_recursion(chain3, prof, conc, OffloadPlan.all_local(chain3)) == pytest.approx(4.0)


def test_latency_all_local_critical_path(fig8, prof):
    # longest path 1-2-4-9-12-14-15 in cycles: 0.6+0.6+2+0.6+2+0.2 = 6.0e9
    assert latency_recursion(fig8, prof, C1, OffloadPlan.all_local(fig8)) == pytest.approx(6.0)


def test_latency_t2_timeline_plan(t2, prof):
    plan = OffloadPlan({7: 0, 8: 0, 9: 0, 11: 1, 12: 1, 14: 0, 16: 0, 17: 0, 18: 0},
                       {(7, 11): 0.5, (8, 11): 0.5, (9, 12): 1.0})
    l11 = 1.1 + 1.2e6 / rate(0.5) + 0.1
    l12 = 2.0 + 5e6 / rate(1.0) + 0.06
    expect = max(l11, l12) + 5e6 / 200e6 + 2.0
    assert latency_recursion(t2, prof, C1, plan) == pytest.approx(expect, rel=1e-12)


def test_zero_power_edge_latency(chain3, prof):
    el = evaluate_parallel(chain3, prof, C1, OffloadPlan({1: 0, 2: 1, 3: 0}))
    assert el.latency == math.inf and el.flags == ("zero-power-edge",)


def test_parallel_energy_conc1_equals_serial(fig8, prof):
    from offload_opt.serial import evaluate_serial
    plan = OffloadPlan({n: int(n in (5, 6, 10, 13)) for n in fig8.ids}, {(3, 5): 0.3, (3, 6): 0.7})
    assert evaluate_parallel(fig8, prof, C1, plan).energy == pytest.approx(
        evaluate_serial(fig8, prof, plan).energy, rel=1e-12)


@pytest.fixture(scope="module")
def rf_prof():
    return PlatformProfile.from_db(27, f_local=1e9, f_remote=1e10, p_local=0.4, p_rf=0.3, p_rx=0.1,
                                   c_dl=200e6, bandwidth=1e6)


def test_edge_table_flat_parent_is_unconstrained(rf_prof):
    grid = QuantGrid(0.05, 10)
    model = _Model.build(rf_prof, C1, grid)
    K = grid.k_max
    parent = np.full(K + 1, 0.7)
    parent[0] = math.inf
    et = edge_power_table(2e6, 0.1, parent, model)
    p_star = optimal_ratio_power(rf_prof, rf_prof.p_rf).power
    k = K
    assert et.power[k] == pytest.approx(p_star, rel=1e-9)
    assert et.cost[k] == pytest.approx(0.7 + (p_star + 0.3) * 2e6 / rate(p_star), rel=1e-9)


def test_edge_table_tight_budget_uses_max_power(rf_prof):
    grid = QuantGrid(0.05, 10)
    model = _Model.build(rf_prof, C1, grid)
    parent = np.zeros(grid.k_max + 1)
    parent[0] = math.inf
    et = edge_power_table(5e6, 0.0, parent, model)
    # fastest upload: 5e6 / C(10 W) = 0.4068 s, so 9 steps
    j_min = math.ceil(5e6 / rate(10.0) / 0.05)
    k = j_min + 1
    assert et.slot[k] == j_min
    # least power that fits the upload into j_min steps
    assert et.power[k] == pytest.approx((2 ** (5e6 / (1e6 * j_min * 0.05)) - 1) / 501.18723362727246, rel=1e-9)
    assert et.cost[k - 1] == math.inf


@given(bits=st.sampled_from([5e5, 2e6, 6e6]), l_rem=st.sampled_from([0.0, 0.07, 0.2]),
       slope=st.floats(0.0, 2.0), k=st.integers(5, 60))
def test_edge_table_matches_per_slot_optimization(rf_prof, bits, l_rem, slope, k):
    grid = QuantGrid(0.05, 3)
    model = _Model.build(rf_prof, C1, grid)
    K = grid.k_max
    parent = np.array([math.inf] + [slope * (K - i) * 0.05 for i in range(1, K + 1)])
    et = edge_power_table(bits, l_rem, parent, model)
    k = min(k, K)

    def tx(p):
        return (p + rf_prof.p_rf) * bits / rate(p)

    def power_for(d):
        if bits / rate(1e6) > d:
            return math.inf
        return brentq(lambda p: bits / rate(p) - d, 1e-15, 1e6, xtol=1e-15, rtol=1e-15)

    best = math.inf
    for j in range(1, k):
        d_hi = j * 0.05 - l_rem
        if d_hi <= 0:
            continue
        lo = power_for(d_hi)
        d_lo = (j - 1) * 0.05 - l_rem
        hi = power_for(d_lo) if d_lo > 0 else math.inf
        lo, hi = max(lo, rf_prof.p_min), min(hi, rf_prof.p_max)
        if lo > hi:
            continue
        res = minimize_scalar(tx, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        cost = min(res.fun, tx(lo), tx(hi)) + parent[k - j]
        best = min(best, cost)
    if math.isinf(best):
        assert et.cost[k] == math.inf
    else:
        assert et.cost[k] == pytest.approx(best, rel=1e-6)


def test_edge_table_public_wrapper(chain3, prof):
    grid = QuantGrid(0.1, 3)
    parent = np.zeros(grid.k_max + 1)
    parent[0] = math.inf
    et = edge_power_table_for(chain3, prof, C1, grid, parent, (1, 2))
    assert et.cost.shape == (grid.k_max + 1,)
    fin = et.cost[np.isfinite(et.cost)]
    assert fin.size and np.all(np.diff(fin) <= 1e-15)


def test_chain_solution_is_consistent(chain3, prof):
    grid = QuantGrid(0.05, 1.5)
    plan, energy = solve_parallel_tree(chain3, prof, C1, grid)
    el = evaluate_parallel(chain3, prof, C1, plan)
    assert el.latency <= 1.5
    assert energy == pytest.approx(el.energy, rel=1e-12)
    assert plan[2] == 1


def test_generous_deadline_never_worse_than_local(fig8, prof):
    local = evaluate_parallel(fig8, prof, C1, OffloadPlan.all_local(fig8))
    _, energy = solve_parallel(fig8, prof, C1, QuantGrid(0.1, 14))
    assert energy <= local.energy


def test_impossible_deadline(fig8, t2, prof):
    with pytest.raises(InfeasibleError):
        solve_parallel(fig8, prof, C1, QuantGrid(0.1, 1.0))
    with pytest.raises(InfeasibleError):
        solve_parallel_tree(t2, prof, C1, QuantGrid(0.05, 2.0))


def test_tree_solver_rejects_dag(fig8, prof):
    with pytest.raises(NotATreeError):
        solve_parallel_tree(fig8, prof, C1, QuantGrid(0.1, 6))


def test_general_equals_tree_on_trees(t2, prof):
    grid = QuantGrid(0.05, 5)
    assert solve_parallel_general(t2, prof, C1, grid) == solve_parallel_tree(t2, prof, C1, grid)


def test_fig8_deadline_six(fig8, prof):
    plan, energy = solve_parallel_general(fig8, prof, C1, QuantGrid(0.1, 6))
    el = evaluate_parallel(fig8, prof, C1, plan)
    assert el.latency <= 6.0
    assert energy == pytest.approx(el.energy, rel=1e-12)


def test_fig8_energy_nonincreasing_in_deadline(fig8, prof):
    energies = [solve_parallel(fig8, prof, C1, QuantGrid(0.1, L)).energy for L in range(4, 15)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(energies, energies[1:]))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_shared_resources_feasible(fig8, prof, n):
    conc = ConcurrencyProfile.uniform(n)
    plan, energy = solve_parallel(fig8, prof, conc, QuantGrid(0.1, 9))
    el = evaluate_parallel(fig8, prof, conc, plan)
    assert el.latency <= 9 and energy == pytest.approx(el.energy, rel=1e-12)


def test_separate_design_not_better(fig8, t2, prof):
    for g, L in ((t2, 6.0), (fig8, 8.0)):
        grid = QuantGrid(0.1, L)
        base = separate_design_parallel(g, prof, C1, grid)
        joint = solve_parallel(g, prof, C1, grid).energy
        assert base.latency <= L and base.energy >= joint * (1 - 1e-12)


def test_separate_design_falls_back_to_local(prof):
    # frozen powers too weak to meet a deadline that all-local meets
    g = CallGraph([TaskNode(1, 0, True), TaskNode(2, 1e9), TaskNode(3, 1e8)],
                  [Edge(1, 2, 4e7), Edge(2, 3, 1e3)], 3)
    res = separate_design_parallel(g, prof, C1, QuantGrid(0.1, 1.2))
    assert set(res.plan.decisions.values()) == {0}


def test_sweep_rows(fig8, prof):
    rows = sweep_deadline(fig8, prof, C1, [1.0, 3.0, 6.0], 0.1, eps_d=0.1)
    assert rows[0]["decisions_bitstring"] == "infeasible"
    for r in rows[1:]:
        assert r["recursion_latency_s"] <= r["lmax_s"]
        assert r["sim_energy_J"] >= r["dp_energy_J"] - 1e-12
    assert rows[2]["dp_energy_J"] <= rows[1]["dp_energy_J"]


def test_sweep_fan_out_matches_sequential(t2, prof, monkeypatch):
    lmaxs = [3.0, 5.0, 8.0]
    seq = sweep_deadline(t2, prof, C1, lmaxs, 0.1)
    monkeypatch.setenv("OFFLOAD_OPT_THREADS", "2")
    assert sweep_deadline(t2, prof, C1, lmaxs, 0.1) == seq


def _tree_deadline(g, prof, eps):
    # sum over all nodes of rounded local compute time bounds every path
    return sum(math.ceil(g.cycles(n) / prof.f_local / eps) * eps for n in g.ids) + eps


@given(g=call_trees(max_tasks=5), eps=st.sampled_from([0.1, 0.2]))
def test_dp_properties_on_random_trees(prof, g, eps):
    L = _tree_deadline(g, prof, eps)
    grid = QuantGrid(eps, L)
    tables = dp_tables(g, prof, C1, grid)
    for t in tables.values():
        for arr in (t.e_local, t.e_remote):
            assert arr[0] == math.inf
            fin = arr[1:]
            assert np.all(fin[1:] <= fin[:-1] + 1e-15)
    plan, energy = solve_parallel_tree(g, prof, C1, grid)
    el = evaluate_parallel(g, prof, C1, plan)
    assert el.latency <= L
    assert energy == pytest.approx(el.energy, rel=1e-9, abs=1e-15)
    local = evaluate_parallel(g, prof, C1, OffloadPlan.all_local(g)).energy
    assert energy <= local * (1 + 1e-12)
    finer = solve_parallel_tree(g, prof, C1, QuantGrid(eps / 2, L)).energy
    assert finer <= energy * (1 + 1e-9) + 1e-15
