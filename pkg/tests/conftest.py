import re
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from offload_opt.graph import CallGraph, Edge, TaskNode
from offload_opt.io import default_profile_path, fixture_path, load_graph, load_profile
from offload_opt.physical import ConcurrencyProfile

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def prof():
    return load_profile(default_profile_path())


@pytest.fixture(scope="session")
def fig8():
    return load_graph(fixture_path("fig8"))


@pytest.fixture(scope="session")
def chain3():
    return load_graph(fixture_path("chain3"))


@pytest.fixture(scope="session")
def t2():
    return load_graph(fixture_path("t2subtree"))


@pytest.fixture(scope="session")
def conc1():
    return ConcurrencyProfile.uniform(1)


def chain(n_tasks, cycles=1e8, bits=1e6):
    """Data node 1 followed by ``n_tasks`` tasks in a line."""
    nodes = [TaskNode(1, 0.0, True)] + [TaskNode(i, cycles) for i in range(2, n_tasks + 2)]
    edges = [Edge(i, i + 1, bits) for i in range(1, n_tasks + 1)]
    return CallGraph(nodes, edges, n_tasks + 1)


@st.composite
def call_trees(draw, max_tasks=6):
    """Random in-trees: tasks 1..n (root n), each parentless task gets its own data node."""
    n = draw(st.integers(2, max_tasks))
    child = {i: draw(st.integers(i + 1, n)) for i in range(1, n)}
    cyc = st.sampled_from([0.0, 1e8, 3e8, 6e8, 1e9, 2e9])
    bit = st.sampled_from([2e5, 1e6, 3e6, 8e6])
    nodes = [TaskNode(i, draw(cyc)) for i in range(1, n + 1)]
    edges = [Edge(i, c, draw(bit)) for i, c in child.items()]
    has_parent = set(child.values())
    next_id = n + 1
    for i in range(1, n + 1):
        if i not in has_parent:
            nodes.append(TaskNode(next_id, draw(st.sampled_from([0.0, 1e8])), True))
            edges.append(Edge(next_id, i, draw(bit)))
            next_id += 1
    return CallGraph(nodes, edges, n)


@st.composite
def call_dags(draw, max_tasks=6):
    """Random DAGs: like call_trees, plus extra forward edges."""
    g = draw(call_trees(max_tasks))
    tasks = [n for n in g.ids if n not in g.data_nodes]
    extra = []
    have = set(g.edge_map)
    for _ in range(draw(st.integers(0, 3))):
        a = draw(st.sampled_from(tasks))
        later = [t for t in tasks if t > a]
        if not later:
            continue
        b = draw(st.sampled_from(later))
        if (a, b) not in have:
            have.add((a, b))
            extra.append(Edge(a, b, draw(st.sampled_from([1e6, 4e6]))))
    return CallGraph(g.nodes, g.edges + tuple(extra), g.root)


# one PASS/FAIL line per acceptance criterion, grouped from test reports

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    m = re.search(r"test_acceptance\.py::test_(c\d+)_", report.nodeid)
    if m is None:
        return
    props = dict(report.user_properties)
    entry = _CRITERIA.setdefault(m.group(1).upper(), {"ok": True, "title": "", "details": []})
    entry["ok"] &= report.passed
    entry["title"] = entry["title"] or props.get("title", "")
    status = "ok" if report.passed else "FAILED"
    detail = props.get("detail") or f"{report.nodeid.split('::')[-1]} errored before reporting"
    entry["details"].append(f"{status}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_CRITERIA, key=lambda c: int(c[1:])):
        e = _CRITERIA[crit]
        tr.write_line(f"{crit} {'PASS' if e['ok'] else 'FAIL'}  {e['title']}")
        for d in e["details"]:
            tr.write_line(f"    {d}")
