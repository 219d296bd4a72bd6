"""Call-graph data model and structural helpers.

A call graph is a DAG whose nodes are tasks (CPU cycles) and whose edges carry
the number of bits a parent hands to its child.  Parentless *data* nodes are
pinned to the mobile, and a single childless *root* task closes the
application on the mobile.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .errors import GraphValidationError, OffloadError


@dataclass(frozen=True)
class TaskNode:
    id: int
    cycles: float
    is_data: bool = False


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    bits: float

    @property
    def key(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple = ()

    def __str__(self):
        return f"{self.kind} {list(self.ids)}" if self.ids else self.kind


@dataclass(frozen=True)
class CallGraph:
    nodes: tuple[TaskNode, ...]
    edges: tuple[Edge, ...]
    root: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    @cached_property
    def node_map(self) -> dict[int, TaskNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_map(self) -> dict[tuple[int, int], Edge]:
        return {e.key: e for e in self.edges}

    @cached_property
    def ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.node_map))

    @cached_property
    def parents(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {n: [] for n in self.node_map}
        for e in self.edges:
            if e.dst in out:
                out[e.dst].append(e.src)
        return {n: tuple(sorted(ps)) for n, ps in out.items()}

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {n: [] for n in self.node_map}
        for e in self.edges:
            if e.src in out:
                out[e.src].append(e.dst)
        return {n: tuple(sorted(cs)) for n, cs in out.items()}

    @cached_property
    def data_nodes(self) -> frozenset[int]:
        return frozenset(n.id for n in self.nodes if n.is_data)

    @cached_property
    def forced_local(self) -> frozenset[int]:
        """Nodes whose offloading decision is pinned to 0 (data nodes and root)."""
        return self.data_nodes | {self.root}

    @cached_property
    def free_nodes(self) -> tuple[int, ...]:
        return tuple(n for n in self.ids if n not in self.forced_local)

    def cycles(self, n: int) -> float:
        return self.node_map[n].cycles

    def bits(self, m: int, n: int) -> float:
        return self.edge_map[(m, n)].bits

    def subgraph(self, keep, root: int | None = None) -> "CallGraph":
        keep = set(keep)
        return CallGraph(
            nodes=tuple(n for n in self.nodes if n.id in keep),
            edges=tuple(e for e in self.edges if e.src in keep and e.dst in keep),
            root=self.root if root is None else root,
        )


@dataclass(frozen=True)
class DecompositionReport:
    is_tree: bool
    separators: frozenset[int]
    components: tuple[frozenset[int], ...]
    forest_after_removal: bool = field(default=True)


def validate_graph(g: CallGraph) -> list[Violation]:
    """Return every structural violation; an empty list means ``g`` is valid."""
    out: list[Violation] = []
    seen: set[int] = set()
    for node in g.nodes:
        if node.id in seen:
            out.append(Violation("duplicate-node", (node.id,)))
        seen.add(node.id)
        if not isinstance(node.id, int) or node.id < 1:
            out.append(Violation("bad-node-id", (node.id,)))
        if not (math.isfinite(node.cycles) and node.cycles >= 0):
            out.append(Violation("bad-cycles", (node.id,)))

    pairs: set[tuple[int, int]] = set()
    for e in g.edges:
        if e.src == e.dst:
            out.append(Violation("self-loop", (e.src, e.dst)))
        if e.key in pairs:
            out.append(Violation("duplicate-edge", e.key))
        pairs.add(e.key)
        if e.src not in seen or e.dst not in seen:
            out.append(Violation("unknown-node", e.key))
        if not (math.isfinite(e.bits) and e.bits > 0):
            out.append(Violation("bad-bits", e.key))

    if g.root not in seen:
        out.append(Violation("missing-root", (g.root,)))

    parents, children = g.parents, g.children
    sinks = sorted(n for n in seen if not children[n])
    if len(sinks) > 1:
        out.append(Violation("multiple roots", tuple(sinks)))
    if g.root in seen:
        if children[g.root]:
            out.append(Violation("root-has-children", (g.root,)))
        if g.node_map[g.root].is_data:
            out.append(Violation("root-is-data", (g.root,)))
    for n in sorted(seen):
        node = g.node_map[n]
        if node.is_data and parents[n]:
            out.append(Violation("data-node-has-parents", (n,)))
        if node.is_data and not children[n]:
            out.append(Violation("data-node-without-children", (n,)))
        if not node.is_data and not parents[n]:
            out.append(Violation("orphan-task", (n,)))

    if _has_cycle(g):
        out.append(Violation("cycle"))
    return out


def ensure_valid(g: CallGraph) -> CallGraph:
    violations = validate_graph(g)
    if violations:
        raise GraphValidationError(violations)
    return g


def _has_cycle(g: CallGraph) -> bool:
    try:
        topological_order(g)
    except OffloadError:
        return True
    return False


def topological_order(g: CallGraph) -> list[int]:
    """Kahn's algorithm with a min-heap so ties resolve by ascending id."""
    indeg = {n: 0 for n in g.node_map}
    for e in g.edges:
        if e.src != e.dst and e.dst in indeg and e.src in indeg:
            indeg[e.dst] += 1
    heap = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    children = g.children
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for c in children[n]:
            if c == n or c not in indeg:
                continue
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(indeg):
        raise OffloadError("cycle detected in call graph")
    return order


def decompose(g: CallGraph) -> DecompositionReport:
    """Split ``g`` at its map nodes (out-degree >= 2).

    The residual weakly-connected components are reported together with a
    check that each of them, with its internal edges, is an in-tree.
    """
    children = g.children
    separators = frozenset(n for n in g.ids if len(children[n]) >= 2)
    if not separators:
        return DecompositionReport(True, separators, (frozenset(g.ids),), True)

    rest = [n for n in g.ids if n not in separators]
    adj: dict[int, set[int]] = {n: set() for n in rest}
    inner_edges = [e for e in g.edges if e.src in adj and e.dst in adj]
    for e in inner_edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)

    components = []
    unseen = set(rest)
    for start in rest:
        if start not in unseen:
            continue
        comp = {start}
        queue = deque([start])
        unseen.discard(start)
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w in unseen:
                    unseen.discard(w)
                    comp.add(w)
                    queue.append(w)
        components.append(frozenset(comp))

    forest = all(_is_in_tree(comp, inner_edges) for comp in components)
    return DecompositionReport(False, separators, tuple(components), forest)


def _is_in_tree(comp, edges) -> bool:
    out_deg = {n: 0 for n in comp}
    count = 0
    for e in edges:
        if e.src in comp and e.dst in comp:
            out_deg[e.src] += 1
            count += 1
    sinks = sum(1 for d in out_deg.values() if d == 0)
    return all(d <= 1 for d in out_deg.values()) and sinks == 1 and count == len(comp) - 1


def ancestors_closure(g: CallGraph, s) -> frozenset[int]:
    """``s`` together with every ancestor of its members."""
    s = set(s)
    unknown = s - set(g.node_map)
    if unknown:
        raise OffloadError(f"unknown node ids {sorted(unknown)}")
    out = set(s)
    queue = deque(s)
    parents = g.parents
    while queue:
        n = queue.popleft()
        for m in parents[n]:
            if m not in out:
                out.add(m)
                queue.append(m)
    return frozenset(out)


def bitstring(g: CallGraph, decisions) -> str:
    return "".join(str(int(decisions.get(n, 0))) for n in g.ids)
