"""Joint decision variables and evaluation results."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType

from .errors import PlanMismatchError
from .graph import CallGraph, bitstring


@dataclass(frozen=True)
class OffloadPlan:
    """Binary offloading decisions per node and uplink powers per edge.

    ``decisions[n] == 1`` runs task ``n`` on the server.  Only edges going
    from a local parent to an offloaded child need an entry in ``powers``.
    """

    decisions: MappingProxyType
    powers: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __init__(self, decisions, powers=None):
        object.__setattr__(self, "decisions", MappingProxyType({int(k): int(v) for k, v in decisions.items()}))
        pw = {} if powers is None else {(int(m), int(n)): float(p) for (m, n), p in powers.items()}
        object.__setattr__(self, "powers", MappingProxyType(pw))

    def __eq__(self, other):
        return (isinstance(other, OffloadPlan) and dict(self.decisions) == dict(other.decisions)
                and dict(self.powers) == dict(other.powers))

    def __hash__(self):
        return hash((tuple(sorted(self.decisions.items())), tuple(sorted(self.powers.items()))))

    def __getitem__(self, n):
        return self.decisions.get(n, 0)

    def power(self, m, n) -> float:
        return self.powers.get((m, n), 0.0)

    def bitstring(self, g: CallGraph) -> str:
        return bitstring(g, self.decisions)

    @classmethod
    def all_local(cls, g: CallGraph) -> "OffloadPlan":
        return cls({n: 0 for n in g.ids})


def uplink_edges(g: CallGraph, decisions) -> list[tuple[int, int]]:
    return [e.key for e in g.edges if decisions.get(e.src, 0) == 0 and decisions.get(e.dst, 0) == 1]


def check_plan(g: CallGraph, plan: OffloadPlan) -> None:
    missing = [n for n in g.ids if n not in plan.decisions]
    extra = [n for n in plan.decisions if n not in g.node_map]
    if missing or extra:
        raise PlanMismatchError(f"plan/graph mismatch: missing {missing}, unknown {extra}")
    forced = [n for n in g.forced_local if plan.decisions[n] != 0]
    if forced:
        raise PlanMismatchError(f"nodes {sorted(forced)} must run locally")


@dataclass(frozen=True)
class EnergyLatency:
    energy: float
    latency: float
    flags: tuple[str, ...] = ()

    def objective(self, lam: float) -> float:
        """``E + lam * L`` with ``0 * inf`` read as 0."""
        if lam == 0:
            return self.energy
        return self.energy + lam * self.latency

    @property
    def finite(self) -> bool:
        return math.isfinite(self.energy) and math.isfinite(self.latency)
