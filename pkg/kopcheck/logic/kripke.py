"""
Direct Kripke-structure evaluation.

A second, deliberately naive satisfaction relation: explicit
indistinguishability pairs, recursive evaluation point by point and
breadth-first reachability for common knowledge. Used to cross-check the
extension-based evaluator on small systems.
"""

from collections import deque
from functools import lru_cache

from kopcheck.kernel import AgentId, Point, System, did, does, local_state, state_key
from kopcheck.logic.formula import (
    And,
    Common,
    Const,
    DidAtom,
    DoesAtom,
    Everyone,
    Formula,
    Know,
    Not,
    Prop,
)


class KripkeStructure:
    """Points of a system with explicit per-agent accessibility relations."""

    def __init__(self, system: System):
        self.system = system
        self.points = list(system.points())

        def key(p: Point, agent: AgentId):
            return state_key(local_state(system, p, agent))

        self.relation: dict[AgentId, dict[Point, list[Point]]] = {
            agent: {
                p: [q for q in self.points if key(q, agent) == key(p, agent)]
                for p in self.points
            }
            for agent in system.agents
        }
        self.holds = lru_cache(maxsize=None)(self._holds)

    def reachable(self, p: Point, group: frozenset[AgentId]) -> set[Point]:
        """Points reachable from p in one or more ~_G steps."""
        seen: set[Point] = set()
        queue = deque([p])
        while queue:
            current = queue.popleft()
            for agent in sorted(group):
                for q in self.relation[agent][current]:
                    if q not in seen:
                        seen.add(q)
                        queue.append(q)
        return seen

    def _holds(self, p: Point, f: Formula) -> bool:
        sys = self.system
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Prop):
            return sys.interpretation.truth(f.name, p.run, sys.runs[p.run], p.time)
        if isinstance(f, DoesAtom):
            return does(sys, p, f.agent, f.action)
        if isinstance(f, DidAtom):
            return did(sys, p, f.agent, f.action)
        if isinstance(f, Not):
            return not self.holds(p, f.f)
        if isinstance(f, And):
            return self.holds(p, f.f) and self.holds(p, f.g)
        if isinstance(f, Know):
            return all(self.holds(q, f.f) for q in self.relation[f.agent][p])
        if isinstance(f, Everyone):
            return all(
                self.holds(q, f.f) for agent in sorted(f.group) for q in self.relation[agent][p]
            )
        if isinstance(f, Common):
            return all(self.holds(q, f.f) for q in self.reachable(p, f.group))
        raise TypeError(f"not a formula: {f!r}")


def kripke_eval(sys: System, p: Point, f: Formula) -> bool:
    """(R, p) |= f by direct recursion over the Kripke structure."""
    return KripkeStructure(sys).holds(p, f)
