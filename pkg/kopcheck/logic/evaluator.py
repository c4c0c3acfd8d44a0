"""
Satisfaction relation over an interpreted system.

Responsibilities:
- Indistinguishability ~_i as a partition of Pts(R) per agent
- Bottom-up evaluation of formula extensions
- Common knowledge by connected components of the union of ~_i, i in G
- Validity and valid implication

Invariants:
- An extension is a read-only boolean vector indexed by point_index
- Knowledge of f holds at p iff f holds on p's whole ~_i class
- C_G f holds at p iff f holds on p's whole ~_G component
- Undeclared propositions and out-of-range agents are input errors
"""

import logging
from typing import Any

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from kopcheck.contracts import InputError
from kopcheck.kernel import (
    AgentId,
    HistoryEvent,
    Point,
    System,
    check_agent,
    check_point,
    state_key,
)
from kopcheck.logic.formula import (
    And,
    Common,
    Const,
    DidAtom,
    DoesAtom,
    Everyone,
    Formula,
    Implies,
    Know,
    Not,
    Prop,
    agents_of,
    props_of,
    subformulas,
)


logger = logging.getLogger(__name__)


class Evaluator:
    """
    Formula evaluator bound to one system.

    Extensions and partitions are computed once and cached; the system is
    immutable, so an evaluator may be shared by read-only callers.
    """

    def __init__(self, system: System):
        self.system = system
        self._classes: dict[AgentId, np.ndarray] = {}
        self._components: dict[frozenset[AgentId], np.ndarray] = {}
        self._cache: dict[Formula, np.ndarray] = {}

    # =========================================================================
    # Partitions
    # =========================================================================

    def classes(self, agent: AgentId) -> np.ndarray:
        """
        Class label of every point under ~_agent.

        Labels are dense integers assigned in point order; two points share
        a label iff the agent's local states there have equal state_key.
        """
        check_agent(self.system, agent)
        if agent not in self._classes:
            labels: dict[Any, int] = {}
            column = agent - 1
            out = np.empty(self.system.point_count, dtype=np.intp)
            k = 0
            for run in self.system.runs:
                for state in run.states:
                    out[k] = labels.setdefault(state_key(state.locals[column]), len(labels))
                    k += 1
            out.setflags(write=False)
            self._classes[agent] = out
        return self._classes[agent]

    def components(self, group: frozenset[AgentId]) -> np.ndarray:
        """
        Component label of every point in the union graph of ~_i, i in group.

        Points are joined through shared (agent, class) nodes, so the graph
        has one edge per point per agent rather than one per related pair.
        """
        if not group:
            raise InputError("agent group must be non-empty")
        if group not in self._components:
            n = self.system.point_count
            rows, cols = [], []
            offset = n
            for agent in sorted(group):
                labels = self.classes(agent)
                rows.append(np.arange(n))
                cols.append(labels + offset)
                offset += int(labels.max()) + 1
            row = np.concatenate(rows)
            col = np.concatenate(cols)
            graph = coo_matrix(
                (np.ones(len(row), dtype=np.int8), (row, col)), shape=(offset, offset)
            )
            _, labels = connected_components(graph, directed=False)
            point_labels = labels[:n].copy()
            point_labels.setflags(write=False)
            self._components[group] = point_labels
        return self._components[group]

    # =========================================================================
    # Extensions
    # =========================================================================

    def check_formula(self, f: Formula) -> None:
        """Raise InputError unless f is well-formed for this system."""
        for agent in sorted(agents_of(f)):
            check_agent(self.system, agent)
        for name in sorted(props_of(f)):
            if not self.system.interpretation.declares(name):
                raise InputError(
                    f"undeclared proposition {name!r}; declared: "
                    f"{list(self.system.interpretation.props)}",
                    detail={"prop": name},
                )

    def extension(self, f: Formula) -> np.ndarray:
        """Boolean vector of f's truth at every point (read-only)."""
        if f in self._cache:
            return self._cache[f]
        self.check_formula(f)
        for node in subformulas(f):
            if node not in self._cache:
                ext = self._compute(node)
                ext.setflags(write=False)
                self._cache[node] = ext
        return self._cache[f]

    def _compute(self, f: Formula) -> np.ndarray:
        sys = self.system
        if isinstance(f, Const):
            return np.full(sys.point_count, f.value, dtype=bool)
        if isinstance(f, Prop):
            interp = sys.interpretation
            return np.fromiter(
                (
                    interp.truth(f.name, r, run, t)
                    for r, run in enumerate(sys.runs)
                    for t in range(sys.horizon + 1)
                ),
                dtype=bool,
                count=sys.point_count,
            )
        if isinstance(f, DoesAtom):
            # kernel.does per point, with one event object per time
            T = sys.horizon
            events = [HistoryEvent(f.action, f.agent, t) for t in range(T)]
            return np.fromiter(
                (
                    t < T and events[t] in run.states[t + 1].env.history
                    for run in sys.runs
                    for t in range(T + 1)
                ),
                dtype=bool,
                count=sys.point_count,
            )
        if isinstance(f, DidAtom):
            performed = self.extension(DoesAtom(f.agent, f.action))
            per_run = performed.reshape(sys.run_count, sys.horizon + 1)
            return np.logical_or.accumulate(per_run, axis=1).ravel()
        if isinstance(f, Not):
            return ~self._cache[f.f]
        if isinstance(f, And):
            return self._cache[f.f] & self._cache[f.g]
        if isinstance(f, Know):
            return _holds_on_blocks(self._cache[f.f], self.classes(f.agent))
        if isinstance(f, Everyone):
            inner = self._cache[f.f]
            result = np.ones(sys.point_count, dtype=bool)
            for agent in sorted(f.group):
                result &= _holds_on_blocks(inner, self.classes(agent))
            return result
        if isinstance(f, Common):
            return _holds_on_blocks(self._cache[f.f], self.components(f.group))
        raise TypeError(f"not a formula: {f!r}")

    # =========================================================================
    # Operations
    # =========================================================================

    def indistinguishable(self, p: Point, q: Point, i: AgentId) -> bool:
        """True iff agent i has equal local states at p and q."""
        labels = self.classes(i)
        check_point(self.system, p)
        check_point(self.system, q)
        return bool(labels[self.system.point_index(p)] == labels[self.system.point_index(q)])

    def eval(self, p: Point, f: Formula) -> bool:
        """(R, p) |= f."""
        check_point(self.system, p)
        return bool(self.extension(f)[self.system.point_index(p)])

    def eval_common(self, p: Point, group: frozenset[AgentId], f: Formula) -> bool:
        """C_G f at p: f holds on p's whole ~_G connected component."""
        if not group:
            raise InputError("common knowledge needs a non-empty group")
        return self.eval(p, Common(frozenset(group), f))

    def nested_everyone(
        self, p: Point, group: frozenset[AgentId], f: Formula, m: int
    ) -> bool:
        """
        K_{i1}...K_{im} f at p for every sequence in G^m.

        Computed as E_G applied m times, since each K_i distributes over
        conjunction.
        """
        if m < 1:
            raise InputError(f"nesting depth must be >= 1, got {m}")
        f_m = f
        for _ in range(m):
            f_m = Everyone(frozenset(group), f_m)
        return self.eval(p, f_m)

    def valid(self, f: Formula) -> bool:
        """R |= f."""
        return bool(self.extension(f).all())

    def validly_implies(self, f: Formula, g: Formula) -> bool:
        return self.valid(Implies(f, g))

    def points_where(self, f: Formula) -> list[Point]:
        """All points where f holds, in (run, time) order."""
        return [self.system.point_at(int(k)) for k in np.flatnonzero(self.extension(f))]

    def first_point_where(self, f: Formula) -> Point | None:
        """Least point (lexicographic) where f holds, or None."""
        hits = np.flatnonzero(self.extension(f))
        return self.system.point_at(int(hits[0])) if len(hits) else None

    def earliest(self, run: int, f: Formula) -> int | None:
        """Least t with f true at (run, t), or None within the horizon."""
        check_point(self.system, Point(run, 0))
        row = self.extension(f).reshape(self.system.run_count, -1)[run]
        hits = np.flatnonzero(row)
        return int(hits[0]) if len(hits) else None


def _holds_on_blocks(values: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """For each point, whether values is true on its entire block."""
    block_ok = np.ones(int(labels.max()) + 1, dtype=bool)
    np.logical_and.at(block_ok, labels, values)
    return block_ok[labels]


# =============================================================================
# Module-level API
# =============================================================================


def indistinguishable(sys: System, p: Point, q: Point, i: AgentId) -> bool:
    return Evaluator(sys).indistinguishable(p, q, i)


def evaluate(sys: System, p: Point, f: Formula) -> bool:
    return Evaluator(sys).eval(p, f)


def eval_common(sys: System, p: Point, group: frozenset[AgentId], f: Formula) -> bool:
    return Evaluator(sys).eval_common(p, group, f)


def nested_everyone(
    sys: System, p: Point, group: frozenset[AgentId], f: Formula, m: int
) -> bool:
    return Evaluator(sys).nested_everyone(p, group, f, m)


def valid(sys: System, f: Formula) -> bool:
    return Evaluator(sys).valid(f)


def validly_implies(sys: System, f: Formula, g: Formula) -> bool:
    return Evaluator(sys).validly_implies(f, g)
