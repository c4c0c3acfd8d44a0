"""
Semantic predicates over interpreted systems.

Every predicate comes in two forms: a `*_witness` function returning the
first falsifying point in (run, time) order, or None when the predicate
holds, and a boolean wrapper. Witness functions accept an optional
Evaluator so that a batch of checks over one system shares its cache.

Invariants:
- A returned witness falsifies the predicate (re-checkable by eval)
- Predicates over empty quantification ranges hold vacuously
"""

import logging
from typing import Sequence

import numpy as np

from kopcheck.contracts import InputError
from kopcheck.kernel import (
    Action,
    AgentId,
    Point,
    System,
    check_agent,
    local_state,
    state_key,
)
from kopcheck.logic.evaluator import Evaluator
from kopcheck.logic.formula import (
    And,
    DidAtom,
    DoesAtom,
    Formula,
    Know,
    Not,
    Or,
)


logger = logging.getLogger(__name__)

ActionAssignment = tuple[tuple[AgentId, Action], ...]


def make_assignment(pairs: Sequence[tuple[AgentId, Action | str]]) -> ActionAssignment:
    """Normalize (agent, action) pairs; action labels are wrapped in Action."""
    return tuple(
        (agent, action if isinstance(action, Action) else Action(action))
        for agent, action in pairs
    )


def check_assignment(sys: System, assignment: ActionAssignment, minimum: int) -> None:
    """
    Raises:
        InputError: If agents repeat, are out of range, or there are fewer
            than `minimum` pairs.
    """
    if len(assignment) < minimum:
        raise InputError(
            f"action assignment needs at least {minimum} pairs, got {len(assignment)}"
        )
    agents = [agent for agent, _ in assignment]
    for agent in agents:
        check_agent(sys, agent)
    if len(set(agents)) != len(agents):
        raise InputError(
            f"duplicate agent in action assignment: {agents}",
            detail={"agents": agents},
        )


def _min_point(points: Sequence[Point | None]) -> Point | None:
    found = [p for p in points if p is not None]
    return min(found) if found else None


# =============================================================================
# Necessary conditions, consciousness, locality
# =============================================================================


def necessary_violation(psi: Formula, i: AgentId, a: Action) -> Formula:
    """Formula true exactly where i performs a but psi fails."""
    return And(DoesAtom(i, a), Not(psi))


def conscious_violation(i: AgentId, a: Action) -> Formula:
    """
    Formula true exactly where i knows neither that it performs a nor
    that it does not.

    does_i(a) is a function of i's local state iff this holds nowhere.
    """
    act = DoesAtom(i, a)
    return Not(Or(Know(i, act), Know(i, Not(act))))


def necessary_condition_witness(
    sys: System,
    psi: Formula,
    i: AgentId,
    a: Action,
    evaluator: Evaluator | None = None,
) -> Point | None:
    """First point where i performs a but psi fails."""
    ev = evaluator or Evaluator(sys)
    return ev.first_point_where(necessary_violation(psi, i, a))


def necessary_condition_counterexamples(
    sys: System,
    psi: Formula,
    i: AgentId,
    a: Action,
    evaluator: Evaluator | None = None,
) -> list[Point]:
    """Every point where i performs a but psi fails."""
    ev = evaluator or Evaluator(sys)
    return ev.points_where(necessary_violation(psi, i, a))


def is_necessary_condition(sys: System, psi: Formula, i: AgentId, a: Action) -> bool:
    return necessary_condition_witness(sys, psi, i, a) is None


def conscious_witness(
    sys: System, i: AgentId, a: Action, evaluator: Evaluator | None = None
) -> Point | None:
    """First point whose ~_i class disagrees on does_i(a)."""
    ev = evaluator or Evaluator(sys)
    return ev.first_point_where(conscious_violation(i, a))


def is_conscious(sys: System, i: AgentId, a: Action) -> bool:
    return conscious_witness(sys, i, a) is None


def local_witness(
    sys: System, i: AgentId, f: Formula, evaluator: Evaluator | None = None
) -> Point | None:
    """First point where f holds but K_i f does not."""
    ev = evaluator or Evaluator(sys)
    return ev.first_point_where(And(f, Not(Know(i, f))))


def is_local(sys: System, i: AgentId, f: Formula) -> bool:
    return local_witness(sys, i, f) is None


def consciousness_equivalence_witness(
    sys: System, i: AgentId, a: Action, evaluator: Evaluator | None = None
) -> Point | None:
    """First point where does_i(a) holds without K_i does_i(a)."""
    return local_witness(sys, i, DoesAtom(i, a), evaluator)


# =============================================================================
# Stability and recall
# =============================================================================


def stable_witness(
    sys: System, f: Formula, evaluator: Evaluator | None = None
) -> Point | None:
    """First point where f is false after having held earlier in the run."""
    ev = evaluator or Evaluator(sys)
    per_run = ev.extension(f).reshape(sys.run_count, sys.horizon + 1)
    held = np.logical_or.accumulate(per_run, axis=1)
    lost = np.flatnonzero((held & ~per_run).ravel())
    return sys.point_at(int(lost[0])) if len(lost) else None


def is_stable(sys: System, f: Formula) -> bool:
    return stable_witness(sys, f) is None


def recall_witness(
    sys: System, i: AgentId, f: Formula, evaluator: Evaluator | None = None
) -> Point | None:
    """First point where K_i f is lost after having held."""
    return stable_witness(sys, Know(i, f), evaluator)


def recalls(sys: System, i: AgentId, f: Formula) -> bool:
    return recall_witness(sys, i, f) is None


def perfect_recall_witness(sys: System, i: AgentId) -> Point | None:
    """
    First point at which i's local state fails to determine its past.

    Synchronous perfect recall: two points where i has the same local state
    must carry identical sequences of i's local states up to that time.
    """
    check_agent(sys, i)
    seen: dict = {}
    for p in sys.points():
        state = state_key(local_state(sys, p, i))
        past = tuple(
            state_key(sys.runs[p.run].states[t].locals[i - 1]) for t in range(p.time + 1)
        )
        if seen.setdefault(state, past) != past:
            return p
    return None


def has_perfect_recall(sys: System, i: AgentId) -> bool:
    return perfect_recall_witness(sys, i) is None


# =============================================================================
# Joint actions
# =============================================================================


def simultaneous_witness(
    sys: System, assignment: ActionAssignment, evaluator: Evaluator | None = None
) -> Point | None:
    """First point where some does_j(a_j) occurs without some does_i(a_i)."""
    check_assignment(sys, assignment, 2)
    ev = evaluator or Evaluator(sys)
    return _min_point(
        [
            necessary_condition_witness(sys, DoesAtom(i, a_i), j, a_j, ev)
            for i, a_i in assignment
            for j, a_j in assignment
            if i != j
        ]
    )


def is_simultaneous(sys: System, assignment: ActionAssignment) -> bool:
    return simultaneous_witness(sys, assignment) is None


def ordered_witness(
    sys: System, sequence: ActionAssignment, evaluator: Evaluator | None = None
) -> Point | None:
    """First point where does_j(a_j) occurs before did_{j-1}(a_{j-1})."""
    check_assignment(sys, sequence, 2)
    ev = evaluator or Evaluator(sys)
    return _min_point(
        [
            necessary_condition_witness(sys, DidAtom(prev, a_prev), j, a_j, ev)
            for (prev, a_prev), (j, a_j) in zip(sequence, sequence[1:])
        ]
    )


def is_ordered(sys: System, sequence: ActionAssignment) -> bool:
    return ordered_witness(sys, sequence) is None


def observation_one_witness(
    sys: System,
    assignment: ActionAssignment,
    psi: Formula,
    evaluator: Evaluator | None = None,
) -> Point | None:
    """
    First point refuting that a necessary condition for one action of a
    simultaneous assignment is necessary for all of them.

    Meaningful only when the assignment is simultaneous.
    """
    ev = evaluator or Evaluator(sys)
    if not any(necessary_condition_witness(sys, psi, i, a, ev) is None for i, a in assignment):
        return None
    return _min_point(
        [necessary_condition_witness(sys, psi, j, a, ev) for j, a in assignment]
    )


def did_chain_witness(
    sys: System, sequence: ActionAssignment, evaluator: Evaluator | None = None
) -> Point | None:
    """First point where did_j(a_j) holds without did_{j-1}(a_{j-1})."""
    ev = evaluator or Evaluator(sys)
    return _min_point(
        [
            ev.first_point_where(And(DidAtom(j, a_j), Not(DidAtom(prev, a_prev))))
            for (prev, a_prev), (j, a_j) in zip(sequence, sequence[1:])
        ]
    )


def did_local_witness(
    sys: System, j: AgentId, a: Action, evaluator: Evaluator | None = None
) -> Point | None:
    """First point where did_j(a) holds but agent j does not know it."""
    return local_witness(sys, j, DidAtom(j, a), evaluator)


# =============================================================================
# Boolean forms of the supplementary checks
# =============================================================================


def consciousness_equivalence(sys: System, i: AgentId, a: Action) -> bool:
    return consciousness_equivalence_witness(sys, i, a) is None


def observation_one(sys: System, assignment: ActionAssignment, psi: Formula) -> bool:
    return observation_one_witness(sys, assignment, psi) is None


def claim_did_chain(sys: System, sequence: ActionAssignment) -> bool:
    return did_chain_witness(sys, sequence) is None


def claim_did_local(sys: System, j: AgentId, a: Action) -> bool:
    return did_local_witness(sys, j, a) is None


def earliest(sys: System, run: int, f: Formula) -> int | None:
    """Least t with f true at (run, t), or None within the horizon."""
    return Evaluator(sys).earliest(run, f)
