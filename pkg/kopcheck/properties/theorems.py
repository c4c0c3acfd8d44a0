"""
Theorem checkers and verification reports.

Each checker evaluates the theorem's hypotheses first, each with a witness
point when it fails. The conclusion is checked only when every hypothesis
holds; a hypothesis failure is reported, never turned into a verdict on
the conclusion. Subchecks are intermediate facts that must hold whenever
the hypotheses do.

Invariants:
- conclusion_holds is None iff some hypothesis fails
- counterexamples are every point falsifying the conclusion, sorted
- Reports are deterministic for a given system and arguments
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from kopcheck.contracts import ExitStatus, InputError
from kopcheck.kernel import Action, AgentId, Point, System
from kopcheck.logic.evaluator import Evaluator
from kopcheck.logic.formula import (
    And,
    Common,
    DidAtom,
    DoesAtom,
    Formula,
    Know,
    Not,
    format_formula,
    nested_knowledge,
)
from kopcheck.properties.predicates import (
    ActionAssignment,
    check_assignment,
    conscious_witness,
    consciousness_equivalence_witness,
    did_chain_witness,
    did_local_witness,
    necessary_condition_witness,
    observation_one_witness,
    ordered_witness,
    recall_witness,
    simultaneous_witness,
    stable_witness,
)


logger = logging.getLogger(__name__)


class TheoremTag(str, Enum):
    KOP = "KOP"
    CKOP = "CKOP"
    NKOP = "NKOP"
    PREDICATE = "PREDICATE"


@dataclass(frozen=True)
class CheckResult:
    """One named universal statement with its first falsifying point."""

    name: str
    holds: bool
    witness: Point | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "holds": self.holds,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def _result(name: str, witness: Point | None) -> CheckResult:
    return CheckResult(name=name, holds=witness is None, witness=witness)


@dataclass
class VerificationReport:
    """Outcome of a theorem or predicate check."""

    theorem: TheoremTag
    hypotheses: list[CheckResult] = field(default_factory=list)
    conclusion_holds: bool | None = None
    counterexamples: list[Point] = field(default_factory=list)
    note: str = ""
    subchecks: list[CheckResult] = field(default_factory=list)

    @property
    def hypotheses_hold(self) -> bool:
        return all(h.holds for h in self.hypotheses)

    def failed_hypothesis(self) -> CheckResult | None:
        return next((h for h in self.hypotheses if not h.holds), None)

    def exit_status(self) -> ExitStatus:
        if not self.hypotheses_hold:
            return ExitStatus.HYPOTHESIS_FAILED
        if self.conclusion_holds and all(s.holds for s in self.subchecks):
            return ExitStatus.HOLDS
        return ExitStatus.FAILS

    def to_dict(self) -> dict[str, Any]:
        return {
            "theorem": self.theorem.value,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "conclusion_holds": self.conclusion_holds,
            "counterexamples": [p.to_dict() for p in self.counterexamples],
            "note": self.note,
            "subchecks": [s.to_dict() for s in self.subchecks],
        }

    def render(self, sys: System) -> str:
        """Human-readable report."""

        def status(check: CheckResult) -> str:
            if check.holds:
                return "holds"
            return f"fails at {sys.point_label(check.witness)}"

        predicate = self.theorem is TheoremTag.PREDICATE
        if predicate:
            lines = [f"predicate: {self.note}"]
        else:
            lines = [f"theorem: {self.theorem.value}"]
        for h in self.hypotheses:
            lines.append(f"hypothesis {h.name}: {status(h)}")
        if self.conclusion_holds is None:
            lines.append("conclusion: not asserted")
        else:
            lines.append(f"conclusion: {'holds' if self.conclusion_holds else 'fails'}")
        for p in self.counterexamples:
            lines.append(f"counterexample: {sys.point_label(p)}")
        for s in self.subchecks:
            lines.append(f"subcheck {s.name}: {status(s)}")
        if self.note and not predicate:
            lines.append(f"note: {self.note}")
        return "\n".join(lines)


# =============================================================================
# Naming
# =============================================================================


class _Names:
    """Readable names of hypotheses in terms of the system's agent names."""

    def __init__(self, sys: System):
        self.sys = sys

    def agent(self, i: AgentId) -> str:
        return self.sys.agent_name(i)

    def formula(self, f: Formula) -> str:
        return format_formula(f, self.sys.agent_names)

    def pairs(self, assignment: ActionAssignment) -> str:
        return ", ".join(f"{a}@{self.agent(i)}" for i, a in assignment)


def predicate_report(name: str, witness: Point | None) -> VerificationReport:
    """Report for a single predicate check."""
    return VerificationReport(
        theorem=TheoremTag.PREDICATE,
        conclusion_holds=witness is None,
        counterexamples=[witness] if witness is not None else [],
        note=name,
    )


# =============================================================================
# Knowledge of preconditions
# =============================================================================


def check_kop(sys: System, i: AgentId, a: Action, psi: Formula) -> VerificationReport:
    """
    If a is conscious for i and psi is necessary for does_i(a), then
    K_i psi is necessary for does_i(a).
    """
    ev = Evaluator(sys)
    names = _Names(sys)
    report = VerificationReport(theorem=TheoremTag.KOP)
    report.hypotheses = [
        _result(f"conscious({names.agent(i)}, {a})", conscious_witness(sys, i, a, ev)),
        _result(
            f"necessary({names.formula(psi)}, {names.agent(i)}, {a})",
            necessary_condition_witness(sys, psi, i, a, ev),
        ),
    ]
    if not report.hypotheses_hold:
        report.note = f"hypothesis {report.failed_hypothesis().name} fails"
        return report

    target = Know(i, psi)
    report.counterexamples = ev.points_where(And(DoesAtom(i, a), Not(target)))
    report.conclusion_holds = not report.counterexamples
    report.subchecks = [
        _result(
            f"knows-own-action({names.agent(i)}, {a})",
            consciousness_equivalence_witness(sys, i, a, ev),
        )
    ]
    report.note = f"target: {names.formula(target)} necessary for does[{names.agent(i)}]({a})"
    _log_outcome(report)
    return report


# =============================================================================
# Common knowledge of preconditions
# =============================================================================


def check_ckop(
    sys: System,
    group: frozenset[AgentId],
    assignment: ActionAssignment,
    i: AgentId,
    psi: Formula,
) -> VerificationReport:
    """
    If the assignment is simultaneous, every action in it is conscious and
    psi is necessary for i's action, then C_G psi is necessary for every
    action in the assignment.

    Raises:
        InputError: If the assignment does not cover exactly the group, or
            i is not in the group.
    """
    check_assignment(sys, assignment, 2)
    covered = frozenset(agent for agent, _ in assignment)
    if covered != frozenset(group):
        raise InputError(
            f"action assignment covers agents {sorted(covered)}, group is {sorted(group)}",
            detail={"group": sorted(group), "assignment": sorted(covered)},
        )
    if i not in group:
        raise InputError(f"agent {i} is not in the group {sorted(group)}")
    action_of = dict(assignment)

    ev = Evaluator(sys)
    names = _Names(sys)
    report = VerificationReport(theorem=TheoremTag.CKOP)
    report.hypotheses = [
        _result(
            f"simultaneous({names.pairs(assignment)})",
            simultaneous_witness(sys, assignment, ev),
        )
    ]
    report.hypotheses += [
        _result(f"conscious({names.agent(j)}, {a_j})", conscious_witness(sys, j, a_j, ev))
        for j, a_j in assignment
    ]
    report.hypotheses.append(
        _result(
            f"necessary({names.formula(psi)}, {names.agent(i)}, {action_of[i]})",
            necessary_condition_witness(sys, psi, i, action_of[i], ev),
        )
    )
    if not report.hypotheses_hold:
        report.note = f"hypothesis {report.failed_hypothesis().name} fails"
        return report

    target = Common(frozenset(group), psi)
    failing: set[Point] = set()
    for j, a_j in assignment:
        failing.update(ev.points_where(And(DoesAtom(j, a_j), Not(target))))
    report.counterexamples = sorted(failing)
    report.conclusion_holds = not failing
    report.subchecks = [
        _result(
            f"necessary-for-all({names.formula(psi)})",
            observation_one_witness(sys, assignment, psi, ev),
        )
    ]
    report.note = f"target: {names.formula(target)} necessary for every action in the group"
    _log_outcome(report)
    return report


# =============================================================================
# Nested knowledge of preconditions
# =============================================================================


def check_nkop(sys: System, sequence: ActionAssignment, psi: Formula) -> VerificationReport:
    """
    If the sequence is ordered, every agent recalls its own action, every
    action is conscious and psi is a stable necessary condition for the
    first action, then K_{a_j}...K_{a_1} psi is necessary for the j-th
    action for every j.

    A single-action sequence reduces to the knowledge-of-preconditions
    check with a stable psi.
    """
    check_assignment(sys, sequence, 1)
    ev = Evaluator(sys)
    names = _Names(sys)
    first_agent, first_action = sequence[0]

    report = VerificationReport(theorem=TheoremTag.NKOP)
    if len(sequence) >= 2:
        report.hypotheses.append(
            _result(f"ordered({names.pairs(sequence)})", ordered_witness(sys, sequence, ev))
        )
    report.hypotheses += [
        _result(
            f"recalls({names.agent(j)}, did[{names.agent(j)}]({a_j}))",
            recall_witness(sys, j, DidAtom(j, a_j), ev),
        )
        for j, a_j in sequence
    ]
    report.hypotheses += [
        _result(f"conscious({names.agent(j)}, {a_j})", conscious_witness(sys, j, a_j, ev))
        for j, a_j in sequence
    ]
    report.hypotheses += [
        _result(f"stable({names.formula(psi)})", stable_witness(sys, psi, ev)),
        _result(
            f"necessary({names.formula(psi)}, {names.agent(first_agent)}, {first_action})",
            necessary_condition_witness(sys, psi, first_agent, first_action, ev),
        ),
    ]
    if not report.hypotheses_hold:
        report.note = f"hypothesis {report.failed_hypothesis().name} fails"
        return report

    agents = [agent for agent, _ in sequence]
    failing: set[Point] = set()
    for k, (j, a_j) in enumerate(sequence, start=1):
        target = nested_knowledge(agents[:k], psi)
        failing.update(ev.points_where(And(DoesAtom(j, a_j), Not(target))))
    report.counterexamples = sorted(failing)
    report.conclusion_holds = not failing
    if len(sequence) >= 2:
        report.subchecks.append(
            _result(f"did-chain({names.pairs(sequence)})", did_chain_witness(sys, sequence, ev))
        )
    report.subchecks += [
        _result(
            f"did-local({names.agent(j)}, {a_j})", did_local_witness(sys, j, a_j, ev)
        )
        for j, a_j in sequence
    ]
    report.note = (
        f"target: {names.formula(nested_knowledge(agents, psi))} necessary for the last action"
    )
    _log_outcome(report)
    return report


def _log_outcome(report: VerificationReport) -> None:
    logger.info(
        "theorem=%s conclusion=%s counterexamples=%d",
        report.theorem.value,
        report.conclusion_holds,
        len(report.counterexamples),
    )
