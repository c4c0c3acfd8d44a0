"""
kopcheck Theorem Checker Tests

Coverage:
- Knowledge, common-knowledge and nested-knowledge checks on the scenarios
- Hypothesis failures are reported with witnesses, never as a verdict
- Exit status mapping of reports
- Report rendering and dictionary shape
- Input validation of groups and assignments
"""

import pytest

from kopcheck.contracts import ExitStatus, InputError
from kopcheck.kernel import Action, Point
from kopcheck.logic import Not, Prop
from kopcheck.properties import (
    TheoremTag,
    check_ckop,
    check_kop,
    check_nkop,
    make_assignment,
    predicate_report,
)
from kopcheck.protocols import PSI_GO, PSI_INPUT, chain_sequence, scenario_ordered_chain
from kopcheck.protocols.mini import DISPENSE


FIRE_PAIRS = make_assignment([(1, "fire_1"), (2, "fire_2")])


class TestKnowledgeOfPreconditions:
    def test_atm(self, atm):
        report = check_kop(atm, 1, DISPENSE, Prop("good_credit"))
        assert report.theorem is TheoremTag.KOP
        assert [h.name for h in report.hypotheses] == [
            "conscious(atm, dispense)",
            "necessary(good_credit, atm, dispense)",
        ]
        assert report.conclusion_holds is True
        assert report.counterexamples == []
        assert report.exit_status() == ExitStatus.HOLDS

    def test_hypothesis_failure_is_not_a_verdict(self, two_agent_system):
        report = check_kop(two_agent_system, 1, Action("go"), Not(Prop("p")))
        assert report.conclusion_holds is None
        assert report.counterexamples == []
        assert report.exit_status() == ExitStatus.HYPOTHESIS_FAILED
        failed = report.failed_hypothesis()
        assert failed.name == "conscious(1, go)"
        assert failed.witness == Point(0, 0)
        assert "conscious(1, go) fails" in report.note

    def test_render(self, atm):
        text = check_kop(atm, 1, DISPENSE, Prop("good_credit")).render(atm)
        lines = text.splitlines()
        assert lines[0] == "theorem: KOP"
        assert "hypothesis conscious(atm, dispense): holds" in lines
        assert "conclusion: holds" in lines
        assert "subcheck knows-own-action(atm, dispense): holds" in lines
        assert lines[-1] == "note: target: K[atm] good_credit necessary for does[atm](dispense)"


class TestCommonKnowledgeOfPreconditions:
    def test_firing_squad(self, fs2):
        report = check_ckop(fs2, frozenset({1, 2}), FIRE_PAIRS, 1, Prop(PSI_GO))
        assert report.theorem is TheoremTag.CKOP
        assert report.hypotheses_hold
        assert report.conclusion_holds is True
        assert all(s.holds for s in report.subchecks)
        assert report.exit_status() == ExitStatus.HOLDS

    def test_three_agents(self, fs3):
        pairs = make_assignment([(j, f"fire_{j}") for j in (1, 2, 3)])
        report = check_ckop(fs3, frozenset({1, 2, 3}), pairs, 2, Prop(PSI_GO))
        assert report.exit_status() == ExitStatus.HOLDS

    def test_eager_strategy_breaks_simultaneity(self, fs2_lag):
        report = check_ckop(fs2_lag, frozenset({1, 2}), FIRE_PAIRS, 1, Prop(PSI_GO))
        assert report.exit_status() == ExitStatus.HYPOTHESIS_FAILED
        assert report.conclusion_holds is None
        text = report.render(fs2_lag)
        assert "hypothesis simultaneous(fire_1@1, fire_2@2): fails at (r_go,1)" in text
        assert "conclusion: not asserted" in text

    def test_assignment_must_cover_group(self, fs3):
        with pytest.raises(InputError, match="group is"):
            check_ckop(fs3, frozenset({1, 2, 3}), FIRE_PAIRS, 1, Prop(PSI_GO))

    def test_agent_must_be_in_group(self, fs3):
        with pytest.raises(InputError, match="not in the group"):
            check_ckop(fs3, frozenset({1, 2}), FIRE_PAIRS, 3, Prop(PSI_GO))


class TestNestedKnowledgeOfPreconditions:
    def test_chain(self, chain3):
        report = check_nkop(chain3, chain_sequence(3), Prop(PSI_INPUT))
        assert report.theorem is TheoremTag.NKOP
        assert report.hypotheses[0].name.startswith("ordered(")
        assert report.exit_status() == ExitStatus.HOLDS
        assert [s.holds for s in report.subchecks] == [True] * 4

    def test_single_action_sequence(self, chain3):
        report = check_nkop(chain3, chain_sequence(3)[:1], Prop(PSI_INPUT))
        assert not any(h.name.startswith("ordered(") for h in report.hypotheses)
        assert report.exit_status() == ExitStatus.HOLDS

    def test_forgetting_agents_fail_recall(self):
        forgetful = scenario_ordered_chain(k=3, recall=False)
        report = check_nkop(forgetful, chain_sequence(3), Prop(PSI_INPUT))
        assert report.exit_status() == ExitStatus.HYPOTHESIS_FAILED
        assert report.failed_hypothesis().name.startswith("recalls(")

    def test_empty_sequence_rejected(self, chain3):
        with pytest.raises(InputError, match="at least 1"):
            check_nkop(chain3, (), Prop(PSI_INPUT))


class TestReportShape:
    def test_to_dict(self, fs2_lag):
        report = check_ckop(fs2_lag, frozenset({1, 2}), FIRE_PAIRS, 1, Prop(PSI_GO))
        data = report.to_dict()
        assert set(data) == {
            "theorem",
            "hypotheses",
            "conclusion_holds",
            "counterexamples",
            "note",
            "subchecks",
        }
        assert data["theorem"] == "CKOP"
        first = data["hypotheses"][0]
        assert first["holds"] is False
        assert first["witness"] == {"run": fs2_lag.resolve_run("r_go"), "time": 1}

    def test_predicate_report(self, lamp):
        failing = predicate_report("stable(lit)", Point(0, 1))
        assert failing.exit_status() == ExitStatus.FAILS
        assert failing.render(lamp).splitlines() == [
            "predicate: stable(lit)",
            "conclusion: fails",
            "counterexample: (r_on_lit,1)",
        ]
        assert failing.to_dict()["note"] == "stable(lit)"
        assert predicate_report("stable(lit)", None).exit_status() == ExitStatus.HOLDS

    def test_deterministic(self, fs2):
        first = check_ckop(fs2, frozenset({1, 2}), FIRE_PAIRS, 1, Prop(PSI_GO)).to_dict()
        second = check_ckop(fs2, frozenset({1, 2}), FIRE_PAIRS, 1, Prop(PSI_GO)).to_dict()
        assert first == second
