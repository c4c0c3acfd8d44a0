"""
kopcheck Evaluator Tests

Coverage:
- Indistinguishability and the knowledge clauses on the mini systems
- Common knowledge versus its bounded approximants
- Validity, valid implication and earliest-time queries
- Agreement with the direct Kripke-structure evaluator
- Invariance under duplication of runs
- Input errors for undeclared propositions, bad agents and depths
"""

from dataclasses import replace

import pytest

from kopcheck.contracts import InputError
from kopcheck.kernel import Point, System
from kopcheck.logic import (
    Evaluator,
    Everyone,
    Implies,
    Know,
    Not,
    Prop,
    eval_common,
    evaluate,
    indistinguishable,
    nested_everyone,
    parse_formula,
    valid,
    validly_implies,
)
from kopcheck.logic.interpretation import Interpretation
from kopcheck.logic.kripke import KripkeStructure
from kopcheck.protocols.firing_squad import PSI_GO


def at(system: System, run: str, time: int) -> Point:
    return Point(system.resolve_run(run), time)


def holds(system: System, text: str, run: str, time: int) -> bool:
    return evaluate(system, at(system, run, time), parse_formula(text, system.agent_names))


FORMULAS = [
    "p",
    "!p",
    "K[1] p",
    "K[2] p",
    "K[1] K[2] p",
    "K[2] !K[1] p",
    "E[{1,2}] p",
    "C[{1,2}] p",
    "does[1](go) -> K[1] p",
    "did[1](go) | K[2] !p",
    "C[{1,2}] (p | !p)",
]


class TestIndistinguishability:
    def test_switch_cannot_see_bulb(self, lamp):
        assert indistinguishable(lamp, at(lamp, "r_on_lit", 0), at(lamp, "r_on_burnt", 0), 1)
        assert not indistinguishable(lamp, at(lamp, "r_on_lit", 0), at(lamp, "r_off", 0), 1)

    def test_reflexive(self, two_agent_system):
        for p in two_agent_system.points():
            assert indistinguishable(two_agent_system, p, p, 2)

    def test_alice_cannot_tell_delivery_apart(self, msg_lossy):
        e = Evaluator(msg_lossy)
        assert e.indistinguishable(at(msg_lossy, "r_del", 2), at(msg_lossy, "r_lost", 2), 1)


class TestKnowledge:
    def test_lamp(self, lamp, lamp_no_burnout):
        assert holds(lamp, "K[switch] !lit", "r_off", 0)
        assert not holds(lamp, "K[switch] lit", "r_on_lit", 0)
        assert holds(lamp_no_burnout, "K[switch] lit", "r_on_lit", 0)

    def test_message_delivery(self, msg_lossy, msg_reliable):
        assert not holds(msg_lossy, "K[Alice] delivered", "r_del", 2)
        assert holds(msg_reliable, "K[Alice] delivered", "r_del", 2)

    def test_bob_knows_once_delivered(self, msg_lossy):
        assert holds(msg_lossy, "K[Bob] sent", "r_del", 1)
        assert not holds(msg_lossy, "K[Bob] sent", "r_lost", 3)

    def test_atm_knowledge_is_stronger_than_fact(self, atm):
        assert holds(atm, "good_credit", "r_100_down", 1)
        assert not holds(atm, "K[atm] good_credit", "r_100_down", 1)
        assert holds(atm, "K[atm] good_credit", "r_100_up", 1)

    def test_contradiction_is_false_everywhere(self, lamp):
        ev = Evaluator(lamp)
        assert ev.points_where(parse_formula("lit & !lit")) == []


class TestCommonKnowledge:
    def test_everyone_knows_without_common_knowledge(self, two_agent_system):
        system, p = two_agent_system, Prop("p")
        group = frozenset({1, 2})
        assert nested_everyone(system, Point(0, 1), group, p, 1)
        assert not nested_everyone(system, Point(0, 1), group, p, 2)
        assert not eval_common(system, Point(0, 1), group, p)

    def test_firing_squad_common_knowledge_at_firing(self, fs2):
        go = Prop(PSI_GO)
        group = frozenset({1, 2})
        assert eval_common(fs2, at(fs2, "r_go", 2), group, go)
        assert not eval_common(fs2, at(fs2, "r_go", 0), group, go)
        assert evaluate(fs2, at(fs2, "r_go", 1), Know(1, go))
        assert not nested_everyone(fs2, at(fs2, "r_go", 1), group, go, 2)

    def test_singleton_group_is_knowledge(self, two_agent_system):
        system = two_agent_system
        for p in system.points():
            for i in (1, 2):
                f = Prop("p")
                assert eval_common(system, p, frozenset({i}), f) == evaluate(system, p, Know(i, f))

    @pytest.mark.parametrize("scenario", ["two_agent_system", "fs2", "fs3", "chain3"])
    def test_fixed_point_agreement(self, scenario, request):
        system = request.getfixturevalue(scenario)
        ev = Evaluator(system)
        group = frozenset(system.agents)
        f = Prop(system.interpretation.props[0])
        n = system.point_count
        for p in system.points():
            expected = ev.eval_common(p, group, f)
            assert ev.nested_everyone(p, group, f, n) == expected
            assert ev.nested_everyone(p, group, f, n + 1) == expected

    def test_depth_must_be_positive(self, two_agent_system):
        with pytest.raises(InputError, match="depth"):
            nested_everyone(two_agent_system, Point(0, 0), frozenset({1}), Prop("p"), 0)

    def test_empty_group_rejected(self, two_agent_system):
        with pytest.raises(InputError, match="non-empty"):
            eval_common(two_agent_system, Point(0, 0), frozenset(), Prop("p"))


class TestValidity:
    def test_knowledge_axiom(self, two_agent_system):
        for text in FORMULAS:
            f = parse_formula(text)
            for i in (1, 2):
                assert valid(two_agent_system, Implies(Know(i, f), f))
                assert validly_implies(two_agent_system, Know(i, f), f)

    def test_common_knowledge_implies_knowledge(self, fs3):
        c = parse_formula("C[{1,2,3}] psi_go")
        for j in (1, 2, 3):
            assert validly_implies(fs3, c, Know(j, Prop(PSI_GO)))

    def test_invalid_formula(self, lamp, msg_lossy):
        assert not valid(lamp, Prop("lit"))
        assert not validly_implies(msg_lossy, Prop("sent"), Prop("delivered"))
        assert validly_implies(msg_lossy, Prop("sent"), Prop("sent"))

    def test_earliest(self, chain3):
        ev = Evaluator(chain3)
        run = chain3.resolve_run("r_trigger0")
        assert ev.earliest(run, parse_formula("K[1] psi_input")) == 1
        assert ev.earliest(chain3.resolve_run("r_none"), parse_formula("psi_input")) is None


class TestErrors:
    def test_undeclared_proposition(self, lamp):
        with pytest.raises(InputError, match="undeclared proposition 'dark'"):
            evaluate(lamp, Point(0, 0), Prop("dark"))

    def test_agent_out_of_range(self, lamp):
        with pytest.raises(InputError, match="agent 2"):
            evaluate(lamp, Point(0, 0), Know(2, Prop("lit")))

    def test_extensions_are_read_only(self, lamp):
        ext = Evaluator(lamp).extension(Prop("lit"))
        assert not ext.flags.writeable


class TestKripkeCrossCheck:
    @pytest.mark.parametrize(
        "scenario, texts",
        [
            ("two_agent_system", FORMULAS),
            ("lamp", ["lit", "K[1] lit", "K[1] !lit", "C[{1}] !lit"]),
            ("msg_lossy", ["K[1] delivered", "K[2] K[1] sent", "C[{1,2}] sent", "E[{1,2}] sent"]),
            ("fs2", ["C[{1,2}] psi_go", "K[2] K[1] psi_go", "does[1](fire_1) -> C[{1,2}] psi_go"]),
        ],
    )
    def test_agrees_at_every_point(self, scenario, texts, request):
        system = request.getfixturevalue(scenario)
        ev = Evaluator(system)
        kripke = KripkeStructure(system)
        for text in texts:
            f = parse_formula(text)
            for p in system.points():
                assert ev.eval(p, f) == kripke.holds(p, f), (text, p)


class TestDuplication:
    def test_copy_of_run_changes_nothing(self, two_agent_system):
        original = two_agent_system
        copy = replace(original.runs[0], name="r_a_copy")
        table = {name: {**rows, 2: rows[0]} for name, rows in original.interpretation.table.items()}
        doubled = System(
            runs=original.runs + (copy,),
            horizon=original.horizon,
            agent_count=original.agent_count,
            interpretation=Interpretation.from_table(table),
        )
        before, after = Evaluator(original), Evaluator(doubled)
        for text in FORMULAS:
            f = parse_formula(text)
            for p in original.points():
                assert after.eval(p, f) == before.eval(p, f)
            for t in range(original.horizon + 1):
                assert after.eval(Point(2, t), f) == before.eval(Point(0, t), f)
        assert doubled.deduplicated().run_count == 2

    def test_everyone_is_conjunction_of_knowledge(self, two_agent_system):
        f = Everyone(frozenset({1, 2}), Prop("p"))
        g = parse_formula("K[1] p & K[2] p")
        ev = Evaluator(two_agent_system)
        assert (ev.extension(f) == ev.extension(g)).all()
        assert (ev.extension(Not(f)) != ev.extension(g)).all()
