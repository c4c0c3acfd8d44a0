"""
kopcheck Predicate Tests

Coverage:
- Necessary conditions, consciousness, locality
- Stability, recall of facts, synchronous perfect recall
- Simultaneity and ordering of action assignments
- Witnesses are the first falsifying point and re-check under eval
- Earliest times respect valid implication
"""

import pytest

from kopcheck.contracts import InputError
from kopcheck.kernel import Action, Point, System
from kopcheck.logic import DidAtom, Evaluator, Know, Not, Prop, parse_formula
from kopcheck.logic.interpretation import Interpretation
from kopcheck.properties import (
    claim_did_chain,
    claim_did_local,
    consciousness_equivalence,
    earliest,
    has_perfect_recall,
    is_conscious,
    is_local,
    is_necessary_condition,
    is_ordered,
    is_simultaneous,
    is_stable,
    make_assignment,
    observation_one,
    recalls,
)
from kopcheck.properties.predicates import (
    conscious_witness,
    local_witness,
    necessary_condition_counterexamples,
    necessary_condition_witness,
    perfect_recall_witness,
    recall_witness,
    simultaneous_witness,
    stable_witness,
)
from kopcheck.protocols import (
    PSI_GO,
    PSI_INPUT,
    chain_sequence,
    fire_action,
    formula_pool,
    random_system,
)
from kopcheck.protocols.chain import chain_action
from kopcheck.protocols.mini import DISPENSE
from tests.conftest import make_run


GO = Action("go")
P = Prop("p")


@pytest.fixture
def forgetful_system() -> System:
    """One agent whose state at time 1 no longer shows where it started."""
    return System(
        runs=(make_run([("x",), ("y",)], name="r_x"), make_run([("z",), ("y",)], name="r_z")),
        horizon=1,
        agent_count=1,
        interpretation=Interpretation.from_table({"p": {0: (True, True), 1: (False, False)}}),
    )


class TestNecessaryCondition:
    def test_atm_dispenses_only_with_good_credit(self, atm):
        good = Prop("good_credit")
        assert is_necessary_condition(atm, good, 1, DISPENSE)
        assert is_necessary_condition(atm, Know(1, good), 1, DISPENSE)

    def test_counterexamples_listed(self, two_agent_system):
        not_p = Not(P)
        assert necessary_condition_witness(two_agent_system, not_p, 1, GO) == Point(0, 0)
        assert necessary_condition_counterexamples(two_agent_system, not_p, 1, GO) == [Point(0, 0)]

    def test_vacuous_for_unperformed_action(self, lamp):
        assert is_necessary_condition(lamp, Prop("lit"), 1, Action("never"))


class TestConsciousness:
    def test_action_not_determined_by_constant_state(self, two_agent_system):
        # agent 1's state is "a" throughout r_a but it acts only at time 0
        assert conscious_witness(two_agent_system, 1, GO) == Point(0, 0)
        assert not consciousness_equivalence(two_agent_system, 1, GO)

    def test_firing_squad_actions_are_conscious(self, fs3):
        for j in fs3.agents:
            assert is_conscious(fs3, j, fire_action(j))
            assert consciousness_equivalence(fs3, j, fire_action(j))

    def test_witness_rechecks(self, two_agent_system):
        ev = Evaluator(two_agent_system)
        w = conscious_witness(two_agent_system, 1, GO, ev)
        f = parse_formula("K[1] does[1](go) | K[1] !does[1](go)")
        assert not ev.eval(w, f)


class TestLocality:
    def test_p_local_to_agent_one_not_two(self, two_agent_system):
        assert is_local(two_agent_system, 1, P)
        assert local_witness(two_agent_system, 2, P) == Point(0, 0)

    def test_delivery_local_to_receiver(self, msg_lossy):
        assert is_local(msg_lossy, 2, Prop("delivered"))
        assert not is_local(msg_lossy, 1, Prop("delivered"))


class TestStabilityAndRecall:
    def test_knowledge_gained_is_stable(self, two_agent_system):
        assert is_stable(two_agent_system, Know(2, P))
        assert stable_witness(two_agent_system, Not(Know(2, P))) == Point(0, 1)

    def test_sent_is_stable(self, msg_lossy):
        assert is_stable(msg_lossy, Prop("sent"))

    def test_forgetting(self, forgetful_system):
        assert perfect_recall_witness(forgetful_system, 1) == Point(1, 1)
        assert not has_perfect_recall(forgetful_system, 1)
        assert recall_witness(forgetful_system, 1, P) == Point(0, 1)
        assert not recalls(forgetful_system, 1, P)

    def test_firing_squad_agents_recall(self, fs2):
        for i in fs2.agents:
            assert has_perfect_recall(fs2, i)

    def test_clockless_state_forgets_time(self, lamp):
        assert perfect_recall_witness(lamp, 1) == Point(0, 1)

    def test_chain_without_recall(self):
        from kopcheck.protocols import scenario_ordered_chain

        forgetful = scenario_ordered_chain(k=3, recall=False)
        assert not recalls(forgetful, 1, DidAtom(1, chain_action(1)))


class TestJointActions:
    def test_firing_squad_is_simultaneous(self, fs2, fs3):
        assert is_simultaneous(fs2, make_assignment([(1, "fire_1"), (2, "fire_2")]))
        assert is_simultaneous(fs3, make_assignment([(j, fire_action(j)) for j in (1, 2, 3)]))

    def test_eager_strategy_lags(self, fs2_lag):
        pairs = make_assignment([(1, "fire_1"), (2, "fire_2")])
        w = simultaneous_witness(fs2_lag, pairs)
        assert fs2_lag.point_label(w) == "(r_go,1)"
        assert not is_simultaneous(fs2_lag, pairs)

    def test_observation_on_simultaneous_assignment(self, fs2):
        pairs = make_assignment([(1, "fire_1"), (2, "fire_2")])
        assert observation_one(fs2, pairs, Prop(PSI_GO))

    def test_chain_is_ordered(self, chain3):
        sequence = chain_sequence(3)
        assert is_ordered(chain3, sequence)
        assert not is_ordered(chain3, tuple(reversed(sequence)))
        assert claim_did_chain(chain3, sequence)
        for j, a in sequence:
            assert claim_did_local(chain3, j, a)

    def test_earliest_knowledge_in_chain(self, chain3):
        run = chain3.resolve_run("r_trigger0")
        f = Know(1, Prop(PSI_INPUT))
        assert earliest(chain3, run, f) == 1

    def test_assignment_errors(self, fs2):
        with pytest.raises(InputError, match="duplicate agent"):
            is_simultaneous(fs2, make_assignment([(1, "fire_1"), (1, "fire_2")]))
        with pytest.raises(InputError, match="at least 2"):
            is_simultaneous(fs2, make_assignment([(1, "fire_1")]))
        with pytest.raises(InputError, match="agent 3"):
            is_ordered(fs2, make_assignment([(1, "fire_1"), (3, "fire_2")]))


class TestEarliest:
    @pytest.mark.parametrize("seed", range(20))
    def test_monotone_under_valid_implication(self, seed):
        generated = random_system(seed, "plain")
        sys = generated.system
        ev = Evaluator(sys)
        pool = formula_pool(generated)
        compared = 0
        for f in pool:
            for g in pool:
                if not ev.validly_implies(f, g):
                    continue
                for r in range(sys.run_count):
                    t_f = ev.earliest(r, f)
                    if t_f is None:
                        continue
                    t_g = ev.earliest(r, g)
                    assert t_g is not None and t_g <= t_f, (generated.label, f, g, r)
                    compared += 1
        assert compared > 0

    def test_knowledge_is_never_earlier_than_the_fact(self, chain3):
        run = chain3.resolve_run("r_trigger0")
        f = Prop(PSI_INPUT)
        assert earliest(chain3, run, f) <= earliest(chain3, run, Know(1, f))
