"""
kopcheck Theorem Property Suites

Every generated system, exhaustive or seeded, is checked against:
- Knowledge of preconditions for every agent and pool formula
- Common knowledge of preconditions on simultaneous instances
- Nested knowledge of preconditions on ordered instances
- The S5 laws, the common-knowledge fixed point and group monotonicity
- Agreement with the direct Kripke-structure evaluator

Exhaustive families are every 2-agent system of 1..3 distinct runs at
horizons 1 and 2, packed into disjoint unions so that one evaluator
covers thousands of systems; verdicts are read back per member.

A theorem checker returning FAILS here means an evaluator bug.
"""

from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kopcheck.contracts import ExitStatus
from kopcheck.logic import Common, Evaluator, Everyone, Implies, Know, Not, Prop
from kopcheck.logic.formula import DidAtom, DoesAtom
from kopcheck.logic.kripke import KripkeStructure
from kopcheck.properties import check_ckop, check_kop, check_nkop, is_simultaneous
from kopcheck.properties.predicates import conscious_violation, necessary_violation
from kopcheck.protocols import (
    GeneratedSystem,
    RandomMode,
    SystemBatch,
    batched,
    disjoint_union,
    enumerate_small_systems,
    formula_pool,
    random_system,
    small_system_batches,
)


SEEDS = range(1000)
CROSS_CHECK_SEEDS = range(60)
SMALL_FAMILIES = [(runs, horizon) for horizon in (1, 2) for runs in (1, 2, 3)]


@pytest.fixture(scope="module")
def exhaustive() -> list[tuple[SystemBatch, Evaluator]]:
    """Every small system, one shared evaluator per batch."""
    return [
        (batch, Evaluator(batch.system))
        for runs, horizon in SMALL_FAMILIES
        for batch in small_system_batches(runs, horizon)
    ]


@lru_cache(maxsize=None)
def small_systems() -> tuple[GeneratedSystem, ...]:
    """Up to 3 runs at horizon 1 and up to 2 runs at horizon 2, one system each."""
    return tuple(enumerate_small_systems(max_runs=3, horizon=1)) + tuple(
        enumerate_small_systems(max_runs=2, horizon=2)
    )


@lru_cache(maxsize=None)
def seeded(mode: RandomMode) -> tuple[GeneratedSystem, ...]:
    return tuple(random_system(seed, mode) for seed in SEEDS)


@lru_cache(maxsize=None)
def seeded_batches(mode: RandomMode) -> tuple[tuple[SystemBatch, Evaluator], ...]:
    return tuple((batch, Evaluator(batch.system)) for batch in batched(seeded(mode)))


def kop_instances(batch: SystemBatch, ev: Evaluator) -> tuple[int, list]:
    """
    Count of (member, agent, psi) instances meeting both hypotheses, and
    the instances among them where K_i psi is not necessary.
    """
    applicable, violations = 0, []
    for i, a in batch.assignment:
        conscious = ~batch.members_where(ev.extension(conscious_violation(i, a)))
        for psi in formula_pool(batch):
            necessary = ~batch.members_where(ev.extension(necessary_violation(psi, i, a)))
            known = ~batch.members_where(ev.extension(necessary_violation(Know(i, psi), i, a)))
            holds = conscious & necessary
            applicable += int(holds.sum())
            violations += [(label, i, psi) for label in batch.member_labels(holds & ~known)]
    return applicable, violations


def ckop_instances(batch: SystemBatch, ev: Evaluator) -> tuple[int, int, list]:
    """
    Members with a simultaneous, conscious assignment; (member, psi)
    instances where psi is necessary for the first action; and the
    instances where C_G psi, or psi itself, is not necessary for some
    action of the assignment.
    """
    pairs = batch.assignment
    group = frozenset(agent for agent, _ in pairs)
    eligible = np.ones(batch.size, dtype=bool)
    for i, a_i in pairs:
        eligible &= ~batch.members_where(ev.extension(conscious_violation(i, a_i)))
        for j, a_j in pairs:
            if i != j:
                lag = ev.extension(necessary_violation(DoesAtom(i, a_i), j, a_j))
                eligible &= ~batch.members_where(lag)

    i, a = pairs[0]
    instances, violations = 0, []
    for psi in formula_pool(batch):
        holds = eligible & ~batch.members_where(ev.extension(necessary_violation(psi, i, a)))
        instances += int(holds.sum())
        for j, a_j in pairs:
            for conclusion in (Common(group, psi), psi):
                failed = batch.members_where(ev.extension(necessary_violation(conclusion, j, a_j)))
                violations += [(label, j, conclusion) for label in batch.member_labels(holds & failed)]
    return int(eligible.sum()), instances, violations


def s5_violations(batch: SystemBatch, ev: Evaluator) -> list:
    found = []
    for i in batch.system.agents:
        for f in formula_pool(batch):
            k = Know(i, f)
            laws = {
                "truth": Implies(k, f),
                "positive": Implies(k, Know(i, k)),
                "negative": Implies(Not(k), Know(i, Not(k))),
            }
            for law, g in laws.items():
                failed = batch.members_where(~ev.extension(g))
                found += [(label, i, f, law) for label in batch.member_labels(failed)]
    return found


def fixed_point_disagreements(batch: SystemBatch, ev: Evaluator, formulas) -> list:
    """
    Formulas whose C_G extension differs from E_G^N or E_G^(N+1), N the
    largest member's point count.
    """
    group = frozenset(batch.system.agents)
    n = int(batch.member_points().max())
    found = []
    for f in formulas:
        common = ev.extension(Common(group, f))
        nested = f
        for depth in range(1, n + 2):
            nested = Everyone(group, nested)
            if depth >= n and not np.array_equal(ev.extension(nested), common):
                found.append((batch.labels[0], f, depth))
    return found


# =============================================================================
# Knowledge of preconditions
# =============================================================================


class TestKnowledgeOfPreconditions:
    """Conscious action plus necessary psi implies K_i psi is necessary."""

    def test_exhaustive_small_systems(self, exhaustive):
        applicable = 0
        for batch, ev in exhaustive:
            count, violations = kop_instances(batch, ev)
            assert violations == []
            applicable += count
        assert applicable > 0

    def test_exhaustive_families_are_complete(self, exhaustive):
        members = {}
        for batch, _ in exhaustive:
            key = (batch.system.run_count // batch.size, batch.system.horizon)
            members[key] = members.get(key, 0) + batch.size
        # 16 run shapes at horizon 1, 64 at horizon 2
        assert members == {
            (1, 1): 16, (2, 1): 120, (3, 1): 560,
            (1, 2): 64, (2, 2): 2016, (3, 2): 41664,
        }

    @pytest.mark.parametrize("mode", [RandomMode.PLAIN, RandomMode.SIMULTANEOUS, RandomMode.ORDERED])
    def test_seeded_random_systems(self, mode):
        applicable = 0
        for batch, ev in seeded_batches(mode):
            count, violations = kop_instances(batch, ev)
            assert violations == []
            applicable += count
        assert applicable > 0

    def test_checker_never_fails_on_injected_actions(self):
        statuses = set()
        for generated in seeded(RandomMode.INJECT)[:200]:
            for i, a in generated.assignment:
                report = check_kop(generated.system, i, a, Prop("p"))
                assert report.exit_status() != ExitStatus.FAILS, generated.label
                statuses.add(report.exit_status())
        assert ExitStatus.HYPOTHESIS_FAILED in statuses


# =============================================================================
# Common knowledge of preconditions
# =============================================================================


class TestCommonKnowledgeOfPreconditions:
    """Simultaneous conscious actions: C_G psi is necessary for all of them."""

    def test_exhaustive_small_systems(self, exhaustive):
        eligible = instances = 0
        for batch, ev in exhaustive:
            count, held, violations = ckop_instances(batch, ev)
            assert violations == []
            eligible += count
            instances += held
        assert eligible > 0
        assert instances > 0

    def test_checker_on_simultaneous_small_systems(self):
        statuses = set()
        for generated in small_systems():
            sys, pairs = generated.system, generated.assignment
            if not is_simultaneous(sys, pairs):
                continue
            for psi in formula_pool(generated):
                report = check_ckop(sys, frozenset({1, 2}), pairs, 1, psi)
                assert report.exit_status() != ExitStatus.FAILS, (generated.label, psi)
                statuses.add(report.exit_status())
        assert statuses == {ExitStatus.HOLDS, ExitStatus.HYPOTHESIS_FAILED}

    def test_did_of_first_action(self):
        for generated in seeded(RandomMode.SIMULTANEOUS):
            sys, pairs = generated.system, generated.assignment
            i, a = pairs[0]
            report = check_ckop(sys, frozenset(sys.agents), pairs, i, DidAtom(i, a))
            assert report.hypotheses_hold, generated.label
            assert report.exit_status() == ExitStatus.HOLDS, generated.label

    def test_seeded_formula_pool(self):
        eligible = instances = 0
        for batch, ev in seeded_batches(RandomMode.SIMULTANEOUS):
            count, held, violations = ckop_instances(batch, ev)
            assert violations == []
            eligible += count
            instances += held
        assert eligible == len(SEEDS)
        assert instances > 0


# =============================================================================
# Nested knowledge of preconditions
# =============================================================================


class TestNestedKnowledgeOfPreconditions:
    """Ordered chains with recall: K_j...K_1 psi is necessary for the j-th action."""

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_trigger_proposition(self, k):
        for generated in seeded(RandomMode.ORDERED):
            sequence = generated.assignment[:k]
            report = check_nkop(generated.system, sequence, Prop("p"))
            assert report.hypotheses_hold, generated.label
            assert report.exit_status() == ExitStatus.HOLDS, generated.label

    def test_formula_pool(self):
        for generated in seeded(RandomMode.ORDERED)[:150]:
            for psi in formula_pool(generated):
                report = check_nkop(generated.system, generated.assignment[:3], psi)
                assert report.exit_status() != ExitStatus.FAILS, (generated.label, psi)


# =============================================================================
# Laws of the evaluator
# =============================================================================


class TestS5:
    def test_exhaustive_small_systems(self, exhaustive):
        for batch, ev in exhaustive:
            assert s5_violations(batch, ev) == []

    @pytest.mark.parametrize("mode", list(RandomMode))
    def test_seeded_random_systems(self, mode):
        for batch, ev in seeded_batches(mode):
            assert s5_violations(batch, ev) == []

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from(list(RandomMode)))
    def test_random_systems(self, seed, mode):
        batch = disjoint_union([random_system(seed, mode)])
        assert s5_violations(batch, Evaluator(batch.system)) == []


class TestCommonKnowledgeFixedPoint:
    """C_G f agrees with E_G^N f and E_G^(N+1) f for N the number of points."""

    def test_exhaustive_small_systems(self, exhaustive):
        for batch, ev in exhaustive:
            formulas = formula_pool(batch)[:6]
            assert fixed_point_disagreements(batch, ev, formulas) == []

    def test_nested_everyone_per_point(self):
        group = frozenset({1, 2})
        for generated in small_systems()[::11]:
            sys = generated.system
            ev = Evaluator(sys)
            n = sys.point_count
            for p in sys.points():
                expected = ev.eval_common(p, group, Prop("p"))
                assert ev.nested_everyone(p, group, Prop("p"), n) == expected
                assert ev.nested_everyone(p, group, Prop("p"), n + 1) == expected

    @pytest.mark.parametrize("mode", list(RandomMode))
    def test_seeded_random_systems(self, mode):
        for batch, ev in seeded_batches(mode):
            assert fixed_point_disagreements(batch, ev, formula_pool(batch)) == []

    def test_group_monotonicity(self):
        for batch, ev in seeded_batches(RandomMode.PLAIN):
            agents = batch.system.agents
            for f in formula_pool(batch):
                larger = ev.extension(Common(frozenset(agents), f))
                smaller = ev.extension(Common(frozenset(agents[:1]), f))
                assert not (larger & ~smaller).any(), batch.labels[0]


class TestKripkeCrossCheck:
    @pytest.mark.parametrize("mode", list(RandomMode))
    def test_seeded_random_systems(self, mode):
        for seed in CROSS_CHECK_SEEDS:
            generated = random_system(seed, mode)
            sys = generated.system
            ev = Evaluator(sys)
            kripke = KripkeStructure(sys)
            for f in formula_pool(generated):
                expected = [kripke.holds(p, f) for p in sys.points()]
                assert ev.extension(f).tolist() == expected, (generated.label, f)

    def test_exhaustive_small_systems(self):
        for generated in small_systems()[::7]:
            ev = Evaluator(generated.system)
            kripke = KripkeStructure(generated.system)
            for f in formula_pool(generated):
                expected = [kripke.holds(p, f) for p in generated.system.points()]
                assert ev.extension(f).tolist() == expected, (generated.label, f)
