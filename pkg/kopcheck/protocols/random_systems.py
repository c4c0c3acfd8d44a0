"""
Generated systems for property checks.

- random_system: seeded random systems whose hypotheses hold by
  construction (conscious actions, simultaneous actions, ordered
  actions with recall), or fail on purpose (injected actions)
- enumerate_small_systems: every system of 2 agents over a tiny local
  alphabet, up to a few distinct runs; small_system_batches yields the
  same systems packed into disjoint unions
- disjoint_union: many systems evaluated as one, with per-member verdicts
- formula_pool: a fixed set of formulas of modal depth <= 2 over a
  generated system's atoms

Local states are plain integers. An agent's action is a function of its
local state; at the horizon, where no action can be recorded, local
states are shifted out of the range used earlier so that the function
stays well defined. disjoint_union tags them as (member, value) pairs.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

from kopcheck.contracts import InputError
from kopcheck.kernel import (
    Action,
    AgentId,
    EnvState,
    GlobalState,
    History,
    HistoryEvent,
    Run,
    System,
)
from kopcheck.logic.formula import (
    And,
    Common,
    DidAtom,
    DoesAtom,
    Formula,
    Know,
    Not,
    Prop,
)
from kopcheck.logic.interpretation import Interpretation
from kopcheck.properties.predicates import ActionAssignment


logger = logging.getLogger(__name__)

MAX_AGENTS = 4
MAX_RUNS = 8
MAX_HORIZON = 5
MAX_ALPHABET = 4


class RandomMode(str, Enum):
    PLAIN = "plain"
    INJECT = "inject"
    SIMULTANEOUS = "simultaneous"
    ORDERED = "ordered"


@dataclass(frozen=True)
class GeneratedSystem:
    """A generated system with one designated action per agent."""

    system: System
    assignment: ActionAssignment
    label: str


def agent_action(i: AgentId) -> Action:
    return Action(f"a{i}")


# =============================================================================
# Assembly
# =============================================================================


def build_system(
    locals_: np.ndarray,
    acts: np.ndarray,
    props: dict[str, np.ndarray],
) -> System:
    """
    Assemble a system from arrays.

    Args:
        locals_: int array (runs, T+1, agents) of local states
        acts: bool array (runs, T, agents); acts[r, t, i-1] records a_i at t
        props: name -> bool array (runs, T+1)
    """
    run_count, width, n = locals_.shape
    horizon = width - 1
    runs = []
    for r in range(run_count):
        history = History()
        states = []
        for t in range(width):
            if t > 0:
                history = history.with_events(
                    HistoryEvent(agent_action(i + 1), i + 1, t - 1)
                    for i in range(n)
                    if acts[r, t - 1, i]
                )
            states.append(
                GlobalState(
                    EnvState(history),
                    tuple(int(v) for v in locals_[r, t]),
                )
            )
        runs.append(Run(tuple(states)))
    table = {
        name: {r: tuple(bool(v) for v in values[r]) for r in range(run_count)}
        for name, values in props.items()
    }
    return System(
        runs=tuple(runs),
        horizon=horizon,
        agent_count=n,
        interpretation=Interpretation.from_table(table),
    )


# =============================================================================
# Random systems
# =============================================================================


def _bounded(name: str, value: int | None, low: int, high: int, rng: np.random.Generator) -> int:
    if value is None:
        return int(rng.integers(low, high + 1))
    if not low <= value <= high:
        raise InputError(f"{name} must be in {low}..{high}, got {value}")
    return value


def random_system(
    seed: int,
    mode: RandomMode | str = RandomMode.PLAIN,
    agents: int | None = None,
    runs: int | None = None,
    horizon: int | None = None,
    alphabet: int | None = None,
) -> GeneratedSystem:
    """
    Draw a random system from `seed`.

    Unspecified sizes are drawn within agents 2..4, runs 1..8, horizon
    1..5 and alphabet 2..4.

    Modes:
        plain: each a_i is a random function of i's local state (conscious)
        inject: as plain, plus actions forced by the environment
        simultaneous: all a_i happen together, flagged in every local state
        ordered: a_1, ..., a_n happen at nondecreasing times, each agent
            flags "acting" and then "done" in its state; p is a stable
            trigger that precedes a_1
    """
    mode = RandomMode(mode)
    rng = np.random.default_rng(seed)
    n = _bounded("agents", agents, 2, MAX_AGENTS, rng)
    run_count = _bounded("runs", runs, 1, MAX_RUNS, rng)
    T = _bounded("horizon", horizon, 1, MAX_HORIZON, rng)
    k = _bounded("alphabet", alphabet, 2, MAX_ALPHABET, rng)

    noise = rng.integers(0, k, size=(run_count, T + 1, n))
    p = rng.random((run_count, T + 1)) < 0.5
    q = rng.random((run_count, T + 1)) < 0.5

    if mode in (RandomMode.PLAIN, RandomMode.INJECT):
        table = rng.random((n, k)) < 0.5
        agent_index = np.arange(n)
        acts = table[agent_index, noise[:, :T, :]]
        if mode is RandomMode.INJECT:
            acts = acts | (rng.random((run_count, T, n)) < 0.3)
        locals_ = noise.copy()
        locals_[:, T, :] += k
    elif mode is RandomMode.SIMULTANEOUS:
        fire = rng.random((run_count, T)) < 0.4
        acts = np.repeat(fire[:, :, None], n, axis=2)
        flag = np.zeros((run_count, T + 1, n), dtype=np.int64)
        flag[:, :T, :] = acts
        locals_ = noise * 2 + flag
    else:
        times, trigger = _ordered_times(rng, run_count, n, T)
        t_axis = np.arange(T + 1)[None, :, None]
        acting = t_axis == times[:, None, :]
        done = t_axis > times[:, None, :]
        locals_ = noise * 4 + acting * 2 + done
        acts = acting[:, :T, :]
        p = np.arange(T + 1)[None, :] >= trigger[:, None]

    system = build_system(locals_, acts, {"p": p, "q": q})
    assignment = tuple((i, agent_action(i)) for i in range(1, n + 1))
    logger.debug(
        "random system seed=%d mode=%s agents=%d runs=%d horizon=%d alphabet=%d",
        seed, mode.value, n, run_count, T, k,
    )
    return GeneratedSystem(system, assignment, f"{mode.value}:{seed}")


def _ordered_times(
    rng: np.random.Generator, run_count: int, n: int, T: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-run action times t_1 <= ... <= t_n and trigger time <= t_1.

    A time of T or more means the action never happens (nothing can be
    recorded at the horizon); once an action never happens, neither do
    the later ones. The trigger may arrive without any action following.
    """
    never = T + 1
    times = np.full((run_count, n), never, dtype=np.int64)
    trigger = np.full(run_count, never, dtype=np.int64)
    for r in range(run_count):
        t = int(rng.integers(0, T + 1))
        trigger[r] = int(rng.integers(0, t + 1)) if t < T else int(rng.integers(0, T + 2))
        for j in range(n):
            if t >= T:
                break
            times[r, j] = t
            t += int(rng.integers(0, 3))
    return times, trigger


# =============================================================================
# Disjoint unions
# =============================================================================


@dataclass(frozen=True, eq=False)
class SystemBatch:
    """
    Member systems joined into one system with disjoint local states.

    Local states are tagged with the member index, so no ~_i class and no
    ~_G component spans two members: an extension over the union,
    restricted to a member's runs, is that member's own extension.
    Members are contiguous blocks of runs.

    Attributes:
        system: The union
        assignment: Designated action per agent, shared by all members
        labels: Member labels, in run order
        run_starts: Index of each member's first run
    """

    system: System
    assignment: ActionAssignment
    labels: tuple[str, ...]
    run_starts: np.ndarray

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def point_starts(self) -> np.ndarray:
        return self.run_starts * (self.system.horizon + 1)

    def member_points(self) -> np.ndarray:
        """Point count of every member."""
        ends = np.append(self.point_starts[1:], self.system.point_count)
        return ends - self.point_starts

    def members_where(self, extension: np.ndarray) -> np.ndarray:
        """Per member, whether the extension holds at some point of it."""
        return np.logical_or.reduceat(extension, self.point_starts)

    def member_labels(self, flags: np.ndarray) -> list[str]:
        return [self.labels[k] for k in np.flatnonzero(flags)]


def disjoint_union(members: Sequence[GeneratedSystem]) -> SystemBatch:
    """
    Join generated systems into one batch.

    Raises:
        InputError: If there are no members, or members differ in agent
            count, horizon, assignment or declared propositions, or two
            members share a label.
    """
    if not members:
        raise InputError("a disjoint union needs at least one member")
    first = members[0]

    def shape(generated: GeneratedSystem) -> tuple:
        sys = generated.system
        return sys.agent_count, sys.horizon, generated.assignment, sys.interpretation.props

    props = first.system.interpretation.props
    table: dict[str, dict[int, tuple[bool, ...]]] = {name: {} for name in props}
    runs: list[Run] = []
    starts = []
    for index, member in enumerate(members):
        if shape(member) != shape(first):
            raise InputError(f"member {member.label} does not match {first.label}")
        sys = member.system
        rows = sys.interpretation.tabulate(sys)
        starts.append(len(runs))
        for r, run in enumerate(sys.runs):
            for name in props:
                table[name][len(runs)] = rows[name][r]
            states = tuple(
                GlobalState(s.env, tuple((index, v) for v in s.locals)) for s in run.states
            )
            runs.append(Run(states, name=f"{member.label}/{run.name}"))

    system = System(
        runs=tuple(runs),
        horizon=first.system.horizon,
        agent_count=first.system.agent_count,
        interpretation=Interpretation.from_table(table),
    )
    return SystemBatch(
        system, first.assignment, tuple(m.label for m in members), np.array(starts)
    )


def batched(members: Sequence[GeneratedSystem]) -> list[SystemBatch]:
    """Disjoint unions of members grouped by agent count and horizon."""
    groups: dict[tuple[int, int], list[GeneratedSystem]] = {}
    for member in members:
        key = (member.system.agent_count, member.system.horizon)
        groups.setdefault(key, []).append(member)
    return [disjoint_union(groups[key]) for key in sorted(groups)]


# =============================================================================
# Exhaustive enumeration
# =============================================================================

SMALL_ASSIGNMENT: ActionAssignment = ((1, agent_action(1)), (2, agent_action(2)))


def small_shapes(horizon: int, alphabet: int = 2) -> np.ndarray:
    """Every run shape: both agents' values at every time, (shapes, T+1, 2)."""
    width = horizon + 1
    return np.array(list(product(range(alphabet), repeat=width * 2))).reshape(-1, width, 2)


def _small_arrays(
    values: np.ndarray, alphabet: int
) -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """
    Locals, actions and propositions of runs with the given shapes.

    Agent i performs a_i exactly when its value is alphabet - 1. p holds
    throughout a run whose agents start with different values; q holds
    where agent 1's value is 0.
    """
    horizon = values.shape[1] - 1
    acts = values[:, :horizon, :] == alphabet - 1
    locals_ = values.copy()
    locals_[:, horizon, :] += alphabet
    p = np.repeat(values[:, :1, 0] != values[:, :1, 1], horizon + 1, axis=1)
    q = values[:, :, 0] == 0
    return locals_, acts, {"p": p, "q": q}


def enumerate_small_systems(
    max_runs: int = 3, horizon: int = 1, alphabet: int = 2
) -> Iterator[GeneratedSystem]:
    """
    Every system of 2 agents with 1..max_runs distinct run shapes.

    Both actions are conscious by construction.
    """
    shapes = small_shapes(horizon, alphabet)
    count = 0
    for size in range(1, max_runs + 1):
        for chosen in combinations(range(len(shapes)), size):
            system = build_system(*_small_arrays(shapes[list(chosen)], alphabet))
            yield GeneratedSystem(system, SMALL_ASSIGNMENT, f"small:{count}")
            count += 1


def small_system_batches(
    runs: int, horizon: int, alphabet: int = 2, chunk: int = 20_000
) -> Iterator[SystemBatch]:
    """
    Every system of exactly `runs` distinct shapes, as disjoint unions of
    at most `chunk` members.

    Members are the systems enumerate_small_systems yields for that run
    count, in the same order; labels give the shape indices.
    """
    shapes = small_shapes(horizon, alphabet)
    chosen = np.array(list(combinations(range(len(shapes)), runs)), dtype=np.intp)
    logger.debug(
        "small batches runs=%d horizon=%d members=%d", runs, horizon, len(chosen)
    )
    for begin in range(0, len(chosen), chunk):
        block = chosen[begin : begin + chunk]
        locals_, acts, props = _small_arrays(shapes[block.ravel()], alphabet)
        member = np.repeat(np.arange(len(block)), runs)
        locals_ += member[:, None, None] * (2 * alphabet)
        yield SystemBatch(
            build_system(locals_, acts, props),
            SMALL_ASSIGNMENT,
            tuple(f"small:{runs}x{horizon}:{'-'.join(map(str, c))}" for c in block),
            np.arange(len(block)) * runs,
        )


# =============================================================================
# Formula pool
# =============================================================================


def formula_pool(generated: GeneratedSystem | SystemBatch) -> list[Formula]:
    """
    Formulas of modal depth <= 2 over p, q and the first two agents'
    does/did atoms.
    """
    (i, a_i), (j, a_j) = generated.assignment[:2]
    p, q = Prop("p"), Prop("q")
    atoms: list[Formula] = [p, q, DoesAtom(i, a_i), DidAtom(j, a_j)]
    base = atoms + [Not(p), And(p, Not(q))]
    depth_one = [Know(agent, f) for agent in (i, j) for f in (p, Not(q), DidAtom(j, a_j))]
    depth_two = [
        Know(i, Know(j, p)),
        Know(j, Not(Know(i, q))),
        Common(frozenset({i, j}), p),
        And(Know(i, p), Not(Know(j, DoesAtom(i, a_i)))),
    ]
    return base + depth_one + depth_two
