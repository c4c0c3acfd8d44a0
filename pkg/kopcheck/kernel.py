"""
kopcheck Kernel - global states, runs, systems and points.

Responsibilities:
- Finite representations of global states, runs and systems
- Environment action history and the does/did semantics derived from it
- Validation of every kernel invariant at construction time

Invariants:
- Runs are finite sequences over times 0..T; Pts(R) = R x {0..T}
- History grows monotonically along a run; events at time t only appear
  in histories of later times
- does(i, a) holds at (r, t) iff <a, i, t> is in the history at t+1
- does(., T, ., .) is false: nothing attests an action at the horizon
- Payloads are compared by type-tagged value (state_key): true != 1
- Runs are identified by index; identical runs may coexist

Forbidden:
- No knowledge evaluation (see kopcheck.logic)
- No mutation after construction
"""

import logging
import re
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Iterable, Iterator

from kopcheck.contracts import InputError

if TYPE_CHECKING:
    from kopcheck.logic.interpretation import Interpretation


logger = logging.getLogger(__name__)

AgentId = int

ACTION_LABEL = re.compile(r"^[A-Za-z_]\w*$")


# =============================================================================
# Actions and History
# =============================================================================


@dataclass(frozen=True, order=True)
class Action:
    """A symbolic action; distinct labels are distinct actions."""

    label: str

    def __post_init__(self) -> None:
        if not isinstance(self.label, str) or not ACTION_LABEL.match(self.label):
            raise InputError(f"invalid action label: {self.label!r}")

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True, order=True)
class HistoryEvent:
    """The triple <action, agent, time>: action performed by agent at time."""

    action: Action
    agent: AgentId
    time: int

    def __post_init__(self) -> None:
        if self.time < 0:
            raise InputError(f"history event time must be >= 0, got {self.time}")
        if self.agent < 1:
            raise InputError(f"history event agent must be >= 1, got {self.agent}")


@dataclass(frozen=True)
class History:
    """Set of history events recorded by the environment."""

    events: frozenset[HistoryEvent] = frozenset()

    def __contains__(self, event: object) -> bool:
        return event in self.events

    def __len__(self) -> int:
        return len(self.events)

    def with_events(self, events: Iterable[HistoryEvent]) -> "History":
        """Return a history extended by the given events."""
        return History(self.events | frozenset(events))

    def sorted_events(self) -> list[HistoryEvent]:
        """Events in (time, agent, action) order."""
        return sorted(self.events, key=lambda e: (e.time, e.agent, e.action.label))


# =============================================================================
# States, Runs, Points
# =============================================================================


@dataclass(frozen=True)
class EnvState:
    """Environment state r_e(t): history plus an opaque payload."""

    history: History = field(default_factory=History)
    payload: Any = None


@dataclass(frozen=True)
class GlobalState:
    """Global state r(t) = <r_e(t), r_1(t), ..., r_n(t)>."""

    env: EnvState
    locals: tuple[Any, ...]


@dataclass(frozen=True)
class Run:
    """A finite run: global states at times 0..T."""

    states: tuple[GlobalState, ...]
    name: str = ""

    @property
    def horizon(self) -> int:
        return len(self.states) - 1


@dataclass(frozen=True, order=True)
class Point:
    """A (run index, time) pair; ordering is lexicographic."""

    run: int
    time: int

    def __str__(self) -> str:
        return f"({self.run},{self.time})"

    def to_dict(self) -> dict[str, int]:
        return {"run": self.run, "time": self.time}


# =============================================================================
# System
# =============================================================================


@dataclass(frozen=True, eq=False)
class System:
    """
    A finite interpreted system: runs over a common horizon.

    Attributes:
        runs: Non-empty tuple of runs, identified by index
        horizon: Common last time T
        agent_count: Number of agents n
        interpretation: Truth of primitive propositions at points
        agent_names: Display names of agents 1..n (default "1".."n")

    Run names default to "r<index>" and must be unique.
    """

    runs: tuple[Run, ...]
    horizon: int
    agent_count: int
    interpretation: "Interpretation"
    agent_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.runs:
            raise InputError("a system needs at least one run")
        if self.horizon < 0:
            raise InputError(f"horizon must be >= 0, got {self.horizon}")
        if self.agent_count < 1:
            raise InputError(f"agent count must be >= 1, got {self.agent_count}")

        names = self.agent_names or tuple(str(i) for i in range(1, self.agent_count + 1))
        if len(names) != self.agent_count:
            raise InputError(
                f"expected {self.agent_count} agent names, got {len(names)}"
            )
        if len(set(names)) != len(names):
            raise InputError(f"agent names must be distinct: {list(names)}")
        object.__setattr__(self, "agent_names", tuple(names))

        runs = tuple(
            run if run.name else replace(run, name=f"r{index}")
            for index, run in enumerate(self.runs)
        )
        seen: dict[str, int] = {}
        for index, run in enumerate(runs):
            if run.name in seen:
                raise InputError(
                    f"duplicate run name {run.name!r} (runs {seen[run.name]} and {index})",
                    detail={"run": index},
                )
            seen[run.name] = index
            validate_run(run, index, self.horizon, self.agent_count)
        object.__setattr__(self, "runs", runs)
        object.__setattr__(self, "_run_index", seen)

        self.interpretation.validate(self)

    # -- sizes ---------------------------------------------------------------

    @property
    def run_count(self) -> int:
        return len(self.runs)

    @property
    def point_count(self) -> int:
        return len(self.runs) * (self.horizon + 1)

    @property
    def agents(self) -> range:
        return range(1, self.agent_count + 1)

    # -- points --------------------------------------------------------------

    def points(self) -> Iterator[Point]:
        """All points in (run, time) lexicographic order."""
        for r in range(len(self.runs)):
            for t in range(self.horizon + 1):
                yield Point(r, t)

    def point_index(self, p: Point) -> int:
        """Position of p in the order of points()."""
        return p.run * (self.horizon + 1) + p.time

    def point_at(self, index: int) -> Point:
        """Inverse of point_index."""
        return Point(*divmod(index, self.horizon + 1))

    # -- name resolution -----------------------------------------------------

    def resolve_agent(self, token: str | int) -> AgentId:
        """Resolve an agent name or 1-based index."""
        if isinstance(token, int):
            check_agent(self, token)
            return token
        if token in self.agent_names:
            return self.agent_names.index(token) + 1
        if token.isdigit():
            agent = int(token)
            check_agent(self, agent)
            return agent
        raise InputError(
            f"unknown agent {token!r}; agents are {list(self.agent_names)}",
            detail={"agent": token},
        )

    def resolve_run(self, token: str | int) -> int:
        """Resolve a run name or 0-based index."""
        if isinstance(token, int) or token.isdigit():
            index = int(token)
            if not 0 <= index < len(self.runs):
                raise InputError(f"run index {index} out of range 0..{len(self.runs) - 1}")
            return index
        try:
            return self._run_index[token]
        except KeyError:
            raise InputError(f"unknown run {token!r}", detail={"run": token}) from None

    def resolve_point(self, token: str) -> Point:
        """Resolve 'RUN:TIME' where RUN is a run name or index."""
        run_token, sep, time_token = token.rpartition(":")
        if not sep or not time_token.isdigit():
            raise InputError(f"point must be RUN:TIME, got {token!r}")
        p = Point(self.resolve_run(run_token), int(time_token))
        check_point(self, p)
        return p

    def agent_name(self, agent: AgentId) -> str:
        return self.agent_names[agent - 1]

    def point_label(self, p: Point) -> str:
        """Human form of p using the run's name, e.g. '(r_del,2)'."""
        return f"({self.runs[p.run].name},{p.time})"

    # -- derived views -------------------------------------------------------

    def actions_of(self, agent: AgentId) -> list[Action]:
        """Actions agent performs somewhere in the system, sorted by label."""
        found = {
            event.action
            for run in self.runs
            for event in run.states[-1].env.history.events
            if event.agent == agent
        }
        return sorted(found)

    def max_event_time(self) -> int | None:
        """Largest time of any recorded history event, or None."""
        times = [e.time for run in self.runs for e in run.states[-1].env.history.events]
        return max(times) if times else None

    def deduplicated(self) -> "System":
        """
        Drop runs whose states equal an earlier run's states.

        Optional normalization; knowledge is invariant under duplication.
        Kept runs retain their names; the interpretation is re-indexed.
        """
        kept: list[int] = []
        seen: set = set()
        for index, run in enumerate(self.runs):
            key = tuple(
                (s.env.history, state_key(s.env.payload), state_key(s.locals)) for s in run.states
            )
            if key in seen:
                continue
            seen.add(key)
            kept.append(index)
        if len(kept) == len(self.runs):
            return self
        logger.debug("deduplicated runs=%d kept=%d", len(self.runs), len(kept))
        return System(
            runs=tuple(self.runs[i] for i in kept),
            horizon=self.horizon,
            agent_count=self.agent_count,
            interpretation=self.interpretation.select_runs(kept),
            agent_names=self.agent_names,
        )


# =============================================================================
# Validation
# =============================================================================


def validate_run(run: Run, index: int, horizon: int, agent_count: int) -> None:
    """
    Check run-level kernel invariants.

    Raises:
        InputError: With detail {"run", "time"} locating the first violation.
    """
    if len(run.states) != horizon + 1:
        raise InputError(
            f"run {index} has {len(run.states)} states, expected {horizon + 1}",
            detail={"run": index},
        )
    previous: History | None = None
    for t, state in enumerate(run.states):
        where = {"run": index, "time": t}
        if len(state.locals) != agent_count:
            raise InputError(
                f"run {index} time {t}: {len(state.locals)} local states, "
                f"expected {agent_count}",
                detail=where,
            )
        history = state.env.history
        for event in history.events:
            if event.agent > agent_count:
                raise InputError(
                    f"run {index} time {t}: history event agent {event.agent} out of range",
                    detail=where,
                )
            if event.time >= t:
                raise InputError(
                    f"run {index} time {t}: history event "
                    f"<{event.action},{event.agent},{event.time}> is not in the past",
                    detail=where,
                )
        if previous is not None and not previous.events <= history.events:
            raise InputError(
                f"run {index} time {t}: history is not monotone",
                detail=where,
            )
        previous = history


def check_agent(sys: System, i: AgentId) -> None:
    if not 1 <= i <= sys.agent_count:
        raise InputError(
            f"agent {i} out of range 1..{sys.agent_count}", detail={"agent": i}
        )


def check_point(sys: System, p: Point) -> None:
    if not 0 <= p.run < len(sys.runs):
        raise InputError(f"point {p}: run out of range", detail=p.to_dict())
    if not 0 <= p.time <= sys.horizon:
        raise InputError(
            f"point {p}: time out of range 0..{sys.horizon}", detail=p.to_dict()
        )


# =============================================================================
# Operations
# =============================================================================


def state_key(value: Any) -> Any:
    """Comparison key of a payload that keeps bool and int apart."""
    if isinstance(value, (tuple, list)):
        return ("seq", tuple(state_key(v) for v in value))
    return (type(value).__name__, value)


def local_state(sys: System, p: Point, i: AgentId) -> Any:
    """Agent i's local state r_i(t) at point p."""
    check_point(sys, p)
    check_agent(sys, i)
    return sys.runs[p.run].states[p.time].locals[i - 1]


def does(sys: System, p: Point, i: AgentId, a: Action) -> bool:
    """
    True iff agent i performs a at p.

    Decided by membership of <a, i, t> in the history at t+1; by history
    monotonicity this equals membership at every later time. False at
    the horizon.
    """
    check_point(sys, p)
    check_agent(sys, i)
    if p.time >= sys.horizon:
        return False
    history = sys.runs[p.run].states[p.time + 1].env.history
    return HistoryEvent(a, i, p.time) in history


def did(sys: System, p: Point, i: AgentId, a: Action) -> bool:
    """True iff does(i, a) holds at (p.run, t') for some t' <= p.time."""
    check_point(sys, p)
    return any(does(sys, Point(p.run, t), i, a) for t in range(p.time + 1))
