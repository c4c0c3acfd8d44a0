"""
Protocols, contexts and exhaustive system generation.

A protocol gives each agent a deterministic step from its local state to
an optional action and a set of messages; a context supplies the initial
states and the environment's finitely branching choices. generate_system
unfolds every initial state through every sequence of environment
choices, in the synchronous round model:

    round t: agents step on their time-t local states; the environment
    picks a move; messages and inputs due at t+1 are delivered; the
    history at t+1 records every action performed at t.

Invariants:
- Runs are produced in the order of their choice sequences (initial
  state index, then environment move index per round)
- Every protocol action is conscious: it depends on the local state only
- Exceeding the run budget raises BudgetExceeded; runs are never dropped
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from kopcheck.context import DEFAULT_RUN_BUDGET
from kopcheck.contracts import BudgetExceeded, InputError
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
from kopcheck.logic.interpretation import Interpretation


logger = logging.getLogger(__name__)

Message = tuple[AgentId, Any]  # (peer, content)


@dataclass(frozen=True)
class Move:
    """What an agent does in one round."""

    action: Action | None = None
    sends: tuple[Message, ...] = ()  # (recipient, content)


@dataclass(frozen=True)
class Transition:
    """Environment outcome of one round."""

    payload: Any
    deliveries: Mapping[AgentId, tuple[Message, ...]] = field(default_factory=dict)
    inputs: Mapping[AgentId, tuple[Any, ...]] = field(default_factory=dict)


class Protocol(ABC):
    """Deterministic per-agent behaviour."""

    @abstractmethod
    def step(self, agent: AgentId, local: Any) -> Move:
        """Action and messages of `agent` in local state `local`."""

    @abstractmethod
    def update(
        self,
        agent: AgentId,
        local: Any,
        move: Move,
        delivered: tuple[Message, ...],
        inputs: tuple[Any, ...],
    ) -> Any:
        """Next local state after performing `move` and receiving messages."""


class Context(ABC):
    """Initial states and environment behaviour."""

    agent_count: int

    @abstractmethod
    def initial_states(self) -> list[tuple[Any, tuple[Any, ...]]]:
        """(env payload, local states) pairs; never empty."""

    def env_moves(self, time: int, payload: Any, moves: tuple[Move, ...]) -> tuple[Any, ...]:
        """Environment choices for this round; deterministic by default."""
        return (None,)

    @abstractmethod
    def apply(
        self, time: int, payload: Any, moves: tuple[Move, ...], env_move: Any
    ) -> Transition:
        """Outcome of round `time` under the given environment move."""


# =============================================================================
# Generation
# =============================================================================


@dataclass
class _Branch:
    states: list[GlobalState]
    payload: Any


def generate_system(
    protocol: Protocol,
    context: Context,
    horizon: int,
    interpretation: Interpretation,
    budget: int = DEFAULT_RUN_BUDGET,
    agent_names: Sequence[str] = (),
    name_run: Callable[[int, tuple[GlobalState, ...]], str] | None = None,
    dedupe: bool = False,
) -> System:
    """
    Build the system of all runs of `protocol` in `context`.

    Args:
        protocol: Agent behaviour
        context: Initial states and environment choices
        horizon: Last time T (>= 1)
        interpretation: Truth of primitive propositions
        budget: Maximum number of runs (partial or complete) ever held
        agent_names: Display names of agents
        name_run: Optional (index, states) -> run name
        dedupe: Drop structurally identical runs after generation

    Raises:
        InputError: If the horizon is < 1 or the context has no initial state.
        BudgetExceeded: If the number of runs would exceed the budget.
    """
    if horizon < 1:
        raise InputError(f"horizon must be >= 1, got {horizon}")
    n = context.agent_count

    initial = context.initial_states()
    if not initial:
        raise InputError("context has no initial states")
    check_budget(len(initial), budget, 0)

    frontier = [
        _Branch([GlobalState(EnvState(History(), payload), tuple(locals_))], payload)
        for payload, locals_ in initial
    ]
    for t in range(horizon):
        expanded: list[_Branch] = []
        for branch in frontier:
            current = branch.states[-1]
            moves = tuple(protocol.step(i, current.locals[i - 1]) for i in range(1, n + 1))
            events = [
                HistoryEvent(move.action, i, t)
                for i, move in enumerate(moves, start=1)
                if move.action is not None
            ]
            history = current.env.history.with_events(events)
            choices = context.env_moves(t, branch.payload, moves)
            if not choices:
                raise InputError(f"context offers no environment move at time {t}")
            check_budget(len(expanded) + len(choices), budget, t + 1)
            for choice in choices:
                outcome = context.apply(t, branch.payload, moves, choice)
                locals_ = tuple(
                    protocol.update(
                        i,
                        current.locals[i - 1],
                        moves[i - 1],
                        tuple(outcome.deliveries.get(i, ())),
                        tuple(outcome.inputs.get(i, ())),
                    )
                    for i in range(1, n + 1)
                )
                state = GlobalState(EnvState(history, outcome.payload), locals_)
                expanded.append(_Branch(branch.states + [state], outcome.payload))
        frontier = expanded

    runs = tuple(
        Run(
            states=tuple(branch.states),
            name=name_run(index, tuple(branch.states)) if name_run else "",
        )
        for index, branch in enumerate(frontier)
    )
    system = System(
        runs=runs,
        horizon=horizon,
        agent_count=n,
        interpretation=interpretation,
        agent_names=tuple(agent_names),
    )
    if dedupe:
        system = system.deduplicated()
    logger.info(
        "generated runs=%d points=%d horizon=%d agents=%d",
        system.run_count,
        system.point_count,
        horizon,
        n,
    )
    return system


def check_budget(count: int, budget: int, time: int) -> None:
    if count > budget:
        logger.error("run budget exceeded runs=%d budget=%d time=%d", count, budget, time)
        raise BudgetExceeded(budget=budget, bound=count, time=time)


# =============================================================================
# Network topology
# =============================================================================


@dataclass(frozen=True)
class NetworkTopology:
    """
    Undirected graph over agents 1..n with integer per-edge delays.

    A message sent in round t over an edge of delay d is part of the
    recipient's local state at time t + d.
    """

    agent_count: int
    edges: tuple[tuple[AgentId, AgentId], ...]
    delays: Mapping[tuple[AgentId, AgentId], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        normalized = []
        for u, v in self.edges:
            if u == v or not (1 <= u <= self.agent_count and 1 <= v <= self.agent_count):
                raise InputError(f"invalid edge {u}-{v} for {self.agent_count} agents")
            normalized.append((min(u, v), max(u, v)))
        if len(set(normalized)) != len(normalized):
            raise InputError(f"duplicate edge in {list(self.edges)}")
        delays = {}
        for (u, v), d in self.delays.items():
            key = (min(u, v), max(u, v))
            if key not in normalized:
                raise InputError(f"delay given for missing edge {u}-{v}")
            if d < 1:
                raise InputError(f"edge delay must be >= 1, got {d} on {u}-{v}")
            delays[key] = d
        object.__setattr__(self, "edges", tuple(sorted(normalized)))
        object.__setattr__(self, "delays", delays)

    @classmethod
    def path(cls, n: int) -> "NetworkTopology":
        return cls(n, tuple((i, i + 1) for i in range(1, n)))

    @classmethod
    def complete(cls, n: int) -> "NetworkTopology":
        return cls(n, tuple((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)))

    @classmethod
    def parse(cls, n: int, text: str) -> "NetworkTopology":
        """
        Parse an edge list such as "1-2,2-3:2" (":d" sets the edge delay).
        """
        edges, delays = [], {}
        for item in filter(None, (part.strip() for part in text.split(","))):
            edge, _, delay = item.partition(":")
            u, sep, v = edge.partition("-")
            if not sep or not u.strip().isdigit() or not v.strip().isdigit():
                raise InputError(f"invalid edge {item!r}; expected I-J or I-J:DELAY")
            key = (int(u), int(v))
            edges.append(key)
            if delay:
                if not delay.strip().isdigit():
                    raise InputError(f"invalid delay in edge {item!r}")
                delays[key] = int(delay)
        return cls(n, tuple(edges), delays)

    def delay(self, u: AgentId, v: AgentId) -> int:
        return self.delays.get((min(u, v), max(u, v)), 1)

    def neighbors(self, i: AgentId) -> list[AgentId]:
        return sorted({v for u, v in self.edges if u == i} | {u for u, v in self.edges if v == i})

    def _matrix(self) -> coo_matrix:
        n = self.agent_count
        if not self.edges:
            return coo_matrix((n, n))
        rows = [u - 1 for u, _ in self.edges]
        cols = [v - 1 for _, v in self.edges]
        weights = [self.delay(u, v) for u, v in self.edges]
        return coo_matrix((weights, (rows, cols)), shape=(n, n))

    def is_connected(self) -> bool:
        count, _ = connected_components(self._matrix(), directed=False)
        return count == 1

    def distances(self, source: AgentId) -> dict[AgentId, int]:
        """Delay-weighted distance from source to every reachable agent."""
        dist = shortest_path(self._matrix(), directed=False, indices=source - 1)
        return {
            i + 1: int(d) for i, d in enumerate(np.atleast_1d(dist)) if np.isfinite(d)
        }

    def eccentricity(self, source: AgentId) -> int:
        """Largest delay-weighted distance from source."""
        self.require_connected()
        return max(self.distances(source).values())

    def require_connected(self) -> None:
        if not self.is_connected():
            raise InputError(f"topology {list(self.edges)} is not connected")

    def tree_parents(self, root: AgentId = 1) -> dict[AgentId, AgentId]:
        """
        Parent of every non-root agent in the shortest-path tree from root.

        Ties are broken towards the smallest-numbered neighbour.
        """
        self.require_connected()
        dist = self.distances(root)
        parents = {}
        for i in range(1, self.agent_count + 1):
            if i == root:
                continue
            parents[i] = min(
                u for u in self.neighbors(i) if dist[u] + self.delay(u, i) == dist[i]
            )
        return parents

    def is_tree(self) -> bool:
        return self.is_connected() and len(self.edges) == self.agent_count - 1


# =============================================================================
# Message-passing contexts
# =============================================================================


class NetworkContext(Context):
    """
    Context whose environment carries in-flight messages over a topology.

    The payload is (config, in_flight): config is the scenario's hidden
    initial configuration, in_flight a sorted tuple of
    (arrival_time, sender, recipient, content). Subclasses pick the
    configurations, the external inputs and, optionally, nondeterministic
    delays through `delay_choice`.
    """

    def __init__(self, topology: NetworkTopology):
        self.topology = topology
        self.agent_count = topology.agent_count

    @abstractmethod
    def configurations(self) -> list[Any]:
        """Hidden initial configurations, one initial state each."""

    @abstractmethod
    def initial_local(self, agent: AgentId, config: Any) -> Any:
        """Local state of `agent` at time 0 before any input."""

    def external_inputs(self, time: int, config: Any) -> Mapping[AgentId, tuple[Any, ...]]:
        """Inputs that become part of local states at `time`."""
        return {}

    def delay_choice(
        self, env_move: Any, sender: AgentId, recipient: AgentId
    ) -> int | None:
        """Delay of one message under env_move; None means lost."""
        return self.topology.delay(sender, recipient)

    def initial_states(self) -> list[tuple[Any, tuple[Any, ...]]]:
        states = []
        for config in self.configurations():
            inputs = self.external_inputs(0, config)
            locals_ = tuple(
                self.absorb_initial(i, self.initial_local(i, config), inputs.get(i, ()))
                for i in range(1, self.agent_count + 1)
            )
            states.append(((config, ()), locals_))
        return states

    def absorb_initial(self, agent: AgentId, local: Any, inputs: tuple[Any, ...]) -> Any:
        """Fold time-0 inputs into an initial local state."""
        if inputs:
            raise InputError(f"{type(self).__name__} has no time-0 inputs")
        return local

    def apply(
        self, time: int, payload: Any, moves: tuple[Move, ...], env_move: Any
    ) -> Transition:
        config, in_flight = payload
        pending = list(in_flight)
        for sender, move in enumerate(moves, start=1):
            for recipient, content in move.sends:
                delay = self.delay_choice(env_move, sender, recipient)
                if delay is not None:
                    pending.append((time + delay, sender, recipient, content))
        due: dict[AgentId, list[Message]] = {}
        remaining = []
        for item in sorted(pending):
            arrival, sender, recipient, content = item
            if arrival <= time + 1:
                due.setdefault(recipient, []).append((sender, content))
            else:
                remaining.append(item)
        return Transition(
            payload=(config, tuple(remaining)),
            deliveries={i: tuple(msgs) for i, msgs in due.items()},
            inputs=self.external_inputs(time + 1, config),
        )
