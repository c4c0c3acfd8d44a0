"""
Ordered relay chain: agents 1..k perform a_1, ..., a_k in order, in
response to an external trigger.

The trigger arrives at agent 1 at one of the times of the trigger window
(or never) and is part of agent 1's local state one round later. Agent 1
performs a_1 on receipt and relays to agent 2; every agent j performs a_j
when the relay from agent j-1 arrives and passes it on.

With recall, each agent keeps a done bit, so it knows forever that it
has acted. Without recall, an agent clears its received flag after
acting and keeps no trace of it.

Local state: (clock, received, done) with recall, (clock, received)
without. Proposition `psi_input`: the trigger has arrived by now.
"""

from typing import Any, Sequence

from kopcheck.context import DEFAULT_RUN_BUDGET
from kopcheck.contracts import InputError
from kopcheck.kernel import Action, AgentId, GlobalState, Run, System
from kopcheck.logic.interpretation import Interpretation
from kopcheck.protocols.base import (
    Move,
    NetworkContext,
    NetworkTopology,
    Protocol,
    generate_system,
)


PSI_INPUT = "psi_input"


def chain_action(j: AgentId) -> Action:
    return Action(f"a{j}")


def chain_sequence(k: int) -> tuple[tuple[AgentId, Action], ...]:
    """The assignment ((1, a1), ..., (k, ak))."""
    return tuple((j, chain_action(j)) for j in range(1, k + 1))


class ChainProtocol(Protocol):
    def __init__(self, k: int, recall: bool):
        self.k = k
        self.recall = recall

    def ready(self, local: Any) -> bool:
        if self.recall:
            _, received, done = local
            return received and not done
        return local[1]

    def step(self, agent: AgentId, local: Any) -> Move:
        if not self.ready(local):
            return Move()
        sends = ((agent + 1, "relay"),) if agent < self.k else ()
        return Move(chain_action(agent), sends)

    def update(self, agent, local, move, delivered, inputs) -> Any:
        clock, received = local[0], local[1]
        if self.recall:
            done = local[2] or move.action is not None
            return (clock + 1, received or bool(delivered or inputs), done)
        if move.action is not None:
            received = False
        return (clock + 1, received or bool(delivered or inputs))


class ChainContext(NetworkContext):
    def __init__(self, topology: NetworkTopology, window: Sequence[int | None], recall: bool):
        super().__init__(topology)
        self.window = list(window)
        self.recall = recall

    def configurations(self) -> list[Any]:
        return list(self.window)

    def initial_local(self, agent: AgentId, config: Any) -> Any:
        return (0, False, False) if self.recall else (0, False)

    def external_inputs(self, time: int, config: Any) -> dict[AgentId, tuple[Any, ...]]:
        if config is not None and time == config + 1:
            return {1: ("trigger",)}
        return {}


def _run_name(index: int, states: tuple[GlobalState, ...]) -> str:
    trigger = states[0].env.payload[0]
    return "r_none" if trigger is None else f"r_trigger{trigger}"


def scenario_ordered_chain(
    k: int = 3,
    window: Sequence[int | None] = (0, 1, None),
    delay: int = 1,
    horizon: int | None = None,
    recall: bool = True,
    budget: int = DEFAULT_RUN_BUDGET,
) -> System:
    """
    Build the relay chain system.

    Args:
        k: Number of agents (>= 2)
        window: Possible trigger times; None means no trigger
        delay: Relay delay on every link
        horizon: Last time T (default: two rounds after the latest a_k)
        recall: Whether agents keep a done bit

    Runs are named r_trigger<t> and r_none.
    """
    if k < 2:
        raise InputError(f"chain needs at least 2 agents, got {k}")
    if not window:
        raise InputError("trigger window must be non-empty")
    if len(set(window)) != len(window):
        raise InputError(f"duplicate times in trigger window {list(window)}")
    if any(t is not None and t < 0 for t in window):
        raise InputError(f"trigger times must be >= 0: {list(window)}")
    if delay < 1:
        raise InputError(f"relay delay must be >= 1, got {delay}")
    topology = NetworkTopology(
        k,
        tuple((j, j + 1) for j in range(1, k)),
        {(j, j + 1): delay for j in range(1, k)},
    )
    if horizon is None:
        latest = max((t for t in window if t is not None), default=0)
        horizon = latest + 1 + (k - 1) * delay + 2

    def psi_input(run: Run, t: int) -> bool:
        trigger = run.states[0].env.payload[0]
        return trigger is not None and trigger <= t

    return generate_system(
        ChainProtocol(k, recall),
        ChainContext(topology, window, recall),
        horizon=horizon,
        interpretation=Interpretation.from_predicates({PSI_INPUT: psi_input}),
        budget=budget,
        name_run=_run_name,
    )
