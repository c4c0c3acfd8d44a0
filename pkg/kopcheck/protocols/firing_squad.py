"""
Firing squad: every agent must fire in the same round, and only after a
"go" message has reached some agent.

A go arrives from outside at one of the possible recipients at one of
the times of the input window, or never. The recipient sees it in its
local state one round later and floods a notice (origin, arrival time)
through the network; every agent relays the notice once.

Strategies:
- "common": fire when the clock reaches arrival + 1 + eccentricity of the
  origin. By then the flood has reached everyone and, since the notice
  fixes the schedule, the go is common knowledge in the group.
- "eager": fire upon first learning of the go. Agents far from the
  origin fire later, so the fire actions are not simultaneous.

Local state: (clock, notice, relayed, fired); notice is (origin, time)
or None. Proposition `psi_go`: a go has arrived by now.
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


PSI_GO = "psi_go"
STRATEGIES = ("common", "eager")

Window = Sequence[int | None]  # None stands for "never"


def fire_action(agent: AgentId) -> Action:
    return Action(f"fire_{agent}")


class FiringSquadProtocol(Protocol):
    def __init__(self, topology: NetworkTopology, strategy: str):
        self.topology = topology
        self.strategy = strategy
        self.eccentricity = {
            i: topology.eccentricity(i) for i in range(1, topology.agent_count + 1)
        }

    def should_fire(self, local: Any) -> bool:
        clock, notice, relayed, fired = local
        if notice is None or fired:
            return False
        if self.strategy == "eager":
            return True
        origin, arrival = notice
        return clock == arrival + 1 + self.eccentricity[origin]

    def step(self, agent: AgentId, local: Any) -> Move:
        clock, notice, relayed, fired = local
        action = fire_action(agent) if self.should_fire(local) else None
        sends = ()
        if notice is not None and not relayed:
            sends = tuple((peer, notice) for peer in self.topology.neighbors(agent))
        return Move(action, sends)

    def update(self, agent, local, move, delivered, inputs) -> Any:
        clock, notice, relayed, fired = local
        if notice is not None:
            relayed = True
        for content in list(inputs) + [content for _, content in delivered]:
            if notice is None:
                notice = tuple(content)
        return (clock + 1, notice, relayed, fired or move.action is not None)


class FiringSquadContext(NetworkContext):
    """Configurations are (origin, arrival time) pairs, or None for no go."""

    def __init__(self, topology: NetworkTopology, window: Window, recipients: Sequence[int]):
        super().__init__(topology)
        self.window = list(window)
        self.recipients = list(recipients)

    def configurations(self) -> list[Any]:
        configs: list[Any] = []
        for arrival in self.window:
            if arrival is None:
                configs.append(None)
            else:
                configs.extend((origin, arrival) for origin in self.recipients)
        return configs

    def initial_local(self, agent: AgentId, config: Any) -> Any:
        return (0, None, False, False)

    def external_inputs(self, time: int, config: Any) -> dict[AgentId, tuple[Any, ...]]:
        if config is not None and time == config[1] + 1:
            return {config[0]: (config,)}
        return {}


def _namer(single_go: bool):
    """Runs are r_nogo and r_go, or r_go<origin>_<time> when several gos are possible."""

    def name(index: int, states: tuple[GlobalState, ...]) -> str:
        config = states[0].env.payload[0]
        if config is None:
            return "r_nogo"
        if single_go:
            return "r_go"
        origin, arrival = config
        return f"r_go{origin}_{arrival}"

    return name


def default_horizon(topology: NetworkTopology, window: Window) -> int:
    """Leaves two rounds after the latest possible firing."""
    latest = max((t for t in window if t is not None), default=0)
    worst = max(topology.eccentricity(i) for i in range(1, topology.agent_count + 1))
    return latest + 1 + worst + 2


def scenario_firing_squad(
    n: int = 2,
    window: Window = (0, None),
    topology: NetworkTopology | None = None,
    recipients: Sequence[int] = (1,),
    horizon: int | None = None,
    strategy: str = "common",
    budget: int = DEFAULT_RUN_BUDGET,
) -> System:
    """
    Build the firing-squad system.

    Args:
        n: Number of agents (>= 2)
        window: Possible go arrival times; None means the go never comes
        topology: Connected network (default: complete graph, unit delays)
        recipients: Agents the go may arrive at
        horizon: Last time T (default: two rounds after the latest firing)
        strategy: "common" or "eager"

    Raises:
        InputError: On an empty window, n < 2, a disconnected topology or
            an unknown strategy.
    """
    if n < 2:
        raise InputError(f"firing squad needs at least 2 agents, got {n}")
    if not window:
        raise InputError("input window must be non-empty")
    if len(set(window)) != len(window):
        raise InputError(f"duplicate times in input window {list(window)}")
    if any(t is not None and t < 0 for t in window):
        raise InputError(f"window times must be >= 0: {list(window)}")
    if strategy not in STRATEGIES:
        raise InputError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    topology = topology or NetworkTopology.complete(n)
    if topology.agent_count != n:
        raise InputError(f"topology has {topology.agent_count} agents, expected {n}")
    topology.require_connected()
    if not recipients or any(not 1 <= r <= n for r in recipients):
        raise InputError(f"go recipients must be agents in 1..{n}: {list(recipients)}")

    if horizon is None:
        horizon = default_horizon(topology, window)

    def psi_go(run: Run, t: int) -> bool:
        config = run.states[0].env.payload[0]
        return config is not None and config[1] <= t

    context = FiringSquadContext(topology, window, sorted(set(recipients)))
    go_count = sum(config is not None for config in context.configurations())
    return generate_system(
        FiringSquadProtocol(topology, strategy),
        context,
        horizon=horizon,
        interpretation=Interpretation.from_predicates({PSI_GO: psi_go}),
        budget=budget,
        name_run=_namer(go_count == 1),
    )


def parse_window(text: str) -> list[int | None]:
    """Parse "0,2,never" into [0, 2, None]."""
    window: list[int | None] = []
    for token in filter(None, (part.strip() for part in text.split(","))):
        if token == "never":
            window.append(None)
        elif token.isdigit():
            window.append(int(token))
        else:
            raise InputError(f"invalid window entry {token!r}; expected a time or 'never'")
    return window
