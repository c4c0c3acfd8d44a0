"""
Computing the maximum over a tree network.

Agents sit at the nodes of a tree rooted at agent 1, each holding an
initial value from a finite domain. Agent 1 must print the maximum of all
initial values. Two protocols:

- BOTTOM_UP: a node reports max(own, children's reports) to its parent
  once every child has reported; leaves report at time 0.
- CLOCKED_FLOOD: every round, a node forwards its best value to its
  parent only if that value exceeds everything it has sent before.

The system ranges over every tuple in domain^n, so agent 1's knowledge
of the maximum is non-trivial. Agent 1 performs print_<c> exactly once,
at the first time its local state guarantees Max=c: its best value is
the top of the domain, or it has heard from the whole tree (every child
reported under BOTTOM_UP, the clock passed the delay-weighted
eccentricity under CLOCKED_FLOOD).

Local state: (clock, value, best, last_sent, reported, printed).
"""

from enum import Enum
from itertools import product
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
    check_budget,
    generate_system,
)


DEFAULT_DOMAIN = (0, 50, 75, 100, 150)
DEFAULT_DESIGNATED = (75, 100, 50, 0)
DEFAULT_HORIZON = 5


class CtmMode(str, Enum):
    BOTTOM_UP = "bottom-up"
    CLOCKED_FLOOD = "clocked"


def print_action(value: int) -> Action:
    return Action(f"print_{value}")


def max_prop(value: int) -> str:
    return f"Max={value}"


class CtmProtocol(Protocol):
    def __init__(self, topology: NetworkTopology, domain: Sequence[int], mode: CtmMode):
        self.mode = mode
        self.top = max(domain)
        self.parents = topology.tree_parents(1)
        self.children = {
            i: tuple(sorted(c for c, p in self.parents.items() if p == i))
            for i in range(1, topology.agent_count + 1)
        }
        self.horizon_of_root = topology.eccentricity(1)

    def informed(self, local: Any) -> bool:
        """Whether agent 1's local state determines the maximum."""
        clock, _, best, _, reported, _ = local
        if best == self.top:
            return True
        if self.mode is CtmMode.BOTTOM_UP:
            return len(reported) == len(self.children[1])
        return clock >= self.horizon_of_root

    def step(self, agent: AgentId, local: Any) -> Move:
        clock, value, best, last_sent, reported, printed = local
        if agent == 1:
            if not printed and self.informed(local):
                return Move(print_action(best))
            return Move()
        parent = self.parents[agent]
        if self.mode is CtmMode.BOTTOM_UP:
            ready = len(reported) == len(self.children[agent])
            return Move(sends=((parent, best),)) if ready and last_sent is None else Move()
        if last_sent is None or best > last_sent:
            return Move(sends=((parent, best),))
        return Move()

    def update(self, agent, local, move, delivered, inputs) -> Any:
        clock, value, best, last_sent, reported, printed = local
        for sender, content in delivered:
            best = max(best, content)
            reported = tuple(sorted(set(reported) | {sender}))
        if move.sends:
            last_sent = move.sends[0][1]
        return (clock + 1, value, best, last_sent, reported, printed or move.action is not None)


class CtmContext(NetworkContext):
    def __init__(self, topology: NetworkTopology, domain: Sequence[int]):
        super().__init__(topology)
        self.domain = tuple(domain)

    def configurations(self) -> list[Any]:
        return list(product(self.domain, repeat=self.agent_count))

    def initial_local(self, agent: AgentId, config: Any) -> Any:
        value = config[agent - 1]
        return (0, value, value, None, (), False)


def scenario_ctm(
    topology: NetworkTopology | None = None,
    domain: Sequence[int] = DEFAULT_DOMAIN,
    designated: Sequence[int] = DEFAULT_DESIGNATED,
    mode: CtmMode = CtmMode.CLOCKED_FLOOD,
    horizon: int = DEFAULT_HORIZON,
    budget: int = DEFAULT_RUN_BUDGET,
) -> tuple[System, int]:
    """
    Build the maximum-computation system.

    Args:
        topology: Tree over the agents (default: the path 1-2-...-n with
            n = len(designated))
        domain: Possible initial values
        designated: Initial values of the run of interest
        mode: BOTTOM_UP or CLOCKED_FLOOD
        horizon: Last time T

    Returns:
        (system, index of the designated run). Runs are named by their
        initial values, e.g. "v75_100_50_0".

    Raises:
        InputError: If a designated value lies outside the domain, the
            topology is not a tree, or sizes disagree.
        BudgetExceeded: If len(domain)^n exceeds the budget.
    """
    domain = tuple(sorted(set(domain)))
    if not domain:
        raise InputError("value domain must be non-empty")
    if any(isinstance(v, bool) or not isinstance(v, int) or v < 0 for v in domain):
        raise InputError(f"domain values must be non-negative integers: {list(domain)}")
    designated = tuple(designated)
    topology = topology or NetworkTopology.path(len(designated))
    if len(designated) != topology.agent_count:
        raise InputError(
            f"designated tuple has {len(designated)} values for {topology.agent_count} agents"
        )
    outside = [v for v in designated if v not in domain]
    if outside:
        raise InputError(f"designated values {outside} are outside the domain {list(domain)}")
    if not topology.is_tree():
        raise InputError(f"topology {list(topology.edges)} is not a tree")
    check_budget(len(domain) ** topology.agent_count, budget, 0)

    predicates = {max_prop(c): _max_is(c) for c in domain}
    system = generate_system(
        CtmProtocol(topology, domain, CtmMode(mode)),
        CtmContext(topology, domain),
        horizon=horizon,
        interpretation=Interpretation.from_predicates(predicates),
        budget=budget,
        name_run=_ctm_run_name,
    )
    return system, system.resolve_run(_values_name(designated))


def _max_is(c: int):
    def holds(run: Run, t: int) -> bool:
        return max(local[1] for local in run.states[0].locals) == c

    return holds


def _values_name(values: Sequence[int]) -> str:
    return "v" + "_".join(str(v) for v in values)


def _ctm_run_name(index: int, states: tuple[GlobalState, ...]) -> str:
    return _values_name([local[1] for local in states[0].locals])
