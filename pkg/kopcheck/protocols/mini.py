"""
Small fixed systems: the lamp and its switch, a possibly lossy message,
and a cash machine that asks the bank for the balance.
"""

from typing import Any, Sequence

from kopcheck.context import DEFAULT_RUN_BUDGET
from kopcheck.contracts import InputError
from kopcheck.kernel import Action, AgentId, GlobalState, Run, System
from kopcheck.logic.interpretation import Interpretation
from kopcheck.protocols.base import (
    Context,
    Move,
    NetworkContext,
    NetworkTopology,
    Protocol,
    Transition,
    generate_system,
)


SEND = Action("send")
DISPENSE = Action("dispense")

DEFAULT_BALANCES = (0, 10, 100)
DEFAULT_AMOUNT = 20
MESSAGE_HORIZON = 3
ATM_HORIZON = 3


class _Idle(Protocol):
    def step(self, agent: AgentId, local: Any) -> Move:
        return Move()

    def update(self, agent, local, move, delivered, inputs) -> Any:
        return local


# =============================================================================
# Lamp
# =============================================================================


class _LampContext(Context):
    agent_count = 1

    def __init__(self, can_burn_out: bool):
        self.can_burn_out = can_burn_out

    def initial_states(self) -> list[tuple[Any, tuple[Any, ...]]]:
        states = [("ok", ("ON",))]
        if self.can_burn_out:
            states.append(("burnt", ("ON",)))
        states.append(("ok", ("OFF",)))
        return states

    def apply(self, time, payload, moves, env_move) -> Transition:
        return Transition(payload=payload)


def _lamp_run_name(index: int, states: tuple[GlobalState, ...]) -> str:
    switch, bulb = states[0].locals[0], states[0].env.payload
    if switch == "OFF":
        return "r_off"
    return "r_on_lit" if bulb == "ok" else "r_on_burnt"


def scenario_lamp(can_burn_out: bool = True) -> System:
    """
    A bed lamp controlled by a switch.

    Runs r_on_lit, r_on_burnt (omitted unless can_burn_out) and r_off; the
    switch's local state is ON or OFF and the bulb's condition is hidden
    in the environment. Proposition `lit`.
    """

    def lit(run: Run, t: int) -> bool:
        state = run.states[t]
        return state.locals[0] == "ON" and state.env.payload == "ok"

    return generate_system(
        _Idle(),
        _LampContext(can_burn_out),
        horizon=1,
        interpretation=Interpretation.from_predicates({"lit": lit}),
        agent_names=("switch",),
        name_run=_lamp_run_name,
    )


# =============================================================================
# Message
# =============================================================================


class _MessageProtocol(Protocol):
    """Alice sends once at time 0 if she wants to; Bob records receipt."""

    def step(self, agent: AgentId, local: Any) -> Move:
        clock, flag = local
        if agent == 1 and clock == 0 and flag:
            return Move(SEND, ((2, "m"),))
        return Move()

    def update(self, agent, local, move, delivered, inputs) -> Any:
        clock, flag = local
        if agent == 2:
            flag = flag or bool(delivered)
        return (clock + 1, flag)


class _MessageContext(NetworkContext):
    DELAYS = {"deliver": 1, "late": 2, "lose": None}

    def __init__(self, reliable: bool):
        super().__init__(NetworkTopology(2, ((1, 2),)))
        self.reliable = reliable

    def configurations(self) -> list[Any]:
        return [True, False]

    def initial_local(self, agent: AgentId, config: Any) -> Any:
        return (0, config) if agent == 1 else (0, False)

    def env_moves(self, time, payload, moves) -> tuple[Any, ...]:
        if not any(move.sends for move in moves):
            return (None,)
        return ("deliver",) if self.reliable else ("deliver", "late", "lose")

    def delay_choice(self, env_move, sender, recipient) -> int | None:
        return self.DELAYS[env_move]


def _message_run_name(index: int, states: tuple[GlobalState, ...]) -> str:
    if not states[0].locals[0][1]:
        return "r_silent"
    received = [t for t, state in enumerate(states) if state.locals[1][1]]
    if not received:
        return "r_lost"
    return "r_del" if received[0] == 1 else "r_late"


def scenario_message(reliable: bool, horizon: int = MESSAGE_HORIZON) -> System:
    """
    Alice may send Bob a message at time 0.

    Lossy channel: the message arrives at time 1 (r_del), at time 2
    (r_late) or never (r_lost). Reliable channel: it always arrives at
    time 1. r_silent is the run where Alice sends nothing. Propositions
    `sent` and `delivered`.
    """

    def sent(run: Run, t: int) -> bool:
        return any(
            e.action == SEND and e.time <= t for e in run.states[-1].env.history.events
        )

    def delivered(run: Run, t: int) -> bool:
        return run.states[t].locals[1][1]

    return generate_system(
        _MessageProtocol(),
        _MessageContext(reliable),
        horizon=horizon,
        interpretation=Interpretation.from_predicates({"sent": sent, "delivered": delivered}),
        agent_names=("Alice", "Bob"),
        name_run=_message_run_name,
    )


# =============================================================================
# ATM
# =============================================================================


class _AtmProtocol(Protocol):
    """
    The bank (agent 2) reports the balance once; the ATM (agent 1)
    dispenses once if the reported balance covers the amount.
    """

    def __init__(self, amount: int):
        self.amount = amount

    def step(self, agent: AgentId, local: Any) -> Move:
        if agent == 2:
            balance, sent = local
            return Move() if sent else Move(sends=((1, balance),))
        clock, known, done = local
        if known is not None and known >= self.amount and not done:
            return Move(DISPENSE)
        return Move()

    def update(self, agent, local, move, delivered, inputs) -> Any:
        if agent == 2:
            return (local[0], True)
        clock, known, done = local
        for _, balance in delivered:
            known = balance
        return (clock + 1, known, done or move.action is not None)


class _AtmContext(NetworkContext):
    def __init__(self, balances: Sequence[int]):
        super().__init__(NetworkTopology(2, ((1, 2),)))
        self.balances = list(balances)

    def configurations(self) -> list[Any]:
        return self.balances

    def initial_local(self, agent: AgentId, config: Any) -> Any:
        return (0, None, False) if agent == 1 else (config, False)

    def env_moves(self, time, payload, moves) -> tuple[Any, ...]:
        return ("up", "down") if any(move.sends for move in moves) else (None,)

    def delay_choice(self, env_move, sender, recipient) -> int | None:
        return 1 if env_move == "up" else None


def _atm_run_name(index: int, states: tuple[GlobalState, ...]) -> str:
    balance = states[0].locals[1][0]
    link = "up" if states[-1].locals[0][1] is not None else "down"
    return f"r_{balance}_{link}"


def scenario_atm(
    balances: Sequence[int] = DEFAULT_BALANCES,
    horizon: int = ATM_HORIZON,
    amount: int = DEFAULT_AMOUNT,
    budget: int = DEFAULT_RUN_BUDGET,
) -> System:
    """
    A cash machine asks the bank for the customer's balance over a link
    that may fail; it dispenses only when the reported balance is at
    least `amount`. Every balance has a run where the link is down.
    Proposition `good_credit` (balance >= amount).
    """
    if not balances:
        raise InputError("balance domain must be non-empty")
    if len(set(balances)) != len(balances):
        raise InputError(f"duplicate balances in {list(balances)}")
    if horizon < 2:
        raise InputError(f"ATM horizon must be >= 2, got {horizon}")

    def good_credit(run: Run, t: int) -> bool:
        return run.states[0].locals[1][0] >= amount

    return generate_system(
        _AtmProtocol(amount),
        _AtmContext(sorted(balances)),
        horizon=horizon,
        interpretation=Interpretation.from_predicates({"good_credit": good_credit}),
        budget=budget,
        agent_names=("atm", "bank"),
        name_run=_atm_run_name,
    )
