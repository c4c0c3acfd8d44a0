"""
kopcheck Test Configuration

Provides the CLI subprocess helper, small hand-built systems and the
built-in scenarios as fixtures.
"""

import subprocess
import sys
from pathlib import Path

import pytest

from kopcheck.document import save_system
from kopcheck.kernel import (
    Action,
    EnvState,
    GlobalState,
    History,
    HistoryEvent,
    Run,
    System,
)
from kopcheck.logic.interpretation import Interpretation
from kopcheck.protocols import (
    scenario_atm,
    scenario_firing_squad,
    scenario_lamp,
    scenario_message,
    scenario_ordered_chain,
)


def run_cli(*args: str, cwd: str | None = None) -> subprocess.CompletedProcess:
    """Run kopcheck CLI as subprocess."""
    return subprocess.run(
        [sys.executable, "-m", "kopcheck", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def make_run(locals_by_time, events_by_time=None, name: str = "") -> Run:
    """
    Build a run from per-time local-state tuples.

    Args:
        locals_by_time: [(l_1, ..., l_n) for t in 0..T]
        events_by_time: {t: [(label, agent)]} actions performed at t
        name: Run name
    """
    events_by_time = events_by_time or {}
    history = History()
    states = []
    for t, locals_ in enumerate(locals_by_time):
        if t > 0:
            history = history.with_events(
                HistoryEvent(Action(label), agent, t - 1)
                for label, agent in events_by_time.get(t - 1, ())
            )
        states.append(GlobalState(EnvState(history), tuple(locals_)))
    return Run(tuple(states), name=name)


@pytest.fixture
def two_agent_system() -> System:
    """
    Two agents, two runs, horizon 2.

    Agent 1 sees the run from time 0; agent 2 only from time 1. Agent 1
    performs `go` at time 0 in run r_a. Proposition p holds throughout r_a.
    """
    r_a = make_run([("a", 0), ("a", "a"), ("a", "a")], {0: [("go", 1)]}, "r_a")
    r_b = make_run([("b", 0), ("b", "b"), ("b", "b")], {}, "r_b")
    return System(
        runs=(r_a, r_b),
        horizon=2,
        agent_count=2,
        interpretation=Interpretation.from_table(
            {"p": {0: (True, True, True), 1: (False, False, False)}}
        ),
    )


@pytest.fixture(scope="session")
def lamp():
    return scenario_lamp()


@pytest.fixture(scope="session")
def lamp_no_burnout():
    return scenario_lamp(can_burn_out=False)


@pytest.fixture(scope="session")
def msg_lossy():
    return scenario_message(reliable=False)


@pytest.fixture(scope="session")
def msg_reliable():
    return scenario_message(reliable=True)


@pytest.fixture(scope="session")
def atm():
    return scenario_atm()


@pytest.fixture(scope="session")
def fs2():
    return scenario_firing_squad(n=2)


@pytest.fixture(scope="session")
def fs3():
    return scenario_firing_squad(n=3)


@pytest.fixture(scope="session")
def fs2_lag():
    return scenario_firing_squad(n=2, strategy="eager")


@pytest.fixture(scope="session")
def chain3():
    return scenario_ordered_chain(k=3)


@pytest.fixture
def write_doc(tmp_path):
    """Write a system document into tmp_path and return its path."""

    def write(system: System, name: str) -> Path:
        path = tmp_path / f"{name}.sys"
        save_system(system, path)
        return path

    return write
