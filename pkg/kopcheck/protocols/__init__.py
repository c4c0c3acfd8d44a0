"""
kopcheck Protocols - system generation and the scenario library.
"""

from kopcheck.protocols.base import (
    Context,
    Move,
    NetworkContext,
    NetworkTopology,
    Protocol,
    Transition,
    generate_system,
)
from kopcheck.protocols.chain import PSI_INPUT, chain_sequence, scenario_ordered_chain
from kopcheck.protocols.ctm import CtmMode, max_prop, print_action, scenario_ctm
from kopcheck.protocols.firing_squad import (
    PSI_GO,
    fire_action,
    parse_window,
    scenario_firing_squad,
)
from kopcheck.protocols.mini import scenario_atm, scenario_lamp, scenario_message
from kopcheck.protocols.random_systems import (
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

__all__ = [
    "Context",
    "CtmMode",
    "GeneratedSystem",
    "Move",
    "NetworkContext",
    "NetworkTopology",
    "PSI_GO",
    "PSI_INPUT",
    "Protocol",
    "RandomMode",
    "SystemBatch",
    "Transition",
    "batched",
    "chain_sequence",
    "disjoint_union",
    "enumerate_small_systems",
    "fire_action",
    "formula_pool",
    "generate_system",
    "max_prop",
    "parse_window",
    "print_action",
    "random_system",
    "scenario_atm",
    "scenario_ctm",
    "scenario_firing_squad",
    "scenario_lamp",
    "scenario_message",
    "scenario_ordered_chain",
    "small_system_batches",
]
