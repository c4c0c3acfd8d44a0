"""
Formulas of the epistemic language.

Primitive propositions, does/did atoms, constants, negation, conjunction,
individual knowledge K_i, "everyone in G knows" E_G and common knowledge
C_G. Disjunction and implication are sugar over Not/And.

All formula nodes are frozen and hashable; the evaluator caches
extensions keyed by formula.
"""

from dataclasses import dataclass
from typing import Iterable, Union

from kopcheck.contracts import InputError
from kopcheck.kernel import Action, AgentId


@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class DoesAtom:
    agent: AgentId
    action: Action


@dataclass(frozen=True)
class DidAtom:
    agent: AgentId
    action: Action


@dataclass(frozen=True)
class Not:
    f: "Formula"


@dataclass(frozen=True)
class And:
    f: "Formula"
    g: "Formula"


@dataclass(frozen=True)
class Know:
    agent: AgentId
    f: "Formula"


@dataclass(frozen=True)
class Everyone:
    group: frozenset[AgentId]
    f: "Formula"

    def __post_init__(self) -> None:
        _check_group(self.group)


@dataclass(frozen=True)
class Common:
    group: frozenset[AgentId]
    f: "Formula"

    def __post_init__(self) -> None:
        _check_group(self.group)


Formula = Union[Prop, Const, DoesAtom, DidAtom, Not, And, Know, Everyone, Common]

TRUE = Const(True)
FALSE = Const(False)


def _check_group(group: frozenset[AgentId]) -> None:
    if not isinstance(group, frozenset):
        raise InputError(f"group must be a frozenset, got {type(group).__name__}")
    if not group:
        raise InputError("agent group must be non-empty")


# =============================================================================
# Sugar
# =============================================================================


def Or(f: Formula, g: Formula) -> Formula:
    return Not(And(Not(f), Not(g)))


def Implies(f: Formula, g: Formula) -> Formula:
    return Not(And(f, Not(g)))


def conjunction(formulas: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is true."""
    result: Formula | None = None
    for f in formulas:
        result = f if result is None else And(result, f)
    return TRUE if result is None else result


def nested_knowledge(agents: Iterable[AgentId], psi: Formula) -> Formula:
    """
    K_{a_j} ... K_{a_1} psi for agents listed in order a_1, ..., a_j.

    The first listed agent's operator is innermost.
    """
    result = psi
    for agent in agents:
        result = Know(agent, result)
    return result


# =============================================================================
# Inspection
# =============================================================================


def subformulas(f: Formula) -> list[Formula]:
    """Subformulas in bottom-up order (children before parents), deduplicated."""
    ordered: list[Formula] = []
    seen: set[Formula] = set()

    def visit(node: Formula) -> None:
        if node in seen:
            return
        for child in children(node):
            visit(child)
        seen.add(node)
        ordered.append(node)

    visit(f)
    return ordered


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, And):
        return (f.f, f.g)
    if isinstance(f, (Not, Know, Everyone, Common)):
        return (f.f,)
    return ()


def depth(f: Formula) -> int:
    """Modal depth: nesting of K/E/C operators."""
    if isinstance(f, (Know, Everyone, Common)):
        return 1 + depth(f.f)
    return max((depth(c) for c in children(f)), default=0)


def agents_of(f: Formula) -> set[AgentId]:
    """Every agent index mentioned in f."""
    found: set[AgentId] = set()
    for node in subformulas(f):
        if isinstance(node, (DoesAtom, DidAtom, Know)):
            found.add(node.agent)
        elif isinstance(node, (Everyone, Common)):
            found |= node.group
    return found


def props_of(f: Formula) -> set[str]:
    return {node.name for node in subformulas(f) if isinstance(node, Prop)}


# =============================================================================
# Rendering
# =============================================================================


def format_formula(f: Formula, agent_names: tuple[str, ...] | None = None) -> str:
    """
    Render f in the formula text syntax.

    Agents are rendered by name when agent_names is given. The output
    parses back to an equal formula.
    """

    def agent(i: AgentId) -> str:
        return agent_names[i - 1] if agent_names else str(i)

    def group(g: frozenset[AgentId]) -> str:
        return "{" + ",".join(agent(i) for i in sorted(g)) + "}"

    def render(node: Formula, prec: int) -> str:
        if isinstance(node, Prop):
            return node.name
        if isinstance(node, Const):
            return "true" if node.value else "false"
        if isinstance(node, DoesAtom):
            return f"does[{agent(node.agent)}]({node.action.label})"
        if isinstance(node, DidAtom):
            return f"did[{agent(node.agent)}]({node.action.label})"
        if isinstance(node, Not):
            return "!" + render(node.f, 3)
        if isinstance(node, Know):
            return f"K[{agent(node.agent)}] " + render(node.f, 3)
        if isinstance(node, Everyone):
            return f"E[{group(node.group)}] " + render(node.f, 3)
        if isinstance(node, Common):
            return f"C[{group(node.group)}] " + render(node.f, 3)
        if isinstance(node, And):
            text = render(node.f, 2) + " & " + render(node.g, 3)
            return f"({text})" if prec > 2 else text
        raise TypeError(f"not a formula: {node!r}")

    return render(f, 0)
