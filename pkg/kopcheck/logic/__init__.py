"""
kopcheck Logic - epistemic formulas and their evaluation.

Exports the formula constructors, the text parser and the evaluator
entry points.
"""

from kopcheck.logic.evaluator import (
    Evaluator,
    eval_common,
    evaluate,
    indistinguishable,
    nested_everyone,
    valid,
    validly_implies,
)
from kopcheck.logic.formula import (
    FALSE,
    TRUE,
    And,
    Common,
    Const,
    DidAtom,
    DoesAtom,
    Everyone,
    Formula,
    Implies,
    Know,
    Not,
    Or,
    Prop,
    conjunction,
    format_formula,
    nested_knowledge,
)
from kopcheck.logic.interpretation import Interpretation
from kopcheck.logic.parser import parse_formula

__all__ = [
    "FALSE",
    "TRUE",
    "And",
    "Common",
    "Const",
    "DidAtom",
    "DoesAtom",
    "Evaluator",
    "Everyone",
    "Formula",
    "Implies",
    "Interpretation",
    "Know",
    "Not",
    "Or",
    "Prop",
    "conjunction",
    "eval_common",
    "evaluate",
    "format_formula",
    "indistinguishable",
    "nested_everyone",
    "nested_knowledge",
    "parse_formula",
    "valid",
    "validly_implies",
]
