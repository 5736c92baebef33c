"""Deciding when logic programs can safely run without the occur-check."""

from .core import (
    Atom,
    Clause,
    Compound,
    Equation,
    EquationSet,
    Program,
    Query,
    Substitution,
    Var,
    apply,
    compose,
    const,
)
from .unify import Action, Variant, decide_nsto_wnsto, mgu, run

__all__ = [
    "Action",
    "Atom",
    "Clause",
    "Compound",
    "Equation",
    "EquationSet",
    "Program",
    "Query",
    "Substitution",
    "Var",
    "Variant",
    "apply",
    "compose",
    "const",
    "decide_nsto_wnsto",
    "mgu",
    "run",
]
