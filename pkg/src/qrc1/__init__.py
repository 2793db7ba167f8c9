"""Strictly positive quantified provability logic: calculus, semantics,
decision procedure, saturation models, and the arithmetical reading."""

__version__ = "0.1.0"

from .calculus import (
    Derivation,
    DerivationError,
    Instantiation,
    ProofSearch,
    check_derivation,
    derived_rule,
    prove,
)
from .decider import DeciderConfig, Verdict, decide
from .semantics import (
    Assignment,
    Countermodel,
    Model,
    check_adequate,
    enumerate_models,
    forces,
    refute,
    restrict,
)
from .syntax import (
    And,
    Const,
    Diamond,
    Forall,
    Formula,
    Pred,
    Sequent,
    Signature,
    TOP,
    Top,
    Var,
    closure,
    free_vars,
    mdepth,
    parse_formula,
    parse_sequent,
    parse_signature,
    pretty,
    pretty_sequent,
    substitute,
    udepth,
)
from .termmodel import PairPM, build_term_model, truth_lemma_check

__all__ = [
    "__version__",
    "And",
    "Assignment",
    "Const",
    "Countermodel",
    "DeciderConfig",
    "Derivation",
    "DerivationError",
    "Diamond",
    "Forall",
    "Formula",
    "Instantiation",
    "Model",
    "PairPM",
    "Pred",
    "ProofSearch",
    "Sequent",
    "Signature",
    "TOP",
    "Top",
    "Var",
    "Verdict",
    "build_term_model",
    "check_adequate",
    "check_derivation",
    "closure",
    "decide",
    "derived_rule",
    "enumerate_models",
    "forces",
    "free_vars",
    "mdepth",
    "parse_formula",
    "parse_sequent",
    "parse_signature",
    "pretty",
    "pretty_sequent",
    "prove",
    "refute",
    "restrict",
    "substitute",
    "truth_lemma_check",
    "udepth",
]
