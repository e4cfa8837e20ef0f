"""Bounded analysis of finitary equational theories.

Submodules:
  terms       signatures, terms, theories, canonical enumeration
  dsl         concrete syntax (parser and printer)
  engine      bounded prove/refute/decide, models, normalization
  functor     the free-algebra functor up to a size bound
  finset      finite-Set pullbacks, kernels, preimages, preservation checks
  derivative  weak independence, independence, the derivative scan
  malcev      Mal'cev terms, permutability chains, kernel-pair witnesses
  cli         command-line front end
"""

from .dsl import ParseError, parse_equation, parse_term, parse_theory, pretty_term, pretty_theory
from .engine import (
    Budget,
    DEFAULT_BUDGET,
    FiniteAlgebra,
    Proved,
    Refuted,
    Unknown,
    Verdict,
    decide,
    eval_term,
    find_models,
    normalize,
    prove,
    refute,
    replay,
)
from .terms import (
    App,
    Equation,
    Signature,
    Term,
    TermError,
    Theory,
    Var,
    VarOccurrence,
    enumerate_terms,
    substitute,
)

__version__ = "0.1.0"
