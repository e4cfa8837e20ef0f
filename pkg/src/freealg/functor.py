"""The free-algebra construction, materialized up to a size bound.

F(X) is infinite in general; a FreeCarrier is the finite snapshot of all
equivalence classes with a representative of size <= bound. Every verdict
downstream of a carrier is only meaningful relative to that bound, and the
carrier says so explicitly.

The carrier over the empty variable set consists of the closed terms, so it
is nonempty exactly when the signature has a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .engine import (
    Budget,
    DEFAULT_BUDGET,
    Proved,
    Unknown,
    Verdict,
    decide,
    normalize,
    tri_equal,
)
from .normal_forms import catalog_normalizer
from .terms import App, Equation, Term, Theory, Var, enumerate_terms, substitute, term_key


@dataclass(frozen=True)
class FreeCarrier:
    """Canonical representatives of term classes over `vars`, up to `bound`.

    dedup_unknown is set when some equivalence test came back Unknown, in
    which case the element count is an upper bound rather than exact.
    """

    theory: Theory
    vars: tuple[str, ...]
    bound: int
    elements: tuple[Term, ...]
    dedup_unknown: bool


def free_algebra(
    theory: Theory,
    variables: Sequence[str],
    bound: int,
    budget: Budget = DEFAULT_BUDGET,
) -> FreeCarrier:
    """Enumerate terms over `variables` up to `bound` and keep one canonical
    representative per provable-equality class."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    variables = tuple(variables)
    rank = {v: i for i, v in enumerate(variables)}
    nf = catalog_normalizer(theory)
    elements: list[Term] = []
    dedup_unknown = False
    if nf is not None:
        seen = set()
        for t in enumerate_terms(theory, variables, bound):
            k = nf.key(t)
            if k not in seen:
                seen.add(k)
                elements.append(nf.render(k, rank))
    else:
        for t in enumerate_terms(theory, variables, bound):
            duplicate = False
            for rep in elements:
                status, _ = tri_equal(theory, t, rep, budget)
                if status == "proved":
                    duplicate = True
                    break
                if status == "unknown":
                    dedup_unknown = True
            if not duplicate:
                rep = normalize(theory, t, budget, variables)
                if rep not in elements:
                    elements.append(rep)
    elements.sort(key=lambda t: term_key(t, rank))
    return FreeCarrier(theory, variables, bound, tuple(elements), dedup_unknown)


def functor_map(
    theory: Theory,
    phi: Mapping[str, str],
    t: Term,
    budget: Budget = DEFAULT_BUDGET,
    target_order: Optional[Sequence[str]] = None,
) -> Term:
    """Action of the free functor on a variable map: substitute, then take
    the canonical representative on the target side."""
    sigma = {x: Var(y) for x, y in phi.items()}
    return normalize(theory, substitute(t, sigma), budget, target_order)


def is_idempotent(theory: Theory, budget: Budget = DEFAULT_BUDGET) -> Verdict:
    """Does every operation symbol satisfy f(x,...,x) = x?

    Equivalently: the free algebra on one generator collapses to that
    generator. Refuted as soon as one instance fails, with that witness.
    """
    x = Var("x")
    unknowns = []
    for idx, (name, arity) in enumerate(theory.signature.symbols):
        eq = Equation(App(idx, (x,) * arity), x)
        v = decide(theory, eq, budget)
        if v.is_refuted:
            return v
        if v.is_unknown:
            unknowns.append((name, v.reason))
    if unknowns:
        names = ", ".join(n for n, _ in unknowns)
        return Unknown(f"idempotency undecided for: {names}", detail=unknowns)
    return Proved(witness=f"f(x,...,x) = x proved for all {len(theory.signature)} symbols")
