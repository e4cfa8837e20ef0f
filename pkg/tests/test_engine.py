import random

import pytest

from freealg.dsl import parse_equation, parse_term, parse_theory
from freealg.engine import (
    Budget,
    RewriteTrace,
    decide,
    eval_term,
    find_models,
    normalize,
    prove,
    refute,
    replay,
)
from freealg.terms import Equation, Var

from oracles import group_word, s3_group, z2_group


def eq_of(th, text):
    return parse_equation(th.signature, text)


def term_of(th, text):
    return parse_term(th.signature, text)


# ---------------------------------------------------------------------------
# prove


def test_prove_group_cancellation(groups):
    v = prove(groups, eq_of(groups, "mul(x, mul(inv(x), y)) = y"))
    assert v.is_proved
    assert replay(groups, eq_of(groups, "mul(x, mul(inv(x), y)) = y"), v)
    # the oracle agrees
    assert group_word(groups.signature, term_of(groups, "mul(x, mul(inv(x), y))")) == (
        ("y", 1),
    )


def test_prove_reflexivity_costs_nothing(groups, empty_theory):
    for th in (groups, empty_theory):
        eq = Equation(Var("t"), Var("t"))
        v = prove(th, eq, Budget(1, 1, 1))
        assert v.is_proved and v.witness == RewriteTrace(())


def test_prove_malcev_axiom_instance(malcev_theory, small_budget):
    v = prove(malcev_theory, eq_of(malcev_theory, "m(x, x, x) = x"), small_budget)
    assert v.is_proved
    assert replay(malcev_theory, eq_of(malcev_theory, "m(x, x, x) = x"), v)


def test_prove_produces_replayable_trace_without_catalog():
    # same group axioms plus an unused constant: the exact normalizer must
    # not apply, forcing genuine rewrite search
    th = parse_theory(
        """
        signature: mul/2 inv/1 e/0 c/0
        equations:
          mul(mul(x, y), z) = mul(x, mul(y, z))
          mul(e(), x) = x
          mul(x, e()) = x
          mul(inv(x), x) = e()
          mul(x, inv(x)) = e()
        """
    )
    eq = eq_of(th, "mul(x, mul(inv(x), y)) = y")
    v = prove(th, eq, Budget(9, 5000, 2))
    assert v.is_proved and isinstance(v.witness, RewriteTrace)
    assert len(v.witness.steps) >= 1
    assert replay(th, eq, v)


# ---------------------------------------------------------------------------
# refute


def test_refute_m_term_first_argument(groups):
    # the Mal'cev term for groups is weakly independent of its first
    # argument but not independent: Z2 falsifies
    eq = eq_of(groups, "mul(x, mul(inv(z1), z2)) = mul(y, mul(inv(z1), z2))")
    v = refute(groups, eq)
    assert v.is_refuted
    assert v.model.size == 2
    assert v.model.satisfies(groups)
    assert eval_term(v.model, eq.lhs, v.assignment) != eval_term(v.model, eq.rhs, v.assignment)
    # independently: in Z2, x+z1+z2 != y+z1+z2 whenever x != y
    z2 = z2_group()
    assert eval_term(z2, eq.lhs, {"x": 0, "z1": 0, "z2": 0}) != eval_term(
        z2, eq.rhs, {"y": 1, "x": 0, "z1": 0, "z2": 0}
    )


def test_refute_abelian_conjugation_has_no_countermodel(abelian):
    eq = eq_of(abelian, "mul(mul(x, z), inv(x)) = mul(mul(y, z), inv(y))")
    v = refute(abelian, eq)
    assert v.is_unknown  # provable, hence no countermodel exists


def test_refute_empty_theory_distinct_variables(empty_theory):
    v = refute(empty_theory, Equation(Var("x"), Var("y")))
    assert v.is_refuted and v.model.size == 2


# ---------------------------------------------------------------------------
# decide


def test_decide_commutativity_needs_s3(groups):
    # the smallest noncommutative group has 6 elements, beyond the default
    # model budget, so the verdict is Unknown
    eq = eq_of(groups, "mul(x, y) = mul(y, x)")
    assert decide(groups, eq).is_unknown
    # the S3 oracle supplies the witness the bounded search cannot reach
    s3 = s3_group()
    assert s3.satisfies(groups)
    falsified = [
        (a, b)
        for a in range(6)
        for b in range(6)
        if eval_term(s3, eq.lhs, {"x": a, "y": b}) != eval_term(s3, eq.rhs, {"x": a, "y": b})
    ]
    assert falsified


def test_decide_malcev_axiom(malcev_theory, small_budget):
    assert decide(malcev_theory, eq_of(malcev_theory, "m(x, y, y) = x"), small_budget).is_proved


def test_decide_reflexivity_on_empty_theory(empty_theory):
    assert decide(empty_theory, Equation(Var("x"), Var("x"))).is_proved


# ---------------------------------------------------------------------------
# normalize


def test_normalize_group_word(groups):
    t = term_of(groups, "mul(x, mul(inv(x), y))")
    assert normalize(groups, t) == Var("y")


def test_normalize_empty_theory_is_identity(empty_theory):
    assert normalize(empty_theory, Var("x")) == Var("x")


def test_normalize_semilattice_minimal_representative(semilattice):
    t = term_of(semilattice, "and(and(x, y), x)")
    assert normalize(semilattice, t) == term_of(semilattice, "and(x, y)")


def test_normalize_idempotent_without_catalog(malcev_theory, small_budget):
    t = term_of(malcev_theory, "m(m(x, y, y), x, x)")
    n1 = normalize(malcev_theory, t, small_budget)
    assert normalize(malcev_theory, n1, small_budget) == n1


def test_normalize_respects_var_order(semilattice):
    t = term_of(semilattice, "and(y, x)")
    assert normalize(semilattice, t, var_order=("y", "x")) == term_of(
        semilattice, "and(y, x)"
    )
    assert normalize(semilattice, t, var_order=("x", "y")) == term_of(
        semilattice, "and(x, y)"
    )


# ---------------------------------------------------------------------------
# find_models / eval_term


def test_find_models_groups_size_2(groups):
    models = find_models(groups, 2)
    assert [m.size for m in models] == [1, 2, 2]
    for m in models:
        assert m.satisfies(groups)
    # both size-2 models are Z2 up to the choice of identity element
    z2 = z2_group()
    assert models[1].tables == z2.tables


def test_find_models_empty_theory(empty_theory):
    models = find_models(empty_theory, 2)
    assert [m.size for m in models] == [1, 2]
    assert models[0].tables == () and models[1].tables == ()


def test_find_models_two_equal_constants():
    th = parse_theory("signature: c/0 d/0 equations: c() = d()")
    models = find_models(th, 2)
    # size 1: forced; size 2: both constants share a value, two choices
    assert [m.size for m in models] == [1, 2, 2]
    size2 = [m for m in models if m.size == 2]
    assert {(m.tables[0][0], m.tables[1][0]) for m in size2} == {(0, 0), (1, 1)}


def test_eval_term_examples(groups):
    z2 = z2_group()
    t = term_of(groups, "mul(x, inv(y))")
    assert eval_term(z2, t, {"x": 1, "y": 1}) == 0
    assert eval_term(z2, Var("x"), {"x": 1}) == 1
    m = term_of(groups, "mul(x, mul(inv(y), z))")
    assert eval_term(z2, m, {"x": 1, "y": 0, "z": 1}) == 0
    with pytest.raises(Exception):
        eval_term(z2, Var("q"), {"x": 0})


# ---------------------------------------------------------------------------
# invariants


def test_prove_and_refute_never_both_succeed_small_corpus(groups, malcev_theory, small_budget):
    for th, queries in (
        (groups, ["mul(x, y) = mul(y, x)", "mul(x, e()) = x", "inv(inv(x)) = x"]),
        (malcev_theory, ["m(x, y, y) = x", "m(x, y, z) = x", "m(x, x, x) = x"]),
    ):
        for q in queries:
            eq = eq_of(th, q)
            p = prove(th, eq, small_budget)
            r = refute(th, eq, small_budget)
            assert not (p.is_proved and r.is_refuted)


def test_monotonicity_under_budget_growth(groups, malcev_theory):
    lo = Budget(max_term_size=7, max_steps=2_000, max_model_size=1)
    hi = Budget(max_term_size=9, max_steps=50_000, max_model_size=2)
    corpus = [
        (groups, "mul(x, mul(inv(x), y)) = y"),
        (groups, "mul(x, mul(inv(z1), z2)) = mul(y, mul(inv(z1), z2))"),
        (malcev_theory, "m(x, x, x) = x"),
        (malcev_theory, "m(x, y, z) = m(x, z, y)"),
    ]
    for th, text in corpus:
        eq = eq_of(th, text)
        v_lo, v_hi = decide(th, eq, lo), decide(th, eq, hi)
        if v_lo.is_proved:
            assert v_hi.is_proved
        if v_lo.is_refuted:
            assert v_hi.is_refuted


def test_decide_agrees_with_free_group_oracle(groups):
    # exhaustive on all pairs of terms of size <= 4 over {x, y}, then a
    # seeded random sample of pairs up to size 7
    from freealg.terms import enumerate_terms

    small = list(enumerate_terms(groups, ("x", "y"), 4))
    pairs = [(a, b) for a in small for b in small]
    rng = random.Random(7)
    big = list(enumerate_terms(groups, ("x", "y"), 7))
    pairs += [(rng.choice(big), rng.choice(big)) for _ in range(500)]
    for a, b in pairs:
        v = decide(groups, Equation(a, b))
        words_equal = group_word(groups.signature, a) == group_word(groups.signature, b)
        if words_equal:
            assert v.is_proved
        else:
            assert not v.is_proved
        if v.is_refuted:
            assert not words_equal


def test_refuted_witnesses_revalidate(groups, empty_theory):
    cases = [
        (groups, "mul(x, x) = e()"),  # fails first in Z3
        (groups, "inv(x) = x"),  # likewise
        (groups, "mul(x, y) = x"),  # fails already in Z2
        (empty_theory, "x = y"),
    ]
    for th, text in cases:
        eq = eq_of(th, text)
        v = refute(th, eq)
        assert v.is_refuted
        assert v.model.satisfies(th)
        assert eval_term(v.model, eq.lhs, v.assignment) != eval_term(
            v.model, eq.rhs, v.assignment
        )


def test_budget_defaults_and_validation():
    b = Budget()
    assert (b.max_term_size, b.max_steps, b.max_model_size) == (9, 200_000, 3)
    import pytest as _pytest

    with _pytest.raises(ValueError):
        Budget(max_term_size=0)


def test_normalize_idempotent_with_catalog(groups, semilattice):
    for th, text in ((groups, "mul(inv(y), mul(y, x))"), (semilattice, "and(y, and(x, y))")):
        t = parse_term(th.signature, text)
        n1 = normalize(th, t)
        assert normalize(th, n1) == n1


def test_bfs_engine_agrees_with_group_catalog(groups):
    # the same axioms plus an unused constant disable the exact normalizer;
    # every equality the bounded rewrite search derives there must agree
    # with the exact normal forms (the converse can fail: the catalog is
    # complete, the bounded search is not)
    from freealg.normal_forms import catalog_normalizer
    from freealg.terms import enumerate_terms

    variant = parse_theory(
        """
        signature: mul/2 inv/1 e/0 c/0
        equations:
          mul(mul(x, y), z) = mul(x, mul(y, z))
          mul(e(), x) = x
          mul(x, e()) = x
          mul(inv(x), x) = e()
          mul(x, inv(x)) = e()
        """
    )
    assert catalog_normalizer(variant) is None
    from freealg.engine import tri_equal

    nf = catalog_normalizer(groups)
    b = Budget(max_term_size=8, max_steps=1500, max_model_size=2)
    terms = list(enumerate_terms(groups, ("x", "y"), 4))
    proved = 0
    for i, lhs in enumerate(terms):
        for rhs in terms[i:]:
            status, detail = tri_equal(variant, lhs, rhs, b)
            if status == "proved":
                proved += 1
                assert nf.key(lhs) == nf.key(rhs), (lhs, rhs)
            elif status == "refuted":
                assert nf.key(lhs) != nf.key(rhs), (lhs, rhs)
    assert proved > 100


def test_abelian_catalog_agrees_with_exponent_oracle(abelian):
    import random as _random

    from freealg.terms import enumerate_terms
    from oracles import abelian_exponents

    terms = list(enumerate_terms(abelian, ("x", "y"), 4))
    rng = _random.Random(3)
    pairs = [(rng.choice(terms), rng.choice(terms)) for _ in range(400)]
    for a, b in pairs:
        v = decide(abelian, Equation(a, b))
        same = abelian_exponents(abelian.signature, a) == abelian_exponents(
            abelian.signature, b
        )
        assert v.is_proved == same
        if v.is_refuted:
            assert not same


def test_refute_verdicts_are_cache_warmth_independent(malcev_theory):
    from freealg import engine as eng
    from freealg.dsl import parse_equation

    eq = parse_equation(malcev_theory.signature, "m(x, y, z) = m(x, z, y)")
    tiny = Budget(max_term_size=6, max_steps=400, max_model_size=2)

    eng._MODEL_STREAMS.clear()
    cold = refute(malcev_theory, eq, tiny)
    # fully materialize the streams, then ask again with the same budget
    find_models(malcev_theory, 2)
    warm = refute(malcev_theory, eq, tiny)
    assert type(cold) is type(warm)
    if cold.is_refuted:
        assert cold.model == warm.model and cold.assignment == warm.assignment
    else:
        assert cold.reason == warm.reason
