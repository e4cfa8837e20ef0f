"""Bounded semidecision of equational consequence.

Everything here is three-valued: a query can come back Proved (with a
replayable witness), Refuted (with a finite countermodel and a falsifying
assignment), or Unknown (some budget dimension ran out). Nothing in this
module ever guesses: Proved and Refuted verdicts carry evidence that tests
re-check mechanically.

Budget.max_steps is a unified work counter. In proof search a step is one
node expansion; in countermodel search a step is one constraint evaluation
(a cell-value attempt or one ground equation-instance check). This keeps
"cheap disproof first" actually cheap on theories whose finite model space
is astronomically large.

Results are pure functions of (theory, query, budget): the module-level
caches only memoize work and charge consumers as if they had done it
themselves, so verdicts do not depend on cache warmth. The caches are not
guarded by locks; share theories across threads only behind your own.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Optional, Sequence

from .normal_forms import catalog_normalizer
from .terms import (
    App,
    Equation,
    Term,
    TermError,
    Theory,
    Var,
    check_term,
    positions,
    replace_at,
    substitute,
    subterm_at,
    term_key,
    var_names,
)


@dataclass(frozen=True)
class Budget:
    """Resource limits for one query. All dimensions must be >= 1."""

    max_term_size: int = 9
    max_steps: int = 200_000
    max_model_size: int = 3

    def __post_init__(self):
        if min(self.max_term_size, self.max_steps, self.max_model_size) < 1:
            raise ValueError("budget dimensions must be >= 1")


DEFAULT_BUDGET = Budget()


# ---------------------------------------------------------------------------
# Verdicts and proof witnesses


class Verdict:
    __slots__ = ()

    @property
    def is_proved(self):
        return isinstance(self, Proved)

    @property
    def is_refuted(self):
        return isinstance(self, Refuted)

    @property
    def is_unknown(self):
        return isinstance(self, Unknown)


@dataclass(frozen=True)
class RewriteStep:
    before: Term
    after: Term
    eq_index: int
    forward: bool
    path: tuple[int, ...]
    binding: tuple[tuple[str, Term], ...]


@dataclass(frozen=True)
class RewriteTrace:
    steps: tuple[RewriteStep, ...]


@dataclass(frozen=True)
class NormalFormCertificate:
    normalizer: str


@dataclass
class Proved(Verdict):
    witness: object  # RewriteTrace | NormalFormCertificate | domain-specific


@dataclass
class Refuted(Verdict):
    model: "FiniteAlgebra"
    assignment: dict


@dataclass
class Unknown(Verdict):
    reason: str
    detail: object = None


# ---------------------------------------------------------------------------
# Finite algebras


@dataclass(frozen=True)
class FiniteAlgebra:
    """A carrier {0..size-1} with one flat operation table per symbol.

    Tables are row-major in the argument tuple (mixed-radix, most
    significant argument first); a constant's table has one entry.
    """

    size: int
    arities: tuple[int, ...]
    tables: tuple[tuple[int, ...], ...]

    def op(self, sym: int, args: Sequence[int]) -> int:
        off = 0
        for a in args:
            off = off * self.size + a
        return self.tables[sym][off]

    def nested_tables(self, theory: Theory) -> dict:
        def nest(flat, arity):
            if arity == 0:
                return flat[0]
            step = len(flat) // self.size
            return [nest(flat[i * step : (i + 1) * step], arity - 1) for i in range(self.size)]

        return {
            theory.signature.name(i): nest(list(self.tables[i]), self.arities[i])
            for i in range(len(self.arities))
        }

    def satisfies(self, theory: Theory) -> bool:
        for eq in theory.equations:
            vs = var_names(eq.lhs) + [v for v in var_names(eq.rhs) if v not in var_names(eq.lhs)]
            for vals in product(range(self.size), repeat=len(vs)):
                env = dict(zip(vs, vals))
                if eval_term(self, eq.lhs, env) != eval_term(self, eq.rhs, env):
                    return False
        return True


def eval_term(algebra: FiniteAlgebra, t: Term, env: Mapping[str, int]) -> int:
    """Bottom-up evaluation; raises on a variable missing from env."""
    if type(t) is Var:
        if t.name not in env:
            raise TermError(f"unmapped variable {t.name!r}")
        return env[t.name]
    return algebra.op(t.sym, [eval_term(algebra, a, env) for a in t.args])


# ---------------------------------------------------------------------------
# Countermodel search
#
# Models of size k are enumerated by backtracking over table cells in a
# fixed order: symbols sorted by (arity, declaration index), cells of each
# table in row-major argument order, values tried ascending. The stream for
# each (theory, k) is cached and shared; every cached model records the
# cumulative node count at which it was found, so later consumers can charge
# their own budgets as if they had run the search themselves. That keeps
# results deterministic regardless of cache warmth.


def _postfix(t: Term, var_pos: Mapping[str, int]):
    code = []

    def walk(s):
        if type(s) is Var:
            code.append((0, var_pos[s.name]))
        else:
            for a in s.args:
                walk(a)
            code.append((1, s.sym, len(s.args)))

    walk(t)
    return tuple(code)


def _eval_code(code, env, tables, k) -> int:
    """Evaluate postfix code over possibly partial tables; -1 = undefined."""
    stack = []
    for op in code:
        if op[0] == 0:
            stack.append(env[op[1]])
        else:
            arity = op[2]
            if arity:
                off = 0
                for a in stack[-arity:]:
                    off = off * k + a
                del stack[-arity:]
            else:
                off = 0
            v = tables[op[1]][off]
            if v < 0:
                return -1
            stack.append(v)
    return stack[0]


class _ModelSearch:
    """Resumable DFS over all size-k models of a theory."""

    def __init__(self, theory: Theory, k: int):
        self.theory = theory
        self.k = k
        sig = theory.signature
        order = sorted(range(len(sig)), key=lambda i: (sig.arity(i), i))
        self.cells = [(s, off) for s in order for off in range(k ** sig.arity(s))]
        self.tables = [[-1] * (k ** sig.arity(i)) for i in range(len(sig))]
        self.instances = []
        for eq in theory.equations:
            vs = var_names(eq.lhs) + [v for v in var_names(eq.rhs) if v not in var_names(eq.lhs)]
            pos = {v: i for i, v in enumerate(vs)}
            cl, cr = _postfix(eq.lhs, pos), _postfix(eq.rhs, pos)
            for env in product(range(k), repeat=len(vs)):
                self.instances.append((cl, cr, env))
        self.depth = 0
        self.next_value = [0] * (len(self.cells) + 1)
        self.cost = 0
        self.found: list[tuple[FiniteAlgebra, int]] = []
        self.finished = False
        self.final_cost: Optional[int] = None
        if not self.cells:
            # No table cells to fill: the bare set either is or is not a
            # model, depending on the (symbol-free) equations.
            if self._consistent():
                self._record()
            self.finished = True
            self.final_cost = self.cost

    def _consistent(self) -> bool:
        for cl, cr, env in self.instances:
            self.cost += 1
            a = _eval_code(cl, env, self.tables, self.k)
            if a < 0:
                continue
            b = _eval_code(cr, env, self.tables, self.k)
            if 0 <= b != a:
                return False
        return True

    def _record(self):
        alg = FiniteAlgebra(
            self.k,
            tuple(a for _, a in self.theory.signature.symbols),
            tuple(tuple(tab) for tab in self.tables),
        )
        self.found.append((alg, self.cost))

    def advance(self, cost_limit: int) -> str:
        """Run until a new model is found, the space is exhausted, or the
        global cost counter reaches cost_limit. Returns "found", "finished",
        or "paused"."""
        if self.finished:
            return "finished"
        while True:
            if self.cost >= cost_limit:
                return "paused"
            if self.depth == len(self.cells):
                self._record()
                # step back so the search resumes past this model
                self.depth -= 1
                sym, off = self.cells[self.depth]
                self.tables[sym][off] = -1
                return "found"
            v = self.next_value[self.depth]
            if v >= self.k:
                self.next_value[self.depth] = 0
                self.depth -= 1
                if self.depth < 0:
                    self.finished = True
                    self.final_cost = self.cost
                    return "finished"
                sym, off = self.cells[self.depth]
                self.tables[sym][off] = -1
                continue
            self.next_value[self.depth] += 1
            self.cost += 1
            sym, off = self.cells[self.depth]
            self.tables[sym][off] = v
            if self._consistent():
                self.depth += 1
                self.next_value[self.depth] = 0
            else:
                self.tables[sym][off] = -1


_MODEL_STREAMS: dict[tuple[Theory, int], _ModelSearch] = {}


def _stream(theory: Theory, k: int) -> _ModelSearch:
    key = (theory, k)
    if key not in _MODEL_STREAMS:
        if len(_MODEL_STREAMS) > 512:
            _MODEL_STREAMS.clear()
        _MODEL_STREAMS[key] = _ModelSearch(theory, k)
    return _MODEL_STREAMS[key]


def find_models(theory: Theory, max_size: int) -> list[FiniteAlgebra]:
    """All models of the theory up to the given size, in enumeration order.

    Models are labelled tables; no quotient by isomorphism is taken. This
    runs to exhaustion, so only call it at sizes where that is sane.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    out = []
    for k in range(1, max_size + 1):
        s = _stream(theory, k)
        while not s.finished:
            s.advance(float("inf"))
        out.extend(alg for alg, _ in s.found)
    return out


def refute(theory: Theory, eq: Equation, budget: Budget = DEFAULT_BUDGET) -> Verdict:
    """Search for a finite countermodel: a model of the theory together with
    an assignment falsifying eq. Returns the first hit in enumeration order,
    or Unknown when sizes or the step budget run out."""
    check_term(theory.signature, eq.lhs)
    check_term(theory.signature, eq.rhs)
    vs = var_names(eq.lhs) + [v for v in var_names(eq.rhs) if v not in var_names(eq.lhs)]
    spent = 0
    for k in range(1, budget.max_model_size + 1):
        s = _stream(theory, k)
        idx = 0
        prev_cost = 0
        assignments = list(product(range(k), repeat=len(vs)))
        while True:
            if idx < len(s.found):
                alg, cost_after = s.found[idx]
            elif s.finished:
                spent += s.final_cost - prev_cost
                break
            else:
                if s.advance(s.cost + (budget.max_steps - spent)) == "paused":
                    return Unknown("model search step budget exhausted", detail=k)
                continue
            delta = cost_after - prev_cost
            if spent + delta > budget.max_steps:
                return Unknown("model search step budget exhausted", detail=k)
            spent += delta
            prev_cost = cost_after
            for vals in assignments:
                spent += 1
                if spent > budget.max_steps:
                    return Unknown("model search step budget exhausted", detail=k)
                env = dict(zip(vs, vals))
                if eval_term(alg, eq.lhs, env) != eval_term(alg, eq.rhs, env):
                    return Refuted(alg, env)
            idx += 1
        if spent > budget.max_steps:
            return Unknown("model search step budget exhausted", detail=k)
    return Unknown(f"no countermodel up to size {budget.max_model_size}")


# ---------------------------------------------------------------------------
# Proof search
#
# Bidirectional breadth-first search over the rewrite closure of the axioms,
# applied at every position in both orientations, with all intermediate
# terms capped in size. Axiom variables that appear only on the replacement
# side are instantiated with size-1 terms over the query's variables and the
# signature's constants; this keeps branching finite and is sound (every
# found derivation is genuine), at the price of more Unknowns.


@dataclass(frozen=True)
class _Rule:
    lhs: Term
    rhs: Term
    eq_index: int
    forward: bool
    extra_vars: tuple[str, ...]


_RULE_CACHE: dict[Theory, tuple[_Rule, ...]] = {}


def _rules(theory: Theory) -> tuple[_Rule, ...]:
    if theory not in _RULE_CACHE:
        if len(_RULE_CACHE) > 512:
            _RULE_CACHE.clear()
        rules = []
        for i, eq in enumerate(theory.equations):
            if eq.lhs == eq.rhs:
                continue
            for lhs, rhs, fwd in ((eq.lhs, eq.rhs, True), (eq.rhs, eq.lhs, False)):
                lv = set(var_names(lhs))
                extra = tuple(v for v in var_names(rhs) if v not in lv)
                rules.append(_Rule(lhs, rhs, i, fwd, extra))
        _RULE_CACHE[theory] = tuple(rules)
    return _RULE_CACHE[theory]


def _match(pattern: Term, subject: Term, binding: dict) -> bool:
    if type(pattern) is Var:
        cur = binding.get(pattern.name)
        if cur is None:
            binding[pattern.name] = subject
            return True
        return cur == subject
    if type(subject) is not App or subject.sym != pattern.sym:
        return False
    for pa, sa in zip(pattern.args, subject.args):
        if not _match(pa, sa, binding):
            return False
    return True


def _neighbors(t: Term, rules, size_cap: int, pool: Sequence[Term]):
    out = []
    for path, sub in positions(t):
        for rule in rules:
            binding: dict = {}
            if not _match(rule.lhs, sub, binding):
                continue
            if rule.extra_vars:
                combos = product(pool, repeat=len(rule.extra_vars))
            else:
                combos = (None,)
            for combo in combos:
                b = binding if combo is None else {**binding, **dict(zip(rule.extra_vars, combo))}
                new_sub = substitute(rule.rhs, b)
                if t.size - sub.size + new_sub.size > size_cap:
                    continue
                new = replace_at(t, path, new_sub)
                if new == t:
                    continue
                step = RewriteStep(t, new, rule.eq_index, rule.forward, path, tuple(sorted(b.items())))
                out.append((new, step))
    return out


def _query_pool(theory: Theory, *terms: Term) -> list[Term]:
    pool: list[Term] = []
    seen = set()
    for t in terms:
        for v in var_names(t):
            if v not in seen:
                seen.add(v)
                pool.append(Var(v))
    pool.extend(App(c, ()) for c in theory.signature.constants())
    return pool


def _splice(meet, vis_l, vis_r) -> RewriteTrace:
    fwd = []
    cur = meet
    while vis_l[cur] is not None:
        parent, step = vis_l[cur]
        fwd.append(step)
        cur = parent
    fwd.reverse()
    back = []
    cur = meet
    while vis_r[cur] is not None:
        parent, step = vis_r[cur]
        back.append(
            RewriteStep(step.after, step.before, step.eq_index, not step.forward, step.path, step.binding)
        )
        cur = parent
    return RewriteTrace(tuple(fwd + back))


def prove(theory: Theory, eq: Equation, budget: Budget = DEFAULT_BUDGET) -> Verdict:
    """Bounded proof search for theory |- eq. Never returns Refuted."""
    check_term(theory.signature, eq.lhs)
    check_term(theory.signature, eq.rhs)
    if eq.lhs == eq.rhs:
        return Proved(RewriteTrace(()))
    nf = catalog_normalizer(theory)
    if nf is not None:
        if nf.key(eq.lhs) == nf.key(eq.rhs):
            return Proved(NormalFormCertificate(nf.name))
        return Unknown(f"distinct {nf.name} normal forms (not derivable)")
    cap = max(budget.max_term_size, eq.lhs.size, eq.rhs.size)
    pool = _query_pool(theory, eq.lhs, eq.rhs)
    rules = _rules(theory)
    vis = ({eq.lhs: None}, {eq.rhs: None})
    frontier: list[list[Term]] = [[eq.lhs], [eq.rhs]]
    steps = 0
    while frontier[0] and frontier[1]:
        side = 0 if len(frontier[0]) <= len(frontier[1]) else 1
        other = 1 - side
        nxt = []
        for t in frontier[side]:
            steps += 1
            if steps > budget.max_steps:
                return Unknown("proof search step budget exhausted")
            for new, step in _neighbors(t, rules, cap, pool):
                if new in vis[side]:
                    continue
                vis[side][new] = (t, step)
                if new in vis[other]:
                    # vis[0] is rooted at the lhs regardless of which side
                    # just expanded
                    return Proved(_splice(new, vis[0], vis[1]))
                nxt.append(new)
        frontier[side] = nxt
    return Unknown(f"rewrite closure exhausted at term size {cap}")


def replay(theory: Theory, eq: Equation, verdict: Verdict) -> bool:
    """Mechanically re-check a Proved verdict's witness."""
    if not isinstance(verdict, Proved):
        return False
    w = verdict.witness
    if isinstance(w, NormalFormCertificate):
        nf = catalog_normalizer(theory)
        return nf is not None and nf.name == w.normalizer and nf.key(eq.lhs) == nf.key(eq.rhs)
    if not isinstance(w, RewriteTrace):
        return False
    cur = eq.lhs
    for step in w.steps:
        if step.before != cur:
            return False
        ax = theory.equations[step.eq_index]
        lhs, rhs = (ax.lhs, ax.rhs) if step.forward else (ax.rhs, ax.lhs)
        binding = dict(step.binding)
        if substitute(lhs, binding) != subterm_at(cur, step.path):
            return False
        cur = replace_at(cur, step.path, substitute(rhs, binding))
        if cur != step.after:
            return False
    return cur == eq.rhs


def decide(theory: Theory, eq: Equation, budget: Budget = DEFAULT_BUDGET) -> Verdict:
    """Refute-then-prove. Unknown only when both directions come up empty."""
    if eq.lhs == eq.rhs:
        return Proved(RewriteTrace(()))
    nf = catalog_normalizer(theory)
    if nf is not None and nf.key(eq.lhs) == nf.key(eq.rhs):
        return Proved(NormalFormCertificate(nf.name))
    r = refute(theory, eq, budget)
    if r.is_refuted:
        return r
    p = prove(theory, eq, budget)
    if p.is_proved:
        return p
    return Unknown(f"not refuted ({r.reason}); not proved ({p.reason})")


# ---------------------------------------------------------------------------
# Normalization


def normalize(
    theory: Theory,
    t: Term,
    budget: Budget = DEFAULT_BUDGET,
    var_order: Optional[Sequence[str]] = None,
) -> Term:
    """Canonical representative of t's equivalence class, within budget.

    For catalog theories this is the exact normal form. Otherwise it is the
    canonical-order minimum of the size-bounded rewrite closure, iterated to
    a fixpoint so the result is idempotent for a fixed budget.
    """
    check_term(theory.signature, t)
    rank = {v: i for i, v in enumerate(var_order)} if var_order is not None else None
    if rank is not None:
        missing = [v for v in var_names(t) if v not in rank]
        if missing:
            raise TermError(f"var_order does not cover {missing}")
    nf = catalog_normalizer(theory)
    if nf is not None:
        return nf.render(nf.key(t), rank)
    cur = t
    while True:
        best = _closure_min(theory, cur, budget, rank)
        if best == cur:
            return cur
        cur = best


def _closure_min(theory, t, budget, rank):
    def key(u):
        return term_key(u, rank)

    vs = var_names(t)
    floor = None
    if vs:
        least = min(vs, key=lambda v: rank[v] if rank is not None else v)
        floor = key(Var(least))
    elif theory.signature.constants():
        floor = key(App(theory.signature.constants()[0], ()))
    cap = max(budget.max_term_size, t.size)
    pool = _query_pool(theory, t)
    rules = _rules(theory)
    best, best_key = t, key(t)
    if floor is not None and best_key == floor:
        return best
    seen = {t}
    frontier = [t]
    steps = 0
    while frontier:
        nxt = []
        for u in frontier:
            steps += 1
            if steps > budget.max_steps:
                return best
            for new, _ in _neighbors(u, rules, cap, pool):
                if new in seen:
                    continue
                seen.add(new)
                nk = key(new)
                if nk < best_key:
                    best, best_key = new, nk
                    if floor is not None and best_key == floor:
                        return best
                nxt.append(new)
        frontier = nxt
    return best


# ---------------------------------------------------------------------------
# Internal three-valued equality filter
#
# Searches (Mal'cev terms, witnesses, carrier dedup) need a fast "provably
# equal / provably distinct / unknown" test. Distinctness goes through a
# fingerprint over the first few cached models (a genuine countermodel, so
# the answer matches what full refutation would eventually say); equality
# goes through the exact normalizer or bounded proof search.

_FINGERPRINT_SIZE = 2
_FINGERPRINT_SPACE_CAP = 8192
_FINGERPRINT_ASSIGNMENT_CAP = 4096


def _fingerprint_models(theory: Theory, budget: Budget) -> list[FiniteAlgebra]:
    """The (exhaustively enumerated) models used for quick distinctness
    checks: every model of size <= 2, provided the table space is small.
    Depends only on the theory, so results are cache-warmth independent."""
    out = []
    for k in range(1, min(_FINGERPRINT_SIZE, budget.max_model_size) + 1):
        cells = sum(k ** a for _, a in theory.signature.symbols)
        if k ** cells > _FINGERPRINT_SPACE_CAP:
            break
        s = _stream(theory, k)
        while not s.finished:
            s.advance(float("inf"))
        out.extend(alg for alg, _ in s.found)
    return out


def tri_equal(theory: Theory, a: Term, b: Term, budget: Budget = DEFAULT_BUDGET):
    """Returns ("proved", Verdict) | ("refuted", (model, env) | None) |
    ("unknown", reason)."""
    if a == b:
        return ("proved", Proved(RewriteTrace(())))
    nf = catalog_normalizer(theory)
    if nf is not None:
        if nf.key(a) == nf.key(b):
            return ("proved", Proved(NormalFormCertificate(nf.name)))
        return ("refuted", None)
    vs = var_names(a) + [v for v in var_names(b) if v not in var_names(a)]
    for alg in _fingerprint_models(theory, budget):
        if alg.size ** len(vs) > _FINGERPRINT_ASSIGNMENT_CAP:
            continue
        for vals in product(range(alg.size), repeat=len(vs)):
            env = dict(zip(vs, vals))
            if eval_term(alg, a, env) != eval_term(alg, b, env):
                return ("refuted", (alg, env))
    p = prove(theory, Equation(a, b), budget)
    if p.is_proved:
        return ("proved", p)
    return ("unknown", p.reason)
