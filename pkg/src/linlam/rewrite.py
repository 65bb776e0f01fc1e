"""Reduction, normalization and beta-eta equality.

Two normalizers are provided. ``step`` contracts the leftmost-outermost
redex and is what traces and strategy sampling use. The default path of
``normalize`` is an environment-based evaluator with read-back, which
performs the same kinds of contraction (counted per rule) without
re-scanning the term after every step. Because the calculus is linear, each
binder is consumed at most once, so one mutable environment is enough once
all binders have been made distinct.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .kernel import (App, Lam, LetPair, Lolli, Pair, Tensor, Term, Type,
                     Var, all_names, alpha_eq, fresh_name, free_vars,
                     print_term, rename_free, run_deep, size, subst)
from .typecheck import TypeCheckError, check_at, check_linear

BETA, TENSOR, COMMUTE = "beta", "tensor", "commute"
RULES = (BETA, TENSOR, COMMUTE)


class FuelExhausted(Exception):
    def __init__(self, steps: int):
        self.steps = steps
        super().__init__(f"normalization did not finish within {steps} steps")


@dataclass
class Step:
    rule: str
    position: tuple[int, ...]
    term: Term


@dataclass
class ReductionTrace:
    initial: Term
    steps: list[Step] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=lambda: dict.fromkeys(RULES, 0))

    @property
    def step_count(self) -> int:
        return sum(self.counts.values())

    def lines(self) -> list[str]:
        return [f"{i + 1:4d} {s.rule:<8} @{'.'.join(map(str, s.position)) or 'root'}  "
                f"{print_term(_tidy(s.term))}" for i, s in enumerate(self.steps)]


@dataclass
class Normalized:
    term: Term
    trace: ReductionTrace


# ---------------------------------------------------------------------------
# Delta expansion


def expand(t: Term, defs: Optional[Mapping[str, Term]] = None, tag: str = "") -> Term:
    """Replace free references to definitions by their closed bodies.

    Every binder of the result gets a distinct name of the form ``base#k``
    (``base#<tag>k`` with a tag); the read-back of ``normalize`` strips the
    suffix again.
    """
    defs = defs or {}
    counter = itertools.count()

    def go(u: Term, env: dict[str, str]) -> Term:
        if isinstance(u, Var):
            if u.name in env:
                return Var(env[u.name], u.loc)
            body = defs.get(u.name)
            return u if body is None else go(body, {})
        if isinstance(u, Lam):
            new = f"{u.var.split('#')[0]}#{tag}{next(counter)}"
            return Lam(new, go(u.body, {**env, u.var: new}), u.loc)
        if isinstance(u, App):
            return App(go(u.fn, env), go(u.arg, env), u.loc)
        if isinstance(u, Pair):
            return Pair(go(u.fst, env), go(u.snd, env), u.loc)
        l = f"{u.left.split('#')[0]}#{tag}{next(counter)}"
        r = f"{u.right.split('#')[0]}#{tag}{next(counter)}"
        return LetPair(l, r, go(u.subject, env), go(u.body, {**env, u.left: l, u.right: r}),
                       u.loc)

    return run_deep(go, t, {})


# ---------------------------------------------------------------------------
# Single steps


def redex_rule(t: Term) -> Optional[str]:
    if isinstance(t, App):
        if isinstance(t.fn, Lam):
            return BETA
        if isinstance(t.fn, LetPair):
            return COMMUTE
    elif isinstance(t, LetPair):
        if isinstance(t.subject, Pair):
            return TENSOR
        if isinstance(t.subject, LetPair):
            return COMMUTE
    return None


def contract(t: Term) -> Term:
    """Contract the redex at the root of t."""
    if isinstance(t, App):
        f = t.fn
        if isinstance(f, Lam):
            return subst(f.body, f.var, t.arg)
        # (let (x, y) = s in u) v  ->  let (x, y) = s in u v
        x, y, body = _freshen_pair(f, free_vars(t.arg))
        return LetPair(x, y, f.subject, App(body, t.arg))
    s = t.subject
    if isinstance(s, Pair):
        x, y, w = t.left, t.right, t.body
        fst_free = free_vars(s.fst)
        if y in fst_free:
            # w[u/x] must not expose u's own free y to the second substitution
            new = fresh_name(y, fst_free | free_vars(s.snd) | all_names(w) | {x})
            w, y = rename_free(w, {y: new}), new
        return subst(subst(w, x, s.fst), y, s.snd)
    # let (x, y) = (let (a, b) = r in u) in w  ->  let (a, b) = r in let (x, y) = u in w
    outer = LetPair(t.left, t.right, s.body, t.body)
    a, b, _ = _freshen_pair(s, free_vars(t.body) | {t.left, t.right})
    if (a, b) != (s.left, s.right):
        s = LetPair(a, b, s.subject, rename_free(s.body, {s.left: a, s.right: b}))
        outer = LetPair(t.left, t.right, s.body, t.body)
    return LetPair(a, b, s.subject, outer)


def _freshen_pair(let: LetPair, avoid: set[str]) -> tuple[str, str, Term]:
    x, y, body = let.left, let.right, let.body
    if x not in avoid and y not in avoid:
        return x, y, body
    used = avoid | all_names(let)
    nx = fresh_name(x, used) if x in avoid else x
    used = used | {nx}
    ny = fresh_name(y, used) if y in avoid else y
    return nx, ny, rename_free(body, {x: nx, y: ny})


def redex_positions(t: Term) -> list[tuple[int, ...]]:
    """All redex positions in leftmost-outermost (pre-order) order."""
    out: list[tuple[int, ...]] = []
    stack: list[tuple[Term, tuple[int, ...]]] = [(t, ())]
    while stack:
        u, pos = stack.pop()
        if redex_rule(u):
            out.append(pos)
        kids = _kids(u)
        for i in reversed(range(len(kids))):
            stack.append((kids[i], pos + (i,)))
    return out


def _kids(u: Term) -> tuple[Term, ...]:
    if isinstance(u, Var):
        return ()
    if isinstance(u, Lam):
        return (u.body,)
    if isinstance(u, App):
        return (u.fn, u.arg)
    if isinstance(u, Pair):
        return (u.fst, u.snd)
    return (u.subject, u.body)


def _replace(u: Term, i: int, new: Term) -> Term:
    if isinstance(u, Lam):
        return Lam(u.var, new, u.loc)
    if isinstance(u, App):
        return App(new, u.arg, u.loc) if i == 0 else App(u.fn, new, u.loc)
    if isinstance(u, Pair):
        return Pair(new, u.snd, u.loc) if i == 0 else Pair(u.fst, new, u.loc)
    if i == 0:
        return LetPair(u.left, u.right, new, u.body, u.loc)
    return LetPair(u.left, u.right, u.subject, new, u.loc)


def contract_at(t: Term, pos: tuple[int, ...]) -> tuple[Term, str]:
    path = [t]
    for i in pos:
        path.append(_kids(path[-1])[i])
    rule = redex_rule(path[-1])
    if rule is None:
        raise ValueError(f"no redex at position {pos}")
    new = contract(path[-1])
    for depth in range(len(pos) - 1, -1, -1):
        new = _replace(path[depth], pos[depth], new)
    return new, rule


def step(t: Term) -> Optional[tuple[Term, str]]:
    """Contract the leftmost-outermost redex; None if t is normal."""
    positions = _first_redex(t)
    if positions is None:
        return None
    return contract_at(t, positions)


def _first_redex(t: Term) -> Optional[tuple[int, ...]]:
    stack: list[tuple[Term, tuple[int, ...]]] = [(t, ())]
    while stack:
        u, pos = stack.pop()
        if redex_rule(u):
            return pos
        kids = _kids(u)
        for i in reversed(range(len(kids))):
            stack.append((kids[i], pos + (i,)))
    return None


def is_normal(t: Term) -> bool:
    return _first_redex(t) is None


# ---------------------------------------------------------------------------
# Normalization


def default_fuel(t: Term) -> int:
    return max(1000, 10 * size(t) ** 2)


def normalize(t: Term, fuel: Optional[int] = None, *,
              defs: Optional[Mapping[str, Term]] = None, trace: bool = False,
              check: bool = True) -> Normalized:
    """Normal form with respect to beta, tensor and the let commutations.

    With ``trace=True`` the leftmost-outermost strategy is run step by step and
    every intermediate term is recorded.
    """
    closed = expand(t, defs)
    if check:
        check_linear(closed)
    fuel = default_fuel(closed) if fuel is None else fuel
    if trace:
        return _normalize_traced(closed, fuel, lambda u: _first_redex(u))
    rec = ReductionTrace(closed)
    term = run_deep(_Evaluator(rec.counts, fuel).run, closed)
    return Normalized(term, rec)


def normalize_expanded(t: Term, bindings: Optional[Mapping[str, Term]] = None,
                       fuel: Optional[int] = None, free: Optional[set] = None) -> Normalized:
    """NbE on a term already produced by ``expand``, no linearity check.

    ``bindings`` maps free variables of t to expanded closed terms; all
    binder names across t and the bindings must be distinct. ``free`` may
    pass the (known) free variables of t to save a traversal.
    """
    fuel = default_fuel(t) if fuel is None else fuel
    rec = ReductionTrace(t)
    term = run_deep(_Evaluator(rec.counts, fuel).run, t, bindings, free)
    return Normalized(term, rec)


def normalize_with(t: Term, choose: Callable[[list[tuple[int, ...]]], tuple[int, ...]],
                   fuel: Optional[int] = None, *,
                   defs: Optional[Mapping[str, Term]] = None) -> Normalized:
    """Normalize by repeatedly contracting the redex picked by ``choose``."""
    closed = expand(t, defs)
    fuel = default_fuel(closed) if fuel is None else fuel

    def pick(u: Term):
        positions = redex_positions(u)
        return choose(positions) if positions else None

    return _normalize_traced(closed, fuel, pick)


def random_strategy(seed: int):
    rng = random.Random(seed)
    return lambda positions: rng.choice(positions)


def _normalize_traced(t: Term, fuel: int, pick) -> Normalized:
    rec = ReductionTrace(t)
    current = t
    while True:
        pos = pick(current)
        if pos is None:
            break
        if rec.step_count >= fuel:
            raise FuelExhausted(rec.step_count)
        current, rule = contract_at(current, pos)
        rec.counts[rule] += 1
        rec.steps.append(Step(rule, pos, current))
    return Normalized(_tidy(current), rec)


def _tidy(t: Term) -> Term:
    """Strip the ``#k`` binder suffixes introduced by expand, avoiding capture."""
    return _readback_names(t, set(n for n in free_vars(t)))


def _readback_names(t: Term, scope: set[str]) -> Term:
    def go(u: Term, ren: dict[str, str]) -> Term:
        if isinstance(u, Var):
            return Var(ren.get(u.name, u.name))
        if isinstance(u, Lam):
            n = fresh_name(u.var, scope)
            scope.add(n)
            body = go(u.body, {**ren, u.var: n})
            scope.discard(n)
            return Lam(n, body)
        if isinstance(u, App):
            return App(go(u.fn, ren), go(u.arg, ren))
        if isinstance(u, Pair):
            return Pair(go(u.fst, ren), go(u.snd, ren))
        subject = go(u.subject, ren)
        a = fresh_name(u.left, scope)
        scope.add(a)
        b = fresh_name(u.right, scope)
        scope.add(b)
        body = go(u.body, {**ren, u.left: a, u.right: b})
        scope.discard(a)
        scope.discard(b)
        return LetPair(a, b, subject, body)

    return run_deep(go, t, {})


# Values of the evaluator

class _VLam:
    __slots__ = ("var", "body")

    def __init__(self, var, body):
        self.var, self.body = var, body


class _VPair:
    __slots__ = ("fst", "snd")

    def __init__(self, fst, snd):
        self.fst, self.snd = fst, snd


class _VNeu:
    """A head variable applied to a spine of values."""

    __slots__ = ("head", "args")

    def __init__(self, head, args=()):
        self.head, self.args = head, args


class _VLet:
    """let (x, y) = neutral in k(x, y), with k suspended until read-back."""

    __slots__ = ("subject", "left", "right", "k")

    def __init__(self, subject, left, right, k):
        self.subject, self.left, self.right, self.k = subject, left, right, k


class _Evaluator:
    def __init__(self, counts: dict[str, int], fuel: int):
        self.counts = counts
        self.fuel = fuel
        self.spent = 0
        self.env: dict[str, object] = {}

    def tick(self, rule: str) -> None:
        self.counts[rule] += 1
        self.spent += 1
        if self.spent > self.fuel:
            raise FuelExhausted(self.fuel)

    def run(self, t: Term, bindings: Optional[Mapping[str, Term]] = None,
            free: Optional[set] = None) -> Term:
        self.env.clear()
        for k in self.counts:
            self.counts[k] = 0
        self.spent = 0
        self.scope = set(free_vars(t) if free is None else free)
        if bindings:
            values = {x: self.eval(b) for x, b in bindings.items()}
            self.env.update(values)
        return self.quote(self.eval(t))

    def eval(self, t: Term):
        cls = t.__class__
        if cls is Var:
            v = self.env.pop(t.name, None)
            return _VNeu(t.name) if v is None else v
        if cls is Lam:
            return _VLam(t.var, t.body)
        if cls is App:
            return self.apply(self.eval(t.fn), self.eval(t.arg))
        if cls is Pair:
            return _VPair(self.eval(t.fst), self.eval(t.snd))
        return self.let(self.eval(t.subject), t.left, t.right, t.body)

    def apply(self, f, a):
        cls = f.__class__
        if cls is _VLam:
            self.counts[BETA] += 1
            self.spent += 1
            if self.spent > self.fuel:
                raise FuelExhausted(self.fuel)
            self.env[f.var] = a
            return self.eval(f.body)
        if cls is _VNeu:
            return _VNeu(f.head, f.args + (a,))
        if cls is _VLet:
            self.tick(COMMUTE)
            k = f.k
            return _VLet(f.subject, f.left, f.right,
                         lambda x, y: self.apply(k(x, y), a))
        raise TypeCheckError("a pair cannot be applied")

    def let(self, s, x: str, y: str, body: Term):
        cls = s.__class__
        if cls is _VPair:
            self.tick(TENSOR)
            self.env[x] = s.fst
            self.env[y] = s.snd
            return self.eval(body)
        if cls is _VNeu:
            def k(vx, vy):
                self.env[x] = vx
                self.env[y] = vy
                return self.eval(body)
            return _VLet(s, x, y, k)
        if cls is _VLet:
            self.tick(COMMUTE)
            inner = s.k
            return _VLet(s.subject, s.left, s.right,
                         lambda a, b: self.let(inner(a, b), x, y, body))
        raise TypeCheckError("a function cannot be split as a pair")

    def bind_name(self, base: str) -> str:
        n = fresh_name(base, self.scope)
        self.scope.add(n)
        return n

    def quote(self, v) -> Term:
        if isinstance(v, _VLam):
            n = self.bind_name(v.var)
            self.env[v.var] = _VNeu(n)
            body = self.quote(self.eval(v.body))
            self.scope.discard(n)
            return Lam(n, body)
        if isinstance(v, _VPair):
            return Pair(self.quote(v.fst), self.quote(v.snd))
        if isinstance(v, _VNeu):
            return self.quote_neutral(v)
        subject = self.quote_neutral(v.subject)
        a = self.bind_name(v.left)
        b = self.bind_name(v.right)
        body = self.quote(v.k(_VNeu(a), _VNeu(b)))
        self.scope.discard(a)
        self.scope.discard(b)
        return LetPair(a, b, subject, body)

    def quote_neutral(self, v: _VNeu) -> Term:
        t: Term = Var(v.head)
        for a in v.args:
            t = App(t, self.quote(a))
        return t


# ---------------------------------------------------------------------------
# Eta-long forms and equality


def eta_long(t: Term, a: Type, free: Optional[Mapping[str, Type]] = None) -> Term:
    """Expand a normal term to eta-long form at type a.

    Every arrow-typed position becomes an abstraction (lets at arrow type are
    pushed under the new abstraction). Tensors are not expanded.
    """
    used = set(all_names(t)) | set(free or ())
    ctx: dict[str, Type] = dict(free or {})

    def fresh(base: str) -> str:
        n = fresh_name(base, used)
        used.add(n)
        return n

    def bind(name: str, ty: Type):
        saved = ctx.get(name)
        ctx[name] = ty
        return saved

    def unbind(name: str, saved) -> None:
        if saved is None:
            ctx.pop(name, None)
        else:
            ctx[name] = saved

    def long(u: Term, ty: Type) -> Term:
        if isinstance(ty, Lolli):
            if isinstance(u, Lam):
                saved = bind(u.var, ty.dom)
                body = long(u.body, ty.cod)
                unbind(u.var, saved)
                return Lam(u.var, body)
            if isinstance(u, Pair):
                raise TypeCheckError(f"a pair cannot have type {ty}", u)
            z = fresh("x")
            saved = bind(z, ty.dom)
            body = long(push_arg(u, z), ty.cod)
            unbind(z, saved)
            return Lam(z, body)
        if isinstance(u, LetPair):
            s, sty = neutral(u.subject)
            if not isinstance(sty, Tensor):
                raise TypeCheckError(f"let subject has type {sty}", u)
            s1, s2 = bind(u.left, sty.left), bind(u.right, sty.right)
            body = long(u.body, ty)
            unbind(u.right, s2)
            unbind(u.left, s1)
            return LetPair(u.left, u.right, s, body)
        if isinstance(ty, Tensor):
            if isinstance(u, Pair):
                return Pair(long(u.fst, ty.left), long(u.snd, ty.right))
            if isinstance(u, Lam):
                raise TypeCheckError(f"an abstraction cannot have type {ty}", u)
        elif isinstance(u, (Lam, Pair)):
            raise TypeCheckError(f"term cannot have atomic type {ty}", u)
        r, rty = neutral(u)
        if rty != ty:
            raise TypeCheckError(f"expected {ty}, found {rty}", u)
        return r

    def neutral(u: Term) -> tuple[Term, Type]:
        if isinstance(u, Var):
            if u.name not in ctx:
                raise TypeCheckError(f"no type known for {u.name!r}", u)
            return u, ctx[u.name]
        if isinstance(u, App):
            f, fty = neutral(u.fn)
            if not isinstance(fty, Lolli):
                raise TypeCheckError(f"applying a term of type {fty}", u)
            return App(f, long(u.arg, fty.dom)), fty.cod
        raise TypeCheckError("term is not in normal form", u)

    def push_arg(u: Term, z: str) -> Term:
        if isinstance(u, Lam):
            return rename_free(u.body, {u.var: z})
        if isinstance(u, LetPair):
            return LetPair(u.left, u.right, u.subject, push_arg(u.body, z))
        return App(u, Var(z))

    return run_deep(long, t, a)


def beta_eta_eq(t1: Term, t2: Term, a: Type, *,
                defs: Optional[Mapping[str, Term]] = None, env=None,
                free: Optional[Mapping[str, Type]] = None,
                check: bool = True) -> bool:
    """Equality of eta-long normal forms at type a."""
    if check:
        for t in (t1, t2):
            if not check_at(t, a, env, free):
                raise TypeCheckError(f"term does not have type {a}", t)
    n1 = eta_long(normalize(t1, defs=defs).term, a, free)
    n2 = eta_long(normalize(t2, defs=defs).term, a, free)
    return alpha_eq(n1, n2)
