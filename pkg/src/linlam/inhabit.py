"""Inhabitants of monomorphic linear types and Boolean representability surveys.

The search produces eta-long normal forms in the following grammar, where a
``let`` subject is a head variable applied until its result is a tensor:

    N_{A -> B} ::= fn x => N
    N_{A * B}  ::= (N, N) | let val (x, y) = R in N end
    N_p        ::= R      | let val (x, y) = R in N end
    R          ::= x | R N

Context splitting is lazy: every subgoal receives the unused hypotheses and
hands back those it did not consume.
"""

from __future__ import annotations

import functools
import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .kernel import (App, Lam, LetPair, Lolli, Pair, Tensor, Term, TVar, Type,
                     Var, alpha_key, apps, print_term, print_type, size,
                     type_vars)

DEFAULT_MAX_SOLUTIONS = 100_000
DEFAULT_STEP_BUDGET = 10 ** 8


class BudgetExceeded(Exception):
    """The search stopped early; ``partial`` holds what was found so far."""

    def __init__(self, reason: str, partial=None, steps: int = 0):
        self.reason = reason
        self.partial = partial
        self.steps = steps
        n = len(partial) if hasattr(partial, "__len__") else partial
        super().__init__(f"{reason} (partial result: {n}, steps: {steps})")


class PolymorphicQuery(ValueError):
    pass


@dataclass(frozen=True)
class InhabitQuery:
    goal: Type
    max_solutions: int = DEFAULT_MAX_SOLUTIONS
    step_budget: int = DEFAULT_STEP_BUDGET


# ---------------------------------------------------------------------------
# Focused search


def _spine(a: Type) -> tuple[tuple[Type, ...], Type]:
    args = []
    while isinstance(a, Lolli):
        args.append(a.dom)
        a = a.cod
    return tuple(args), a


class _Stop(Exception):
    pass


class _Search:
    def __init__(self, step_budget: int):
        self.budget = step_budget
        self.steps = 0
        self.spines: dict[Type, tuple] = {}

    def spine(self, a: Type):
        s = self.spines.get(a)
        if s is None:
            s = self.spines[a] = _spine(a)
        return s

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise _Stop

    def intro(self, goal: Type, ctx: tuple, d: int) -> Iterator[tuple[Term, tuple]]:
        self.tick()
        if isinstance(goal, Lolli):
            x = f"x{d}"
            for body, rest in self.intro(goal.cod, ctx + ((x, goal.dom),), d + 1):
                if all(n != x for n, _ in rest):
                    yield Lam(x, body), rest
            return
        if isinstance(goal, Tensor):
            for t1, r1 in self.intro(goal.left, ctx, d):
                for t2, r2 in self.intro(goal.right, r1, d):
                    yield Pair(t1, t2), r2
        else:
            for i, (h, ty) in enumerate(ctx):
                args, target = self.spine(ty)
                if target == goal:
                    yield from self.args(Var(h), args, 0, ctx[:i] + ctx[i + 1:], d)
        yield from self.lets(goal, ctx, d)

    def args(self, head: Term, args: tuple, k: int, ctx: tuple, d: int):
        if k == len(args):
            yield head, ctx
            return
        for a, rest in self.intro(args[k], ctx, d):
            yield from self.args(App(head, a), args, k + 1, rest, d)

    def lets(self, goal: Type, ctx: tuple, d: int):
        x, y = f"x{d}", f"x{d + 1}"
        for i, (h, ty) in enumerate(ctx):
            args, target = self.spine(ty)
            if not isinstance(target, Tensor):
                continue
            for subj, rest in self.args(Var(h), args, 0, ctx[:i] + ctx[i + 1:], d):
                inner = rest + ((x, target.left), (y, target.right))
                for body, out in self.intro(goal, inner, d + 2):
                    if all(n != x and n != y for n, _ in out):
                        yield LetPair(x, y, subj, body), out


def _order(terms: Iterable[Term]) -> list[Term]:
    seen = {}
    for t in terms:
        seen.setdefault(alpha_key(t), t)
    return sorted(seen.values(), key=lambda t: (size(t), print_term(t)))


def _check_query(goal: Type) -> None:
    # Only closed, atom-fixed goals make sense here; type variables are read as
    # atoms, so the check is purely syntactic.
    if not isinstance(goal, (TVar, Lolli, Tensor)):
        raise PolymorphicQuery(f"not a type: {goal!r}")


def iter_inhabitants(goal: Type, step_budget: int = DEFAULT_STEP_BUDGET,
                     stats: Optional[dict] = None) -> Iterator[Term]:
    """Lazily yield inhabitants in search order (possibly with alpha-duplicates)."""
    _check_query(goal)
    s = _Search(step_budget)
    try:
        for t, rest in s.intro(goal, (), 0):
            if not rest:
                yield t
    finally:
        if stats is not None:
            stats["steps"] = s.steps


def enumerate_inhabitants(q: "InhabitQuery | Type") -> list[Term]:
    """All closed eta-long normal inhabitants of the goal, ordered by (size, text)."""
    if not isinstance(q, InhabitQuery):
        q = InhabitQuery(q)
    _check_query(q.goal)
    s = _Search(q.step_budget)
    found: dict = {}
    try:
        for t, rest in s.intro(q.goal, (), 0):
            if rest:
                continue
            found.setdefault(alpha_key(t), t)
            if len(found) > q.max_solutions:
                raise BudgetExceeded("max_solutions reached", _order(found.values()), s.steps)
    except _Stop:
        raise BudgetExceeded("step budget exhausted", _order(found.values()), s.steps) from None
    return _order(found.values())


def count_inhabitants(goal: Type, *, memo: bool = False,
                      step_budget: int = DEFAULT_STEP_BUDGET,
                      max_solutions: Optional[int] = None) -> int:
    """Number of inhabitants; ``memo=True`` counts without building terms."""
    if not memo:
        q = InhabitQuery(goal, max_solutions if max_solutions is not None else 10 ** 18,
                         step_budget)
        return len(enumerate_inhabitants(q))
    return _MemoCounter(step_budget).count(goal)


class _MemoCounter:
    """Counting over (goal, context) states; hypotheses are identified by slot."""

    def __init__(self, step_budget: int):
        self.budget = step_budget
        self.steps = 0
        self.memo: dict = {}

    def count(self, goal: Type) -> int:
        try:
            return self.intro(goal, ()).get((), 0)
        except _Stop:
            raise BudgetExceeded("step budget exhausted", None, self.steps) from None

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise _Stop

    # A context is a tuple of types; results map remaining-position tuples
    # (indices into the context) to multiplicities.
    def intro(self, goal: Type, ctx: tuple) -> dict:
        key = (goal, ctx)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.tick()
        out: Counter = Counter()
        if isinstance(goal, Lolli):
            n = len(ctx)
            for rest, c in self.intro(goal.cod, ctx + (goal.dom,)).items():
                if n not in rest:
                    out[rest] += c
        else:
            if isinstance(goal, Tensor):
                for r1, c1 in self.intro(goal.left, ctx).items():
                    sub = tuple(ctx[i] for i in r1)
                    for r2, c2 in self.intro(goal.right, sub).items():
                        out[tuple(r1[j] for j in r2)] += c1 * c2
            else:
                for i, ty in enumerate(ctx):
                    args, target = _spine(ty)
                    if target == goal:
                        idx = tuple(j for j in range(len(ctx)) if j != i)
                        for rest, c in self.spine(args, ctx, idx).items():
                            out[rest] += c
            for i, ty in enumerate(ctx):
                args, target = _spine(ty)
                if not isinstance(target, Tensor):
                    continue
                idx = tuple(j for j in range(len(ctx)) if j != i)
                for rest, c in self.spine(args, ctx, idx).items():
                    sub = tuple(ctx[j] for j in rest) + (target.left, target.right)
                    m = len(rest)
                    for r2, c2 in self.intro(goal, sub).items():
                        if m in r2 or m + 1 in r2:
                            continue
                        out[tuple(rest[j] for j in r2)] += c * c2
        res = dict(out)
        self.memo[key] = res
        return res

    def spine(self, args: tuple, ctx: tuple, idx: tuple) -> dict:
        cur = {idx: 1}
        for a in args:
            nxt: Counter = Counter()
            for avail, c in cur.items():
                sub = tuple(ctx[j] for j in avail)
                for r, c2 in self.intro(a, sub).items():
                    nxt[tuple(avail[j] for j in r)] += c * c2
            cur = nxt
        return cur


def long_normal_size(goal: Type) -> int:
    """Node count shared by every eta-long normal inhabitant of ``goal``.

    Connectives plus one per positive arrow plus two per negative tensor.
    """

    def go(a: Type, pos: bool) -> int:
        if isinstance(a, TVar):
            return 0
        if isinstance(a, Lolli):
            return 1 + (1 if pos else 0) + go(a.dom, not pos) + go(a.cod, pos)
        return 1 + (0 if pos else 2) + go(a.left, pos) + go(a.right, pos)

    return go(goal, True)


# ---------------------------------------------------------------------------
# Brute-force oracle: generate raw linear syntax of a fixed size with
# unification-based pruning, then keep the eta-long normal ones.


class _Meta:
    __slots__ = ("ref",)

    def __init__(self):
        self.ref = None


class _Unifier:
    def __init__(self):
        self.trail: list[_Meta] = []

    def walk(self, t):
        while isinstance(t, _Meta) and t.ref is not None:
            t = t.ref
        return t

    def bind(self, m: _Meta, t) -> None:
        m.ref = t
        self.trail.append(m)

    def unify(self, a, b) -> bool:
        a, b = self.walk(a), self.walk(b)
        if a is b:
            return True
        if isinstance(a, _Meta):
            if self.occurs(a, b):
                return False
            self.bind(a, b)
            return True
        if isinstance(b, _Meta):
            return self.unify(b, a)
        if isinstance(a, str) or isinstance(b, str):
            return a == b
        if a[0] != b[0]:
            return False
        return self.unify(a[1], b[1]) and self.unify(a[2], b[2])

    def occurs(self, m: _Meta, t) -> bool:
        t = self.walk(t)
        if t is m:
            return True
        if isinstance(t, tuple):
            return self.occurs(m, t[1]) or self.occurs(m, t[2])
        return False

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            self.trail.pop().ref = None

    def resolve(self, t):
        t = self.walk(t)
        if isinstance(t, tuple):
            return (t[0], self.resolve(t[1]), self.resolve(t[2]))
        return t


def _to_raw(a: Type):
    if isinstance(a, TVar):
        return a.name
    if isinstance(a, Lolli):
        return ("->", _to_raw(a.dom), _to_raw(a.cod))
    return ("*", _to_raw(a.left), _to_raw(a.right))


def _from_raw(r) -> Type:
    if isinstance(r, str):
        return TVar(r)
    if isinstance(r, _Meta):
        raise ValueError("unresolved type")
    a, b = _from_raw(r[1]), _from_raw(r[2])
    return Lolli(a, b) if r[0] == "->" else Tensor(a, b)


def oracle_inhabitants(goal: Type, term_size: Optional[int] = None) -> list[Term]:
    """Independent brute-force enumeration, used to cross-check the search."""
    n = long_normal_size(goal) if term_size is None else term_size
    u = _Unifier()
    names = [f"v{i}" for i in range(2 * n + 2)]
    results = []

    # gen yields (term, unused) where ``unused`` lists bound variables still
    # available; every term has exactly ``k`` nodes.
    def gen(k: int, ty, avail: tuple, nb: int, kind: str):
        if k <= 0:
            return
        if k == 1:
            for i, (x, xt) in enumerate(avail):
                m = u.mark()
                if u.unify(xt, ty):
                    yield Var(x), avail[:i] + avail[i + 1:], nb
                u.undo(m)
            return
        if kind == "any":
            a, b = _Meta(), _Meta()
            m = u.mark()
            if u.unify(ty, ("->", a, b)):
                x = names[nb]
                for body, rest, nb2 in gen(k - 1, b, avail + ((x, a),), nb + 1, "any"):
                    if all(v != x for v, _ in rest):
                        yield Lam(x, body), rest, nb2
            u.undo(m)
            a, b = _Meta(), _Meta()
            m = u.mark()
            if u.unify(ty, ("*", a, b)):
                for k1 in range(1, k - 1):
                    for t1, r1, nb1 in gen(k1, a, avail, nb, "any"):
                        for t2, r2, nb2 in gen(k - 1 - k1, b, r1, nb1, "any"):
                            yield Pair(t1, t2), r2, nb2
            u.undo(m)
        # application: the function part is never an abstraction or a let
        for k1 in range(1, k - 1):
            a = _Meta()
            for f, r1, nb1 in gen(k1, ("->", a, ty), avail, nb, "neutral"):
                for arg, r2, nb2 in gen(k - 1 - k1, a, r1, nb1, "any"):
                    yield App(f, arg), r2, nb2
        if kind == "any":
            # let: the subject is never a pair, abstraction or let
            for k1 in range(1, k - 1):
                a, b = _Meta(), _Meta()
                for s, r1, nb1 in gen(k1, ("*", a, b), avail, nb, "neutral"):
                    x, y = names[nb1], names[nb1 + 1]
                    inner = r1 + ((x, a), (y, b))
                    for body, r2, nb2 in gen(k - 1 - k1, ty, inner, nb1 + 2, "any"):
                        if all(v not in (x, y) for v, _ in r2):
                            yield LetPair(x, y, s, body), r2, nb2

    for t, rest, _ in gen(n, _to_raw(goal), (), 0, "any"):
        if not rest:
            results.append(t)
    keep = [t for t in results if is_long_normal(t, goal)]
    return _order(keep)


def is_long_normal(t: Term, goal: Type) -> bool:
    """Bidirectional check that t is an eta-long normal form of type goal."""

    def check(u: Term, a: Type, ctx: dict) -> bool:
        if isinstance(a, Lolli):
            return isinstance(u, Lam) and check(u.body, a.cod, {**ctx, u.var: a.dom})
        if isinstance(u, LetPair):
            st = synth(u.subject, ctx)
            if not isinstance(st, Tensor):
                return False
            return check(u.body, a, {**ctx, u.left: st.left, u.right: st.right})
        if isinstance(a, Tensor):
            return isinstance(u, Pair) and check(u.fst, a.left, ctx) and check(u.snd, a.right, ctx)
        return synth(u, ctx) == a

    def synth(u: Term, ctx: dict) -> Optional[Type]:
        if isinstance(u, Var):
            return ctx.get(u.name)
        if isinstance(u, App):
            ft = synth(u.fn, ctx)
            if isinstance(ft, Lolli) and check(u.arg, ft.dom, ctx):
                return ft.cod
        return None

    return check(t, goal, {})


# ---------------------------------------------------------------------------
# Truth tables and surveys


@dataclass(frozen=True)
class TruthTable:
    arity: int
    outputs: tuple[bool, ...]

    def __post_init__(self):
        if len(self.outputs) != 2 ** self.arity:
            raise ValueError(f"a table of arity {self.arity} needs {2 ** self.arity} outputs")

    @classmethod
    def of(cls, fn, arity: int) -> "TruthTable":
        return cls(arity, tuple(bool(fn(*xs)) for xs in input_tuples(arity)))

    @classmethod
    def parse(cls, text: str) -> "TruthTable":
        bits = [c for c in text if c in "FT01"]
        out = tuple(c in "T1" for c in bits)
        return cls(len(out).bit_length() - 1, out)

    @property
    def name(self) -> Optional[str]:
        return TABLE_NAMES.get(self)

    def __str__(self) -> str:
        return "[" + ",".join("T" if b else "F" for b in self.outputs) + "]"


def input_tuples(arity: int) -> list[tuple[bool, ...]]:
    """Inputs in lexicographic order with False < True."""
    return list(itertools.product((False, True), repeat=arity))


def all_tables(arity: int) -> set[TruthTable]:
    return {TruthTable(arity, o) for o in itertools.product((False, True), repeat=2 ** arity)}


_NAMED = {
    "FALSE": lambda a, b: False, "AND": lambda a, b: a and b,
    "A&~B": lambda a, b: a and not b, "A": lambda a, b: a,
    "~A&B": lambda a, b: (not a) and b, "B": lambda a, b: b,
    "XOR": lambda a, b: a != b, "OR": lambda a, b: a or b,
    "NOR": lambda a, b: not (a or b), "XNOR": lambda a, b: a == b,
    "~B": lambda a, b: not b, "A|~B": lambda a, b: a or not b,
    "~A": lambda a, b: not a, "~A|B": lambda a, b: (not a) or b,
    "NAND": lambda a, b: not (a and b), "TRUE": lambda a, b: True,
}
TABLE_NAMES = {TruthTable.of(f, 2): n for n, f in _NAMED.items()}
TABLE_NAMES.update({TruthTable(1, (True, False)): "NOT", TruthTable(1, (False, True)): "ID",
                    TruthTable(1, (False, False)): "FALSE", TruthTable(1, (True, True)): "TRUE"})
XOR = TruthTable.of(_NAMED["XOR"], 2)
XNOR = TruthTable.of(_NAMED["XNOR"], 2)


def function_type(enc, arity: int) -> Type:
    a = enc.bool_type
    for _ in range(arity):
        a = Lolli(enc.bool_type, a)
    return a


def truth_table_of(t: Term, enc, arity: int, *, cat=None, strict: bool = True) -> TruthTable:
    """Apply t to every tuple of encoded inputs and decode the results.

    ``strict`` requires t to check at the monomorphic function type. Without it
    each application is only required to normalize to a value of the encoding,
    which admits polymorphic gates.
    """
    from .catalogue import decode, default_catalogue, encode
    from .typecheck import TypeCheckError, check_at
    cat = cat or default_catalogue()
    if strict and not check_at(t, function_type(enc, arity), cat.env):
        raise TypeCheckError(f"term does not have type {print_type(function_type(enc, arity))}", t)
    outs = []
    for xs in input_tuples(arity):
        outs.append(decode(apps(t, *(encode(b, enc) for b in xs)), enc, cat))
    return TruthTable(arity, tuple(outs))


def representable_functions(enc, arity: int = 2, *, max_solutions: int = DEFAULT_MAX_SOLUTIONS,
                            step_budget: int = DEFAULT_STEP_BUDGET, cat=None,
                            stats: Optional[dict] = None) -> set[TruthTable]:
    """Truth tables of all inhabitants of enc.bool_type^arity -> enc.bool_type."""
    from .catalogue import DecodeError, default_catalogue
    cat = cat or default_catalogue()
    goal = function_type(enc, arity)
    try:
        terms = enumerate_inhabitants(InhabitQuery(goal, max_solutions, step_budget))
    except BudgetExceeded as exc:
        exc.partial = _tables(exc.partial, enc, arity, cat, DecodeError)[0]
        raise
    tables, rejected = _tables(terms, enc, arity, cat, DecodeError)
    if stats is not None:
        stats.update(inhabitants=len(terms), undecodable=rejected)
    return tables


def _tables(terms, enc, arity, cat, decode_error):
    out, rejected = set(), 0
    for t in terms:
        try:
            out.add(truth_table_of(t, enc, arity, cat=cat, strict=False))
        except decode_error:
            rejected += 1
    return out, rejected
