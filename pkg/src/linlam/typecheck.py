"""Linearity checking and principal type inference.

Inference is first-order unification over a union-find graph of type nodes.
Structure nodes are merged as well as variables, so unification terminates
even before the occurs check runs; cycles are rejected afterwards by a
single depth-first pass. Sharing keeps the types of large compiled circuits
linear in size even when their tree form would be exponential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .kernel import (App, Lam, LetPair, Lolli, Pair, Tensor, Term, TVar,
                     Type, Var, canonical_type, print_term, run_deep,
                     tvar_name, type_vars, subst_type)


# ---------------------------------------------------------------------------
# Linearity


@dataclass(frozen=True)
class Violation:
    variable: str
    count: int
    location: Optional[tuple[int, int]] = None

    def __str__(self) -> str:
        where = f" at {self.location[0]}:{self.location[1]}" if self.location else ""
        return f"{self.variable} used {self.count} times{where}"


class LinearityError(Exception):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        first = violations[0]
        self.variable, self.count, self.location = first.variable, first.count, first.location
        super().__init__("linearity violated: " + "; ".join(map(str, violations)))


@dataclass
class UsageReport:
    """Occurrence count of every binder, in binding order."""

    counts: list[tuple[str, int, Optional[tuple[int, int]]]] = field(default_factory=list)
    free: dict[str, int] = field(default_factory=dict)

    @property
    def violations(self) -> list[Violation]:
        return [Violation(n, c, loc) for n, c, loc in self.counts if c != 1]

    @property
    def ok(self) -> bool:
        return not self.violations


def usage(t: Term, linear_free=()) -> UsageReport:
    report = UsageReport()
    scopes: dict[str, list[list]] = {}

    def bind(name, loc):
        cell = [name, 0, loc]
        scopes.setdefault(name, []).append(cell)
        return cell

    def unbind(name, cell):
        scopes[name].pop()
        report.counts.append((cell[0], cell[1], cell[2]))

    def go(u: Term) -> None:
        if isinstance(u, Var):
            stack = scopes.get(u.name)
            if stack:
                stack[-1][1] += 1
            else:
                report.free[u.name] = report.free.get(u.name, 0) + 1
        elif isinstance(u, Lam):
            cell = bind(u.var, u.loc)
            go(u.body)
            unbind(u.var, cell)
        elif isinstance(u, LetPair):
            go(u.subject)
            c1 = bind(u.left, u.loc)
            c2 = bind(u.right, u.loc)
            go(u.body)
            unbind(u.right, c2)
            unbind(u.left, c1)
        elif isinstance(u, App):
            go(u.fn)
            go(u.arg)
        else:
            go(u.fst)
            go(u.snd)

    run_deep(go, t)
    for name in linear_free:
        report.counts.append((name, report.free.get(name, 0), None))
    return report


def check_linear(t: Term, linear_free=()) -> UsageReport:
    """Every bound variable (and each name in linear_free) used exactly once."""
    report = usage(t, linear_free)
    if not report.ok:
        raise LinearityError(report.violations)
    return report


# ---------------------------------------------------------------------------
# Errors, schemes, substitutions


class TypeCheckError(Exception):
    def __init__(self, message: str, term: Optional[Term] = None):
        self.term = term
        where = ""
        if term is not None:
            loc = getattr(term, "loc", None)
            shown = print_term(term)
            if len(shown) > 80:
                shown = shown[:77] + "..."
            where = f" in `{shown}`" + (f" at {loc[0]}:{loc[1]}" if loc else "")
        super().__init__(message + where)


class UnifyError(Exception):
    pass


class OccursError(UnifyError):
    pass


@dataclass(frozen=True)
class TypeScheme:
    vars: tuple[str, ...]
    body: Type

    def __str__(self) -> str:
        return str(self.body)


def generalize(a: Type) -> TypeScheme:
    a = canonical_type(a)
    return TypeScheme(tuple(type_vars(a)), a)


@dataclass(frozen=True)
class Substitution:
    mapping: Mapping[str, Type]

    def apply(self, a: Type) -> Type:
        return subst_type(a, dict(self.mapping))

    def compose(self, other: "Substitution") -> "Substitution":
        """self after other."""
        out = {k: self.apply(v) for k, v in other.mapping.items()}
        for k, v in self.mapping.items():
            out.setdefault(k, v)
        return Substitution({k: v for k, v in out.items() if v != TVar(k)})

    def __getitem__(self, name: str) -> Type:
        return self.mapping[name]

    def __contains__(self, name: str) -> bool:
        return name in self.mapping

    def __len__(self) -> int:
        return len(self.mapping)


# ---------------------------------------------------------------------------
# Type graph

_VAR, _CONST, _LOLLI, _TENSOR = range(4)


class _Node:
    __slots__ = ("kind", "name", "a", "b", "parent")

    def __init__(self, kind, name=None, a=None, b=None):
        self.kind = kind
        self.name = name
        self.a = a
        self.b = b
        self.parent = None


def _find(n: _Node) -> _Node:
    root = n
    while root.parent is not None:
        root = root.parent
    while n.parent is not None and n.parent is not root:
        n.parent, n = root, n.parent
    return root


class _Clash(Exception):
    pass


class Inference:
    """One inference session; fresh variables are local to the instance."""

    def __init__(self, env: Optional[Mapping[str, TypeScheme]] = None):
        self.env = env or {}
        self._consts: dict[str, _Node] = {}

    # construction

    def fresh(self) -> _Node:
        return _Node(_VAR)

    def const(self, name: str) -> _Node:
        node = self._consts.get(name)
        if node is None:
            node = self._consts[name] = _Node(_CONST, name)
        return node

    def from_type(self, a: Type, names: Optional[dict] = None, rigid: bool = False) -> _Node:
        names = {} if names is None else names

        def go(t: Type) -> _Node:
            if isinstance(t, TVar):
                if rigid:
                    return self.const(t.name)
                if t.name not in names:
                    names[t.name] = _Node(_VAR)
                return names[t.name]
            if isinstance(t, Lolli):
                return _Node(_LOLLI, None, go(t.dom), go(t.cod))
            return _Node(_TENSOR, None, go(t.left), go(t.right))

        return go(a)

    def instantiate(self, scheme: TypeScheme) -> _Node:
        quantified = set(scheme.vars)
        names: dict[str, _Node] = {}

        def go(t: Type) -> _Node:
            if isinstance(t, TVar):
                if t.name not in quantified:
                    return self.const(t.name)
                if t.name not in names:
                    names[t.name] = _Node(_VAR)
                return names[t.name]
            if isinstance(t, Lolli):
                return _Node(_LOLLI, None, go(t.dom), go(t.cod))
            return _Node(_TENSOR, None, go(t.left), go(t.right))

        return go(scheme.body)

    # unification

    def unify(self, x: _Node, y: _Node) -> None:
        work = [(x, y)]
        while work:
            a, b = work.pop()
            a, b = _find(a), _find(b)
            if a is b:
                continue
            if a.kind == _VAR:
                a.parent = b
            elif b.kind == _VAR:
                b.parent = a
            elif a.kind != b.kind or a.kind == _CONST:
                raise _Clash(a, b)
            else:
                a.parent = b
                work.append((a.a, b.a))
                work.append((a.b, b.b))

    def acyclic(self, roots) -> bool:
        color: dict[int, int] = {}
        for root in roots:
            stack = [(_find(root), False)]
            while stack:
                n, leaving = stack.pop()
                if leaving:
                    color[id(n)] = 2
                    continue
                c = color.get(id(n))
                if c == 2:
                    continue
                if c == 1:
                    return False
                if n.kind in (_VAR, _CONST):
                    color[id(n)] = 2
                    continue
                color[id(n)] = 1
                stack.append((n, True))
                for child in (_find(n.b), _find(n.a)):
                    cc = color.get(id(child))
                    if cc == 1:
                        return False
                    if cc is None:
                        stack.append((child, False))
        return True

    # inference

    def infer(self, t: Term, ctx: Optional[dict[str, _Node]] = None) -> _Node:
        ctx = {} if ctx is None else dict(ctx)
        return run_deep(self._infer, t, ctx)

    def _infer(self, t: Term, ctx: dict[str, _Node]) -> _Node:
        if isinstance(t, Var):
            node = ctx.get(t.name)
            if node is not None:
                return node
            scheme = self.env.get(t.name)
            if scheme is None:
                raise TypeCheckError(f"unbound name {t.name!r}", t)
            return self.instantiate(scheme)
        if isinstance(t, Lam):
            a = _Node(_VAR)
            saved = ctx.get(t.var)
            ctx[t.var] = a
            body = self._infer(t.body, ctx)
            _restore(ctx, t.var, saved)
            return _Node(_LOLLI, None, a, body)
        if isinstance(t, App):
            f = self._infer(t.fn, ctx)
            x = self._infer(t.arg, ctx)
            r = _Node(_VAR)
            try:
                self.unify(f, _Node(_LOLLI, None, x, r))
            except _Clash:
                raise TypeCheckError("cannot apply: function and argument types "
                                     "do not match", t) from None
            return r
        if isinstance(t, Pair):
            return _Node(_TENSOR, None, self._infer(t.fst, ctx), self._infer(t.snd, ctx))
        s = self._infer(t.subject, ctx)
        a, b = _Node(_VAR), _Node(_VAR)
        try:
            self.unify(s, _Node(_TENSOR, None, a, b))
        except _Clash:
            raise TypeCheckError("let-pair subject is not a tensor", t) from None
        saved_l, saved_r = ctx.get(t.left), ctx.get(t.right)
        ctx[t.left], ctx[t.right] = a, b
        body = self._infer(t.body, ctx)
        _restore(ctx, t.right, saved_r)
        _restore(ctx, t.left, saved_l)
        return body

    # read back

    def to_types(self, nodes, canonical: bool = True) -> list[Type]:
        """Convert nodes to types with one shared variable naming."""
        names: dict[int, str] = {}
        memo: dict[int, Type] = {}

        def go(n: _Node) -> Type:
            n = _find(n)
            key = id(n)
            if key in memo:
                return memo[key]
            if n.kind == _VAR:
                if key not in names:
                    names[key] = f"_t{len(names)}"
                out: Type = TVar(names[key])
            elif n.kind == _CONST:
                out = TVar(n.name)
            elif n.kind == _LOLLI:
                out = Lolli(go(n.a), go(n.b))
            else:
                out = Tensor(go(n.a), go(n.b))
            memo[key] = out
            return out

        types = [run_deep(go, n) for n in nodes]
        if not canonical:
            return types
        order: dict[str, None] = {}
        rigid = set(self._consts)
        for t in types:
            for v in type_vars(t):
                if v.startswith("_t"):
                    order.setdefault(v)
        mapping: dict[str, Type] = {}
        i = 0
        for v in order:
            while tvar_name(i) in rigid:
                i += 1
            mapping[v] = TVar(tvar_name(i))
            i += 1
        return [subst_type(t, mapping) for t in types]


def _restore(ctx, name, saved):
    if saved is None:
        del ctx[name]
    else:
        ctx[name] = saved


# ---------------------------------------------------------------------------
# Public operations


def _free_ctx(inf: Inference, free) -> dict[str, _Node]:
    ctx: dict[str, _Node] = {}
    for name, a in (free or {}).items():
        ctx[name] = inf.fresh() if a is None else inf.from_type(a, rigid=True)
    return ctx


def infer(t: Term, env: Optional[Mapping[str, TypeScheme]] = None,
          free: Optional[Mapping[str, Optional[Type]]] = None) -> Type:
    """Principal type of t, with variables named 'a, 'b, ... by first use.

    ``free`` declares free variables that must each be used exactly once;
    a declared type of None means "infer it".
    """
    check_linear(t, linear_free=tuple(free or ()))
    inf = Inference(env)
    node = inf.infer(t, _free_ctx(inf, free))
    if not inf.acyclic([node]):
        raise TypeCheckError("occurs check failed: infinite type", t)
    return inf.to_types([node])[0]


def infer_scheme(t: Term, env: Optional[Mapping[str, TypeScheme]] = None) -> TypeScheme:
    return generalize(infer(t, env))


def joint_type(t1: Term, t2: Term, env=None, free_names=()) -> tuple[Type, dict[str, Type]]:
    """Most general common type of two terms sharing free variables.

    Returns the type and the inferred types of the shared free variables,
    named consistently.
    """
    check_linear(t1, linear_free=tuple(free_names))
    check_linear(t2, linear_free=tuple(free_names))
    inf = Inference(env)
    ctx = {n: inf.fresh() for n in free_names}
    a = inf.infer(t1, ctx)
    b = inf.infer(t2, ctx)
    try:
        inf.unify(a, b)
    except _Clash:
        raise TypeCheckError("the two sides have incompatible types", t2) from None
    roots = [a] + [ctx[n] for n in free_names]
    if not inf.acyclic(roots):
        raise TypeCheckError("occurs check failed: infinite type", t2)
    types = inf.to_types(roots)
    return types[0], dict(zip(free_names, types[1:]))


def check_at(t: Term, a: Type, env: Optional[Mapping[str, TypeScheme]] = None,
             free: Optional[Mapping[str, Optional[Type]]] = None) -> bool:
    """Does t have type a, with the variables of a held rigid?"""
    check_linear(t, linear_free=tuple(free or ()))
    inf = Inference(env)
    node = inf.infer(t, _free_ctx(inf, free))
    try:
        inf.unify(node, inf.from_type(a, rigid=True))
    except _Clash:
        return False
    return inf.acyclic([node])


def is_instance(general: Type, specific: Type) -> bool:
    """Is ``specific`` a substitution instance of ``general``?"""
    inf = Inference()
    g = inf.from_type(general)
    try:
        inf.unify(g, inf.from_type(specific, rigid=True))
    except _Clash:
        return False
    return inf.acyclic([g])


def unify(a: Type, b: Type) -> Substitution:
    """Most general unifier of two types (variables shared by name)."""
    inf = Inference()
    names: dict[str, _Node] = {}
    na, nb = inf.from_type(a, names), inf.from_type(b, names)
    try:
        inf.unify(na, nb)
    except _Clash as exc:
        x, y = exc.args
        raise UnifyError(f"cannot unify {_describe(x)} with {_describe(y)}") from None
    if not inf.acyclic(list(names.values())):
        raise OccursError(f"occurs check: {a} and {b} need an infinite type")
    # name each unbound class after one of its original variables
    rep_name: dict[int, str] = {}
    for name, node in names.items():
        root = _find(node)
        if root.kind == _VAR:
            rep_name.setdefault(id(root), name)
    memo: dict[int, Type] = {}

    def go(n: _Node) -> Type:
        n = _find(n)
        if id(n) in memo:
            return memo[id(n)]
        if n.kind == _VAR:
            out: Type = TVar(rep_name.setdefault(id(n), f"_u{len(rep_name)}"))
        elif n.kind == _LOLLI:
            out = Lolli(go(n.a), go(n.b))
        else:
            out = Tensor(go(n.a), go(n.b))
        memo[id(n)] = out
        return out

    mapping = {}
    for name, node in names.items():
        image = go(node)
        if image != TVar(name):
            mapping[name] = image
    return Substitution(mapping)


def _describe(n: _Node) -> str:
    return {_LOLLI: "a function type", _TENSOR: "a tensor type"}.get(
        n.kind, f"'{n.name}" if n.name else "a variable")
