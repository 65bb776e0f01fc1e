"""Abstract syntax, parsing and printing for linear types and terms.

The surface syntax is the Standard ML fragment used throughout the
library::

    term ::= fn x => term | let val (x, y) = term in term end | atom {atom}
    atom ::= x | ( term ) | ( term , term )
    decl ::= fun f x1 ... xn = term ;
    type ::= prod [-> type]            prod ::= atomT {* atomT}
    atomT ::= 'a | ( type )
"""

from __future__ import annotations

import re
import sys
import threading
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self) -> str:
        return print_type(self)


@dataclass(frozen=True)
class Tensor:
    left: "Type"
    right: "Type"

    def __str__(self) -> str:
        return print_type(self)


@dataclass(frozen=True)
class Lolli:
    dom: "Type"
    cod: "Type"

    def __str__(self) -> str:
        return print_type(self)


Type = Union[TVar, Tensor, Lolli]


def arrows(*types: Type) -> Type:
    """Right-nested linear implication ``t1 -> t2 -> ... -> tn``."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Lolli(t, result)
    return result


def type_vars(a: Type) -> list[str]:
    """Type variable names in order of first appearance (left to right)."""
    seen: dict[str, None] = {}
    stack = [a]
    while stack:
        t = stack.pop()
        if isinstance(t, TVar):
            seen.setdefault(t.name, None)
        elif isinstance(t, Tensor):
            stack.append(t.right)
            stack.append(t.left)
        else:
            stack.append(t.cod)
            stack.append(t.dom)
    return list(seen)


def subst_type(a: Type, mapping: dict[str, Type]) -> Type:
    if isinstance(a, TVar):
        return mapping.get(a.name, a)
    if isinstance(a, Tensor):
        return Tensor(subst_type(a.left, mapping), subst_type(a.right, mapping))
    return Lolli(subst_type(a.dom, mapping), subst_type(a.cod, mapping))


def tvar_name(i: int) -> str:
    letter = chr(ord("a") + i % 26)
    return letter if i < 26 else f"{letter}{i // 26}"


def canonical_type(a: Type) -> Type:
    """Rename type variables to 'a, 'b, ... in order of first appearance."""
    names = type_vars(a)
    return subst_type(a, {n: TVar(tvar_name(i)) for i, n in enumerate(names)})


def type_size(a: Type) -> int:
    if isinstance(a, TVar):
        return 1
    if isinstance(a, Tensor):
        return 1 + type_size(a.left) + type_size(a.right)
    return 1 + type_size(a.dom) + type_size(a.cod)


def atom_count(a: Type) -> int:
    if isinstance(a, TVar):
        return 1
    if isinstance(a, Tensor):
        return atom_count(a.left) + atom_count(a.right)
    return atom_count(a.dom) + atom_count(a.cod)


# The Boolean types, with every atom identified with 'a.
P = TVar("a")
BOOL_MH = arrows(P, P, arrows(P, P, P), P)
BOOL_B = Lolli(Lolli(P, P), Tensor(Lolli(P, P), Lolli(P, P)))
BOOL_RED = arrows(P, P, Lolli(P, P), arrows(P, P, P), P)
BOOL_PRIME = arrows(P, Lolli(P, P), Lolli(P, P), P)
BOOL_TENSOR = Lolli(Tensor(P, P), Tensor(P, P))


# ---------------------------------------------------------------------------
# Terms

Loc = Optional[tuple[int, int]]


@dataclass(frozen=True)
class Var:
    name: str
    loc: Loc = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Term"
    loc: Loc = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    loc: Loc = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class Pair:
    fst: "Term"
    snd: "Term"
    loc: Loc = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return print_term(self)


@dataclass(frozen=True)
class LetPair:
    left: str
    right: str
    subject: "Term"
    body: "Term"
    loc: Loc = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return print_term(self)


Term = Union[Var, Lam, App, Pair, LetPair]


def apps(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def lams(names: "list[str] | tuple[str, ...]", body: Term) -> Term:
    for n in reversed(names):
        body = Lam(n, body)
    return body


@dataclass(frozen=True)
class NamedDef:
    """A ``fun name p1 ... pn = body`` declaration."""

    name: str
    params: tuple[str, ...]
    body: Term

    @property
    def term(self) -> Term:
        return lams(self.params, self.body)


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, Var):
        return ()
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, App):
        return (t.fn, t.arg)
    if isinstance(t, Pair):
        return (t.fst, t.snd)
    return (t.subject, t.body)


def subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(children(s)))


def size(t: Term) -> int:
    """Number of syntax nodes."""
    n = 0
    stack = [t]
    while stack:
        s = stack.pop()
        n += 1
        stack.extend(children(s))
    return n


def free_vars(t: Term) -> set[str]:
    out: set[str] = set()

    def go(s: Term, bound: frozenset) -> None:
        while True:
            if isinstance(s, Var):
                if s.name not in bound:
                    out.add(s.name)
                return
            if isinstance(s, Lam):
                s, bound = s.body, bound | {s.var}
            elif isinstance(s, LetPair):
                go(s.subject, bound)
                s, bound = s.body, bound | {s.left, s.right}
            else:
                a, b = children(s)
                go(a, bound)
                s = b

    go(t, frozenset())
    return out


def all_names(t: Term) -> set[str]:
    """Every variable name occurring in t, bound or free."""
    names: set[str] = set()
    for s in subterms(t):
        if isinstance(s, Var):
            names.add(s.name)
        elif isinstance(s, Lam):
            names.add(s.var)
        elif isinstance(s, LetPair):
            names.update((s.left, s.right))
    return names


def fresh_name(base: str, avoid) -> str:
    base = base.split("#")[0] or "x"
    if base not in avoid:
        return base
    base = base.rstrip("0123456789") or "x"
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def rename_free(t: Term, mapping: dict[str, str]) -> Term:
    """Rename free variables; the new names must not be bound in t."""
    if not mapping:
        return t
    if isinstance(t, Var):
        new = mapping.get(t.name)
        return t if new is None else Var(new, t.loc)
    if isinstance(t, Lam):
        inner = {k: v for k, v in mapping.items() if k != t.var}
        return Lam(t.var, rename_free(t.body, inner), t.loc)
    if isinstance(t, App):
        return App(rename_free(t.fn, mapping), rename_free(t.arg, mapping), t.loc)
    if isinstance(t, Pair):
        return Pair(rename_free(t.fst, mapping), rename_free(t.snd, mapping), t.loc)
    inner = {k: v for k, v in mapping.items() if k not in (t.left, t.right)}
    return LetPair(t.left, t.right, rename_free(t.subject, mapping),
                   rename_free(t.body, inner), t.loc)


def subst(t: Term, x: str, s: Term) -> Term:
    """Capture-avoiding substitution t[s/x]."""
    fv = free_vars(s)

    def go(u: Term) -> Term:
        if isinstance(u, Var):
            return s if u.name == x else u
        if isinstance(u, App):
            return App(go(u.fn), go(u.arg), u.loc)
        if isinstance(u, Pair):
            return Pair(go(u.fst), go(u.snd), u.loc)
        if isinstance(u, Lam):
            if u.var == x:
                return u
            if u.var in fv:
                avoid = fv | all_names(u.body) | {x}
                new = fresh_name(u.var, avoid)
                return Lam(new, go(rename_free(u.body, {u.var: new})), u.loc)
            return Lam(u.var, go(u.body), u.loc)
        subject = go(u.subject)
        if x in (u.left, u.right):
            return LetPair(u.left, u.right, subject, u.body, u.loc)
        left, right, body = u.left, u.right, u.body
        if left in fv or right in fv:
            avoid = fv | all_names(body) | {x, left, right}
            mapping = {}
            if left in fv:
                mapping[left] = fresh_name(left, avoid)
                avoid = avoid | {mapping[left]}
            if right in fv:
                mapping[right] = fresh_name(right, avoid)
            body = rename_free(body, mapping)
            left, right = mapping.get(left, left), mapping.get(right, right)
        return LetPair(left, right, subject, go(body), u.loc)

    return go(t)


# ---------------------------------------------------------------------------
# Alpha equivalence


def alpha_key(t: Term):
    """Hashable canonical form: bound names replaced by binding depth."""

    def go(u: Term, env: dict[str, int], depth: int):
        if isinstance(u, Var):
            lvl = env.get(u.name)
            return ("v", lvl) if lvl is not None else ("f", u.name)
        if isinstance(u, Lam):
            return ("l", go(u.body, {**env, u.var: depth}, depth + 1))
        if isinstance(u, App):
            return ("a", go(u.fn, env, depth), go(u.arg, env, depth))
        if isinstance(u, Pair):
            return ("p", go(u.fst, env, depth), go(u.snd, env, depth))
        inner = {**env, u.left: depth, u.right: depth + 1}
        return ("t", go(u.subject, env, depth), go(u.body, inner, depth + 2))

    return go(t, {}, 0)


def alpha_eq(t1: Term, t2: Term) -> bool:
    """Equality up to consistent renaming of bound variables."""
    stack = [(t1, t2, {}, {}, 0)]
    while stack:
        a, b, ea, eb, d = stack.pop()
        if type(a) is not type(b):
            return False
        if isinstance(a, Var):
            la, lb = ea.get(a.name), eb.get(b.name)
            if la != lb or (la is None and a.name != b.name):
                return False
        elif isinstance(a, Lam):
            stack.append((a.body, b.body, {**ea, a.var: d}, {**eb, b.var: d}, d + 1))
        elif isinstance(a, LetPair):
            stack.append((a.subject, b.subject, ea, eb, d))
            stack.append((a.body, b.body, {**ea, a.left: d, a.right: d + 1},
                          {**eb, b.left: d, b.right: d + 1}, d + 2))
        else:
            (a1, a2), (b1, b2) = children(a), children(b)
            stack.append((a1, b1, ea, eb, d))
            stack.append((a2, b2, ea, eb, d))
    return True


# ---------------------------------------------------------------------------
# Lexer and parser


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col


KEYWORDS = {"fn", "let", "val", "in", "end", "fun"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\(\*)
  | (?P<tyvar>'[A-Za-z_][A-Za-z0-9_']*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>=>|->|[(),=;*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "tyvar", "kw", "sym", "eof"
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "comment":
            end = src.find("*)", pos + 2)
            if end < 0:
                raise ParseError("unterminated comment", line, col)
            text = src[pos:end + 2]
        elif kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos += len(text)
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error("expected identifier")
        tok = self.tok
        self.i += 1
        return tok

    def done(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input")

    # terms

    def term(self) -> Term:
        tok = self.tok
        if self.at("fn"):
            self.i += 1
            x = self.ident().text
            self.expect("=>")
            return Lam(x, self.term(), (tok.line, tok.col))
        return self.appterm()

    def starts_atom(self) -> bool:
        return self.tok.kind == "ident" or self.at("(") or self.at("let")

    def appterm(self) -> Term:
        if not self.starts_atom():
            raise self.error("expected a term")
        t = self.atom()
        while self.starts_atom():
            tok = self.tok
            t = App(t, self.atom(), (tok.line, tok.col))
        return t

    def atom(self) -> Term:
        # let ... in ... end is atomic, as in SML
        tok = self.tok
        if tok.kind == "ident":
            self.i += 1
            return Var(tok.text, (tok.line, tok.col))
        if self.at("let"):
            self.i += 1
            self.expect("val")
            self.expect("(")
            x = self.ident()
            self.expect(",")
            y = self.ident()
            if x.text == y.text:
                raise ParseError(f"duplicate binder {y.text!r}", y.line, y.col)
            self.expect(")")
            self.expect("=")
            subject = self.term()
            self.expect("in")
            body = self.term()
            self.expect("end")
            return LetPair(x.text, y.text, subject, body, (tok.line, tok.col))
        self.expect("(")
        first = self.term()
        if self.at(","):
            self.i += 1
            second = self.term()
            self.expect(")")
            return Pair(first, second, (tok.line, tok.col))
        self.expect(")")
        return first

    def decl(self) -> NamedDef:
        if self.at("val"):
            self.i += 1
            name = self.ident().text
            self.expect("=")
            body = self.term()
            if self.at(";"):
                self.i += 1
            return NamedDef(name, (), body)
        self.expect("fun")
        name = self.ident().text
        params: list[str] = []
        while self.tok.kind == "ident":
            tok = self.ident()
            if tok.text in params:
                raise ParseError(f"duplicate parameter {tok.text!r} in fun {name}",
                                 tok.line, tok.col)
            params.append(tok.text)
        if not params:
            raise self.error("fun declaration needs at least one parameter")
        self.expect("=")
        body = self.term()
        if self.at(";"):
            self.i += 1
        return NamedDef(name, tuple(params), body)

    # types

    def type(self) -> Type:
        left = self.prod()
        if self.at("->"):
            self.i += 1
            return Lolli(left, self.type())
        return left

    def prod(self) -> Type:
        t = self.atom_type()
        while self.at("*"):
            self.i += 1
            t = Tensor(t, self.atom_type())
        return t

    def atom_type(self) -> Type:
        if self.tok.kind == "tyvar":
            name = self.tok.text[1:]
            self.i += 1
            return TVar(name)
        if self.at("("):
            self.i += 1
            t = self.type()
            self.expect(")")
            return t
        raise self.error("expected a type")


def parse_term(src: str) -> Term:
    p = _Parser(src)
    t = p.term()
    p.done()
    return t


def parse_type(src: str) -> Type:
    p = _Parser(src)
    t = p.type()
    p.done()
    return t


def parse_decl(src: str) -> NamedDef:
    p = _Parser(src)
    d = p.decl()
    p.done()
    return d


def parse_program(src: str) -> list[Union[NamedDef, Term]]:
    """A sequence of declarations and top-level ``term;`` expressions."""
    p = _Parser(src)
    items: list[Union[NamedDef, Term]] = []
    while p.tok.kind != "eof":
        if p.at("fun") or p.at("val"):
            items.append(p.decl())
        else:
            items.append(p.term())
            p.expect(";")
    return items


# ---------------------------------------------------------------------------
# Printing


def print_type(a: Type, canonical: bool = False) -> str:
    if canonical:
        a = canonical_type(a)

    def go(t: Type, level: int) -> str:
        # level 0: arrow context, 1: left of '*', 2: right of '*' (atomic)
        if isinstance(t, TVar):
            return "'" + t.name
        if isinstance(t, Lolli):
            s = f"{go(t.dom, 1)} -> {go(t.cod, 0)}"
            return s if level == 0 else f"({s})"
        s = f"{go(t.left, 1)} * {go(t.right, 2)}"
        return s if level <= 1 else f"({s})"

    return run_deep(go, a, 0)


def print_term(t: Term) -> str:
    def go(u: Term, level: int) -> str:
        # level 0: anywhere, 1: function position, 2: argument position
        if isinstance(u, Var):
            return u.name
        if isinstance(u, Pair):
            return f"({go(u.fst, 0)}, {go(u.snd, 0)})"
        if isinstance(u, App):
            s = f"{go(u.fn, 1)} {go(u.arg, 2)}"
            return f"({s})" if level == 2 else s
        if isinstance(u, Lam):
            s = f"fn {u.var} => {go(u.body, 0)}"
        else:
            s = (f"let val ({u.left}, {u.right}) = {go(u.subject, 0)} "
                 f"in {go(u.body, 0)} end")
        return s if level == 0 else f"({s})"

    return run_deep(go, t, 0)


def print_decl(d: NamedDef) -> str:
    if not d.params:
        return f"val {d.name} = {print_term(d.body)};"
    return f"fun {d.name} {' '.join(d.params)} = {print_term(d.body)};"


def to_decl(name: str, t: Term) -> NamedDef:
    """Re-sugar leading abstractions into ``fun`` parameters."""
    params: list[str] = []
    while isinstance(t, Lam) and t.var not in params:
        params.append(t.var)
        t = t.body
    return NamedDef(name, tuple(params), t)


# ---------------------------------------------------------------------------
# Deep recursion support

_deep = threading.local()


def run_deep(fn, *args, **kwargs):
    """Call fn, retrying on a large-stack thread if the recursion is too deep.

    fn must be restartable: it may be interrupted by RecursionError once.
    """
    if getattr(_deep, "active", False):
        return fn(*args, **kwargs)
    try:
        return fn(*args, **kwargs)
    except RecursionError:
        pass
    result: list = []
    error: list = []

    def target():
        _deep.active = True
        try:
            result.append(fn(*args, **kwargs))
        except BaseException as exc:  # re-raised in the caller's thread
            error.append(exc)

    old_limit = sys.getrecursionlimit()
    old_stack = threading.stack_size()
    sys.setrecursionlimit(1_000_000)
    threading.stack_size(1024 * 1024 * 1024)
    try:
        th = threading.Thread(target=target)
        th.start()
        th.join()
    finally:
        threading.stack_size(old_stack)
        sys.setrecursionlimit(old_limit)
    if error:
        raise error[0]
    return result[0]
