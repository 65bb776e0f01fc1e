"""Standard ML source for the catalogue."""

from __future__ import annotations

import re
from typing import Iterable, Optional

from .catalogue import Catalogue, UnknownName, default_catalogue
from .kernel import (App, Lam, LetPair, NamedDef, Pair, Term, Var, all_names,
                     free_vars, print_decl)

SESSION_LINES = ("Copy True;", "Copy False;")


def rename_map(names: Iterable[str]) -> dict[str, str]:
    """True'' -> True2, not' -> not1, ...; avoids clashes with existing names."""
    names = sorted(set(names))
    taken = set(n for n in names if "'" not in n)
    out = {}
    for n in names:
        if "'" not in n:
            continue
        m = re.fullmatch(r"([^']*)('+)", n)
        base = f"{m.group(1)}{len(m.group(2))}" if m else n.replace("'", "_")
        cand, k = base, 0
        while cand in taken:
            k += 1
            cand = f"{base}_{k}"
        taken.add(cand)
        out[n] = cand
    return out


def rename_term(t: Term, mapping: dict[str, str]) -> Term:
    """Rename every occurrence (bound or free) of the names in ``mapping``."""
    r = lambda n: mapping.get(n, n)  # noqa: E731
    if isinstance(t, Var):
        return Var(r(t.name))
    if isinstance(t, Lam):
        return Lam(r(t.var), rename_term(t.body, mapping))
    if isinstance(t, App):
        return App(rename_term(t.fn, mapping), rename_term(t.arg, mapping))
    if isinstance(t, Pair):
        return Pair(rename_term(t.fst, mapping), rename_term(t.snd, mapping))
    return LetPair(r(t.left), r(t.right), rename_term(t.subject, mapping),
                   rename_term(t.body, mapping))


def dependencies(name: str, cat: Catalogue) -> list[str]:
    """The definitions ``name`` needs, itself last, in catalogue order."""
    need: set[str] = set()
    todo = [name]
    while todo:
        n = todo.pop()
        if n in need:
            continue
        if n not in cat.entries:
            raise UnknownName(n)
        need.add(n)
        todo.extend(f for f in free_vars(cat.entries[n].term) if f in cat.entries)
    return [n for n in cat.entries if n in need]


def emit_sml(target: Optional[str] = None, *, cat: Optional[Catalogue] = None,
             rename_primes: bool = False, with_deps: bool = False,
             sessions: bool = True) -> str:
    """Declarations in catalogue (hence dependency) order, one per line."""
    cat = cat or default_catalogue()
    if target in (None, "all"):
        names = list(cat.entries)
    elif with_deps:
        names = dependencies(target, cat)
    else:
        if target not in cat.entries:
            raise UnknownName(target)
        names = [target]
    decls = [cat.entries[n].decl for n in names]
    lines: list[str] = []
    extra = list(SESSION_LINES) if sessions and target in (None, "all") else []
    if rename_primes:
        used: set[str] = set()
        for d in decls:
            used |= all_names(d.term) | {d.name}
        mapping = rename_map(used | {"Copy", "True", "False"})
        if mapping:
            lines.append("(* identifier mapping: "
                         + ", ".join(f"{k} = {v}" for k, v in sorted(mapping.items())) + " *)")
        decls = [NamedDef(mapping.get(d.name, d.name), tuple(mapping.get(p, p) for p in d.params),
                          rename_term(d.body, mapping)) for d in decls]
    lines.extend(print_decl(d) for d in decls)
    lines.extend(extra)
    return "\n".join(lines) + "\n"


def mapping_from_header(text: str) -> dict[str, str]:
    """Recover the renaming recorded by ``emit_sml(rename_primes=True)``."""
    m = re.search(r"\(\* identifier mapping: (.*?) \*\)", text)
    if not m:
        return {}
    pairs = [p.split(" = ") for p in m.group(1).split(", ")]
    return {new: old for old, new in pairs}

