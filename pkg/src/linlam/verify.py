"""The reproduction checks behind ``linlam verify-paper``."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .catalogue import (IDENTITIES, PAPER_TYPES, SESSION_TYPES, Catalogue,
                        check_identity, default_catalogue, encoding,
                        same_printed_type)
from .kernel import (BOOL_B, BOOL_MH, BOOL_RED, BOOL_TENSOR, Tensor, parse_term,
                     parse_type, print_type)
from .typecheck import check_at, infer

GROUPS = ("types", "identities", "counts", "surveys", "circuits")

COUNT_GOALS = (
    ("B_MH", BOOL_MH, 2),
    ("B", BOOL_B, 2),
    ("B_red", BOOL_RED, 6),
    ("(p*p)->(p*p)", BOOL_TENSOR, 2),
    ("p->p", parse_type("'a -> 'a"), 1),
    ("p->p->p", parse_type("'a -> 'a -> 'a"), 0),
)

# Values of the Copy family checked against the doubled Boolean type only,
# since no principal type is printed for them.
COPY_SHAPES = (
    ("Copy True", BOOL_MH), ("Copy False", BOOL_MH),
    ("Copy' True'", BOOL_RED), ("Copy' False'", BOOL_RED),
    ("Copy'' True''", BOOL_B), ("Copy'' False''", BOOL_B),
)


@dataclass
class CheckResult:
    check: str
    group: str
    ok: bool
    expected: str
    actual: str
    seconds: float = 0.0

    @property
    def status(self) -> str:
        return "pass" if self.ok else "FAIL"

    def as_json(self) -> dict:
        return {"check": self.check, "status": self.status,
                "expected": self.expected, "actual": self.actual}


def _timed(group: str, name: str, fn: Callable[[], tuple[bool, str, str]]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, expected, actual = fn()
    except Exception as exc:  # a crashing check is a failing check
        ok, expected, actual = False, "no error", f"{type(exc).__name__}: {exc}"
    return CheckResult(name, group, ok, expected, actual, time.perf_counter() - t0)


def type_checks(cat: Catalogue) -> Iterator[CheckResult]:
    for name, printed in PAPER_TYPES.items():
        def run(name=name, printed=printed):
            if name not in cat.entries:
                return False, printed, "<missing>"
            got = str(cat.entries[name].scheme.body)
            return same_printed_type(printed, got), printed, got
        yield _timed("types", f"type:{name}", run)
    for expr, printed in SESSION_TYPES.items():
        def run(expr=expr, printed=printed):
            got = str(infer(parse_term(expr), cat.env))
            return same_printed_type(printed, got), printed, got
        yield _timed("types", f"type:{expr}", run)
    for expr, b in COPY_SHAPES:
        def run(expr=expr, b=b):
            want = print_type(Tensor(b, b))
            return check_at(parse_term(expr), Tensor(b, b), cat.env), f"instance {want}", \
                str(infer(parse_term(expr), cat.env))
        yield _timed("types", f"shape:{expr}", run)


def identity_checks(cat: Catalogue) -> Iterator[CheckResult]:
    for ident in IDENTITIES:
        def run(ident=ident):
            r = check_identity(ident, cat)
            return r.holds, "equal", "equal" if r.holds else r.diff()
        yield _timed("identities", ident.name, run)


def count_checks(cat: Catalogue, step_budget: Optional[int] = None) -> Iterator[CheckResult]:
    from .inhabit import DEFAULT_STEP_BUDGET, count_inhabitants
    for label, goal, want in COUNT_GOALS:
        def run(goal=goal, want=want):
            n = count_inhabitants(goal, step_budget=step_budget or DEFAULT_STEP_BUDGET)
            return n == want, str(want), str(n)
        yield _timed("counts", f"count:{label}", run)


def survey_checks(cat: Catalogue, step_budget: Optional[int] = None) -> Iterator[CheckResult]:
    from .inhabit import (DEFAULT_STEP_BUDGET, XNOR, XOR, all_tables,
                          representable_functions)
    expected = {"MH": {XOR, XNOR}, "B": all_tables(2) - {XOR, XNOR}}
    for name, want in expected.items():
        def run(name=name, want=want):
            got = representable_functions(encoding(name, cat), 2, cat=cat,
                                          step_budget=step_budget or DEFAULT_STEP_BUDGET)
            show = lambda s: " ".join(sorted(map(str, s)))  # noqa: E731
            return got == want, f"{len(want)} tables: {show(want)}", f"{len(got)} tables: {show(got)}"
        yield _timed("surveys", f"survey:{name}", run)


def circuit_checks(cat: Catalogue, max_gates: int = 4, max_inputs: int = 3) -> Iterator[CheckResult]:
    from .circuits import all_small_circuits, check_against_oracle

    def run():
        n = bad = 0
        first = ""
        for c in all_small_circuits(max_gates, max_inputs):
            n += 1
            wrong = check_against_oracle(c, cat)
            if wrong:
                bad += 1
                first = first or f"{c.to_netlist()!r} on {wrong[0]}"
        return bad == 0, "0 mismatches", f"{bad} mismatches in {n} circuits" + (f"; {first}" if first else "")
    yield _timed("circuits", f"circuits:<= {max_gates} gates, <= {max_inputs} inputs", run)


def run_checks(cat: Optional[Catalogue] = None, only: Optional[str] = None,
               step_budget: Optional[int] = None) -> Iterator[CheckResult]:
    cat = cat or default_catalogue()
    groups = GROUPS if only is None else (only,)
    for g in groups:
        if g == "types":
            yield from type_checks(cat)
        elif g == "identities":
            yield from identity_checks(cat)
        elif g == "counts":
            yield from count_checks(cat, step_budget)
        elif g == "surveys":
            yield from survey_checks(cat, step_budget)
        elif g == "circuits":
            yield from circuit_checks(cat)
        else:
            raise ValueError(f"unknown check group {g!r}")
