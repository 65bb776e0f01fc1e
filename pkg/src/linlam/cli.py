"""Command-line entry point: ``linlam <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from .catalogue import (Catalogue, DecodeError, ShapeError, UnknownName,
                        default_catalogue, encoding)
from .kernel import (ParseError, parse_program, parse_term, parse_type,
                     print_decl, print_term, print_type, NamedDef)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


@dataclass
class CommandResult:
    code: int = EXIT_OK
    lines: list[str] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)
    json: bool = False

    def say(self, *lines: str) -> None:
        self.lines.extend(lines)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _source(text: str, is_file: bool) -> str:
    if is_file:
        with open(text, encoding="utf-8") as fh:
            return fh.read()
    return text


def _catalogue(args) -> Catalogue:
    cat = default_catalogue()
    path = getattr(args, "catalogue", None)
    if path:
        with open(path, encoding="utf-8") as fh:
            cat = cat.replace(fh.read())
    return cat


def _free(spec: Optional[str]) -> dict:
    """``x,y:'a -> 'a`` style declarations of free variables."""
    out: dict = {}
    if not spec:
        return out
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            names, ty = part.split(":", 1)
            a = parse_type(ty)
        else:
            names, a = part, None
        for n in names.split(","):
            out[n.strip()] = a
    return out


def _goal(text: str):
    """A goal type; the letter p (as in the Boolean types) is accepted for 'a."""
    import re
    return parse_type(re.sub(r"(?<!['\w])p(?![\w'])", "'a", text))


# ---------------------------------------------------------------------------
# commands


def cmd_parse(args) -> CommandResult:
    r = CommandResult()
    text = _source(args.source, args.file)
    # declarations and ';'-terminated sessions go through the program parser
    program = args.file or ";" in text or text.lstrip().startswith("fun")
    for item in parse_program(text) if program else [parse_term(text)]:
        r.say(print_decl(item) if isinstance(item, NamedDef) else print_term(item))
    return r


def cmd_infer(args) -> CommandResult:
    from .typecheck import infer
    cat = _catalogue(args)
    r = CommandResult()
    src = _source(args.term, args.file)
    items = parse_program(src) if args.file else [parse_term(src)]
    env = dict(cat.env)
    from .typecheck import generalize
    for item in items:
        if isinstance(item, NamedDef):
            a = infer(item.term, env)
            env[item.name] = generalize(a)
            r.say(f"val {item.name} = fn : {a}")
        else:
            a = infer(item, env, _free(args.free))
            r.say(str(a))
            r.records.append({"check": "infer", "status": "ok", "expected": "", "actual": str(a)})
    return r


def cmd_normalize(args) -> CommandResult:
    from .rewrite import eta_long
    cat = _catalogue(args)
    t = parse_term(_source(args.term, args.file))
    nf = cat.normalize(t, fuel=args.fuel, trace=args.trace)
    r = CommandResult()
    if args.trace:
        r.say(f"   0 start    {print_term(t)}")
        r.say(*nf.trace.lines())
    out = nf.term
    if args.eta:
        out = eta_long(out, parse_type(args.eta))
    from .rewrite import _tidy
    r.say(print_term(_tidy(out)))
    c = nf.trace.counts
    r.say(f"(* steps: beta {c['beta']}, tensor {c['tensor']}, commute {c['commute']} *)")
    r.records.append({"check": "normalize", "status": "ok", "expected": "",
                      "actual": print_term(_tidy(out)), "counts": dict(c)})
    return r


def cmd_eq(args) -> CommandResult:
    from .kernel import alpha_eq
    from .rewrite import eta_long
    from .typecheck import joint_type
    cat = _catalogue(args)
    t1, t2 = parse_term(args.lhs), parse_term(args.rhs)
    free = _free(args.free)
    if args.type:
        ty = parse_type(args.type)
        free_types = {k: v for k, v in free.items() if v is not None}
        from .typecheck import TypeCheckError, check_at
        for t in (t1, t2):
            if not check_at(t, ty, cat.env, free or None):
                raise TypeCheckError(f"term does not have type {ty}", t)
    else:
        ty, free_types = joint_type(t1, t2, cat.env, tuple(free))
    n1 = eta_long(cat.normalize(t1, fuel=args.fuel).term, ty, free_types)
    n2 = eta_long(cat.normalize(t2, fuel=args.fuel).term, ty, free_types)
    same = alpha_eq(n1, n2)
    r = CommandResult(EXIT_OK if same else EXIT_FAILED)
    r.say(f"{'equal' if same else 'different'} at {print_type(ty)}")
    if not same:
        r.say(f"  lhs: {print_term(n1)}", f"  rhs: {print_term(n2)}")
    r.records.append({"check": "eq", "status": "pass" if same else "FAIL",
                      "expected": print_term(n2), "actual": print_term(n1)})
    return r


def cmd_inhabitants(args) -> CommandResult:
    from .inhabit import (DEFAULT_STEP_BUDGET, InhabitQuery, count_inhabitants,
                          enumerate_inhabitants)
    goal = _goal(args.type)
    budget = args.budget or DEFAULT_STEP_BUDGET
    r = CommandResult()
    if args.count and not args.list:
        n = count_inhabitants(goal, memo=args.memo, step_budget=budget)
        r.say(str(n))
        r.records.append({"check": "count", "status": "ok", "expected": "", "actual": n})
        return r
    terms = enumerate_inhabitants(InhabitQuery(goal, args.max_solutions, budget))
    for t in terms:
        r.say(print_term(t))
    r.say(f"(* {len(terms)} inhabitant(s) of {print_type(goal)} *)")
    r.records.extend({"check": "inhabitant", "status": "ok", "expected": "", "actual": print_term(t)}
                     for t in terms)
    return r


def cmd_survey(args) -> CommandResult:
    from .inhabit import DEFAULT_STEP_BUDGET, all_tables, representable_functions
    cat = _catalogue(args)
    enc = encoding(args.encoding, cat)
    stats: dict = {}
    tables = representable_functions(enc, args.arity, cat=cat, stats=stats,
                                     step_budget=args.budget or DEFAULT_STEP_BUDGET)
    r = CommandResult()
    for t in sorted(tables, key=lambda t: t.outputs):
        r.say(f"{t}  {t.name or ''}".rstrip())
        r.records.append({"check": "table", "status": "ok", "expected": "", "actual": str(t)})
    missing = all_tables(args.arity) - tables
    r.say(f"(* {len(tables)} of {2 ** 2 ** args.arity} tables from {stats['inhabitants']} "
          f"inhabitants; missing: {' '.join(sorted((m.name or str(m)) for m in missing)) or 'none'} *)")
    return r


def cmd_catalogue(args) -> CommandResult:
    cat = _catalogue(args)
    r = CommandResult()
    if args.action == "list":
        for e in cat.entries.values():
            tag = "  (derived)" if e.derived else ""
            r.say(f"{e.name:<11} : {e.scheme.body}{tag}")
        return r
    if not args.name:
        raise UsageError("catalogue show needs a name")
    term, scheme = cat.lookup(args.name)
    e = cat.entries[args.name]
    r.say(print_decl(e.decl), f"val {e.name} = fn : {scheme.body}")
    return r


def cmd_verify_paper(args) -> CommandResult:
    from .verify import run_checks
    cat = _catalogue(args)
    r = CommandResult()
    failed = 0
    for res in run_checks(cat, args.only, args.budget):
        failed += not res.ok
        line = f"{res.status:<4}  {res.check:<34} {res.seconds:7.2f}s"
        if not res.ok:
            line += f"\n      expected: {res.expected}\n      actual:   {res.actual}"
        r.say(line)
        r.records.append(res.as_json())
        if not args.json:
            print(line, flush=True)
    if not args.json:
        r.lines = []
    r.say(f"{len(r.records) - failed}/{len(r.records)} checks passed")
    r.code = EXIT_OK if failed == 0 else EXIT_FAILED
    return r


def cmd_emit_sml(args) -> CommandResult:
    from .emit import emit_sml
    cat = _catalogue(args)
    text = emit_sml(args.target, cat=cat, rename_primes=args.rename_primes,
                    with_deps=args.with_deps)
    r = CommandResult()
    r.lines = text.rstrip("\n").split("\n")
    return r


def _load_circuit(path: str):
    from .circuits import parse_netlist
    with open(path, encoding="utf-8") as fh:
        return parse_netlist(fh.read())


def cmd_compile(args) -> CommandResult:
    from .circuits import compile_circuit, report, type_of_compiled
    cat = _catalogue(args)
    c = _load_circuit(args.file)
    t = compile_circuit(c, cat)
    r = CommandResult()
    if args.emit_term or not args.report:
        r.say(print_term(t))
    if args.report:
        rep = report(c, cat, t)
        r.say(*rep.lines(), f"type: {type_of_compiled(c, cat, t)}")
        r.records.append({"check": "size-bound", "status": "pass" if rep.size <= rep.bound else "FAIL",
                          "expected": f"<= {rep.bound}", "actual": rep.size})
        if rep.size > rep.bound:
            r.code = EXIT_FAILED
    return r


def _inputs(spec: str) -> dict[str, bool]:
    out = {}
    for part in filter(None, (p.strip() for p in (spec or "").split(","))):
        if "=" not in part:
            raise UsageError(f"bad input assignment {part!r} (want wire=0|1)")
        w, v = part.split("=", 1)
        if v.strip() not in ("0", "1"):
            raise UsageError(f"input {w} must be 0 or 1")
        out[w.strip()] = v.strip() == "1"
    return out


def cmd_eval(args) -> CommandResult:
    from .circuits import NetlistError, evaluate, simulate
    cat = _catalogue(args)
    c = _load_circuit(args.file)
    ins = _inputs(args.inputs)
    unknown = set(ins) - set(c.inputs)
    if unknown:
        raise NetlistError(f"not an input wire: {', '.join(sorted(unknown))}")
    ev = evaluate(c, ins, cat, fuel=args.fuel)
    ref = simulate(c, ins)
    r = CommandResult(EXIT_OK if ev.value == ref else EXIT_INTERNAL)
    r.say(str(int(ev.value)))
    if args.trace:
        r.say(*ev.report.lines())
    r.records.append({"check": "eval", "status": "pass" if ev.value == ref else "FAIL",
                      "expected": int(ref), "actual": int(ev.value)})
    return r


def cmd_bench(args) -> CommandResult:
    import random
    from .circuits import STEP_COEFFICIENT, evaluate, random_circuit, simulate
    cat = _catalogue(args)
    c = random_circuit(args.gates, args.seed)
    rng = random.Random(args.seed)
    ins = {w: rng.random() < 0.5 for w in c.inputs}
    t0 = time.perf_counter()
    ev = evaluate(c, ins, cat, fuel=args.fuel)
    dt = time.perf_counter() - t0
    ok = ev.value == simulate(c, ins)
    rep = ev.report
    r = CommandResult(EXIT_OK if ok else EXIT_FAILED)
    r.say(f"gates {args.gates}  inputs {len(c.inputs)}  seed {args.seed}",
          f"term size {rep.size} (bound {rep.bound})",
          f"steps {rep.steps} {rep.counts} (quadratic bound {STEP_COEFFICIENT * args.gates ** 2:.0f})",
          f"value {int(ev.value)} (simulator {'agrees' if ok else 'DISAGREES'})",
          f"time {dt:.3f}s")
    r.records.append({"check": "bench", "status": "pass" if ok else "FAIL", "expected": "agree",
                      "actual": {"size": rep.size, "bound": rep.bound, "steps": rep.steps, "seconds": dt}})
    return r


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    def flags(defaults: bool) -> argparse.ArgumentParser:
        # the copy attached to subcommands must not overwrite values given
        # before the subcommand, hence SUPPRESS there
        d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        f = argparse.ArgumentParser(add_help=False)
        f.add_argument("--fuel", type=int, default=d(None), help="reduction step limit")
        f.add_argument("--budget", type=int, default=d(None), help="search step budget")
        f.add_argument("--json", action="store_true", default=d(False), help="JSON lines output")
        f.add_argument("--trace", action="store_true", default=d(False), help="show reduction steps")
        f.add_argument("--catalogue", metavar="FILE", default=d(None),
                       help="SML declarations replacing catalogue definitions")
        return f

    common = flags(False)

    p = argparse.ArgumentParser(prog="linlam", parents=[flags(True)],
                                description="Linear lambda calculus toolkit: types, "
                                            "normalization, inhabitants and Boolean circuits.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("parse", cmd_parse, "parse and pretty-print a term (or a file of declarations)")
    sp.add_argument("source")
    sp.add_argument("-f", "--file", action="store_true", help="SOURCE is a file")

    sp = add("infer", cmd_infer, "principal type of a term")
    sp.add_argument("term")
    sp.add_argument("-f", "--file", action="store_true")
    sp.add_argument("--free", help="free variables, e.g. \"g\" or \"x,y:'a -> 'a\"")

    sp = add("normalize", cmd_normalize, "normal form (with --trace: every step)")
    sp.add_argument("term")
    sp.add_argument("-f", "--file", action="store_true")
    sp.add_argument("--eta", metavar="TYPE", help="also eta-expand at TYPE")

    sp = add("eq", cmd_eq, "decide beta-eta equality")
    sp.add_argument("lhs")
    sp.add_argument("rhs")
    sp.add_argument("--type", help="compare at this type (default: most general common type)")
    sp.add_argument("--free", help="shared free variables, e.g. \"g\"")

    sp = add("inhabitants", cmd_inhabitants, "closed eta-long normal inhabitants of a type")
    sp.add_argument("type")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--list", action="store_true")
    g.add_argument("--count", action="store_true")
    sp.add_argument("--memo", action="store_true", help="memoized counting")
    sp.add_argument("--max-solutions", type=int, default=100_000)

    sp = add("survey", cmd_survey, "truth tables representable over an encoding")
    sp.add_argument("encoding", choices=["MH", "red", "B"])
    sp.add_argument("--arity", type=int, default=2)

    sp = add("catalogue", cmd_catalogue, "list or show catalogue definitions")
    sp.add_argument("action", choices=["list", "show"])
    sp.add_argument("name", nargs="?")

    sp = add("verify-paper", cmd_verify_paper, "run every reproduction check")
    sp.add_argument("--only", choices=["types", "identities", "counts", "surveys", "circuits"])

    sp = add("emit-sml", cmd_emit_sml, "print catalogue definitions as Standard ML")
    sp.add_argument("target", nargs="?", default="all")
    sp.add_argument("--rename-primes", action="store_true",
                    help="map True'' to True2 and so on, with a mapping comment")
    sp.add_argument("--with-deps", action="store_true")

    sp = add("compile", cmd_compile, "compile a netlist to a linear term")
    sp.add_argument("file")
    sp.add_argument("--emit-term", action="store_true")
    sp.add_argument("--report", action="store_true")

    sp = add("eval", cmd_eval, "evaluate a netlist by normalization")
    sp.add_argument("file")
    sp.add_argument("--inputs", default="", help="e.g. a=1,b=0")

    sp = add("bench", cmd_bench, "compile and evaluate a random circuit")
    sp.add_argument("--gates", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    return p


def run(argv=None) -> CommandResult:
    from .circuits import NetlistError
    from .inhabit import BudgetExceeded
    from .rewrite import FuelExhausted
    from .typecheck import LinearityError, TypeCheckError, UnifyError
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return CommandResult(EXIT_OK if exc.code == 0 else EXIT_USAGE)
    try:
        res = args.fn(args)
        res.json = args.json
        return res
    except (ParseError, NetlistError, UnknownName, ShapeError, UsageError, OSError) as exc:
        return CommandResult(EXIT_USAGE, [f"error: {exc}"])
    except (TypeCheckError, LinearityError, UnifyError, DecodeError,
            BudgetExceeded, FuelExhausted) as exc:
        return CommandResult(EXIT_FAILED, [f"{type(exc).__name__}: {exc}"])
    except Exception as exc:  # invariant violation inside the toolkit
        return CommandResult(EXIT_INTERNAL, [f"internal error: {type(exc).__name__}: {exc}"])


def main(argv=None) -> int:
    res = run(argv)
    if res.json and res.records:
        for rec in res.records:
            print(json.dumps(rec, default=str))
    else:
        out = sys.stdout if res.code in (EXIT_OK, EXIT_FAILED) else sys.stderr
        if res.lines:
            print("\n".join(res.lines), file=out)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
