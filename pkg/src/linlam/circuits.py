"""Boolean circuits compiled to linear terms over the (p -> p) -> (p -> p) * (p -> p) encoding."""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from .catalogue import Catalogue, decode, default_catalogue, encode, encoding
from .kernel import (KEYWORDS, App, LetPair, Term, Var, apps, size, subst)
from .rewrite import expand, normalize_expanded
from .typecheck import check_linear, infer

GATE_ARITY = {"INPUT": 0, "CONST": 0, "NOT": 1, "AND": 2, "OR": 2, "OUTPUT": 1}
_WIRE = re.compile(r"[A-Za-z0-9_]+\Z")


class NetlistError(ValueError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class Gate:
    op: str
    out: Optional[str]
    ins: tuple[str, ...] = ()
    value: Optional[bool] = None
    line: int = 0

    def __str__(self) -> str:
        if self.op == "OUTPUT":
            return f"OUTPUT {self.ins[0]}"
        if self.op == "CONST":
            return f"CONST {self.out} {int(self.value)}"
        return " ".join((self.op, self.out) + self.ins)


@dataclass
class Circuit:
    gates: list[Gate]
    fanout: dict[str, int] = field(default_factory=dict)

    @property
    def inputs(self) -> list[str]:
        return [g.out for g in self.gates if g.op == "INPUT"]

    @property
    def output(self) -> str:
        return next(g.ins[0] for g in self.gates if g.op == "OUTPUT")

    @property
    def logic_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.op not in ("INPUT", "OUTPUT")]

    def count(self, op: str) -> int:
        return sum(1 for g in self.gates if g.op == op)

    def to_netlist(self) -> str:
        return "".join(str(g) + "\n" for g in self.gates)


def parse_netlist(src: str) -> Circuit:
    """Parse and validate a netlist; gates are returned in topological order."""
    gates: list[Gate] = []
    for n, raw in enumerate(src.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        op = words[0].upper()
        if op not in GATE_ARITY:
            raise NetlistError(f"unknown gate {words[0]!r}", n)
        args = words[1:]
        want = {"INPUT": 1, "CONST": 2, "NOT": 2, "AND": 3, "OR": 3, "OUTPUT": 1}[op]
        if len(args) != want:
            raise NetlistError(f"{op} takes {want} operand(s), got {len(args)}", n)
        if op == "CONST":
            if args[1] not in ("0", "1"):
                raise NetlistError("CONST value must be 0 or 1", n)
            args, value = args[:1], args[1] == "1"
        else:
            value = None
        for w in args:
            if not _WIRE.match(w):
                raise NetlistError(f"bad wire name {w!r}", n)
        if op == "OUTPUT":
            gates.append(Gate(op, None, (args[0],), line=n))
        else:
            gates.append(Gate(op, args[0], tuple(args[1:]), value, n))
    return validate(gates)


def validate(gates: list[Gate]) -> Circuit:
    drivers: dict[str, Gate] = {}
    for g in gates:
        if g.out is None:
            continue
        if g.out in drivers:
            raise NetlistError(f"wire {g.out!r} has multiple drivers", g.line)
        drivers[g.out] = g
    outputs = [g for g in gates if g.op == "OUTPUT"]
    if len(outputs) != 1:
        raise NetlistError(f"expected exactly one OUTPUT, found {len(outputs)}",
                           outputs[1].line if len(outputs) > 1 else 0)
    fanout = {w: 0 for w in drivers}
    for g in gates:
        for w in g.ins:
            if w not in drivers:
                raise NetlistError(f"undefined wire {w!r}", g.line)
            fanout[w] += 1
    # Kahn's algorithm, stable with respect to source order.
    order: list[Gate] = []
    indeg = {id(g): sum(1 for w in g.ins) for g in gates}
    users: dict[str, list[Gate]] = {}
    for g in gates:
        for w in g.ins:
            users.setdefault(w, []).append(g)
    ready = [g for g in gates if indeg[id(g)] == 0]
    pos = {id(g): i for i, g in enumerate(gates)}
    import heapq
    heap = [(pos[id(g)], g) for g in ready]
    heapq.heapify(heap)
    while heap:
        _, g = heapq.heappop(heap)
        order.append(g)
        if g.out is not None:
            for u in users.get(g.out, ()):
                indeg[id(u)] -= 1
                if indeg[id(u)] == 0:
                    heapq.heappush(heap, (pos[id(u)], u))
    if len(order) != len(gates):
        stuck = next(g for g in gates if indeg[id(g)] > 0)
        raise NetlistError(f"cycle through wire {stuck.out!r}", stuck.line)
    for w, k in fanout.items():
        if k == 0:
            raise NetlistError(f"wire {w!r} is never used (values cannot be discarded)",
                               drivers[w].line)
    return Circuit(order, fanout)


def simulate(c: Circuit, inputs: Mapping[str, bool]) -> bool:
    """Gate-level reference semantics."""
    val: dict[str, bool] = {}
    for g in c.gates:
        if g.op == "INPUT":
            val[g.out] = bool(inputs[g.out])
        elif g.op == "CONST":
            val[g.out] = g.value
        elif g.op == "NOT":
            val[g.out] = not val[g.ins[0]]
        elif g.op == "AND":
            val[g.out] = val[g.ins[0]] and val[g.ins[1]]
        elif g.op == "OR":
            val[g.out] = val[g.ins[0]] or val[g.ins[1]]
        else:
            return val[g.ins[0]]
    raise AssertionError("validated circuits have an OUTPUT")


# ---------------------------------------------------------------------------
# Compilation


def input_variable(wire: str, cat: Optional[Catalogue] = None) -> str:
    """Free-variable name used for an INPUT wire."""
    cat = cat or default_catalogue()
    if wire in KEYWORDS or wire in cat.entries or not wire[0].isalpha():
        return "in'" + wire
    return wire


def _gate_term(g: Gate, args: list[Term]) -> Term:
    if g.op == "CONST":
        return Var("True''" if g.value else "False''")
    if g.op == "NOT":
        return App(Var("not''"), args[0])
    if g.op == "AND":
        return apps(Var("and''"), args[0], args[1])
    # De Morgan: a or b = not (and (not a) (not b))
    return App(Var("not''"), apps(Var("and''"), App(Var("not''"), args[0]),
                                  App(Var("not''"), args[1])))


def compile_circuit(c: Circuit, cat: Optional[Catalogue] = None) -> Term:
    """Open term over catalogue names with one free variable per INPUT wire.

    A wire read once is inlined. A wire read k >= 2 times is split by a
    left-nested chain of k - 1 Copy'' applications whose outputs are handed
    to the readers in topological order.
    """
    cat = cat or default_catalogue()
    frames: list[tuple[str, str, Term]] = []
    pending: dict[str, list[Term]] = {}  # wire -> copies still to hand out
    counter = itertools.count()

    def produce(w: str, e: Term) -> None:
        k = c.fanout[w]
        if k == 1:
            pending[w] = [e]
            return
        base = w if w[0].isalpha() else "w" + w
        uses = [f"{base}'{i}" for i in range(1, k + 1)]
        subject = e
        # let (t1, u_k) = Copy'' e in let (t2, u_{k-1}) = Copy'' t1 in ... let (u1, u2) = Copy'' t_{k-2}
        for j in range(k - 1):
            left = uses[0] if j == k - 2 else f"{base}'t{next(counter)}"
            right = uses[k - 1 - j]
            frames.append((left, right, App(Var("Copy''"), subject)))
            subject = Var(left)
        pending[w] = [Var(u) for u in uses]

    def take(w: str) -> Term:
        return pending[w].pop(0)

    result: Optional[Term] = None
    for g in c.gates:
        if g.op == "INPUT":
            produce(g.out, Var(input_variable(g.out, cat)))
        elif g.op == "OUTPUT":
            result = take(g.ins[0])
        else:
            produce(g.out, _gate_term(g, [take(w) for w in g.ins]))
    assert result is not None
    for left, right, subject in reversed(frames):
        result = LetPair(left, right, subject, result)
    return result


compile = compile_circuit  # noqa: A001 - the public name of the operation


# Per-gate size contributions after expanding catalogue names, measured once
# from the catalogue terms and frozen (see test_circuits for the re-measurement).
SIZE_CONSTANTS = {"AND": 30, "OR": 60, "NOT": 10, "COPY": 184, "CONST": 8, "INPUT": 1, "BASE": 0}


def measured_constants(cat: Optional[Catalogue] = None) -> dict[str, int]:
    cat = cat or default_catalogue()
    n = {k: size(cat.defs[k]) for k in ("not''", "and''", "Copy''", "True''", "False''")}
    return {"AND": 2 + n["and''"], "OR": 5 + 3 * n["not''"] + n["and''"],
            "NOT": 1 + n["not''"], "COPY": 4 + n["Copy''"],
            "CONST": max(n["True''"], n["False''"]), "INPUT": 1, "BASE": 0}


def size_bound(c: Circuit, k: Mapping[str, int] = SIZE_CONSTANTS) -> int:
    extra = sum(v - 1 for v in c.fanout.values())
    return (k["AND"] * c.count("AND") + k["OR"] * c.count("OR") + k["NOT"] * c.count("NOT")
            + k["CONST"] * c.count("CONST") + k["INPUT"] * c.count("INPUT")
            + k["COPY"] * extra + k["BASE"])


@dataclass
class CompilationReport:
    term: Term
    size: int
    bound: int
    contributions: dict[str, int]
    steps: Optional[int] = None
    counts: Optional[dict[str, int]] = None

    def lines(self) -> list[str]:
        out = [f"term size (expanded): {self.size}", f"linear bound: {self.bound}"]
        out += [f"  {k}: {v}" for k, v in self.contributions.items()]
        if self.steps is not None:
            out.append(f"normalization steps: {self.steps} {self.counts}")
        return out


def report(c: Circuit, cat: Optional[Catalogue] = None, term: Optional[Term] = None) -> CompilationReport:
    cat = cat or default_catalogue()
    term = term if term is not None else compile_circuit(c, cat)
    return CompilationReport(term, size(expand(term, cat.defs)), size_bound(c), _contributions(c))


def _contributions(c: Circuit) -> dict[str, int]:
    k = SIZE_CONSTANTS
    contrib = {op: k[op] * c.count(op) for op in ("AND", "OR", "NOT", "CONST", "INPUT")}
    contrib["COPY"] = k["COPY"] * sum(v - 1 for v in c.fanout.values())
    return contrib


def type_of_compiled(c: Circuit, cat: Optional[Catalogue] = None, term: Optional[Term] = None):
    cat = cat or default_catalogue()
    term = term if term is not None else compile_circuit(c, cat)
    free = {input_variable(w, cat): None for w in c.inputs}
    return infer(term, cat.env, free)


# Expanded truth values per input slot; binder names depend only on the slot.
_INPUT_VALUES: dict[tuple[int, Term], Term] = {}


@dataclass
class Prepared:
    """A compiled circuit with catalogue names expanded, ready for evaluation."""

    circuit: Circuit
    term: Term
    expanded: Term
    variables: dict[str, str]  # input wire -> free variable
    values: dict[bool, Term]
    _size: Optional[int] = None

    @property
    def size(self) -> int:
        if self._size is None:
            self._size = size(self.expanded)
        return self._size

    def value(self, slot: int, b: bool) -> Term:
        key = (slot, self.values[b])
        v = _INPUT_VALUES.get(key)
        if v is None:
            # each input gets its own copy so binder names stay distinct
            v = _INPUT_VALUES[key] = expand(self.values[b], None, f"in{slot}_")
        return v

    def normalize(self, inputs: Mapping[str, bool], fuel: Optional[int] = None):
        missing = [w for w in self.circuit.inputs if w not in inputs]
        if missing:
            raise NetlistError(f"no value given for input(s) {', '.join(missing)}")
        bindings = {self.variables[w]: self.value(i, bool(inputs[w]))
                    for i, w in enumerate(self.circuit.inputs)}
        if fuel is None:
            # the frozen size bound stands in for the term size here
            fuel = max(1000, 10 * (size_bound(self.circuit) + 10 * len(bindings)) ** 2)
        return normalize_expanded(self.expanded, bindings, fuel, set(self.variables.values()))


def prepare(c: Circuit, cat: Optional[Catalogue] = None, term: Optional[Term] = None) -> Prepared:
    cat = cat or default_catalogue()
    term = term if term is not None else compile_circuit(c, cat)
    check_linear(term, linear_free=[input_variable(w, cat) for w in c.inputs])
    enc = encoding("B", cat)
    values = {b: cat.defs[encode(b, enc).name] for b in (False, True)}
    return Prepared(c, term, expand(term, cat.defs),
                    {w: input_variable(w, cat) for w in c.inputs}, values)


@dataclass
class Evaluation:
    value: bool
    report: CompilationReport


def evaluate(c: Circuit, inputs: Mapping[str, bool], cat: Optional[Catalogue] = None,
             term: Optional[Term] = None, fuel: Optional[int] = None,
             prepared: Optional[Prepared] = None) -> Evaluation:
    """Plug encoded inputs into the compiled term, normalize and decode."""
    cat = cat or default_catalogue()
    prep = prepared or prepare(c, cat, term)
    nf = prep.normalize(inputs, fuel)
    rep = CompilationReport(prep.term, prep.size, size_bound(c), _contributions(c))
    rep.steps = nf.trace.step_count
    rep.counts = dict(nf.trace.counts)
    return Evaluation(decode(nf.term, encoding("B", cat), cat, normal=True), rep)


def check_against_oracle(c: Circuit, cat: Optional[Catalogue] = None) -> list[dict[str, bool]]:
    """Input assignments on which evaluation and simulation disagree."""
    cat = cat or default_catalogue()
    prep = prepare(c, cat)
    enc = encoding("B", cat)
    bad = []
    for a in assignments(c):
        if decode(prep.normalize(a).term, enc, cat, normal=True) != simulate(c, a):
            bad.append(a)
    return bad


def assignments(c: Circuit) -> Iterator[dict[str, bool]]:
    ins = c.inputs
    for bits in itertools.product((False, True), repeat=len(ins)):
        yield dict(zip(ins, bits))


# ---------------------------------------------------------------------------
# Circuit generators


def random_circuit(n_gates: int, seed: int, n_inputs: Optional[int] = None,
                   ops=("AND", "OR", "NOT", "CONST")) -> Circuit:
    """A valid circuit with exactly ``n_gates`` logic gates.

    Each gate is sampled freely and rejected if the wires left unread could no
    longer be merged into a single output by the remaining gates; merging two
    unread wires with a binary gate is always an admissible fallback.
    """
    rng = random.Random(seed)
    if n_inputs is None:
        n_inputs = rng.randint(1, min(6, n_gates + 1))
    if n_inputs > n_gates + 1 or (n_inputs == 0 and n_gates == 0):
        raise ValueError(f"{n_inputs} inputs cannot feed {n_gates} gates")
    gates = [Gate("INPUT", f"i{j}") for j in range(n_inputs)]
    wires = [g.out for g in gates]
    unused = list(wires)
    binary = [op for op in ops if op in ("AND", "OR")] or ["AND"]

    def pick():
        return rng.choice(unused) if unused and rng.random() < 0.7 else rng.choice(wires)

    for j in range(n_gates):
        left = n_gates - j - 1
        gate = None
        for _ in range(20):
            op = rng.choice(ops) if wires else "CONST"
            ins = () if op == "CONST" else (pick(),) if op == "NOT" else (pick(), pick())
            after = len(unused) - len(set(ins) & set(unused)) + 1
            if after - 1 <= left:
                gate = (op, ins)
                break
        if gate is None:
            if len(unused) >= 2:
                gate = (rng.choice(binary), tuple(rng.sample(unused, 2)))
            else:
                gate = ("NOT", (unused[0],))
        op, ins = gate
        out = f"g{j}"
        gates.append(Gate(op, out, ins, rng.random() < 0.5 if op == "CONST" else None))
        for w in set(ins):
            if w in unused:
                unused.remove(w)
        wires.append(out)
        unused.append(out)
    assert len(unused) == 1, "generator left dangling wires"
    gates.append(Gate("OUTPUT", None, (unused[0],)))
    return validate(gates)


def all_small_circuits(max_gates: int = 4, max_inputs: int = 3,
                       ops=("AND", "OR", "NOT", "CONST")) -> Iterator[Circuit]:
    """Every valid circuit up to the given size, up to operand order of AND/OR
    and renaming of inputs (inputs are numbered by first use)."""
    for n_in in range(max_inputs + 1):
        for n_g in range(max_gates + 1):
            yield from _circuits(n_in, n_g, ops)


def _circuits(n_in: int, n_g: int, ops) -> Iterator[Circuit]:
    inputs = [f"i{j}" for j in range(n_in)]

    def choices(n_wires: int):
        for op in ops:
            if op == "CONST":
                yield ("CONST", (), False)
                yield ("CONST", (), True)
            elif op == "NOT":
                for a in range(n_wires):
                    yield ("NOT", (a,), None)
            else:
                for a in range(n_wires):
                    for b in range(a, n_wires):
                        yield (op, (a, b), None)

    def rec(body: list, uses: list[int], first_unseen: int):
        n_wires = n_in + len(body)
        if len(body) == n_g:
            dangling = [w for w in range(n_wires) if uses[w] == 0]
            # the output port may be the only reader of the last input
            if len(dangling) == 1 and (first_unseen >= n_in or
                                       first_unseen == n_in - 1 == dangling[0]):
                yield body, dangling[0]
            return
        # every wire but one must eventually be read; each gate reads at most two
        if sum(1 for u in uses if u == 0) - 1 > 2 * (n_g - len(body)):
            return
        for op, ins, val in choices(n_wires):
            # inputs appear in order of first use
            seen = first_unseen
            ok = True
            for a in ins:
                if a < n_in:
                    if a > seen:
                        ok = False
                    elif a == seen:
                        seen += 1
            if not ok:
                continue
            for a in ins:
                uses[a] += 1
            uses.append(0)
            yield from rec(body + [(op, ins, val)], uses, seen)
            uses.pop()
            for a in ins:
                uses[a] -= 1

    if n_in == 0 and n_g == 0:
        return
    for body, out in rec([], [0] * n_in, 0):
        names = inputs + [f"g{j}" for j in range(n_g)]
        gates = [Gate("INPUT", w) for w in inputs]
        for j, (op, ins, val) in enumerate(body):
            gates.append(Gate(op, f"g{j}", tuple(names[a] for a in ins), val))
        gates.append(Gate("OUTPUT", None, (names[out],)))
        yield validate(gates)


# ---------------------------------------------------------------------------
# Step-count fit


# Frozen quadratic coefficient. On seeds 0-4 with n in {10, 20, 40, 80, 160}
# the largest steps / n^2 was 3.51 (at n = 10; growth is in fact linear, at
# most about 41 steps per gate); the bound below is a little under three
# times that.
STEP_COEFFICIENT = 10.0


def step_profile(sizes=(10, 20, 40, 80, 160), seeds=range(5), cat=None) -> list[tuple[int, int, int]]:
    """(n, seed, steps) for random circuits evaluated on a seeded input vector."""
    cat = cat or default_catalogue()
    rows = []
    for n in sizes:
        for s in seeds:
            c = random_circuit(n, s)
            rng = random.Random(s)
            ins = {w: rng.random() < 0.5 for w in c.inputs}
            ev = evaluate(c, ins, cat)
            rows.append((n, s, ev.report.steps))
    return rows
