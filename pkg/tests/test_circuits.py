import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linlam.circuits import (SIZE_CONSTANTS, Circuit, NetlistError, all_small_circuits,
                             assignments, check_against_oracle, compile_circuit,
                             evaluate, input_variable, measured_constants,
                             parse_netlist, random_circuit, report, simulate,
                             size_bound, type_of_compiled)
from linlam.kernel import BOOL_B, Lam, Lolli, parse_term, parse_type, print_term, size
from linlam.rewrite import beta_eta_eq, expand
from linlam.typecheck import UnifyError, check_linear, infer, unify

XOR_NETLIST = """\
# xor as (a or b) and not (a and b)
INPUT a
INPUT b
OR o a b
AND n a b
NOT m n
AND x o m
OUTPUT x
"""


def run(c, **inputs):
    return evaluate(c, inputs).value


# --- netlists ----------------------------------------------------------------

def test_single_not():
    c = parse_netlist("INPUT a\nNOT b a\nOUTPUT b")
    assert len(c.gates) == 3 and c.inputs == ["a"] and c.output == "b"
    t = compile_circuit(c)
    assert beta_eta_eq(Lam("a", t), parse_term("not''"), _fun_b(), free={}, defs=_defs(), env=_env())


def _defs():
    from linlam.catalogue import default_catalogue
    return default_catalogue().defs


def _env():
    from linlam.catalogue import default_catalogue
    return default_catalogue().env


def _fun_b():
    return Lolli(BOOL_B, BOOL_B)


def test_fanout_is_recorded_and_copied():
    c = parse_netlist("INPUT a\nAND c a a\nOUTPUT c")
    assert c.fanout["a"] == 2
    assert "Copy''" in print_term(compile_circuit(c))
    assert run(c, a=True) is True and run(c, a=False) is False


@pytest.mark.parametrize("src,msg", [
    ("INPUT a\nNOT c a\nOUTPUT c\nOUTPUT c", "exactly one OUTPUT"),
    ("INPUT a\nOUTPUT b", "undefined wire"),
    ("INPUT a\nINPUT a\nAND c a a\nOUTPUT c", "multiple drivers"),
    ("INPUT a\nINPUT b\nNOT c a\nOUTPUT c", "never used"),
    ("INPUT a\nAND b a c\nNOT c b\nOUTPUT c", "cycle"),
    ("INPUT a\nNAND c a a\nOUTPUT c", "unknown gate"),
    ("INPUT a\nNOT c\nOUTPUT c", "operand"),
    ("CONST c 2\nOUTPUT c", "0 or 1"),
    ("INPUT a-b\nOUTPUT a-b", "bad wire"),
])
def test_netlist_errors(src, msg):
    with pytest.raises(NetlistError, match=msg):
        parse_netlist(src)


def test_netlist_error_carries_the_line():
    with pytest.raises(NetlistError) as exc:
        parse_netlist("INPUT a\n\n# comment\nNOT b z\nOUTPUT b")
    assert exc.value.line == 4


def test_gates_are_sorted_topologically():
    c = parse_netlist("NOT b a\nINPUT a\nOUTPUT b")
    assert [g.op for g in c.gates] == ["INPUT", "NOT", "OUTPUT"]


def test_netlist_roundtrip():
    text = parse_netlist(XOR_NETLIST).to_netlist()
    assert parse_netlist(text).to_netlist() == text
    assert "OR o a b" in text


def test_input_names_avoid_catalogue_and_keywords(cat):
    assert input_variable("a", cat) == "a"
    assert input_variable("fn", cat) == "in'fn"
    assert input_variable("I", cat) == "in'I"
    assert input_variable("0", cat) == "in'0"
    c = parse_netlist("INPUT I\nINPUT 7\nAND o I 7\nOUTPUT o")
    assert evaluate(c, {"I": True, "7": True}).value is True


# --- semantics -----------------------------------------------------------------

def test_and_gate():
    c = parse_netlist("INPUT a\nINPUT b\nAND c a b\nOUTPUT c")
    assert run(c, a=True, b=False) is False
    assert run(c, a=True, b=True) is True


def test_const_to_output():
    assert run(parse_netlist("CONST k 1\nOUTPUT k")) is True
    assert run(parse_netlist("CONST k 0\nOUTPUT k")) is False


def test_or_by_de_morgan(cat):
    c = parse_netlist("INPUT a\nINPUT b\nOR c a b\nOUTPUT c")
    got = [run(c, a=x, b=y) for x, y in itertools.product((False, True), repeat=2)]
    assert got == [False, True, True, True]


def test_xor_with_fanout_two_on_both_inputs():
    c = parse_netlist(XOR_NETLIST)
    assert c.fanout["a"] == c.fanout["b"] == 2
    for x, y in itertools.product((False, True), repeat=2):
        assert run(c, a=x, b=y) is (x != y)


def test_missing_inputs_are_reported():
    c = parse_netlist("INPUT a\nNOT b a\nOUTPUT b")
    with pytest.raises(NetlistError, match="a"):
        evaluate(c, {})


def test_high_fanout_chain():
    src = "INPUT a\n" + "".join(f"AND g{i} a {'a' if i == 0 else f'g{i-1}'}\n" for i in range(5)) + "OUTPUT g4"
    c = parse_netlist(src)
    assert c.fanout["a"] == 6
    assert run(c, a=True) and not run(c, a=False)
    assert check_against_oracle(c) == []


# --- size, typing, linearity ------------------------------------------------

def test_size_constants_are_the_measured_ones(cat):
    # independently re-measure each gate's footprint on one-gate circuits
    def grown(src_with, src_without):
        a = size(expand(compile_circuit(parse_netlist(src_with)), cat.defs))
        b = size(expand(compile_circuit(parse_netlist(src_without)), cat.defs))
        return a - b
    assert grown("INPUT a\nNOT b a\nNOT c b\nOUTPUT c", "INPUT a\nNOT b a\nOUTPUT b") == SIZE_CONSTANTS["NOT"]
    # one more input and one AND gate
    assert grown("INPUT a\nINPUT b\nAND c a b\nOUTPUT c", "INPUT a\nOUTPUT a") == \
        SIZE_CONSTANTS["AND"] + SIZE_CONSTANTS["INPUT"]
    assert measured_constants(cat) == SIZE_CONSTANTS


def test_size_bound_is_an_identity_on_examples(cat):
    for src in (XOR_NETLIST, "INPUT a\nAND c a a\nOUTPUT c", "CONST k 1\nNOT o k\nOUTPUT o"):
        c = parse_netlist(src)
        r = report(c, cat)
        assert r.size == r.bound
        assert sum(r.contributions.values()) == r.bound


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(0, 10 ** 6))
def test_size_bound_holds_on_random_circuits(n, seed):
    c = random_circuit(n, seed)
    assert report(c).size <= size_bound(c)


B_APART = parse_type("('p -> 'p) -> ('p -> 'p) * ('p -> 'p)")


def fits_b(a):
    try:
        unify(a, B_APART)
    except UnifyError:
        return False
    return True


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.integers(0, 10 ** 6))
def test_compiled_terms_are_linear_and_typed(n, seed):
    from linlam.catalogue import default_catalogue
    cat = default_catalogue()
    c = random_circuit(n, seed)
    t = compile_circuit(c, cat)
    check_linear(t, linear_free=[input_variable(w, cat) for w in c.inputs])
    assert fits_b(type_of_compiled(c, cat, t))
    closed = t
    for w in reversed(c.inputs):
        closed = Lam(input_variable(w, cat), closed)
    a = infer(closed, cat.env)
    # the domain of Copy'' is no B instance, and that constraint flows back to
    # every input upstream of a copy; copy-free circuits are B-typed throughout
    copy_free = all(k == 1 for k in c.fanout.values())
    for _ in c.inputs:
        assert fits_b(a.dom) or not copy_free
        a = a.cod
    assert fits_b(a)


def test_copy2_domain_is_not_a_b_instance(cat):
    dom = cat.entries["Copy''"].scheme.body.dom
    assert not fits_b(dom)
    assert fits_b(cat.entries["True''"].scheme.body)
    assert fits_b(cat.entries["False''"].scheme.body)


def test_a_bare_input_is_polymorphic(cat):
    c = parse_netlist("INPUT a\nOUTPUT a")
    assert str(type_of_compiled(c, cat)) == "'a"
    assert run(c, a=True) is True


def test_random_circuit_shape():
    for n in (0, 1, 2, 7, 50):
        c = random_circuit(n, seed=n, n_inputs=1) if n < 2 else random_circuit(n, seed=n)
        assert len(c.logic_gates) == n
        assert isinstance(c, Circuit)
    assert random_circuit(20, 3).to_netlist() == random_circuit(20, 3).to_netlist()
    with pytest.raises(ValueError):
        random_circuit(2, 0, n_inputs=5)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 30), st.integers(0, 10 ** 6))
def test_random_circuits_match_the_simulator(n, seed):
    c = random_circuit(n, seed)
    assert check_against_oracle(c) == []


def test_small_circuit_enumeration_counts():
    assert sum(1 for _ in all_small_circuits(1, 1)) == 6
    sizes = [len(c.logic_gates) for c in all_small_circuits(2, 2)]
    assert max(sizes) == 2


def test_assignments():
    c = parse_netlist(XOR_NETLIST)
    assert [tuple(a.values()) for a in assignments(c)] == list(itertools.product((False, True), repeat=2))
    assert simulate(c, {"a": True, "b": False}) is True
