import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linlam.kernel import (BOOL_B, BOOL_MH, BOOL_PRIME, BOOL_RED, BOOL_TENSOR, App,
                           Lam, LetPair, Lolli, NamedDef, Pair, ParseError, Tensor,
                           TVar, Var, alpha_eq, alpha_key, atom_count, free_vars,
                           parse_decl, parse_program, parse_term, parse_type,
                           print_decl, print_term, print_type, size, subst, tokenize)


# --- types -----------------------------------------------------------------

def test_tensor_binds_tighter_than_arrow():
    a = parse_type("'a * 'b -> 'c")
    assert a == Lolli(Tensor(TVar("a"), TVar("b")), TVar("c"))


def test_arrow_is_right_associative_and_tensor_left():
    assert parse_type("'a -> 'b -> 'c") == Lolli(TVar("a"), Lolli(TVar("b"), TVar("c")))
    assert parse_type("'a * 'b * 'c") == Tensor(Tensor(TVar("a"), TVar("b")), TVar("c"))


@pytest.mark.parametrize("text", [
    "'a -> 'a",
    "('a -> 'b) -> ('c -> 'c) * ('a -> 'b)",
    "('a -> 'b * 'c) -> 'a -> 'c * 'b",
    "'a * ('b * 'c)",
    "('a -> 'b) * 'c -> 'd",
])
def test_type_print_parse_roundtrip(text):
    assert print_type(parse_type(text)) == text


def test_canonical_printing_renames_by_first_use():
    assert print_type(parse_type("'q -> 'z -> 'q"), canonical=True) == "'a -> 'b -> 'a"


def test_boolean_types():
    assert print_type(BOOL_MH) == "'a -> 'a -> ('a -> 'a -> 'a) -> 'a"
    assert print_type(BOOL_B) == "('a -> 'a) -> ('a -> 'a) * ('a -> 'a)"
    assert print_type(BOOL_RED) == "'a -> 'a -> ('a -> 'a) -> ('a -> 'a -> 'a) -> 'a"
    assert print_type(BOOL_PRIME) == "'a -> ('a -> 'a) -> ('a -> 'a) -> 'a"
    assert print_type(BOOL_TENSOR) == "'a * 'a -> 'a * 'a"
    assert atom_count(Lolli(BOOL_B, BOOL_B)) == 12


# --- terms -----------------------------------------------------------------

def test_fun_declaration_desugars_to_lambdas():
    d = parse_decl("fun Pair x y z = z x y;")
    assert d.name == "Pair" and d.params == ("x", "y", "z")
    assert d.term == Lam("x", Lam("y", Lam("z", App(App(Var("z"), Var("x")), Var("y")))))


def test_primes_are_identifier_characters():
    t = parse_term("not'' True''")
    assert t == App(Var("not''"), Var("True''"))


def test_let_pair_syntax():
    t = parse_term("let val (k, l) = h f in (l, k) end")
    assert t == LetPair("k", "l", App(Var("h"), Var("f")), Pair(Var("l"), Var("k")))


def test_comments_are_skipped():
    assert parse_term("(* a (* not nested *) fn x => x") == Lam("x", Var("x"))


def test_program_with_expression_statements():
    items = parse_program("fun I x = x;\nI I;")
    assert isinstance(items[0], NamedDef) and items[1] == App(Var("I"), Var("I"))


@pytest.mark.parametrize("src", ["fn x =>", "let val (x, x) = y in x end", "fun f x x = x;", "(a, b", "x )"])
def test_parse_errors_carry_a_position(src):
    with pytest.raises(ParseError) as exc:
        if src.startswith("fun"):
            parse_decl(src)
        else:
            parse_term(src)
    assert exc.value.line >= 1 and exc.value.col >= 1


def test_tokenizer_reports_bad_characters():
    with pytest.raises(ParseError):
        tokenize("fn x => x + 1")


def test_print_decl_matches_source_form():
    src = "fun not'' h f = let val (k, l) = h f in (l, k) end;"
    assert print_decl(parse_decl(src)) == src


def test_application_printing_parenthesizes_arguments():
    assert print_term(parse_term("f (g x) (fn y => y)")) == "f (g x) (fn y => y)"


def test_alpha_equivalence():
    assert alpha_eq(parse_term("fn x => fn y => x y"), parse_term("fn a => fn b => a b"))
    assert not alpha_eq(parse_term("fn x => fn y => x y"), parse_term("fn a => fn b => b a"))
    assert not alpha_eq(parse_term("fn x => z"), parse_term("fn x => w"))
    assert alpha_key(parse_term("let val (a, b) = p in (b, a) end")) == \
        alpha_key(parse_term("let val (u, v) = p in (v, u) end"))


def test_substitution_avoids_capture():
    t = subst(parse_term("fn y => x y"), "x", Var("y"))
    assert free_vars(t) == {"y"}
    assert alpha_eq(t, parse_term("fn z => y z"))


def test_substitution_under_let_avoids_capture():
    t = subst(parse_term("let val (a, b) = p in x a b end"), "x", Var("a"))
    assert free_vars(t) == {"a", "p"}


def test_deep_terms_do_not_overflow():
    t = Var("x")
    for _ in range(20000):
        t = Lam("x", t)
    assert size(t) == 20001
    assert print_term(t).count("fn x =>") == 20000
    a = TVar("a")
    for _ in range(5000):
        a = Lolli(a, TVar("a"))
    assert print_type(a).count("->") == 5000


# --- properties ------------------------------------------------------------

names = st.sampled_from(["x", "y", "z", "u'", "f''"])


def terms(depth=4):
    return st.recursive(
        names.map(Var),
        lambda sub: st.one_of(
            st.builds(Lam, names, sub),
            st.builds(App, sub, sub),
            st.builds(Pair, sub, sub),
            st.builds(LetPair, names, names, sub, sub).filter(lambda t: t.left != t.right),
        ),
        max_leaves=12,
    )


def types():
    return st.recursive(st.sampled_from(["a", "b", "c"]).map(TVar),
                        lambda sub: st.one_of(st.builds(Lolli, sub, sub), st.builds(Tensor, sub, sub)),
                        max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(terms())
def test_print_parse_roundtrip_terms(t):
    assert parse_term(print_term(t)) == t


@settings(max_examples=300, deadline=None)
@given(types())
def test_print_parse_roundtrip_types(a):
    assert parse_type(print_type(a)) == a
