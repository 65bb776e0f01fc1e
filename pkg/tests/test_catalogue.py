import pytest

from linlam.catalogue import (DERIVED_NAMES, IDENTITIES, PAPER_NAMES, PAPER_TYPES,
                              SESSION_TYPES, DecodeError, ShapeError, UnknownName,
                              build_catalogue,
                              catalogue_lookup, check_identity, decode, encode, encoding,
                              identity_names, ldt_type, same_printed_type,
                              type_reproductions, verify_identity)
from linlam.inhabit import TruthTable, enumerate_inhabitants, truth_table_of
from linlam.kernel import (BOOL_B, BOOL_MH, BOOL_RED, alpha_eq, parse_program,
                           parse_term, parse_type, print_type)
from linlam.typecheck import check_at


def test_every_name_is_present(cat):
    assert set(PAPER_NAMES) | set(DERIVED_NAMES) <= set(cat.names())
    assert cat.entries["Not"].derived and not cat.entries["not''"].derived


def test_lookup(cat):
    term, scheme = catalogue_lookup("not''")
    assert alpha_eq(term, parse_term("fn h => fn f => let val (k, l) = h f in (l, k) end"))
    assert same_printed_type(PAPER_TYPES["not''"], str(scheme.body))


def test_unknown_names_raise():
    with pytest.raises(UnknownName):
        catalogue_lookup("nand")
    with pytest.raises(UnknownName):
        encoding("Church")
    with pytest.raises(UnknownName):
        verify_identity("no-such-identity")


def test_type_reproductions_cover_the_table(cat):
    rows = type_reproductions(cat)
    assert len(rows) == len(PAPER_TYPES) + len(SESSION_TYPES) == 18
    assert all(same_printed_type(want, got) for _, want, got in rows)


def test_same_printed_type_is_up_to_renaming():
    assert same_printed_type("'b -> 'b", "'a -> 'a")
    assert not same_printed_type("'a -> 'b -> 'a", "'a -> 'b -> 'b")


# --- encodings ---------------------------------------------------------------

@pytest.mark.parametrize("name,ty", [("MH", BOOL_MH), ("red", BOOL_RED), ("B", BOOL_B)])
def test_encode_decode_roundtrip(cat, name, ty):
    enc = encoding(name, cat)
    assert enc.bool_type == ty
    for b in (True, False):
        assert decode(encode(b, enc), enc, cat) is b
        assert check_at(encode(b, enc), ty, cat.env)


def test_true_and_false_are_the_only_inhabitants(cat):
    # the reduced type has six inhabitants, so it is left out here
    for name in ("MH", "B"):
        enc = encoding(name, cat)
        found = enumerate_inhabitants(enc.bool_type)
        assert len(found) == 2
        assert {decode(t, enc, cat, normal=True) for t in found} == {True, False}


def test_decode_rejects_non_booleans(cat):
    enc = encoding("B", cat)
    with pytest.raises(DecodeError):
        decode(parse_term("fn x => x"), enc, cat)
    red = encoding("red", cat)
    with pytest.raises(DecodeError):
        decode(parse_term("fn x => fn y => fn f => fn g => f (g x y)"), red, cat)


def test_decode_reads_through_reduction(cat):
    enc = encoding("B", cat)
    assert decode(parse_term("not'' (and'' True'' True'')"), enc, cat) is False
    assert decode(parse_term("let val (a, b) = Copy'' False'' in and'' a (not'' b) end"), enc, cat) is False


# --- gates -------------------------------------------------------------------

@pytest.mark.parametrize("enc,src,arity,table", [
    ("B", "not''", 1, "[T,F]"),
    ("B", "and''", 2, "[F,F,F,T]"),
    ("red", "not'", 1, "[T,F]"),
    ("MH", "Not", 1, "[T,F]"),
    ("MH", "And", 2, "[F,F,F,T]"),
])
def test_gate_truth_tables(cat, enc, src, arity, table):
    strict = src != "And"  # And is polymorphic and only decodes pointwise
    got = truth_table_of(cat.parse(src), encoding(enc, cat), arity, cat=cat, strict=strict)
    assert got == TruthTable.parse(table)


def test_mh_and_has_no_monomorphic_type(cat):
    from linlam.inhabit import function_type
    assert not check_at(cat.parse("And"), function_type(encoding("MH", cat), 2), cat.env)


# --- the linear distributive transformation ----------------------------------

def test_ldt_type_of_the_B_booleans():
    assert print_type(ldt_type(BOOL_B)) == print_type(BOOL_RED)


def test_ldt_type_general_pattern():
    a = parse_type("('a -> 'b) -> ('c -> 'd) * ('e -> 'f)")
    assert print_type(ldt_type(a)) == "'c -> 'e -> ('a -> 'b) -> ('d -> 'f -> 'r) -> 'r"
    assert print_type(ldt_type(a, "z")).endswith("'z) -> 'z")


@pytest.mark.parametrize("text", ["'a -> 'a", "('a -> 'a) -> 'a * 'a", "'a * 'a -> ('a -> 'a) * ('a -> 'a)"])
def test_ldt_type_rejects_other_shapes(text):
    with pytest.raises(ShapeError):
        ldt_type(parse_type(text))


def test_ldtr_maps_B_values_to_red_values(cat):
    for v in ("True''", "False''"):
        assert check_at(parse_term(f"LDTr {v}"), ldt_type(BOOL_B), cat.env)
    red = encoding("red", cat)
    assert decode(parse_term("LDTr True''"), red, cat) is True
    assert decode(parse_term("LDTr False''"), red, cat) is False


# --- identities --------------------------------------------------------------

@pytest.mark.parametrize("name", identity_names())
def test_identity_holds(cat, name):
    ident = next(i for i in IDENTITIES if i.name == name)
    r = check_identity(ident, cat)
    assert r.holds, r.diff()


def test_false_identities_are_rejected(cat):
    from linlam.catalogue import Identity
    assert not check_identity(Identity("bad", "not'' True''", "True''"), cat).holds
    r = check_identity(Identity("ill", "True", "True''"), cat)
    assert not r.holds and r.error


def test_identity_names_are_unique():
    names = identity_names()
    assert len(names) == len(set(names)) == len(IDENTITIES)


def test_replace_rebuilds_dependents(cat):
    broken = cat.replace("fun and'' p q = p q;")
    assert not verify_identity("and''-TT", broken) or not verify_identity("and''-FT", broken)
    assert verify_identity("not''-true", broken)
    # the original is untouched
    assert verify_identity("and''-TT", cat)


def test_build_catalogue_from_source():
    cat = build_catalogue(parse_program("fun I x = x;\nfun K x y = y x;"))
    assert cat.names() == ["I", "K"]
    assert str(cat.entries["K"].scheme.body) == "'a -> ('a -> 'b) -> 'b"
