import json

import pytest

from linlam.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main, run


def out(argv, capsys):
    code = main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


@pytest.fixture
def netlist(tmp_path):
    def write(text, name="c.net"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)
    return write


def test_infer(capsys):
    assert out(["infer", "fn x => x"], capsys)[:2] == (0, "'a -> 'a\n")


def test_infer_with_catalogue_names(capsys):
    code, text, _ = out(["infer", "not''"], capsys)
    assert code == 0 and text.strip() == "('a -> 'b * 'c) -> 'a -> 'c * 'b"


def test_infer_free_variables(capsys):
    code, text, _ = out(["infer", "g x", "--free", "g,x"], capsys)
    assert code == 0 and text.strip() == "'a"


def test_parse_roundtrip(capsys):
    code, text, _ = out(["parse", "fun Pair x y z = z x y;"], capsys)
    assert code == 0 and text.strip() == "fun Pair x y z = z x y;"


def test_parse_error_exit_code(capsys):
    code, _, err = out(["parse", "fn x =>"], capsys)
    assert code == EXIT_USAGE and "error" in err


def test_linearity_error_exit_code(capsys):
    code, text, _ = out(["infer", "fn x => (x, x)"], capsys)
    assert code == EXIT_FAILED and "x" in text


def test_usage_error_exit_code(capsys):
    assert out(["no-such-command"], capsys)[0] == EXIT_USAGE
    assert out(["catalogue", "show"], capsys)[0] == EXIT_USAGE
    assert out(["catalogue", "show", "nope"], capsys)[0] == EXIT_USAGE


def test_normalize_trace(capsys):
    code, text, _ = out(["normalize", "Copy'' True''", "--trace"], capsys)
    lines = text.strip().splitlines()
    assert code == 0
    assert any("beta" in l for l in lines)


def test_normalize_fuel(capsys):
    code, text, _ = out(["--fuel", "2", "normalize", "Copy'' True''"], capsys)
    assert code == EXIT_FAILED and "FuelExhausted" in text


def test_normalize_eta(capsys):
    code, text, _ = out(["normalize", "LDTr True''", "--eta",
                         "'a -> 'a -> ('a -> 'a) -> ('a -> 'a -> 'a) -> 'a"], capsys)
    lines = text.strip().splitlines()
    # the eta-long form of True'
    assert code == 0 and lines[-2] == "fn x => fn y => fn f => fn z => z x (f y)"
    assert lines[-1].startswith("(* steps:")


def test_eq(capsys):
    assert out(["eq", "not'' (not'' True'')", "True''"], capsys)[0] == 0
    code, text, _ = out(["eq", "not'' True''", "True''"], capsys)
    assert code == EXIT_FAILED
    assert out(["eq", "swap (Pair False' True') g", "Pair True' False' g", "--free", "g"], capsys)[0] == 0


def test_inhabitants_count(capsys):
    code, text, _ = out(["inhabitants", "'a -> 'a -> ('a -> 'a) -> ('a -> 'a -> 'a) -> 'a", "--count"], capsys)
    assert (code, text.strip()) == (0, "6")


def test_inhabitants_list_and_p_atoms(capsys):
    code, text, _ = out(["inhabitants", "p * p -> p * p", "--list"], capsys)
    lines = text.strip().splitlines()
    assert code == 0 and len(lines) == 3
    assert lines[-1] == "(* 2 inhabitant(s) of 'a * 'a -> 'a * 'a *)"


def test_inhabitants_budget(capsys):
    code, text, _ = out(["--budget", "20", "inhabitants",
                         "(('a -> 'a) -> ('a -> 'a) * ('a -> 'a)) -> ('a -> 'a) -> ('a -> 'a) * ('a -> 'a)",
                         "--count"], capsys)
    assert code == EXIT_FAILED and "BudgetExceeded" in text


def test_survey(capsys):
    code, text, _ = out(["survey", "MH"], capsys)
    assert code == 0 and "XOR" in text and "XNOR" in text


def test_catalogue_list_and_show(capsys):
    code, text, _ = out(["catalogue", "list"], capsys)
    assert code == 0 and "Copy''" in text and "(derived)" in text
    code, text, _ = out(["catalogue", "show", "not''"], capsys)
    assert text.splitlines() == ["fun not'' h f = let val (k, l) = h f in (l, k) end;",
                                 "val not'' = fn : ('a -> 'b * 'c) -> 'a -> 'c * 'b"]


def test_emit_sml(capsys):
    assert out(["emit-sml", "Pair"], capsys)[1] == "fun Pair x y z = z x y;\n"
    a = out(["emit-sml"], capsys)[1]
    b = out(["emit-sml"], capsys)[1]
    assert a == b and a.endswith("Copy False;\n")
    assert out(["emit-sml", "not''", "--rename-primes"], capsys)[1].splitlines()[-1] == \
        "fun not2 h f = let val (k, l) = h f in (l, k) end;"


def test_verify_paper_counts_only(capsys):
    code, text, _ = out(["verify-paper", "--only", "counts"], capsys)
    assert code == 0
    assert text.count("pass ") == 6 and "6/6 checks passed" in text


def test_verify_paper_json(capsys):
    code, text, _ = out(["--json", "verify-paper", "--only", "counts"], capsys)
    recs = [json.loads(l) for l in text.splitlines()]
    assert code == 0 and len(recs) == 6
    assert set(recs[0]) == {"check", "status", "expected", "actual"}
    assert all(r["status"] == "pass" for r in recs)


def test_verify_paper_detects_corrupted_and(tmp_path, capsys):
    bad = tmp_path / "bad.sml"
    bad.write_text("fun and'' p q = p q;\n", encoding="utf-8")
    code, text, _ = out(["--catalogue", str(bad), "verify-paper", "--only", "identities"], capsys)
    assert code == EXIT_FAILED
    failing = [l.split()[1] for l in text.splitlines() if l.startswith("FAIL")]
    assert "and''-TT" in failing
    assert all(n.startswith("and''") for n in failing)


def test_verify_paper_types_and_identities(capsys):
    for group in ("types", "identities"):
        code, text, _ = out(["verify-paper", "--only", group], capsys)
        assert code == 0 and "FAIL" not in text


def test_compile_and_eval(netlist, capsys):
    path = netlist("INPUT a\nINPUT b\nAND c a b\nOUTPUT c\n")
    code, text, _ = out(["compile", path], capsys)
    assert code == 0 and text.strip() == "and'' a b"
    code, text, _ = out(["compile", path, "--report"], capsys)
    assert code == 0 and "linear bound" in text
    assert out(["eval", path, "--inputs", "a=1,b=0"], capsys)[1].strip() == "0"
    assert out(["eval", path, "--inputs", "a=1,b=1"], capsys)[1].strip() == "1"


def test_eval_errors(netlist, capsys):
    path = netlist("INPUT a\nNOT b a\nOUTPUT b\n")
    assert out(["eval", path, "--inputs", "a=2"], capsys)[0] == EXIT_USAGE
    assert out(["eval", path, "--inputs", "z=1,a=0"], capsys)[0] == EXIT_USAGE
    assert out(["eval", path], capsys)[0] == EXIT_USAGE  # missing input
    bad = netlist("INPUT a\nOUTPUT a\nOUTPUT a\n", "bad.net")
    assert out(["compile", bad], capsys)[0] == EXIT_USAGE
    assert out(["compile", "/nonexistent/x.net"], capsys)[0] == EXIT_USAGE


def test_bench(capsys):
    code, text, _ = out(["bench", "--gates", "30", "--seed", "2"], capsys)
    assert code == 0 and "agrees" in text
    code, text, _ = out(["--json", "bench", "--gates", "10"], capsys)
    rec = json.loads(text)
    assert rec["status"] == "pass" and rec["actual"]["size"] <= rec["actual"]["bound"]


def test_run_returns_a_result():
    res = run(["infer", "fn x => x"])
    assert res.code == EXIT_OK and res.lines == ["'a -> 'a"]
