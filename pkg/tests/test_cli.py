import json
from importlib import resources

import jsonschema
import pytest
from hypothesis import given
from hypothesis import strategies as st

from birdtracks import cli
from birdtracks.centralizer import build_algebra
from birdtracks.ratfunc import ONE, RationalFunc

SCHEMA = json.loads(resources.files("birdtracks").joinpath("report.schema.json").read_text())
m, u = RationalFunc.var("m"), RationalFunc.var("u")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    data = json.loads(out)
    jsonschema.validate(data, SCHEMA)
    return code, data


# -- expressions ---------------------------------------------------------------------------

def test_expression_examples():
    alg = build_algebra("su", 2)
    assert cli.eval_expression("su", 2, "P*P") == alg.one
    e6 = build_algebra("e6", 2)
    p1 = cli.eval_expression("e6", 2, "(1/2)*(id + P) - eBA")
    assert p1 * p1 == p1
    assert cli.eval_expression("e6", 3, "T1(objj) + objj").is_zero()
    assert cli.eval_expression("e6", 3, "T2(objj) + objj").is_zero()
    assert cli.eval_expression("e6", 2, "eBA^2") == e6.element("eBA")
    assert cli.eval_expression("e7", 3, "rot60(objh) - objh").is_zero()
    assert cli.eval_expression("e7", 3, "rot60^3(objh) - objh").is_zero()
    assert cli.eval_expression("so", 2, "C*C") == RationalFunc.var("n") * build_algebra("so", 2).element("C")


def test_loop_value_substituted_for_exceptional_series():
    assert cli.eval_expression("e6", 2, "n*id") == (3 * m + 3) * build_algebra("e6", 2).one
    assert cli.eval_expression("e7", 2, "n*id") == (6 * m + 8) * build_algebra("e7", 2).one


def test_cross_in_expressions():
    mixed = cli.eval_expression("e6", 2, "Cross(P)", mixed=False)
    assert mixed.algebra.mixed and mixed == mixed.algebra.element("suBC")


@pytest.mark.parametrize("text,pos", [("P * * 3", 4), ("(P", 2), ("P $ 2", 2), ("P / eBA", 2)])
def test_parse_errors(text, pos):
    with pytest.raises(cli.ParseError) as info:
        cli.eval_expression("e6", 2, text)
    assert info.value.pos == pos


def test_unknown_symbol():
    with pytest.raises(cli.UnknownSymbol):
        cli.eval_expression("e6", 2, "foo + P")


scalars = st.sampled_from([ONE, -ONE, 2 * ONE, ONE / 3, m, u, (m + 1) / (u - 2), -u / (2 * m + 4), m * m - u])


@pytest.mark.parametrize("family,p", [("e6", 2), ("e6", 3), ("sp", 3), ("e7", 2)])
@given(data=st.data())
def test_print_parse_round_trip(family, p, data):
    alg = build_algebra(family, p)
    items = data.draw(st.lists(st.tuples(st.sampled_from(alg.names), scalars), min_size=1, max_size=4))
    el = sum((c * alg.element(nm) for nm, c in items), 0 * alg.one)
    text = str(el)
    assert cli.eval_expression(family, p, text) == el


# -- verbs ------------------------------------------------------------------------------------

def test_ybe_e6(capsys):
    code, out, _ = run(capsys, "ybe", "--series", "e6")
    assert code == 0 and "residual: 0" in out and out.rstrip().endswith("PASS")


def test_basis_e7(capsys):
    code, data = run_json(capsys, "basis", "--series", "e7", "--strands", "3")
    assert code == 0
    assert data["report"]["dim"] == 35 and data["report"]["counts"] == "15/15/5"
    assert data["report"]["variant_rank"] == 5


def test_numeric_e6_m8(capsys):
    code, data = run_json(capsys, "numeric", "--series", "e6", "--m", "8", "--u", "1", "--v", "2",
                          "--trials", "20", "--seed", "7")
    assert code == 0 and data["report"]["residual"] <= 1e-8


def test_numeric_failure_exit_code(capsys):
    code, data = run_json(capsys, "numeric", "--series", "e6", "--m", "4", "--tolerance", "0")
    assert code == 1 and data["pass"] is False


def test_numeric_exact(capsys):
    code, data = run_json(capsys, "numeric", "--series", "e6", "--m", "1", "--exact")
    assert code == 0 and data["report"]["exact_matrix_identity"] is True


VERDICT_CASES = [
    ("basis", "--series", "e6", "--strands", "3"),
    ("multtable", "--series", "so", "--strands", "2"),
    ("projectors", "--series", "e7"),
    ("projectors", "--series", "e6", "--mixed"),
    ("ybe", "--series", "sp"),
    ("crossing",),
    ("numeric", "--series", "so", "--n", "5"),
    ("numeric", "--series", "e6", "--m", "2", "--identity", "row-sum"),
    ("numeric", "--series", "e6", "--m", "2", "--tolerance", "0"),
    ("reduce", "--series", "e6", "--strands", "3", "T1(objj) + objj"),
    ("lemma", "cubic-loop"),
]


@pytest.mark.parametrize("argv", VERDICT_CASES)
def test_text_and_json_agree(capsys, argv):
    code_t, out, _ = run(capsys, *argv)
    code_j, data = run_json(capsys, *argv)
    assert code_t == code_j
    assert out.rstrip().splitlines()[-1] == ("PASS" if data["pass"] else "FAIL")
    assert data["verb"] == argv[0]


def test_crossing_report(capsys):
    code, data = run_json(capsys, "crossing")
    assert code == 0 and data["report"]["scalar"] == str(u - 3 * m)


def test_multtable_json(capsys):
    code, data = run_json(capsys, "multtable", "--series", "sp", "--strands", "2")
    table = data["report"]["structure_constants"]
    assert code == 0 and table[2][2] == {"C": "-n"}


@pytest.mark.parametrize("argv,kind", [
    (("reduce", "--series", "e6", "--strands", "2", "P * * 3"), "ParseError"),
    (("reduce", "--series", "e6", "--strands", "2", "foo"), "UnknownSymbol"),
    (("reduce", "--series", "so", "--strands", "3", "--mixed", "id"), "UsageError"),
    (("numeric", "--series", "so"), "UsageError"),
    (("numeric", "--series", "e6", "--m", "1", "--u", "x"), "UsageError"),
    (("reduce", "--series", "e6"), "UsageError"),
])
def test_usage_errors(capsys, argv, kind):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    rec = json.loads(err)
    jsonschema.validate(rec, SCHEMA)
    assert rec["error"]["type"] == kind and rec["pass"] is False


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["ybe", "--series", "g2"])
    assert info.value.code == 2


def test_output_locations(capsys, tmp_path, monkeypatch):
    target = tmp_path / "one.json"
    run(capsys, "ybe", "--series", "su", "--format", "json", "--output", str(target))
    assert json.loads(target.read_text())["pass"] is True
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "reports"))
    run(capsys, "projectors", "--series", "so")
    assert (tmp_path / "reports" / "projectors-so.txt").read_text().rstrip().endswith("PASS")


def test_dot_export(capsys):
    code, out, _ = run(capsys, "basis", "--series", "e6", "--strands", "2", "--dot", "eBA")
    assert code == 0 and out.startswith("graph eBA {")
    code, out, _ = run(capsys, "reduce", "--series", "e7", "--strands", "3", "--dot", "objh")
    assert code == 0 and out.count("graph objh {") == 6


def test_lemma_verb(capsys):
    code, out, _ = run(capsys, "lemma", "row-sum")
    assert code == 0 and out.startswith("row-sum:")
