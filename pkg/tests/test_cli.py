from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mahlerkit.cli import ParseError, main, parse_expression, parse_minpoly
from mahlerkit.demos import golden_field
from mahlerkit.exactalg import NumberField, Poly, RatFunc

from .oracles import binary_partitions

Q = NumberField.rationals()
K = golden_field()


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- expression grammar -----------------------------------------------------------

def test_parse_examples():
    t = K.gen
    assert parse_expression("3/4", Q) == Q(Fraction(3, 4))
    assert parse_expression("t^2 - t", K) == K.one
    assert parse_expression("(1 + t*z)^2", K) == Poly(K, [1, 2 * t, t * t])
    assert parse_expression("z**2 - -z", Q) == Poly(Q, [0, 1, 1])
    z = RatFunc.z(Q)
    assert parse_expression("1/(1 - 2*z)", Q) == 1 / (1 - 2 * z)
    assert parse_expression("-(z^0) * 2", Q) == Q(-2)


@pytest.mark.parametrize("src,field", [
    ("1 +", Q), ("(z", Q), ("2z", Q), ("t", Q), ("1/0", Q), ("z/(z-z)", Q), ("2 $ 3", Q), ("z^t", K), ("z^-1", Q),
])
def test_parse_errors(src, field):
    with pytest.raises(ParseError):
        parse_expression(src, field)


def test_parse_minpoly():
    assert parse_minpoly("t^2 - t - 1") == [-1, -1, 1]
    assert parse_minpoly("z^3-2") == [-2, 0, 0, 1]


@given(st.lists(st.fractions(max_denominator=9, min_value=-9, max_value=9), max_size=5))
def test_render_parse_round_trip(cs):
    p = Poly(Q, cs)
    assert parse_expression(str(p), Q) == p


# -- commands ---------------------------------------------------------------------

def test_bound(capsys):
    code, out, _ = run(capsys, "bound", "-n", "2", "-d", "2", "-q", "3", "--height", "1", "--json")
    assert code == 0
    assert json.loads(out) == {"c": 9565938, "pre_ceiling": "38263749/4"}


def test_expand_demo(capsys):
    code, out, _ = run(capsys, "expand", "demo:thue3", "--terms", "6")
    assert code == 0
    assert [line.split(": ")[1] for line in out.splitlines()] == ["0", "0", "1", "0", "0", "1"]


def test_expand_system_file(tmp_path, capsys):
    path = tmp_path / "partitions.json"
    path.write_text(json.dumps({"q": 2, "matrix": [["1/(1-z)"]], "seed": [["1"]]}))
    code, out, _ = run(capsys, "expand", str(path), "--terms", "20", "--json")
    assert code == 0
    data = json.loads(out)
    assert [int(v) for v in data["terms"]] == binary_partitions(20)


def test_compile_automaton_file(tmp_path, capsys):
    path = tmp_path / "a.json"
    path.write_text(json.dumps({"q": 2, "states": ["E", "O"], "init": "E",
                                "delta": {"E": ["E", "O"], "O": ["O", "E"]}, "output": {"E": "0", "O": "1"}}))
    code, out, _ = run(capsys, "compile-automaton", str(path), "--json")
    assert code == 0
    assert json.loads(out)["matrix"] == [["1", "z"], ["z", "1"]]


def test_demo_json_is_stable(capsys):
    code, out, _ = run(capsys, "demo", "thue3", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["matrix"] == [["1+z", "z^2"], ["z^2", "1+z"]]
    assert data["independence"] == "independent"
    assert data["report"]["verdicts"] == [{"f": "f1", "status": "algebraic", "value": "-1/2*t"},
                                          {"f": "f2", "status": "algebraic", "value": "-1/2*t"}]
    assert data["doubled"]["matrix"][0] == ["z", "z^2", "1+z^3", "z^6"]
    code2, out2, _ = run(capsys, "demo", "thue3", "--json")
    assert out2 == out


def test_verdict_and_weights(capsys):
    code, out, _ = run(capsys, "verdict", "demo:four-state", "--alpha", "t", "--weights", "1,1,1,1", "--json")
    assert code == 0
    assert "-t" in out
    code, out, _ = run(capsys, "verdict", "demo:thue3", "--alpha", "1/2")
    assert code == 0 and "Transcendental" in out


def test_independence_and_relations(capsys):
    code, out, _ = run(capsys, "independence", "demo:four-state")
    assert code == 0 and "(z, -1, -1, z)" in out
    code, out, _ = run(capsys, "relations", "demo:thue3", "--augment")
    assert code == 0 and "(1-z, 1-z, -1)" in out


def test_relations_inconclusive_with_tiny_budget(capsys):
    code, out, _ = run(capsys, "relations", "demo:four-state", "--max-columns", "2", "--window", "1000")
    assert code == 4


@pytest.mark.parametrize("argv,code", [
    (["point", "demo:thue3", "--alpha", "2"], 3),
    (["point", "demo:thue3", "--alpha", "1/"], 2),
    (["expand", "/nonexistent/file.json"], 3),
    (["expand", "demo:nope"], 2),
    (["bound", "-n", "2"], 2),
    (["frobnicate"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code


def test_custom_field_flags(capsys):
    code, out, _ = run(capsys, "point", "demo:thue3", "--alpha", "t/2", "--minpoly", "t^2-2", "--root-near", "1.41")
    assert code == 0 and "Regular" in out


def test_toml_automaton_file(tmp_path, capsys):
    path = tmp_path / "thue3.toml"
    path.write_text('q = 3\nstates = ["A", "B"]\ninit = "A"\n'
                    '[delta]\nA = ["A", "A", "B"]\nB = ["B", "B", "A"]\n'
                    '[output]\nA = "0"\nB = "1"\n')
    code, out, _ = run(capsys, "compile-automaton", str(path), "--json")
    assert code == 0
    assert json.loads(out)["matrix"] == [["1+z", "z^2"], ["z^2", "1+z"]]


def test_invalid_input_file(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("q = [")
    assert main(["expand", str(bad)]) == 2
