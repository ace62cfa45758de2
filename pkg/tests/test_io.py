import json
from fractions import Fraction

import pytest

from gnf.errors import ParseError
from gnf.io import dumps_field, field_from_dict, field_to_dict, load_field

FIXTURES = ["quadratic_1d", "resonant_1_m2", "saddle_1_m3", "golden_saddle"]


def _base():
    return {"n": 2, "linear": [["1", "0"], ["0", "-3"]],
            "terms": [{"component": 1, "exponents": [2, 0], "coeff": "1/2"}]}


@pytest.mark.parametrize("name", FIXTURES)
def test_canonical_round_trip(data_dir, name, tmp_path):
    X = load_field(data_dir / f"{name}.json")
    text = dumps_field(X)
    path = tmp_path / "f.json"
    path.write_text(text)
    assert dumps_field(load_field(path)) == text


def test_round_trip_keeps_exact_coefficients(data_dir):
    X = load_field(data_dir / "saddle_1_m3.json")
    coeffs = {t["coeff"] for t in field_to_dict(X)["terms"]}
    assert {"1/2", "-1", "2/3", "1/5", "-3/4"} == coeffs
    assert X.parts[2][(0, (2, 0))] == Fraction(1, 2)


def test_float_coefficients_switch_the_field(data_dir):
    X = load_field(data_dir / "golden_saddle.json")
    assert X.field.kind == "float" and X.field.precision == 256


def test_terminating_decimal_is_read_exactly():
    spec = _base()
    spec["terms"][0]["coeff"] = "0.25"
    X = field_from_dict(spec)
    assert X.field.kind == "rational" and X.parts[2][(0, (2, 0))] == Fraction(1, 4)
    spec["scalar_field"] = "float"
    assert field_from_dict(spec).field.kind == "float"


def test_nmax_defaults_to_top_degree_and_can_be_raised():
    assert field_from_dict(_base()).nmax == 2
    assert field_from_dict(_base(), nmax=5).nmax == 5


@pytest.mark.parametrize("mutate, where", [
    (lambda s: s.update(n=0), "n"),
    (lambda s: s.update(linear=[["1"]]), "linear"),
    (lambda s: s.update(extra=1), "top level"),
    (lambda s: s["terms"][0].update(coeff=0.5), "terms[0].coeff"),
    (lambda s: s["terms"][0].update(coeff="1/0x"), "terms[0].coeff"),
    (lambda s: s["terms"][0].update(component=3), "terms[0].component"),
    (lambda s: s["terms"][0].update(exponents=[1, 0]), "terms[0].exponents"),
    (lambda s: s["terms"][0].update(exponents=[2]), "terms[0].exponents"),
    (lambda s: s["terms"].append(dict(s["terms"][0])), "terms[1]"),
    (lambda s: s.update(scalar_field="complex"), "scalar_field"),
    (lambda s: s.update(precision_bits=20), "precision_bits"),
])
def test_parse_errors_name_the_offending_field(mutate, where):
    spec = _base()
    mutate(spec)
    with pytest.raises(ParseError, match=rf"^{__import__('re').escape(where)}:"):
        field_from_dict(spec)


def test_json_syntax_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 1,\n "linear": [["1"]],,\n}')
    with pytest.raises(ParseError, match=r"line 2 column"):
        load_field(path)


def test_serialized_file_is_valid_json(data_dir):
    X = load_field(data_dir / "resonant_1_m2.json")
    spec = json.loads(dumps_field(X, include_nmax=True))
    assert spec["nmax"] == 4 and spec["terms"][0]["exponents"] == [3, 1]
