from pathlib import Path

import pytest

from eqfree.eqsys import (
    Equation,
    EquationSystem,
    ParseError,
    QuadraticKind,
    classify_standard_quadratic,
    evaluate,
    is_quadratic,
    parse_system,
    triangulate,
)
from eqfree.words import Alphabet, Word, parse_word

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def malcev():
    return parse_system((SAMPLES / "malcev.eq").read_text())


def test_parse_header_and_sides():
    s = malcev()
    assert s.alphabet.constants == ("a", "b")
    assert s.alphabet.variables == ("X", "Y", "Z")
    assert s.format() == "Z X Y X^-1 Y^-1 Z^-1 b a b^-1 a^-1 = 1"


def test_parse_without_header_infers_alphabet():
    s = parse_system("X a = a X\n")
    assert s.alphabet.constants == ("a",)
    assert s.alphabet.variables == ("X",)


def test_parse_error_location():
    with pytest.raises(ParseError) as info:
        parse_system((SAMPLES / "malformed.eq").read_text())
    assert (info.value.line, info.value.column) == (3, 5)


def test_evaluate_known_solution():
    s = malcev()
    a = s.alphabet
    sol = {a.code("X"): parse_word("a b a", a), a.code("Y"): parse_word("a^-1", a), a.code("Z"): Word()}
    assert evaluate(s, sol)
    sol[a.code("Z")] = Word([1])
    assert not evaluate(s, sol)


def test_triangulation_frozen_and_lifts_solutions():
    s = malcev()
    tri, tmap = triangulate(s)
    assert len(tri.equations) == 8
    assert all(len(eq.lhs) <= 3 for eq in tri.equations)
    assert tri.equations[0].lhs == parse_word("Z X T1^-1", tri.alphabet)
    a = s.alphabet
    sol = {a.code("X"): parse_word("a b a", a), a.code("Y"): parse_word("a^-1", a), a.code("Z"): Word()}
    assert evaluate(tri, tmap.lift(sol))
    assert tmap.project(tmap.lift(sol)) == sol


def test_is_quadratic():
    assert is_quadratic(malcev())
    assert not is_quadratic(parse_system("X X X = a\n"))


@pytest.mark.parametrize(
    "text, kind, genus, m",
    [
        ("X Y X^-1 Y^-1", QuadraticKind.ORIENTABLE, 1, 0),
        ("X X Y Y", QuadraticKind.NONORIENTABLE, 2, 0),
        ("X Y X^-1 Y^-1 Z^-1 a Z b", QuadraticKind.ORIENTABLE_COEFF, 1, 1),
        ("X X Z^-1 a Z b", QuadraticKind.NONORIENTABLE_COEFF, 1, 1),
        ("Z^-1 a Z b", QuadraticKind.ORIENTABLE_COEFF, 0, 1),
    ],
)
def test_classifier_examples(text, kind, genus, m):
    alph = Alphabet(("a", "b"), ("X", "Y", "Z"))
    form = classify_standard_quadratic(Equation(parse_word(text, alph)), alph)
    assert (form.kind, form.genus, form.coefficients) == (kind, genus, m)


@pytest.mark.parametrize("text", ["X Y X Y", "X X^-1", "a b", "X Y X^-1 Y^-1 Z^-1 a Z"])
def test_classifier_rejects_nonstandard(text):
    alph = Alphabet(("a", "b"), ("X", "Y", "Z"))
    assert classify_standard_quadratic(Equation(parse_word(text, alph)), alph) is None


def test_system_format_round_trip():
    s = malcev()
    again = parse_system("consts: a b\nvars: X Y Z\n" + s.format())
    assert again == EquationSystem(s.alphabet, s.equations)
