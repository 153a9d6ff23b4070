import random

import pytest
from hypothesis import given, strategies as st

from eqfree.generators import random_reduced_word
from eqfree.words import (
    Alphabet,
    Word,
    WordSyntaxError,
    concat_reduced,
    cyclic_reduce,
    exponent_of_periodicity,
    format_word,
    is_primitive,
    p_decomposition,
    parse_word,
    primitive_root,
)

AB = Alphabet(("a", "b"), ("X", "Y"))
letters = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12)


def test_word_reduces_on_construction():
    assert Word([1, 2, -2, -1, 1]) == Word([1])
    assert Word([1, -1]) == Word()


def test_concat_reports_cancellation():
    assert concat_reduced(Word([1, 2]), Word([-2, -1, 2])) == (Word([2]), 2)
    assert concat_reduced(Word([1]), Word([2]))[1] == 0


@given(letters, letters)
def test_inverse_is_group_inverse(u, v):
    w = Word(u) * Word(v)
    assert w * w.inverse() == Word()
    assert (Word(u) * Word(v)).inverse() == Word(v).inverse() * Word(u).inverse()


def test_parse_and_format():
    w = parse_word("a^2 b^-1 X [a,b]", AB)
    assert w == Word([1, 1, -2, 3, 1, 2, -1, -2])
    assert format_word(w, AB) == "a^2 b^-1 X a b a^-1 b^-1"
    assert parse_word("(a b)^-2 a'", AB) == Word([-2, -1, -2, -1, -1])


@given(letters)
def test_format_round_trip(raw):
    w = Word(raw)
    assert parse_word(format_word(w, AB) or "1", AB) == w


def test_parse_error_column():
    with pytest.raises(WordSyntaxError) as info:
        parse_word("a b ) X", AB)
    assert info.value.column == 5


def test_primitive_root_and_cyclic_reduce():
    assert primitive_root(Word([1, 2, 1, 2])) == (Word([1, 2]), 2)
    assert cyclic_reduce(Word([2, 1, 1, -2])) == (Word([1, 1]), Word([2]))
    assert not is_primitive(Word([1, 1]))
    assert is_primitive(Word([1, 2, -1, -2]))
    with pytest.raises(ValueError):
        primitive_root(Word([1, 2, -1]))


def test_exponent_of_periodicity():
    assert exponent_of_periodicity([Word([1, 2, 1, 2, 1, 2, 1])]) == 3
    assert exponent_of_periodicity([Word([1, 1, 1, 1]), Word([2])]) == 4
    assert exponent_of_periodicity([Word()]) == 0


def test_p_decomposition_frozen():
    parts = p_decomposition(Word([1, 2, 1, 2, 1, 2, 1, 2, -1]), Word([1, 2]))
    assert parts == [Word([1, 2]), Word([1, 2, 1, 2]), Word([1, 2, -1])]


def test_p_decomposition_rejects_imprimitive_period():
    with pytest.raises(ValueError):
        p_decomposition(Word([1, 1, 1]), Word([1, 1]))


def test_p_decomposition_reassembles_random():
    rng = random.Random(3)
    for _ in range(200):
        w = random_reduced_word(rng, 2, rng.randint(0, 20))
        assert Word(x for part in p_decomposition(w, Word([1])) for x in part) == w
