import pytest

from eqfree.eqsys import parse_system
from eqfree.geq import Base, make_ge
from eqfree.oracle import (
    SearchSpace,
    SpaceTooLarge,
    count_words,
    enumerate_words,
    ge_solve_exhaustive,
    has_solution,
    solve_exhaustive,
)
from eqfree.words import Word


def test_word_counts_match_enumeration():
    for n, L in [(1, 4), (2, 3), (3, 2)]:
        words = list(enumerate_words(SearchSpace(n, L)))
        assert len(words) == count_words(n, L)
        assert len(set(words)) == len(words)
    assert count_words(2, 3) == 53
    assert count_words(2, 3, allow_empty=False) == 52


def test_length_lex_order():
    words = list(enumerate_words(SearchSpace(2, 1)))
    assert words == [Word(), Word([1]), Word([-1]), Word([2]), Word([-2])]


def test_commuting_pairs_frozen():
    s = parse_system("consts: a b\nvars: X Y\nX Y = Y X\n")
    assert len(solve_exhaustive(s, 2)) == 81


def test_square_root_of_generator_has_none():
    s = parse_system("X^2 = a\n")
    assert not has_solution(s, 4)
    assert has_solution(parse_system("X^2 = a^2\n"), 1)


def test_space_guard():
    s = parse_system("consts: a b\nvars: X Y Z\nX Y Z = a\n")
    with pytest.raises(SpaceTooLarge):
        solve_exhaustive(s, 6)


def test_ge_exhaustive_single_pair():
    # h1 = h2 over one letter, items of length <= 2
    ge = make_ge(2, (), [Base(1, 1, 2, 1, 2), Base(2, 1, 1, 2, 3)])
    sols = ge_solve_exhaustive(ge, 2, n_letters=1)
    assert sols == [(Word([1]), Word([1])), (Word([-1]), Word([-1])), (Word([1, 1]), Word([1, 1])),
                    (Word([-1, -1]), Word([-1, -1]))]
    assert len(ge_solve_exhaustive(ge, 2, n_letters=1, first_only=True)) == 1
