import random

import pytest

from eqfree import subgraph as sg
from eqfree.generators import random_reduced_word
from eqfree.words import Word

A, B = 1, 2


def test_build_and_generators():
    g = sg.build([[A, B], [B]])
    assert g.rank == 2
    assert sg.generators(g) == [Word([A]), Word([B])]
    assert sg.build([]).is_trivial()


def test_membership():
    h = sg.build([[A, A]])
    assert sg.membership(h, [A, A, A, A])
    assert sg.membership(h, [])
    assert not sg.membership(h, [A])


def test_generators_span_the_same_subgroup():
    rng = random.Random(8)
    for _ in range(30):
        gens = [random_reduced_word(rng, 2, rng.randint(1, 5)) for _ in range(rng.randint(1, 3))]
        g = sg.build(gens)
        again = sg.build(sg.generators(g))
        assert (again.n_vertices, sorted(again.edges)) == (g.n_vertices, sorted(g.edges))
        assert all(sg.membership(g, w) for w in gens)


def test_intersection_of_cyclic_subgroups():
    _, gens = sg.intersect(sg.build([[A, A]]), sg.build([[A, A, A]]))
    assert gens == [Word([A] * 6)]
    _, gens = sg.intersect(sg.build([[A]]), sg.build([[B]]))
    assert gens == []


def test_centralizers():
    assert sg.centralizer([A, B, A, B]) == Word([A, B])
    assert sg.centralizer([]) is None
    assert sg.centralizer_of_set([[A], [B]]) == []
    assert sg.centralizer_of_set([]) is None


def test_malnormal_with_witness():
    ok, wit = sg.is_malnormal(sg.build([[A, A]]), 2)
    assert not ok
    g, h, conj = wit
    assert g == Word([A]) and conj == g * h * g.inverse()
    assert sg.is_malnormal(sg.build([[A, B, -A, -B]]), 2) == (True, None)
    with pytest.raises(ValueError):
        sg.is_malnormal(sg.build([[A], [B]]), 2)


def test_conjugate_subgroups():
    ok, g = sg.subgroups_conjugate(sg.build([[A]]), sg.build([[B, A, -B]]))
    assert ok and g == Word([B])
    ok, g = sg.subgroups_conjugate(sg.build([[A]]), sg.build([[A, A]]))
    assert not ok and g is None


def test_dot():
    text = sg.build([[A, A]]).to_dot(["a", "b"])
    assert "doublecircle" in text
    assert text.count("->") == 2
