import random
from pathlib import Path

import pytest

from eqfree.generators import TRANSFORMS, planted_ge, transform_instance
from eqfree.geq import Base, check_solution, complexity, connection, from_json, make_ge, validate
from eqfree.transforms import (
    Inconsistent,
    TransformError,
    d2_candidates,
    detect_inconsistency,
    entire_transformation_step,
    et3_remove_matched,
    et5_introduce_boundary,
    inconsistency_reason,
    is_clean,
    kernel,
    tietze_cleaning,
)
from eqfree.words import Word

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.mark.parametrize("op", TRANSFORMS)
def test_round_trip_small_sample(op):
    rng = random.Random(f"unit-{op}")
    for _ in range(20):
        ge, sol, res = transform_instance(rng, op)
        k, child_sol = res.witness_split(sol)
        child, tr = res.children[k]
        assert validate(child) == []
        assert check_solution(child, child_sol)
        assert tuple(tr.forward(child_sol)) == tuple(sol)


def test_et5_child_count():
    # one pair h1 h2 = h3 h4: tying boundary 2 gives 3 boundary placements and 2 item cuts
    ge = make_ge(4, (), [Base(1, 1, 2, 1, 3), Base(2, 1, 1, 3, 5)])
    res = et5_introduce_boundary(ge, 2, 1)
    assert len(res.children) == 5
    a, b = Word([1]), Word([2])
    k, vals = res.witness_split((a, b, a, b))
    assert res.children[k][0].rho == 4
    k, vals = res.witness_split((a, b * a, a * b, a))
    assert vals == (a, b * a, a, b, a)


def test_et5_rejects_tied_boundary():
    ge = make_ge(4, (), [Base(1, 1, 2, 1, 3), Base(2, 1, 1, 3, 5)], {(2, 1, 4)})
    with pytest.raises(TransformError):
        et5_introduce_boundary(ge, 2, 1)


def test_et3_needs_matched_pair():
    ge = make_ge(4, (), [Base(1, 1, 2, 1, 3), Base(2, 1, 1, 3, 5)])
    with pytest.raises(TransformError):
        et3_remove_matched(ge, 1)


def test_inconsistency_reasons():
    opposite = make_ge(2, (), [Base(1, 1, 2, 1, 3), Base(2, -1, 1, 3, 1)])
    assert "opposite orientation" in inconsistency_reason(opposite)
    nested = make_ge(3, (), [Base(1, 1, 2, 1, 4), Base(2, 1, 1, 2, 3)])
    assert "strictly inside" in inconsistency_reason(nested)
    b1, b2 = Base(1, 1, 2, 1, 3), Base(2, 1, 1, 3, 5)
    to_end = make_ge(4, (), [b1, b2], {connection(2, b1, 3)})
    assert detect_inconsistency(to_end)
    assert not detect_inconsistency(make_ge(4, (), [b1, b2]))


def test_kernel_of_sample_frozen():
    ge = from_json((SAMPLES / "fig2.json").read_text())
    k, trace = kernel(ge)
    assert [r["op"] for r in trace] == ["D2", "D2", "D2"]
    assert k.rho == 3 and not k.bases
    assert all(r["items_after"][0] == r["items_before"] - 1 for r in trace)


def test_kernel_transport_carries_solutions():
    rng = random.Random(21)
    for _ in range(50):
        ge, sol = planted_ge(rng)
        before = d2_candidates(ge)
        k, trace = kernel(ge)
        assert d2_candidates(k) == []
        assert complexity(k) <= complexity(ge)
        if not before:
            assert trace == []


def test_cleaning_then_entire_step_keeps_witness():
    rng = random.Random(4)
    steps = 0
    for _ in range(30):
        ge, sol = planted_ge(rng, periodic=True)
        res = tietze_cleaning(ge)
        k, vals = res.witness_split(sol)
        child = res.children[k][0]
        assert is_clean(child) or not child.active_sections()
        if not child.active_sections():
            continue
        try:
            step = entire_transformation_step(child)
        except Inconsistent:
            continue
        assert step.witness_split(vals) is not None
        assert all(complexity(c) <= complexity(child) for c, _ in step.children)
        steps += 1
    assert steps > 0
