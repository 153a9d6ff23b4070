import random
from pathlib import Path

import pytest

from eqfree.bulitko import (
    bound_for_triangles,
    bulitko_bound,
    closed_form_bound,
    dominant_period,
    minimal_positive_solution,
    pump,
)
from eqfree.eqsys import evaluate, parse_system, triangulate
from eqfree.generators import planted_ge, planted_periodic_system
from eqfree.process import Budget, Status, build_solution_tree, case_splits, ge_from_system, layouts, solve
from eqfree.traces import analyze_trace, follow_witness
from eqfree.words import Word, exponent_of_periodicity

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def sample(name):
    return parse_system((SAMPLES / f"{name}.eq").read_text())


@pytest.mark.parametrize(
    "name, status, witness",
    [
        ("malcev", Status.SAT, {"X": [1, 2, 1], "Y": [-1], "Z": []}),
        ("conjugacy", Status.SAT, {"X": [-2, -1]}),
        ("commuting", Status.SAT, {"X": [], "Y": []}),
        ("square_root", Status.UNSAT, None),
    ],
)
def test_sample_verdicts_frozen(name, status, witness):
    s = sample(name)
    v = solve(s)
    assert v.status is status
    if witness is None:
        assert v.witness is None
    else:
        assert {s.alphabet.name(k): list(w) for k, w in v.witness.items()} == witness
        assert evaluate(s, v.witness)


def test_small_budget_is_unknown():
    s = parse_system("consts: a b\nX a X^-1 = b\n")
    assert solve(s, Budget(max_depth=2, max_nodes=3)).status is Status.UNKNOWN
    assert solve(s).status is Status.UNSAT


def test_case_splits_and_layouts_frozen():
    tri, _ = triangulate(sample("conjugacy"))
    splits = case_splits(tri)
    assert [len(layouts(c.residual)) if c.residual.equations else 0 for c in splits] == [0, 0, 2, 2, 2, 16]
    with pytest.raises(ValueError):
        layouts(sample("malcev"))


def test_threads_give_the_same_witness():
    s = sample("conjugacy")
    assert solve(s, threads=2).witness == solve(s).witness


def test_recorded_steps_never_raise_complexity():
    v = solve(sample("conjugacy"), Budget(record_steps=True))
    steps = v.stats["steps"]
    assert steps
    assert all(max(r["tau_after"], default=0) <= r["tau_before"] for r in steps)


def test_solution_tree_of_planted_equation():
    rng = random.Random(17)
    for _ in range(20):
        ge, _ = planted_ge(rng)
        tree = build_solution_tree(ge)
        assert tree.solution is not None
        assert tree.n_nodes == len(tree.nodes)
        assert tree.to_dot().startswith("digraph")


def test_ge_from_system_layouts_are_valid():
    tri, _ = triangulate(sample("conjugacy"))
    ges = ge_from_system(case_splits(tri)[-1].residual)
    assert len(ges) == 16


# --- exponent of periodicity -----------------------------------------------------


def test_bound_values_frozen():
    assert [bound_for_triangles(k) for k in range(5)] == [1, 5, 13, 29, 61]
    # the exact enumeration agrees with the closed form where both exist
    assert all(bound_for_triangles(k) == closed_form_bound(k) for k in range(3))
    assert bulitko_bound(sample("square_root")) == 5


def test_minimal_positive_solution():
    assert minimal_positive_solution(3, [(2, (0, 1), 2)]) == [1, 1, 4]
    assert minimal_positive_solution(2, [(1, (0,), -3)]) == [4, 1]
    assert minimal_positive_solution(2, [(1, (0,), 1), (1, (0,), 2)]) is None


def test_dominant_period():
    assert dominant_period([Word([2, 1, 2, 1, 2, 1, 2])]) == (Word([2, 1]), 3)
    assert dominant_period([Word([1, 2])]) == (None, 0)


def test_pump_shortens_planted_power():
    system, values, period = planted_periodic_system(random.Random(3), 40, 3, 2)
    assert exponent_of_periodicity(values.values()) > bulitko_bound(system)
    res = pump(system, values)
    assert res.period == period or res.period == period.inverse()
    assert res.verified and res.shorter
    assert max(q for _, q in res.classes) < 40


# --- traces ------------------------------------------------------------------------


def test_trace_replays_witness():
    ge, sol = planted_ge(random.Random(2), max_rho=8, periodic=True)
    trace = follow_witness(ge, sol)
    assert trace.steps[0].op == "cleaning"
    assert all(a.tau >= b.tau for a, b in zip(trace.steps, trace.steps[1:]))
    report = analyze_trace(trace)
    assert all(r.psi_constant for r in report.runs)
    assert all(p.holds for p in report.paths)
