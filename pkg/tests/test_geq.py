import json
import random
from pathlib import Path

from eqfree.generators import planted_ge, random_ge
from eqfree.geq import (
    Base,
    associated_system,
    canonical_key,
    check_solution,
    complexity,
    connection,
    from_json,
    gamma,
    make_ge,
    permute_sections,
    section_key,
    to_dot,
    to_json,
    validate,
)
from eqfree.words import Word

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def fig2():
    return from_json((SAMPLES / "fig2.json").read_text())


def test_sample_is_valid_and_frozen():
    ge = fig2()
    assert validate(ge) == []
    assert (ge.rho, ge.m, ge.constants) == (6, 1, (1,))
    assert complexity(ge) == 0
    assert gamma(ge) == {1: 1, 2: 1, 3: 1, 4: 1, 5: 1, 6: 1, 7: 0}
    assert associated_system(ge).format().splitlines() == ["h1 h6 = 1", "h2 h3 = 1", "h4 h5 = 1", "h7 a^-1 = 1"]


def test_bad_dual_reports_every_breach():
    ge = from_json((SAMPLES / "bad_dual.json").read_text())
    assert validate(ge) == ["item 1: base 1 is its own dual", "item 1: dual map is not an involution at base 2"]


def test_validate_orientation_and_endpoint():
    ge = make_ge(2, (), [Base(1, 1, 2, 2, 1), Base(2, 1, 1, 2, 9)])
    msgs = validate(ge)
    assert any(m.startswith("item 3: base 1") for m in msgs)
    assert any(m.startswith("item 2: base 2") for m in msgs)


def test_connection_normalized_to_smaller_id():
    b1, b2 = Base(1, 1, 2, 1, 3), Base(2, 1, 1, 4, 6)
    assert connection(5, b2, 2) == (2, 1, 5)
    assert connection(2, b1, 5) == (2, 1, 5)


def test_check_solution_on_sample():
    ge = fig2()
    a, b = Word([1]), Word([2])
    good = (a, b, b.inverse(), a * b, (a * b).inverse(), a.inverse())
    assert check_solution(ge, good)
    assert not check_solution(ge, (a, b, b, a, a, a))
    # items must be nonempty
    assert not check_solution(ge, (Word(), b, b.inverse(), a, a.inverse(), Word()))


def test_planted_solutions_check():
    rng = random.Random(11)
    for _ in range(100):
        ge, sol = planted_ge(rng)
        assert validate(ge) == []
        assert check_solution(ge, sol)


def test_json_round_trip():
    rng = random.Random(5)
    for _ in range(50):
        ge = random_ge(rng)
        again = from_json(json.dumps(to_json(ge)))
        assert again == ge


def test_canonical_key_ignores_base_ids():
    ge = fig2()
    renamed = make_ge(
        ge.rho,
        ge.constants,
        [Base(b.id + 10, b.sign, b.dual + 10, b.alpha, b.beta) for b in ge.bases],
    )
    assert canonical_key(renamed) == canonical_key(ge)


def test_dot_output():
    text = to_dot(fig2())
    assert text.startswith("digraph")
    assert text.rstrip().endswith("}")


def test_permuting_sections_moves_solutions():
    rng = random.Random(13)
    for _ in range(50):
        ge, sol = planted_ge(rng)
        var = [s for s in ge.sections if s.end <= ge.rho + 1]
        order = list(range(len(var)))
        rng.shuffle(order)
        moved = permute_sections(ge, order)
        assert validate(moved) == []
        new_sol = [w for k in order for w in sol[var[k].start - 1 : var[k].end - 1]] + list(sol[ge.rho :])
        assert check_solution(moved, new_sol)
        assert section_key(moved) == section_key(ge)


def test_section_key_separates_different_equations():
    a = make_ge(2, (), [Base(1, 1, 2, 1, 2), Base(2, 1, 1, 2, 3)])
    b = make_ge(2, (), [Base(1, 1, 2, 1, 2), Base(2, -1, 1, 3, 2)])
    assert section_key(a) != section_key(b)
