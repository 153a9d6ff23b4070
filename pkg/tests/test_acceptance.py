"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import random
import time
from collections import Counter

import pytest

from eqfree.bulitko import bulitko_bound, pump
from eqfree.eqsys import (
    Equation,
    QuadraticForm,
    QuadraticKind,
    classify_standard_quadratic,
    standard_quadratic_word,
)
from eqfree.generators import (
    TRANSFORMS,
    planted_ge,
    planted_periodic_system,
    planted_system,
    random_ge,
    random_reduced_word,
    transform_instance,
    triangulated_corpus,
)
from eqfree.geq import check_solution, section_key, validate
from eqfree.oracle import SearchSpace, enumerate_words, ge_solve_exhaustive, has_solution
from eqfree.process import Budget, Status, solve
from eqfree.subgraph import (
    build,
    centralizer,
    intersect,
    is_malnormal,
    is_proper,
    membership,
)
from eqfree.traces import analyze_trace, follow_witness
from eqfree.transforms import detect_inconsistency, kernel, kernel_with_transport
from eqfree.words import Alphabet, Word, exponent_of_periodicity, is_primitive, p_decomposition

pytestmark = pytest.mark.slow

ORACLE_LENGTH = 4
GE_LENGTH = 3


def _random_valid_ges(seed: int, count: int, max_rho: int = 6):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        ge = random_ge(rng, max_rho=max_rho)
        if not validate(ge) and not detect_inconsistency(ge):
            out.append(ge)
    return out


# --- shared runs ------------------------------------------------------------------


@pytest.fixture(scope="session")
def desk_runs():
    """Solver and oracle verdicts on the exhaustive corpus plus planted systems."""
    t0 = time.time()
    systems = [("corpus", s) for s in triangulated_corpus()]
    rng = random.Random(2024)
    for _ in range(500):
        s, _ = planted_system(rng, n_vars=rng.randint(1, 2), n_eqs=rng.randint(1, 2), max_value=3, max_len=6)
        systems.append(("planted", s))
    runs = []
    for origin, s in systems:
        v = solve(s, Budget(record_steps=True))
        runs.append((origin, s, v, has_solution(s, ORACLE_LENGTH)))
    return runs, time.time() - t0


@pytest.fixture(scope="session")
def kernel_runs():
    """Parent and kernel searches, both read as systems over the free group."""
    runs = []
    for ge in _random_valid_ges(7, 1000):
        k, trace, tr = kernel_with_transport(ge)
        # width: how many parent items one kernel item can absorb
        probe = tr.split(tuple(Word((i,)) for i in range(1, ge.n_items + 1)))
        width = max([len(w) for w in probe[: k.rho]], default=1)
        limit = GE_LENGTH * width

        def product(seq, v):
            return Word(x for c in seq for x in (v[abs(c) - 1] if c > 0 else v[abs(c) - 1].inverse()))

        def bounded(seq):
            return lambda v: 0 < len(product(seq, v)) <= GE_LENGTH

        extra = [({abs(c) for c in tr.forward_map[i] if abs(c) <= k.rho}, bounded(tr.forward_map[i]))
                 for i in range(ge.rho)]

        def lifts(kv, ge=ge, k=k, tr=tr):
            return check_solution(ge, tr.forward(kv + tuple(Word((c,)) for c in k.constants)), as_written=False)

        parent = ge_solve_exhaustive(ge, GE_LENGTH, first_only=True, max_candidates=math.inf, as_written=False)
        kern = ge_solve_exhaustive(k, limit, first_only=True, max_candidates=math.inf, as_written=False,
                                   accept=lifts, extra=extra)
        split_ok = True
        if parent:
            kv = tr.split(parent[0] + tuple(Word((c,)) for c in ge.constants))
            split_ok = check_solution(k, kv, as_written=False) and all(len(w) <= limit for w in kv[: k.rho])
        runs.append((ge, k, trace, bool(parent), bool(kern), split_ok))
    return runs


# --- criteria ----------------------------------------------------------------------


def test_oracle_equivalence(desk_runs, verdict):
    runs, elapsed = desk_runs
    counts = Counter()
    contradictions = missed = 0
    for origin, s, v, sat in runs:
        counts[(origin, v.status.value)] += 1
        if v.status is Status.UNSAT and sat:
            contradictions += 1
        if sat and v.status is not Status.SAT:
            missed += 1
    n_corpus = sum(1 for r in runs if r[0] == "corpus")
    ok = contradictions == 0 and missed == 0 and elapsed < 600
    verdict(1, ok, f"{n_corpus} corpus + {len(runs) - n_corpus} planted systems, "
                   f"{contradictions} contradictions, {missed} oracle-SAT not SAT, {elapsed:.0f}s "
                   f"{dict(sorted(counts.items()))}")
    assert ok


def test_kernel_equivalence(kernel_runs, verdict):
    mismatches = sum(1 for _, _, _, p, k, _ in kernel_runs if p != k)
    bad_splits = sum(1 for *_, s in kernel_runs if not s)
    n_sat = sum(1 for _, _, _, p, _, _ in kernel_runs if p)
    ok = mismatches == 0 and bad_splits == 0
    verdict(2, ok, f"{len(kernel_runs)} GEs ({n_sat} solvable), {mismatches} mismatches, "
                   f"{bad_splits} failed transports")
    assert ok


def test_complexity_monotone(desk_runs, kernel_runs, verdict):
    records = [r for _, _, v, _ in desk_runs[0] for r in v.stats["steps"]]
    records += [r for _, _, trace, *_ in kernel_runs for r in trace]
    tau_bad = items_bad = 0
    ops = Counter()
    for r in records:
        ops[r["op"]] += 1
        if any(t > r["tau_before"] for t in r["tau_after"]):
            tau_bad += 1
        if r["op"] == "D2" and not all(n < r["items_before"] for n in r["items_after"]):
            items_bad += 1
    ok = tau_bad == 0 and items_bad == 0 and ops["D2"] > 0
    verdict(3, ok, f"{len(records)} steps {dict(ops)}, {tau_bad} complexity increases, "
                   f"{items_bad} D2 steps without item loss")
    assert ok


def test_diagram_commutation(verdict):
    failures = Counter()
    for op in TRANSFORMS:
        rng = random.Random(op)
        for _ in range(200):
            ge, sol, res = transform_instance(rng, op)
            pick = res.witness_split(sol)
            if pick is None:
                failures[op] += 1
                continue
            child, tr = res.children[pick[0]]
            if validate(child) or tuple(tr.forward(pick[1])) != tuple(sol):
                failures[op] += 1
    ok = not failures
    verdict(4, ok, f"200 instances each of {', '.join(TRANSFORMS)}; failures {dict(failures) or 0}")
    assert ok


def test_kernel_confluence(verdict):
    bad = reordered = 0
    ges = _random_valid_ges(5, 300)
    for n, ge in enumerate(ges):
        k1, t1 = kernel(ge, random.Random(1000 + n))
        k2, t2 = kernel(ge, random.Random(5000 + n))
        reordered += [r["params"] for r in t1] != [r["params"] for r in t2]
        bad += section_key(k1) != section_key(k2)
    ok = bad == 0
    verdict(5, ok, f"{len(ges)} GEs, {reordered} with differing elimination orders, {bad} kernels differ")
    assert ok


def test_reducing_paths(verdict):
    traces = paths = violations = 0
    worst = math.inf
    for seed in range(150):
        ge, sol = planted_ge(random.Random(seed), max_rho=8, periodic=True)
        report = analyze_trace(follow_witness(ge, sol, max_entire=150))
        if report.paths:
            traces += 1
        for p in report.paths:
            paths += 1
            violations += not p.holds
            worst = min(worst, p.drop / p.carrier_len)
    ok = traces >= 20 and violations == 0
    verdict(6, ok, f"{traces} traces with {paths} reducing paths, {violations} below |mu|/10, "
                   f"smallest drop ratio {worst:.3f}")
    assert ok


def test_bulitko_pump(verdict):
    done = bad = 0
    seed = 0
    while done < 50:
        rng = random.Random(seed)
        seed += 1
        n_vars, period_len = rng.randint(2, 3), rng.randint(1, 2)
        probe, _, _ = planted_periodic_system(random.Random(seed), 1, n_vars, period_len)
        bound = bulitko_bound(probe)
        system, values, _ = planted_periodic_system(random.Random(seed), bound + 3, n_vars, period_len)
        if exponent_of_periodicity(values.values()) <= bound:
            continue
        done += 1
        res = pump(system, values)
        bad += not (res.verified and res.shorter)
    ok = bad == 0
    verdict(7, ok, f"{done} planted solutions above the bound, {bad} without a shorter verified solution")
    assert ok


def _stable_occurrences(w, period):
    """Maximal stable occurrences straight from the definition."""
    n, p = len(w), len(period)
    found = []
    for piece in (tuple(period), tuple(period.inverse())):
        for i in range(p, n):
            t = 1
            while i + (t + 1) * p <= n:
                body = all(w[i + k * p : i + (k + 1) * p] == piece for k in range(t))
                if body and w[i - p : i] == piece and w[i + t * p : i + (t + 1) * p] == piece:
                    found.append((i, i + t * p))
                t += 1
    return {o for o in found if not any(q != o and q[0] <= o[0] and o[1] <= q[1] for q in found)}


def test_p_decomposition(verdict):
    rng = random.Random(8)
    bad = nontrivial = 0
    for _ in range(1000):
        while True:
            period = random_reduced_word(rng, 2, rng.randint(1, 3))
            if is_primitive(period):
                break
        parts = []
        for _ in range(rng.randint(1, 4)):
            parts.append(random_reduced_word(rng, 2, rng.randint(0, 4)))
            if rng.random() < 0.7:
                parts.append((period if rng.random() < 0.5 else period.inverse()) ** rng.randint(1, 6))
        w = Word(x for q in parts for x in q)
        dec = p_decomposition(w, period)
        spans, pos = [], 0
        for k, q in enumerate(dec):
            if k % 2:
                spans.append((pos, pos + len(q)))
            pos += len(q)
        disjoint = all(spans[i][1] <= spans[i + 1][0] for i in range(len(spans) - 1))
        ok = Word(x for q in dec for x in q) == w and set(spans) == _stable_occurrences(w, period) and disjoint
        nontrivial += bool(spans)
        bad += not ok
    ok = bad == 0
    verdict(8, ok, f"1000 (w, P) pairs, {nontrivial} with stable occurrences, {bad} failures")
    assert ok


def _products(gens, depth):
    letters = [g for x in gens for g in (x, x.inverse())]
    out, level = {Word()}, {Word()}
    for _ in range(depth):
        level = {u * g for u in level for g in letters} - out
        out |= level
    return out


def test_stallings_suite(verdict):
    rng = random.Random(9)
    member_bad = members = 0
    for _ in range(100):
        gens = [random_reduced_word(rng, 2, rng.randint(1, 3)) for _ in range(rng.randint(1, 2))]
        graph = build(gens)
        reach = _products(gens, 7)  # with one split below: products of up to 14 factors
        for _ in range(10):
            if rng.random() < 0.5:
                w = Word(x for _ in range(rng.randint(1, 3)) for x in rng.choice(gens) ** rng.choice((1, -1)))
            else:
                w = random_reduced_word(rng, 2, rng.randint(0, 6))
            found = any(a.inverse() * w in reach for a in reach)
            members += found
            member_bad += membership(graph, w) != found

    lcm_bad = 0
    for m in range(1, 7):
        for n in range(1, 7):
            _, gens = intersect(build([Word([1] * m)]), build([Word([1] * n)]))
            want = math.lcm(m, n)
            lcm_bad += [abs(sum(g)) for g in gens] != [want] or len(gens[0]) != want

    short = list(enumerate_words(SearchSpace(2, 4)))
    cent_bad = 0
    for _ in range(200):
        w = random_reduced_word(rng, 2, rng.randint(1, 6))
        c = centralizer(w)
        cyc = build([c])
        cent_bad += c * w != w * c
        cent_bad += any((u * w == w * u) != membership(cyc, u) for u in short)

    mal_bad = n_mal = 0
    tested = 0
    while tested < 100:
        gens = [random_reduced_word(rng, 2, rng.randint(1, 4)) for _ in range(rng.randint(1, 2))]
        graph = build(gens)
        if graph.is_trivial() or not is_proper(graph, 2):
            continue
        tested += 1
        mal, witness = is_malnormal(graph, 2)
        n_mal += mal
        conj = None
        for g in short:
            if membership(graph, g):
                continue
            meet, _ = intersect(graph, build([g * x * g.inverse() for x in gens]))
            if not meet.is_trivial():
                conj = g
                break
        mal_bad += mal != (conj is None)
        if witness:
            g, h, ghg = witness
            valid = (not membership(graph, g) and bool(h) and membership(graph, h)
                     and membership(graph, ghg) and g * h * g.inverse() == ghg)
            mal_bad += not valid
    total = member_bad + lcm_bad + cent_bad + mal_bad
    ok = total == 0
    verdict(9, ok, f"membership {member_bad}/1000 ({members} members), lcm {lcm_bad}/36, "
                   f"centralizer {cent_bad}/200, malnormal {mal_bad}/100 ({n_mal} malnormal) disagreements")
    assert ok


def test_quadratic_classifier(verdict):
    rng = random.Random(10)
    total = bad = 0
    coeff_kinds = (QuadraticKind.ORIENTABLE_COEFF, QuadraticKind.NONORIENTABLE_COEFF)
    for kind in QuadraticKind:
        for n in range(5):
            for m in range(5 - n) if kind in coeff_kinds else (0,):
                try:
                    form = QuadraticForm(kind, n, m)
                except ValueError:
                    continue
                # with no genus the two coefficient shapes are the same word
                want = QuadraticForm(QuadraticKind.ORIENTABLE_COEFF, 0, m) if n == 0 else form
                for _ in range(20):
                    alph = Alphabet(("a", "b"), tuple(f"X{i}" for i in range(1, 2 * n + m + 1)))
                    coeffs = [random_reduced_word(rng, 2, rng.randint(1, 3)) for _ in range(m)]
                    d = random_reduced_word(rng, 2, rng.randint(1, 3))
                    w = standard_quadratic_word(form, alph, coeffs, d)
                    total += 1
                    bad += classify_standard_quadratic(Equation(w), alph) != want
    ok = bad == 0 and total > 0
    verdict(10, ok, f"{total} generated forms with n + m <= 4, {bad} misclassified")
    assert ok
