"""Random instances with known solutions, for tests and the acceptance suite."""

from __future__ import annotations

import itertools
import random
from typing import Sequence

from .eqsys import Equation, EquationSystem, evaluate
from .geq import Base, GeneralizedEquation, check_solution, connection, make_ge
from .words import Alphabet, Word


def random_reduced_word(rng: random.Random, n_letters: int, length: int, avoid_first: int = 0) -> Word:
    """Uniform-ish reduced word; ``avoid_first`` forbids a given first letter."""
    out: list[int] = []
    while len(out) < length:
        x = rng.choice([1, -1]) * rng.randint(1, n_letters)
        if out and out[-1] == -x:
            continue
        if not out and x == avoid_first:
            continue
        out.append(x)
    return Word._trusted(out)


def _fits(prev: Sequence[int], w: Sequence[int]) -> bool:
    return not prev or not w or prev[-1] != -w[0]


def planted_ge(
    rng: random.Random,
    max_rho: int = 6,
    n_letters: int = 2,
    constants: bool = False,
    periodic: bool = False,
    conn_prob: float = 0.5,
) -> tuple[GeneralizedEquation, tuple[Word, ...]]:
    """A generalized equation together with one of its solutions.

    The interval word is a reduced concatenation of motif occurrences (each
    a motif or its inverse).  Items are cut at occurrence borders plus a few
    random places; every two occurrences of one motif may become a dual
    pair, and boundaries at equal offsets may be connected.
    """
    for _ in range(1000):
        motifs = [random_reduced_word(rng, n_letters, rng.randint(1, 3)) for _ in range(rng.randint(1, 3))]
        chunks: list[tuple[int, int]] = []  # (motif, sign)
        letters: list[int] = []
        target = rng.randint(2, 6)
        if periodic:
            p = motifs[0]
            if len(p) >= 2 and p[0] == -p[-1]:
                continue
            reps = rng.randint(3, 5)
            for _ in range(reps):
                chunks.append((0, 1))
                letters.extend(p)
        tries = 0
        while len(chunks) < target and tries < 50:
            tries += 1
            k = rng.randrange(len(motifs))
            s = rng.choice((1, -1))
            w = motifs[k] if s == 1 else motifs[k].inverse()
            if _fits(letters, w):
                chunks.append((k, s))
                letters.extend(w)
        if len(chunks) < 2:
            continue
        # letter offsets of chunk borders
        borders = [0]
        for k, _ in chunks:
            borders.append(borders[-1] + len(motifs[k]))
        cuts = set(borders)
        for _ in range(rng.randint(0, 2)):
            cuts.add(rng.randint(1, len(letters) - 1))
        cuts = sorted(cuts)
        if len(cuts) - 1 > max_rho:
            continue
        values = [Word._trusted(letters[cuts[i]:cuts[i + 1]]) for i in range(len(cuts) - 1)]
        bnd = {off: j + 1 for j, off in enumerate(cuts)}  # letter offset -> boundary
        rho = len(values)
        # occurrences grouped by motif: (start boundary, end boundary, sign)
        occ: dict[int, list[tuple[int, int, int]]] = {}
        for c, (k, s) in enumerate(chunks):
            occ.setdefault(k, []).append((bnd[borders[c]], bnd[borders[c + 1]], s))
        if periodic:
            n0 = sum(1 for k, _ in chunks[: reps] if k == 0)
            span = (bnd[borders[0]], bnd[borders[n0 - 1]], 1), (bnd[borders[1]], bnd[borders[n0]], 1)
            occ.setdefault(-1, []).extend(span)
        bases: list[Base] = []
        pairs: list[tuple[Base, Base]] = []
        nid = 1
        for k, lst in occ.items():
            for i in range(len(lst)):
                for j in range(i + 1, len(lst)):
                    if k >= 0 and rng.random() > 0.6:
                        continue
                    (a1, z1, s1), (a2, z2, s2) = lst[i], lst[j]
                    b = Base(nid, s1, nid + 1, a1 if s1 == 1 else z1, z1 if s1 == 1 else a1)
                    d = Base(nid + 1, s2, nid, a2 if s2 == 1 else z2, z2 if s2 == 1 else a2)
                    nid += 2
                    bases += [b, d]
                    pairs.append((b, d))
        consts: tuple[int, ...] = ()
        if constants:
            consts = tuple(range(1, n_letters + 1))
            for i, v in enumerate(values, 1):
                if len(v) == 1 and rng.random() < 0.7:
                    c = rho + abs(v[0])
                    s = 1 if v[0] > 0 else -1
                    b = Base(nid, s, nid + 1, i if s == 1 else i + 1, i + 1 if s == 1 else i)
                    d = Base(nid + 1, 1, nid, c, c + 1)
                    nid += 2
                    bases += [b, d]
        if not bases:
            continue
        full = values + [Word((c,)) for c in consts]
        pos = [0, 0]
        for v in full:
            pos.append(pos[-1] + len(v))
        conns = set()
        for b, d in pairs:
            def prefix(x: Base) -> dict[int, int]:
                return {abs(pos[j] - pos[x.alpha]): j for j in range(x.lo + 1, x.hi)}
            pb, pd = prefix(b), prefix(d)
            for off, j in pb.items():
                if off in pd and rng.random() < conn_prob:
                    conns.add(connection(j, b, pd[off]))
        active = [False] + [True] * rho + [False] * len(consts)
        ge = make_ge(rho, consts, bases, conns, active)
        sol = tuple(full)
        if check_solution(ge, sol):
            return ge, sol
    raise RuntimeError("could not plant a generalized equation")


def random_ge(rng: random.Random, max_rho: int = 6, n_pairs: int | None = None) -> GeneralizedEquation:
    """Structurally valid equation with random bases and connections (may be unsolvable)."""
    rho = rng.randint(2, max_rho)
    n_pairs = n_pairs or rng.randint(1, 3)
    bases: list[Base] = []
    nid = 1
    for _ in range(n_pairs):
        spans = []
        for _ in range(2):
            lo = rng.randint(1, rho)
            hi = rng.randint(lo + 1, min(rho + 1, lo + 3))
            s = rng.choice((1, -1))
            spans.append((lo, hi, s))
        (l1, h1, s1), (l2, h2, s2) = spans
        bases.append(Base(nid, s1, nid + 1, l1 if s1 == 1 else h1, h1 if s1 == 1 else l1))
        bases.append(Base(nid + 1, s2, nid, l2 if s2 == 1 else h2, h2 if s2 == 1 else l2))
        nid += 2
    conns = set()
    for b in bases:
        d = bases[b.id] if b.id % 2 == 1 else None
        if d and b.hi - b.lo >= 2 and d.hi - d.lo >= 2 and rng.random() < 0.4:
            p = rng.randint(b.lo + 1, b.hi - 1)
            q = rng.randint(d.lo + 1, d.hi - 1)
            conns.add(connection(p, b, q))
    return make_ge(rho, (1, 2), bases, conns)


def planted_system(
    rng: random.Random, n_vars: int = 2, n_eqs: int = 2, max_value: int = 3, max_len: int = 6
) -> tuple[EquationSystem, dict[int, Word]]:
    """Equations satisfied by random planted values.

    Each equation is a random product ``w`` of variables and constants
    followed by the constant word that cancels its value.
    """
    names = [f"X{i}" for i in range(1, n_vars + 1)]
    alph = Alphabet(("a", "b"), tuple(names))
    var_codes = list(alph.variable_codes())
    for _ in range(1000):
        values = {v: random_reduced_word(rng, 2, rng.randint(0, max_value)) for v in var_codes}
        eqs = []
        for _ in range(n_eqs):
            body = [rng.choice(var_codes) * rng.choice((1, -1)) for _ in range(rng.randint(1, 3))]
            val = Word(x for c in body for x in (values[abs(c)] if c > 0 else values[abs(c)].inverse()))
            w = Word(body + list(val.inverse()))
            if 0 < len(w) <= max_len:
                eqs.append(Equation(w))
        if eqs:
            system = EquationSystem(alph, tuple(eqs))
            assert evaluate(system, values)
            return system, values
    raise RuntimeError("could not plant a system")


def planted_periodic_system(
    rng: random.Random, exponent: int, n_vars: int = 3, period_len: int = 2
) -> tuple[EquationSystem, dict[int, Word], Word]:
    """System whose planted values share a long stable power of one period.

    ``X1 = u P^t v``; every further variable is ``X1`` multiplied by a short
    constant on one side, and each equation records that relation.
    """
    names = [f"X{i}" for i in range(1, n_vars + 1)]
    alph = Alphabet(("a", "b"), tuple(names))
    codes = list(alph.variable_codes())
    while True:
        period = random_reduced_word(rng, 2, period_len)
        if period[0] != -period[-1] and len(set(period)) == len(period) or period_len == 1:
            break
    while True:
        u = random_reduced_word(rng, 2, rng.randint(0, 2))
        v = random_reduced_word(rng, 2, rng.randint(0, 2))
        x1 = Word(tuple(u) + tuple(period**exponent) + tuple(v))
        if len(x1) == len(u) + exponent * len(period) + len(v):
            break
    values = {codes[0]: x1}
    eqs = []
    for c in codes[1:]:
        k = random_reduced_word(rng, 2, rng.randint(1, 2))
        left = rng.random() < 0.5
        values[c] = k * x1 if left else x1 * k
        # X1^-1 Xc k^-1 or Xc X1^-1 ... read as written, then reduced
        body = [c, -codes[0]] if left else [-codes[0], c]
        body += list(k.inverse()) if not left else []
        if left:
            body = list(k.inverse()) + body
        eqs.append(Equation(Word(body)))
    system = EquationSystem(alph, tuple(eqs))
    assert evaluate(system, values)
    return system, values, period


def _symmetries(n_vars: int):
    """Letter maps preserving solvability: signed constant and variable permutations."""
    out = []
    for cperm in itertools.permutations((1, 2)):
        for csign in itertools.product((1, -1), repeat=2):
            for vperm in itertools.permutations(range(n_vars)):
                for vsign in itertools.product((1, -1), repeat=n_vars):
                    m = {k + 1: csign[k] * cperm[k] for k in range(2)}
                    m.update({3 + k: vsign[k] * (3 + vperm[k]) for k in range(n_vars)})
                    out.append(m)
    return out


def _canonical_equation(w: Sequence[int]) -> tuple[int, ...]:
    """Least reduced rotation of ``w`` or of its inverse."""
    forms = []
    for u in (list(w), [-x for x in reversed(w)]):
        for i in range(len(u)):
            r = u[i:] + u[:i]
            if all(r[j] != -r[j + 1] for j in range(len(r) - 1)):
                forms.append(tuple(r))
    return min(forms, key=lambda t: (len(t), t))


def triangulated_corpus(max_eq_len: int = 3, max_letters: int = 6, n_vars: int = 2, max_eqs: int = 2) -> list[EquationSystem]:
    """One representative per symmetry class of small triangulated systems.

    Constants are ``a, b``; variables ``X, Y``.  Equations are reduced words
    of length ``1..max_eq_len`` in which some variable occurs, counted up to
    reduced rotations, inversion, and signed permutations of constants and
    variables.
    """
    alph = Alphabet(("a", "b"), ("X", "Y")[:n_vars])
    letters = [c for k in range(1, 3 + n_vars) for c in (k, -k)]
    words = []
    for n in range(1, max_eq_len + 1):
        for w in itertools.product(letters, repeat=n):
            if all(w[i] != -w[i + 1] for i in range(n - 1)) and any(abs(x) > 2 for x in w):
                words.append(w)
    syms = _symmetries(n_vars)
    image = {
        w: [_canonical_equation([m[abs(x)] * (1 if x > 0 else -1) for x in w]) for m in syms] for w in words
    }
    seen: set = set()
    out = []
    for k in range(1, max_eqs + 1):
        for combo in itertools.combinations(words, k):
            if sum(map(len, combo)) > max_letters:
                continue
            key = min(tuple(sorted(image[w][j] for w in combo)) for j in range(len(syms)))
            if key in seen:
                continue
            seen.add(key)
            eqs = tuple(Equation(Word(e)) for e in key if e)
            if eqs:
                out.append(EquationSystem(alph, eqs))
    return out


# --- instances for single transformations ------------------------------------

TRANSFORMS = ("ET1", "ET2", "ET3", "ET4", "ET5", "D1", "D2")


def _copy_span(rng: random.Random, ge: GeneralizedEquation, sol: Sequence[Word], tie: bool):
    """Append copies of a random run of items, paired with the original run.

    With ``tie`` every interior boundary of the new base is connected, so
    it is a lone base; otherwise the copy is a closed section of its own.
    """
    rho = ge.rho
    i = rng.randint(1, rho)
    k = rng.randint(1, min(3, rho - i + 1))
    nid = max(b.id for b in ge.bases) + 1
    lam = Base(nid, 1, nid + 1, rho + 1, rho + 1 + k)
    dual = Base(nid + 1, 1, nid, i, i + k)
    conns = set(ge.connections)
    if tie:
        conns |= {connection(rho + 1 + t, lam, i + t) for t in range(1, k)}
    active = [False] + [True] * (rho + k)
    new = make_ge(rho + k, (), ge.bases + (lam, dual), conns, active)
    return new, tuple(sol) + tuple(sol[i - 1 : i - 1 + k]), lam.id


def _tie_inside(ge: GeneralizedEquation, sol, lam_id: int, mu_id: int):
    """Introduce boundaries until every boundary of ``mu`` is tied on ``lam``."""
    from .transforms import et5_introduce_boundary

    while True:
        lam, mu = ge.base(lam_id), ge.base(mu_id)
        ties = ge.ties(lam_id)
        todo = [j for j in range(mu.lo, mu.hi + 1) if j not in ties]
        if not todo:
            return ge, sol
        res = et5_introduce_boundary(ge, todo[0], lam_id)
        pick = res.witness_split(sol)
        if pick is None:
            return None
        ge, sol = res.children[pick[0]][0], pick[1]


def transform_instance(rng: random.Random, op: str, max_rho: int = 6):
    """A planted ``(ge, solution, result)`` on which ``op`` applies.

    ET3 and the lone/complete bases for ET4 and D1 are produced by adding
    a base pair to a planted equation; ET2 first ties the boundaries of an
    inner base with ET5 along the witness.
    """
    from . import transforms as T

    for _ in range(2000):
        ge, sol = planted_ge(rng, max_rho=max_rho, constants=op in ("ET1", "ET5", "D2") and rng.random() < 0.5)
        try:
            if op == "ET1":
                if not ge.connections:
                    continue
                return ge, sol, T.et1_cut(ge, rng.choice(sorted(ge.connections)))
            if op == "ET2":
                pairs = [(l.id, m.id) for l in ge.bases for m in ge.bases
                         if m.id not in (l.id, l.dual) and l.lo <= m.lo and m.hi <= l.hi]
                if not pairs:
                    continue
                lam_id, mu_id = rng.choice(pairs)
                tied = _tie_inside(ge, sol, lam_id, mu_id)
                if tied is None:
                    continue
                ge, sol = tied
                return ge, sol, T.et2_transfer(ge, mu_id, lam_id)
            if op == "ET3":
                i = rng.randint(1, ge.rho)
                j = rng.randint(i + 1, ge.rho + 1)
                nid = max(b.id for b in ge.bases) + 1
                extra = (Base(nid, 1, nid + 1, i, j), Base(nid + 1, 1, nid, i, j))
                ge = make_ge(ge.rho, ge.constants, ge.bases + extra, ge.connections, ge.item_active())
                return ge, sol, T.et3_remove_matched(ge, nid)
            if op in ("ET4", "D1"):
                ge, sol, lam_id = _copy_span(rng, ge, sol, tie=op == "ET4")
                if op == "ET4":
                    return ge, sol, T.et4_remove_lone(ge, lam_id)
                return ge, sol, T.d1_delete_complete_base(ge, lam_id)
            if op == "ET5":
                options = [(p, b.id) for b in ge.bases for p in range(b.lo + 1, b.hi) if p not in ge.ties(b.id)]
                if not options:
                    continue
                p, lam_id = rng.choice(options)
                return ge, sol, T.et5_introduce_boundary(ge, p, lam_id)
            if op == "D2":
                res = T.d2_linear_eliminate_step(ge, rng)
                if res is None:
                    continue
                return ge, sol, res
        except T.TransformError:
            continue
        raise ValueError(f"unknown transformation {op!r}")
    raise RuntimeError(f"could not plant an instance for {op}")
