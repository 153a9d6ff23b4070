"""Exponent-of-periodicity bound and the power-substitution that enforces it."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional

from .eqsys import Assignment, EquationSystem, evaluate, triangulate
from .words import Word, is_cyclically_reduced, p_decomposition, primitive_root

EXACT_TRIANGLES = 2  # beyond this the closed-form bound is used


def _set_partitions(n: int):
    """Restricted growth strings of length ``n``."""
    if n == 0:
        yield ()
        return

    def rec(prefix: list[int], top: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from rec(prefix, max(top, b))
            prefix.pop()

    yield from rec([0], 0)


def minimal_positive_solution(
    n_classes: int, relations: list[tuple[int, tuple[int, ...], int]], cap: int = 64
) -> Optional[list[int]]:
    """Least-total positive solution of relations ``r_z = sum(r_x for x in xs) + c``.

    Classes never on the left are searched by increasing total; the others
    follow by propagation.  Returns ``None`` if nothing is found with the
    free total at most ``cap``.
    """
    targets = {z for z, _, _ in relations}
    sources = [k for k in range(n_classes) if k not in targets]
    for total in range(len(sources), max(cap, len(sources)) + 1):
        for vec in _compositions(total, len(sources)):
            vals: dict[int, int] = dict(zip(sources, vec))
            ok = True
            changed = True
            while changed and ok:
                changed = False
                for z, xs, c in relations:
                    if all(x in vals for x in xs):
                        v = sum(vals[x] for x in xs) + c
                        if z not in vals:
                            vals[z] = v
                            changed = True
                        elif vals[z] != v:
                            ok = False
                            break
            if ok and len(vals) == n_classes and all(x >= 1 for x in vals.values()):
                return [vals[k] for k in range(n_classes)]
        if not sources:
            break
    return None


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def closed_form_bound(k: int) -> int:
    """Doubling chain ``B_k = 2 B_(k-1) + 3`` with ``B_0 = 1``."""
    return 2 ** (k + 2) - 3


@lru_cache(maxsize=None)
def bound_for_triangles(k: int) -> int:
    """Largest entry of a minimal positive solution over all candidate systems.

    Each triangle owns three exponent variables; a candidate system is a
    partition of all of them into equal classes plus, per triangle, either
    nothing or one relation ``r_i + r_j + c = r_l`` with ``c`` in {2, 3}.
    """
    if k > EXACT_TRIANGLES:
        return closed_form_bound(k)
    best = 1
    shapes = [None] + [(i, j, c, l) for l in range(3) for (i, j) in [tuple(x for x in range(3) if x != l)] for c in (2, 3)]
    for part in _set_partitions(3 * k):
        n_classes = max(part, default=-1) + 1
        for choice in itertools.product(shapes, repeat=k):
            rels = []
            for t, shape in enumerate(choice):
                if shape is None:
                    continue
                i, j, c, l = shape
                rels.append((part[3 * t + l], (part[3 * t + i], part[3 * t + j]), c))
            sol = minimal_positive_solution(n_classes, rels, cap=4 * (k + 1))
            if sol:
                best = max(best, max(sol))
    return best


def bulitko_bound(system: EquationSystem) -> int:
    tri, _ = triangulate(system)
    k = sum(1 for eq in tri.equations if len(eq.lhs) == 3)
    return bound_for_triangles(k)


# --- power substitution --------------------------------------------------------


def dominant_period(words) -> tuple[Optional[Word], int]:
    """Primitive word with the longest power run over ``words``, and that run."""
    best: tuple[Optional[Word], int] = (None, 0)
    for w in words:
        n = len(w)
        for p in range(1, n // 2 + 1):
            run = 0
            for j in range(n - p):
                if w[j] == w[j + p]:
                    run += 1
                    t = (run + p) // p
                    if t > best[1]:
                        start = j + 1 - run
                        u = Word._trusted(w[start : start + p])
                        if is_cyclically_reduced(u):
                            best = (primitive_root(u)[0], t)
                else:
                    run = 0
    return best


@dataclass
class PumpResult:
    period: Optional[Word]
    bound: int
    exponent: int
    classes: list[tuple[int, int]] = field(default_factory=list)  # (old r, new q) per class
    values: Assignment | None = None
    verified: bool = False
    shorter: bool = False


class _UF:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[max(a, b)] = min(a, b)


def pump(system: EquationSystem, values: Mapping[int, Word], period: Word | None = None) -> PumpResult:
    """Replace stable powers by small ones, keeping the equations satisfied.

    Stable occurrences are linked through the cancellation tripod of every
    triangle.  Occurrences that cancel letter for letter share an exponent;
    an occurrence whose cancelling letters cover whole occurrences plus a
    few extra letters gives a relation ``r_C = sum r_A + c``.  Classes
    outside any relation get exponent 1 and the rest follow by
    propagation.  The result is checked with ``evaluate``.
    """
    tri, tmap = triangulate(system)
    full = {v: Word() for v in system.variables}
    full.update(values)
    vals = tmap.lift(full)
    alph = tri.alphabet
    if period is None:
        period, _ = dominant_period([vals[v] for v in alph.variable_codes()])
    bound = bulitko_bound(system)
    res = PumpResult(period, bound, 0)
    if period is None:
        return res

    # occurrences: (variable, start, end, exponent, sign)
    occ: list[tuple[int, int, int, int, int]] = []
    where: dict[tuple[int, int], int] = {}
    parts_of: dict[int, list[Word]] = {}
    p = len(period)
    for v in alph.variable_codes():
        parts = p_decomposition(vals[v], period)
        parts_of[v] = parts
        pos = 0
        for i, part in enumerate(parts):
            if i % 2 == 1:
                sign = 1 if tuple(part[:p]) == tuple(period) else -1
                oid = len(occ)
                occ.append((v, pos, pos + len(part), len(part) // p, sign))
                for j in range(pos, pos + len(part)):
                    where[(v, j)] = oid
            pos += len(part)
    res.exponent = max((o[3] for o in occ), default=0)
    uf = _UF(len(occ))
    partner: dict[tuple[int, int, tuple[int, int]], object] = {}  # (eq, slot, letter) -> partner letter

    def coords(c: int, n: int):
        if alph.is_constant(c):
            return [None] * n
        v = abs(c)
        return [(v, j) for j in range(n)] if c > 0 else [(v, n - 1 - j) for j in range(n)]

    for e, eq in enumerate(tri.equations):
        slots = [
            Word((c,)) if alph.is_constant(c) else (vals[c] if c > 0 else vals[-c].inverse()) for c in eq.lhs
        ]
        cs = [coords(c, len(s)) for c, s in zip(eq.lhs, slots)]
        while len(slots) < 3:
            slots.append(Word())
            cs.append([])
        lens = [len(s) for s in slots]
        for a in range(3):
            b = (a + 1) % 3
            cut = (lens[a] + lens[b] - lens[(a + 2) % 3]) // 2
            for j in range(cut):
                x, y = cs[a][lens[a] - 1 - j], cs[b][j]
                if x is not None:
                    partner[(e, a, x)] = y
                if y is not None:
                    partner[(e, b, y)] = x

    # per occurrence and per slot it sits in: exact match, contained, or composite
    relations: list[tuple[int, list[int], int]] = []
    frozen: set[int] = set()
    instances: dict[int, dict[tuple[int, int], list]] = {}
    for (e, a, x), y in partner.items():
        o = where.get(x)
        if o is not None:
            instances.setdefault(o, {}).setdefault((e, a), []).append(y)
    for o, per_slot in instances.items():
        size = occ[o][2] - occ[o][1]
        for ys in per_slot.values():
            hits: dict[int, int] = {}
            for y in ys:
                t = where.get(y) if y is not None else None
                if t is not None:
                    hits[t] = hits.get(t, 0) + 1
            if len(hits) == 1 and len(ys) == size:
                (t, cnt), = hits.items()
                full_t = occ[t][2] - occ[t][1]
                if cnt == size == full_t:
                    uf.union(o, t)
                    continue
                if cnt == size < full_t:
                    continue  # the larger side records the relation
            inner = []
            for t, cnt in hits.items():
                if cnt == occ[t][2] - occ[t][1]:
                    inner.append(t)
                else:
                    frozen.update((o, t))
            relations.append((o, inner, occ[o][3] - sum(occ[t][3] for t in inner)))

    # exponents per class: relations become r_C = sum r_A + c over classes
    cls = {i: uf.find(i) for i in range(len(occ))}
    r_of = {cls[i]: occ[i][3] for i in range(len(occ))}
    rels = [(cls[o], [cls[t] for t in inner], c) for o, inner, c in relations]
    fixed = {cls[i] for i in frozen}
    for i in range(len(occ)):
        if occ[i][3] != r_of[cls[i]]:
            fixed.add(cls[i])
    changed = True
    while changed:
        changed = False
        for c_, inner, _ in rels:
            if c_ in fixed and not fixed.issuperset(inner):
                fixed.update(inner)
                changed = True
    keys = sorted(set(cls.values()))
    free = [k for k in keys if k not in fixed]
    index = {k: n for n, k in enumerate(free)}
    sub = []
    for c_, inner, off in rels:
        if c_ in fixed:
            continue
        off += sum(r_of[t] for t in inner if t in fixed)
        sub.append((index[c_], tuple(index[t] for t in inner if t not in fixed), off))
    sol = minimal_positive_solution(len(free), sub, cap=sum(r_of[k] for k in free))
    q = dict(r_of)
    if sol is not None:
        q.update(zip(free, sol))
    for k in sorted(set(cls.values())):
        res.classes.append((r_of[k], q[k]))
    new_exp = {i: q[cls[i]] for i in range(len(occ))}
    new_vals: dict[int, Word] = {}
    oid = 0
    for v in alph.variable_codes():
        out: list[int] = []
        for i, part in enumerate(parts_of[v]):
            if i % 2 == 1:
                sign = occ[oid][4]
                out.extend((period if sign == 1 else period.inverse()) ** new_exp[oid])
                oid += 1
            else:
                out.extend(part)
        new_vals[v] = Word(out)
    projected = tmap.project(new_vals)
    res.values = projected
    res.verified = evaluate(system, projected)
    old_len = sum(len(full[v]) for v in system.variables)
    res.shorter = sum(len(projected[v]) for v in system.variables) < old_len
    return res
