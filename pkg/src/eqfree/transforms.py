"""Elementary and derived transformations of generalized equations.

Every transformation returns a :class:`TransformResult`: a list of children,
each with a :class:`SolutionTransport`.  ``forward`` rewrites a solution of
the child as one of the parent (a word in child items for every parent
item); ``split`` takes a parent solution and returns the child solution it
corresponds to, or ``None`` when that child is not the right branch.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from .geq import (
    Base,
    GeneralizedEquation,
    canonical_key,
    check_solution,
    complexity,
    connection,
    gamma,
    make_ge,
    positions,
)
from .words import Word

Values = tuple[Word, ...]


class TransformError(ValueError):
    """A transformation's precondition does not hold."""


class Inconsistent(TransformError):
    """The input forces a contradiction on nonempty solutions."""


# --- transports --------------------------------------------------------------


def _apply_map(forward_map: Sequence[Sequence[int]], values: Sequence[Word]) -> Values:
    out = []
    for seq in forward_map:
        letters: list[int] = []
        for c in seq:
            v = values[abs(c) - 1]
            letters.extend(v if c > 0 else v.inverse())
        out.append(Word(letters))
    return tuple(out)


@dataclass(frozen=True)
class SolutionTransport:
    forward_map: tuple[tuple[int, ...], ...]
    split: Callable[[Values], Optional[Values]]

    def forward(self, child_values: Sequence[Word]) -> Values:
        return _apply_map(self.forward_map, child_values)

    def then(self, other: "SolutionTransport") -> "SolutionTransport":
        """Compose parent->child (self) with child->grandchild (other)."""
        fm = []
        for seq in self.forward_map:
            out: list[int] = []
            for c in seq:
                sub = other.forward_map[abs(c) - 1]
                out.extend(sub if c > 0 else [-x for x in reversed(sub)])
            fm.append(tuple(Word(out)))
        first, second = self.split, other.split

        def split(values: Values) -> Optional[Values]:
            mid = first(values)
            return None if mid is None else second(mid)

        return SolutionTransport(tuple(fm), split)


def identity_transport(n: int) -> SolutionTransport:
    return SolutionTransport(tuple((i,) for i in range(1, n + 1)), lambda v: tuple(v))


@dataclass(frozen=True)
class TransformResult:
    children: list[tuple[GeneralizedEquation, SolutionTransport]]
    label: str
    params: dict = field(default_factory=dict)

    def witness_split(self, parent_values: Sequence[Word], strict: bool = True) -> Optional[tuple[int, Values]]:
        """First child whose split accepts the parent solution.

        With ``strict`` the child values must also pass ``check_solution``.
        """
        for k, (child, tr) in enumerate(self.children):
            vals = tr.split(tuple(parent_values))
            if vals is None:
                continue
            if not strict or check_solution(child, vals):
                return k, vals
        return None


# --- mutable working copy ----------------------------------------------------


@dataclass
class _State:
    rho: int
    constants: tuple[int, ...]
    bases: dict[int, Base]
    conns: set[tuple[int, int, int]]
    active: list[bool]  # per item, index 0 unused

    @classmethod
    def of(cls, ge: GeneralizedEquation) -> "_State":
        return cls(ge.rho, ge.constants, ge.base_map(), set(ge.connections), ge.item_active())

    @property
    def n_items(self) -> int:
        return self.rho + len(self.constants)

    def freeze(self) -> GeneralizedEquation:
        return make_ge(self.rho, self.constants, self.bases.values(), self.conns, self.active)

    def next_id(self) -> int:
        return max(self.bases, default=0) + 1

    def ties(self, lam_id: int) -> dict[int, int]:
        b = self.bases[lam_id]
        d = self.bases[b.dual]
        out = {b.alpha: d.alpha, b.beta: d.beta}
        for p, lam, q in self.conns:
            if lam == lam_id:
                out[p] = q
            elif lam == b.dual:
                out[q] = p
        return out

    def pair_conns(self, lam_id: int) -> list[tuple[int, int]]:
        b = self.bases[lam_id]
        out = []
        for p, lam, q in self.conns:
            if lam == lam_id:
                out.append((p, q))
            elif lam == b.dual:
                out.append((q, p))
        return out

    def drop_pair_conns(self, lam_id: int) -> None:
        dual = self.bases[lam_id].dual
        self.conns = {c for c in self.conns if c[1] not in (lam_id, dual)}

    def remove_pair(self, lam_id: int) -> None:
        self.drop_pair_conns(lam_id)
        dual = self.bases[lam_id].dual
        del self.bases[lam_id]
        del self.bases[dual]

    def remap(self, f: Callable[[int], int]) -> None:
        self.bases = {k: replace(b, alpha=f(b.alpha), beta=f(b.beta)) for k, b in self.bases.items()}
        self.conns = {(f(p), lam, f(q)) for p, lam, q in self.conns}

    def add_conn(self, p: int, lam_id: int, q: int) -> None:
        self.conns.add(connection(p, self.bases[lam_id], q))


def _offset(b: Base, j: int) -> int:
    return abs(j - b.alpha)


def _prefix_len(b: Base, j: int, pos: Sequence[int]) -> int:
    return pos[j] - pos[b.alpha] if b.sign == 1 else pos[b.alpha] - pos[j]


def _image_pos(d: Base, length: int, pos: Sequence[int]) -> int:
    return pos[d.alpha] + length if d.sign == 1 else pos[d.alpha] - length


# --- ET1 ---------------------------------------------------------------------


def _cut(st: _State, lam_id: int, p: int, keep_left: bool = True) -> tuple[int, int]:
    """Cut ``lam`` at tied boundary ``p`` and its dual at the image.

    Returns the ids of the left (alpha side) and right pieces of ``lam``.
    """
    b = st.bases[lam_id]
    d = st.bases[b.dual]
    ties = st.ties(lam_id)
    if p not in ties or p in (b.alpha, b.beta):
        raise TransformError(f"no connection at boundary {p} of base {lam_id}")
    q = ties[p]
    if not d.lo < q < d.hi:
        raise Inconsistent(f"boundary {p} of base {lam_id} tied to an endpoint of its dual")
    old = st.pair_conns(lam_id)
    st.drop_pair_conns(lam_id)
    new = st.next_id()
    if keep_left:
        (b1, d1), (b2, d2) = (b.id, d.id), (new, new + 1)
    else:
        (b1, d1), (b2, d2) = (new, new + 1), (b.id, d.id)
    del st.bases[b.id], st.bases[d.id]
    st.bases[b1] = Base(b1, b.sign, d1, b.alpha, p)
    st.bases[d1] = Base(d1, d.sign, b1, d.alpha, q)
    st.bases[b2] = Base(b2, b.sign, d2, p, b.beta)
    st.bases[d2] = Base(d2, d.sign, b2, q, d.beta)
    op, oq = _offset(b, p), _offset(d, q)
    for pp, qq in old:
        if pp == p and qq == q:
            continue
        sp, sq = _offset(b, pp) - op, _offset(d, qq) - oq
        if sp < 0 and sq < 0:
            st.add_conn(pp, b1, qq)
        elif sp > 0 and sq > 0:
            st.add_conn(pp, b2, qq)
        else:
            raise Inconsistent(f"crossing boundary connections on base {lam_id}")
    return b1, b2


def et1_cut(ge: GeneralizedEquation, conn: tuple[int, int, int]) -> TransformResult:
    p, lam, q = conn
    if conn not in ge.connections:
        raise TransformError(f"no connection {conn}")
    st = _State.of(ge)
    _cut(st, lam, p)
    return TransformResult([(st.freeze(), identity_transport(ge.n_items))], "ET1", {"connection": conn})


# --- ET2 ---------------------------------------------------------------------


def _transfer(st: _State, mu_id: int, lam_id: int, strict: bool = True) -> None:
    lam = st.bases[lam_id]
    mu = st.bases[mu_id]
    if mu_id in (lam_id, lam.dual):
        raise TransformError("cannot transfer a base onto its own pair")
    if not (lam.lo <= mu.lo and mu.hi <= lam.hi):
        raise TransformError(f"base {mu_id} is not contained in base {lam_id}")
    t = st.ties(lam_id)
    need = range(mu.lo, mu.hi + 1) if strict else _anchors(st, mu_id)
    missing = [j for j in need if j not in t]
    if missing:
        raise TransformError(f"boundaries {missing} of base {mu_id} are not tied on base {lam_id}")
    lamd = st.bases[lam.dual]
    sign = mu.sign * lam.sign * lamd.sign
    a, z = t[mu.alpha], t[mu.beta]
    if (z - a) * sign <= 0:
        raise Inconsistent(f"ties of base {lam_id} are not monotone")
    old = st.pair_conns(mu_id)
    st.drop_pair_conns(mu_id)
    st.bases[mu_id] = moved = Base(mu_id, sign, mu.dual, a, z)
    for pp, qq in old:
        st.conns.add(connection(t[pp], moved, qq))


def _anchors(st: _State, mu_id: int) -> list[int]:
    """Boundaries a moved base needs images for: its ends and its connection points."""
    mu = st.bases[mu_id]
    return sorted({mu.alpha, mu.beta} | {p for p, _ in st.pair_conns(mu_id)})


def et2_transfer(ge: GeneralizedEquation, mu_id: int, lam_id: int) -> TransformResult:
    st = _State.of(ge)
    _transfer(st, mu_id, lam_id)
    return TransformResult([(st.freeze(), identity_transport(ge.n_items))], "ET2", {"base": mu_id, "from": lam_id})


# --- ET3 ---------------------------------------------------------------------


def et3_remove_matched(ge: GeneralizedEquation, lam_id: int) -> TransformResult:
    b = ge.base(lam_id)
    d = ge.base(b.dual)
    if (b.alpha, b.beta) != (d.alpha, d.beta):
        raise TransformError(f"bases {b.id} and {d.id} are not matched")
    st = _State.of(ge)
    st.remove_pair(lam_id)
    return TransformResult([(st.freeze(), identity_transport(ge.n_items))], "ET3", {"base": lam_id})


# --- ET4 ---------------------------------------------------------------------


def _item_index_map(n: int, removed: set[int]) -> dict[int, int]:
    out, k = {}, 0
    for i in range(1, n + 1):
        if i not in removed:
            k += 1
            out[i] = k
    return out


def _delete_items(st: _State, removed: set[int]) -> dict[int, int]:
    """Delete items, renumber boundaries; returns the old->new item index map."""
    n = st.n_items
    imap = _item_index_map(n, removed)
    shift = [0] * (n + 2)
    acc = 0
    for j in range(1, n + 2):
        shift[j] = acc
        if j in removed:
            acc += 1
    st.remap(lambda j: j - shift[j])
    st.active = [False] + [st.active[i] for i in range(1, n + 1) if i not in removed]
    st.rho -= sum(1 for i in removed if i <= st.rho)
    return imap


def _lone_theta(st: _State, lam_id: int) -> dict[int, tuple[int, ...]]:
    """Parent item -> signed parent items on the dual, for a lone base."""
    b = st.bases[lam_id]
    t = st.ties(lam_id)
    out = {}
    for i in range(b.lo, b.hi):
        if i not in t or i + 1 not in t:
            raise TransformError(f"boundary of item {i} is not tied on base {lam_id}")
        x, y = t[i], t[i + 1]
        if x < y:
            out[i] = tuple(range(x, y))
        elif x > y:
            out[i] = tuple(-j for j in range(x - 1, y - 1, -1))
        else:
            raise Inconsistent(f"item {i} would be empty")
    return out


def _remove_lone(st: _State, lam_id: int) -> SolutionTransport:
    b = st.bases[lam_id]
    if b.hi > st.rho + 1:
        raise TransformError("cannot remove constant items")
    for other in st.bases.values():
        if other.id != lam_id and other.lo < b.hi and b.lo < other.hi:
            raise TransformError(f"base {lam_id} intersects base {other.id}")
    theta = _lone_theta(st, lam_id)
    n = st.n_items
    removed = set(range(b.lo, b.hi))
    st.remove_pair(lam_id)
    imap = _item_index_map(n, removed)
    fm = []
    for i in range(1, n + 1):
        seq = theta[i] if i in removed else (i,)
        fm.append(tuple(imap[abs(c)] * (1 if c > 0 else -1) for c in seq))
    _delete_items(st, removed)
    keep = [i - 1 for i in range(1, n + 1) if i not in removed]
    return SolutionTransport(tuple(fm), lambda v: tuple(v[i] for i in keep))


def et4_remove_lone(ge: GeneralizedEquation, lam_id: int) -> TransformResult:
    st = _State.of(ge)
    tr = _remove_lone(st, lam_id)
    return TransformResult([(st.freeze(), tr)], "ET4", {"base": lam_id})


# --- ET5 ---------------------------------------------------------------------


def _insert_boundary(st: _State, item: int) -> None:
    """Split ``item`` into two, shifting every boundary after it."""
    st.remap(lambda j: j + 1 if j > item else j)
    st.active = st.active[: item + 1] + [st.active[item]] + st.active[item + 1 :]
    st.rho += 1


def _et5_children(st: _State, p: int, lam_id: int) -> list[tuple[_State, SolutionTransport]]:
    b = st.bases[lam_id]
    d = st.bases[b.dual]
    if not b.lo < p < b.hi:
        raise TransformError(f"boundary {p} is not internal to base {lam_id}")
    if p in st.ties(lam_id):
        raise TransformError(f"boundary {p} is already tied on base {lam_id}")
    n = st.n_items
    out = []
    for q in range(d.lo, d.hi + 1):
        child = _State(st.rho, st.constants, dict(st.bases), set(st.conns), list(st.active))
        child.add_conn(p, lam_id, q)

        def split(v, b=b, d=d, p=p, q=q):
            pos = positions(v)
            return tuple(v) if pos[q] == _image_pos(d, _prefix_len(b, p, pos), pos) else None

        out.append((child, SolutionTransport(tuple((i,) for i in range(1, n + 1)), split)))
    for j in range(d.lo, d.hi):
        if j > st.rho:
            continue  # constant items hold a single letter
        child = _State(st.rho, st.constants, dict(st.bases), set(st.conns), list(st.active))
        _insert_boundary(child, j)
        pp = p + 1 if p > j else p
        child.add_conn(pp, lam_id, j + 1)
        fm = [((i,) if i < j else (j, j + 1) if i == j else (i + 1,)) for i in range(1, n + 1)]

        def split(v, b=b, d=d, p=p, j=j):
            pos = positions(v)
            x = _image_pos(d, _prefix_len(b, p, pos), pos)
            if not pos[j] < x < pos[j + 1]:
                return None
            w = v[j - 1]
            k = x - pos[j]
            return tuple(v[: j - 1]) + (w[:k], w[k:]) + tuple(v[j:])

        out.append((child, SolutionTransport(tuple(fm), split)))
    return out


def et5_introduce_boundary(ge: GeneralizedEquation, p: int, lam_id: int) -> TransformResult:
    """Tie ``p`` on ``lam``: one child per boundary of the dual, one per item gap."""
    st = _State.of(ge)
    children = [(c.freeze(), tr) for c, tr in _et5_children(st, p, lam_id)]
    return TransformResult(children, "ET5", {"boundary": p, "base": lam_id})


# --- overlap and inconsistency -----------------------------------------------


def _intersect(b: Base, d: Base) -> bool:
    return b.lo < d.hi and d.lo < b.hi


def detect_overlap(ge: GeneralizedEquation) -> list[tuple[int, int]]:
    return [(b.id, d.id) for b, d in ge.pairs() if _intersect(b, d)]


def inconsistency_reason(ge: GeneralizedEquation) -> Optional[str]:
    """A contradiction every nonempty solution would have to satisfy, if any is visible."""
    for b, d in ge.pairs():
        if b.sign != d.sign and _intersect(b, d):
            return f"bases {b.id} and {d.id} overlap with opposite orientation"
        if (b.lo, b.hi) != (d.lo, d.hi) and (
            (b.lo <= d.lo and d.hi <= b.hi) or (d.lo <= b.lo and b.hi <= d.hi)
        ):
            return f"base pair {b.id}, {d.id} has one span strictly inside the other"
        for x, y in ((b, d), (d, b)):
            if x.lo > ge.rho and y.hi - y.lo > x.hi - x.lo:
                return f"constant base {x.id} is shorter than its dual {y.id}"
        if b.lo > ge.rho and d.lo > ge.rho:
            bw = Word(ge.constant_of(i) for i in range(b.lo, b.hi))
            dw = Word(ge.constant_of(i) for i in range(d.lo, d.hi))
            if (bw if b.sign == 1 else bw.inverse()) != (dw if d.sign == 1 else dw.inverse()):
                return f"constant bases {b.id} and {d.id} carry different letters"
        ties = sorted((_offset(b, p), _offset(d, q)) for p, q in ge.connections_of(b.id))
        full = (b.hi - b.lo, d.hi - d.lo)
        prev = (0, 0)
        for op, oq in ties + [full]:
            if op <= prev[0] or oq <= prev[1]:
                return f"boundary connections of base {b.id} cross or reach an endpoint"
            prev = (op, oq)
    return None


def detect_inconsistency(ge: GeneralizedEquation) -> bool:
    return inconsistency_reason(ge) is not None


def _prune(children: list[tuple[GeneralizedEquation, SolutionTransport]]):
    """Drop visibly inconsistent children but never return an empty list."""
    kept = [c for c in children if not detect_inconsistency(c[0])]
    return kept or children[:1]


# --- branching driver --------------------------------------------------------


def _copy(st: _State) -> _State:
    return _State(st.rho, st.constants, dict(st.bases), set(st.conns), list(st.active))


def _tie_all(st: _State, tr: SolutionTransport, lam_id: int, wanted: Callable[[_State], list[int]],
             limit: int = 64, flags: dict | None = None,
             max_states: int = 20000) -> list[tuple[_State, SolutionTransport]]:
    """Branch with ET5 until ``wanted(state)`` reports no untied boundary on ``lam``.

    Paths longer than ``limit`` ties are dropped and ``flags["exhausted"]`` is set.
    """
    done = []
    stack = [(st, tr, 0)]
    seen = 0
    while stack:
        s, t, rounds = stack.pop()
        seen += 1
        try:
            todo = [j for j in wanted(s) if j not in s.ties(lam_id)]
        except Inconsistent:
            continue
        if not todo:
            done.append((s, t))
            continue
        if rounds >= limit or seen > max_states:
            if flags is not None:
                flags["exhausted"] = True
            continue
        kids = []
        for child, ctr in _et5_children(s, todo[0], lam_id):
            try:
                if inconsistency_reason(child.freeze()) is None:
                    kids.append((child, t.then(ctr), rounds + 1))
            except TransformError:
                continue
        stack.extend(reversed(kids))
    return done


# --- D1 ----------------------------------------------------------------------


def complete_bases(ge: GeneralizedEquation) -> list[int]:
    """Bases whose span is an active closed section not containing the dual."""
    spans = {(s.start, s.end) for s in ge.active_sections()}
    bm = ge.base_map()
    out = []
    for b in ge.bases:
        d = bm[b.dual]
        if (b.lo, b.hi) in spans and not (b.lo <= d.lo and d.hi <= b.hi):
            out.append(b.id)
    return out


def _d1(st: _State, tr: SolutionTransport, mu_id: int, flags: dict | None = None) -> list[tuple[_State, SolutionTransport]]:
    def interior(s: _State) -> list[int]:
        mu = s.bases[mu_id]
        return list(range(mu.lo + 1, mu.hi))

    out = []
    for s, t in _tie_all(st, tr, mu_id, interior, flags=flags):
        try:
            mu = s.bases[mu_id]
            for nu in sorted(s.bases):
                b = s.bases[nu]
                if nu not in (mu_id, mu.dual) and mu.lo <= b.lo and b.hi <= mu.hi:
                    _transfer(s, nu, mu_id)
            t = t.then(_remove_lone(s, mu_id))
        except Inconsistent:
            continue
        out.append((s, t))
    return out


def d1_delete_complete_base(ge: GeneralizedEquation, mu_id: int) -> TransformResult:
    if mu_id not in complete_bases(ge):
        raise TransformError(f"base {mu_id} is not complete")
    flags: dict = {}
    kids = [(s.freeze(), t) for s, t in _d1(_State.of(ge), identity_transport(ge.n_items), mu_id, flags)]
    if not kids:
        raise Inconsistent(f"every way of tying base {mu_id} is contradictory")
    return TransformResult(_prune(kids), "D1", {"base": mu_id, **flags})


# --- D2 ----------------------------------------------------------------------


def d2_candidates(ge: GeneralizedEquation) -> list[tuple[str, int, int]]:
    """Eliminable bases as ``(case, base id, item or boundary)`` in preference order."""
    g = gamma(ge)
    act = ge.item_active()
    touched: dict[int, int] = {}
    for b in ge.bases:
        for j in range(b.lo, b.hi + 1):
            touched[j] = touched.get(j, 0) + 1
    connected = {p for p, _, _ in ge.connections} | {q for _, _, q in ge.connections}
    out = []
    for b in ge.bases:
        if b.hi > ge.rho + 1 or not act[b.lo]:
            continue
        for i in range(b.lo, b.hi):
            if g[i] == 1:
                out.append(("a", b.id, i))
    for b in ge.bases:
        if b.hi > ge.rho + 1 or not act[b.lo]:
            continue
        for eps in sorted((b.lo, b.hi)):
            if eps in (1, ge.rho + 1) or touched.get(eps, 0) != 1 or eps in connected:
                continue
            outside = eps - 1 if eps == b.lo else eps
            if act[outside]:
                out.append(("b", b.id, eps))
    return out


def _isolate_piece(st: _State, mu_id: int, left: int, right: int) -> int:
    """Cut ``mu`` at tied boundaries ``left < right``; return the id of the piece between."""
    pid = mu_id
    b = st.bases[pid]
    if left != b.lo:
        b1, b2 = _cut(st, pid, left)
        pid = b2 if b.sign == 1 else b1
    b = st.bases[pid]
    if right != b.hi:
        b1, b2 = _cut(st, pid, right)
        pid = b1 if b.sign == 1 else b2
    return pid


def _run(lo: int, hi: int, sign: int = 1) -> list[int]:
    seq = list(range(lo, hi))
    return seq if sign == 1 else [-j for j in reversed(seq)]


def _d2_apply(ge: GeneralizedEquation, cand: tuple[str, int, int]) -> TransformResult:
    case, mu_id, x = cand
    st = _State.of(ge)
    mu = st.bases[mu_id]
    tied = sorted(st.ties(mu_id))
    n = st.n_items
    if case == "a":
        left = max(j for j in tied if j <= x)
        right = min(j for j in tied if j >= x + 1)
    elif x == mu.lo:
        left, right = x, min(j for j in tied if j > x)
    else:
        left, right = max(j for j in tied if j < x), x
    pid = _isolate_piece(st, mu_id, left, right)
    piece = st.bases[pid]
    dual = st.bases[piece.dual]
    a, b = piece.lo, piece.hi
    # h_a ... h_(b-1) equals X in the group
    X = _run(dual.lo, dual.hi, piece.sign * dual.sign)
    inv = lambda seq: [-j for j in reversed(seq)]
    st.remove_pair(pid)
    if case == "a":
        removed, merged = x, None
        expr = {x: inv(_run(a, x)) + X + inv(_run(x + 1, b))}
    elif x == a:
        removed, merged = a, a - 1
        expr = {a: X + inv(_run(a + 1, b)), a - 1: [a - 1] + _run(a + 1, b) + inv(X)}
    else:
        removed, merged = b - 1, b
        expr = {b - 1: inv(_run(a, b - 1)) + X, b: inv(X) + _run(a, b - 1) + [b]}
    imap = _item_index_map(n, {removed})
    fm = []
    for i in range(1, n + 1):
        if i in expr:
            fm.append(tuple(Word(imap[abs(c)] * (1 if c > 0 else -1) for c in expr[i])))
        else:
            fm.append((imap[i],))
    _delete_items(st, {removed})

    def split(v, removed=removed, merged=merged):
        vals = list(v)
        if merged is not None:
            pair = (vals[merged - 1], vals[removed - 1]) if merged < removed else (vals[removed - 1], vals[merged - 1])
            vals[merged - 1] = Word(list(pair[0]) + list(pair[1]))
        del vals[removed - 1]
        return tuple(vals)

    return TransformResult([(st.freeze(), SolutionTransport(tuple(fm), split))], "D2",
                           {"case": case, "base": mu_id, "at": x})


def d2_linear_eliminate_step(ge: GeneralizedEquation, rng: random.Random | None = None) -> Optional[TransformResult]:
    """One linear elimination step, or ``None`` when no base is eliminable.

    Deterministic order: lowest base id, case (a) before (b), leftmost item.
    With ``rng`` the candidate is drawn at random instead.
    """
    cands = d2_candidates(ge)
    if rng is not None:
        rng.shuffle(cands)
    else:
        cands.sort(key=lambda c: (c[1], c[0], c[2]))
    for cand in cands:
        try:
            return _d2_apply(ge, cand)
        except Inconsistent:
            continue
    return None


def ge_hash(ge: GeneralizedEquation) -> str:
    import hashlib

    return hashlib.sha1(repr(canonical_key(ge)).encode()).hexdigest()[:12]


def step_record(label: str, params: dict, parent: GeneralizedEquation, children: Sequence[GeneralizedEquation]) -> dict:
    return {
        "op": label,
        "params": params,
        "parent": ge_hash(parent),
        "children": [ge_hash(c) for c in children],
        "tau_before": complexity(parent),
        "tau_after": [complexity(c) for c in children],
        "items_before": parent.n_items,
        "items_after": [c.n_items for c in children],
    }


def kernel_with_transport(ge: GeneralizedEquation, rng: random.Random | None = None):
    """Linear elimination to a fixed point; returns ``(kernel, trace, transport)``."""
    trace = []
    tr = identity_transport(ge.n_items)
    cur = ge
    while True:
        res = d2_linear_eliminate_step(cur, rng)
        if res is None:
            return cur, trace, tr
        child, ctr = res.children[0]
        trace.append(step_record(res.label, res.params, cur, [child]))
        tr = tr.then(ctr)
        cur = child


def kernel(ge: GeneralizedEquation, rng: random.Random | None = None) -> tuple[GeneralizedEquation, list[dict]]:
    k, trace, _ = kernel_with_transport(ge, rng)
    return k, trace


# --- Tietze cleaning ---------------------------------------------------------


def _free_move(ge: GeneralizedEquation) -> Optional[SolutionTransport]:
    """Move free variable items behind all others and make them non-active."""
    g = gamma(ge)
    act = ge.item_active()
    free = [i for i in range(1, ge.rho + 1) if g[i] == 0]
    if not free:
        return None
    kept = [i for i in range(1, ge.rho + 1) if g[i] > 0]
    order = kept + free
    if order == list(range(1, ge.rho + 1)) and not any(act[i] for i in free):
        return None
    order += list(range(ge.rho + 1, ge.n_items + 1))
    new_index = {old: k for k, old in enumerate(order, 1)}
    fm = tuple((new_index[i],) for i in range(1, ge.n_items + 1))
    return SolutionTransport(fm, lambda v, order=order: tuple(v[i - 1] for i in order))


def _apply_free_move(ge: GeneralizedEquation, tr: SolutionTransport) -> GeneralizedEquation:
    new_index = {i: tr.forward_map[i - 1][0] for i in range(1, ge.n_items + 1)}
    g = gamma(ge)
    st = _State.of(ge)

    def on(b: Base, j: int) -> int:
        # bases cover no free item, so their items stay contiguous
        return new_index[j] if j < b.hi else new_index[j - 1] + 1

    bm = ge.base_map()
    st.bases = {k: replace(b, alpha=on(b, b.alpha), beta=on(b, b.beta)) for k, b in bm.items()}
    st.conns = {(on(bm[lam], p), lam, on(bm[bm[lam].dual], q)) for p, lam, q in ge.connections}
    old_act = ge.item_active()
    act = [False] * (ge.n_items + 1)
    for i in range(1, ge.n_items + 1):
        act[new_index[i]] = old_act[i] and g[i] > 0
    st.active = act
    return st.freeze()


def _constant_pairs(ge: GeneralizedEquation) -> list[int]:
    return [b.id for b, d in ge.pairs() if b.lo > ge.rho and d.lo > ge.rho]


def _clean(ge: GeneralizedEquation, tr: SolutionTransport, trace: list[dict], flags: dict | None = None):
    while True:
        changed = False
        k, ktrace, ktr = kernel_with_transport(ge)
        if ktrace:
            ge, tr, changed = k, tr.then(ktr), True
            trace = trace + ktrace
        if detect_inconsistency(ge):
            return [(ge, tr, trace)]
        removable = [b.id for b, d in ge.pairs() if (b.alpha, b.beta) == (d.alpha, d.beta)]
        removable += [lam for lam in _constant_pairs(ge) if lam not in removable]
        if removable:
            st = _State.of(ge)
            for lam in removable:
                st.remove_pair(lam)
            child = st.freeze()
            trace = trace + [step_record("ET3", {"bases": removable}, ge, [child])]
            ge, changed = child, True
        move = _free_move(ge)
        if move is not None:
            child = _apply_free_move(ge, move)
            trace = trace + [step_record("free", {}, ge, [child])]
            ge, tr, changed = child, tr.then(move), True
        complete = complete_bases(ge)
        if complete:
            mu = complete[0]
            kids = _d1(_State.of(ge), identity_transport(ge.n_items), mu, flags)
            kids = [(s.freeze(), t) for s, t in kids]
            if not kids:
                return [(ge, tr, trace)]  # every tie placement contradicts; caller sees no progress
            rec = step_record("D1", {"base": mu}, ge, [c for c, _ in kids])
            out = []
            for child, ctr in _prune(kids):
                out.extend(_clean(child, tr.then(ctr), trace + [rec], flags))
            return out
        if not changed:
            return [(ge, tr, trace)]


def tietze_cleaning(ge: GeneralizedEquation) -> TransformResult:
    """Linear elimination, matched pairs, complete bases, free items; to a fixed point."""
    flags: dict = {}
    kids = _clean(ge, identity_transport(ge.n_items), [], flags)
    children = [(c, t) for c, t, _ in kids]
    traces = [tr for _, _, tr in kids]
    return TransformResult(children, "cleaning", {"traces": traces, **flags})


def is_clean(ge: GeneralizedEquation) -> bool:
    kids = _clean(ge, identity_transport(ge.n_items), [])
    return len(kids) == 1 and not kids[0][2]


# --- entire transformation ---------------------------------------------------


def carrier(ge: GeneralizedEquation) -> int:
    secs = ge.active_sections()
    if not secs:
        raise TransformError("no active section")
    sec = secs[0]
    leading = [b for b in ge.bases if b.lo == sec.start and b.hi <= sec.end]
    if not leading:
        raise TransformError("active section without bases")
    return max(leading, key=lambda b: (b.hi, -b.id)).id


def _entire_plan(st: _State, cid: int) -> tuple[list[int], int, int]:
    """Transfer bases, cut boundary and the right end of the region to tie."""
    mu = st.bases[cid]
    trans = sorted(
        nu.id for nu in st.bases.values() if nu.id not in (cid, mu.dual) and nu.lo >= mu.lo and nu.hi <= mu.hi
    )
    others = [nu.lo for nu in st.bases.values()
              if nu.id != cid and nu.id not in trans and mu.lo <= nu.lo < mu.hi]
    cut = min(others + [mu.hi])
    far = max([cut] + [st.bases[t].hi for t in trans])
    return trans, cut, far


def entire_transformation_step(ge: GeneralizedEquation, limit: int = 64) -> TransformResult:
    """Transfer everything off the carrier, cut it and delete its leading piece."""
    act = ge.item_active()
    g = gamma(ge)
    low = [i for i in range(1, ge.n_items + 1) if act[i] and g[i] < 2]
    if low:
        raise TransformError(f"items {low} have gamma < 2; clean first")
    cid = carrier(ge)

    def wanted(s: _State) -> list[int]:
        mu = s.bases[cid]
        trans, cut, _ = _entire_plan(s, cid)
        if cut == mu.lo:
            raise Inconsistent("the carrier's dual starts with it")
        need = set(range(mu.lo + 1, cut + 1))
        for nu in trans:
            need.update(_anchors(s, nu))
        return sorted(j for j in need if mu.lo < j < mu.hi)

    out = []
    flags: dict = {}
    for s, t in _tie_all(_State.of(ge), identity_transport(ge.n_items), cid, wanted, limit, flags):
        try:
            trans, cut, _ = _entire_plan(s, cid)
            for nu in trans:
                _transfer(s, nu, cid, strict=False)
            mu = s.bases[cid]
            if cut < mu.hi:
                b1, b2 = _cut(s, cid, cut, keep_left=(mu.sign == -1))
                lead = b2 if mu.sign == -1 else b1
            else:
                lead = cid
            t = t.then(_remove_lone(s, lead))
        except Inconsistent:
            continue
        out.append((s.freeze(), t))
    if not out:
        raise Inconsistent("every branch of the entire transformation is contradictory")
    return TransformResult(_prune(out), "entire", {"carrier": cid, **flags})
