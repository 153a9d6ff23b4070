"""Combinatorial generalized equations.

An equation lives on an interval of items ``h_1 .. h_n`` (``n = rho + m``)
separated by boundaries ``1 .. n+1``.  The last ``m`` items are constant
items carrying fixed letters.  A base ``mu`` covers the items between its
endpoints; its value under a solution is ``(h_lo ... h_(hi-1))^sign``, read
from ``alpha`` to ``beta``.  Dual bases have equal values.

A boundary connection ``(p, lam, q)`` says that the prefix of ``lam`` read
up to boundary ``p`` equals the prefix of its dual read up to ``q``.
Connections are stored once per dual pair, on the base with the smaller id.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .eqsys import Equation, EquationSystem
from .words import Alphabet, Word, concat_reduced


@dataclass(frozen=True)
class Base:
    id: int
    sign: int
    dual: int
    alpha: int
    beta: int
    lo: int = field(init=False, repr=False, compare=False)
    hi: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lo", min(self.alpha, self.beta))
        object.__setattr__(self, "hi", max(self.alpha, self.beta))

    def covers(self, item: int) -> bool:
        return self.lo <= item < self.hi

    def offset(self, boundary: int) -> int:
        """Number of items between ``alpha`` and ``boundary``."""
        return abs(boundary - self.alpha)

    def at_offset(self, k: int) -> int:
        return self.alpha + k * self.sign


@dataclass(frozen=True)
class Section:
    start: int
    end: int
    active: bool


@dataclass(frozen=True)
class GeneralizedEquation:
    rho: int
    constants: tuple[int, ...]  # letter codes of the constant items rho+1 .. rho+m
    bases: tuple[Base, ...]
    connections: frozenset[tuple[int, int, int]] = frozenset()
    sections: tuple[Section, ...] = ()

    @property
    def m(self) -> int:
        return len(self.constants)

    @property
    def n_items(self) -> int:
        return self.rho + len(self.constants)

    @property
    def n_boundaries(self) -> int:
        return self.n_items + 1

    def base(self, base_id: int) -> Base:
        for b in self.bases:
            if b.id == base_id:
                return b
        raise KeyError(f"no base {base_id}")

    def base_map(self) -> dict[int, Base]:
        return {b.id: b for b in self.bases}

    def is_constant_item(self, item: int) -> bool:
        return item > self.rho

    def constant_of(self, item: int) -> int:
        return self.constants[item - self.rho - 1]

    def item_active(self) -> list[bool]:
        flags = [False] * (self.n_items + 1)  # index 0 unused
        for s in self.sections:
            for i in range(s.start, s.end):
                flags[i] = s.active
        return flags

    def active_sections(self) -> list[Section]:
        return [s for s in self.sections if s.active]

    def pairs(self) -> list[tuple[Base, Base]]:
        bm = self.base_map()
        return [(b, bm[b.dual]) for b in self.bases if b.id < b.dual]

    def ties(self, base_id: int) -> dict[int, int]:
        """Boundary map from ``base_id`` onto its dual, endpoints included."""
        bm = self.base_map()
        b = bm[base_id]
        d = bm[b.dual]
        out = {b.alpha: d.alpha, b.beta: d.beta}
        for p, lam, q in self.connections:
            if lam == base_id:
                out[p] = q
            elif lam == b.dual:
                out[q] = p
        return out

    def connections_of(self, base_id: int) -> list[tuple[int, int]]:
        """Interior connections of ``base_id`` as ``(p_on_base, q_on_dual)``."""
        b = self.base(base_id)
        out = []
        for p, lam, q in self.connections:
            if lam == base_id:
                out.append((p, q))
            elif lam == b.dual:
                out.append((q, p))
        return sorted(out)


def connection(p: int, lam: Base, q: int) -> tuple[int, int, int]:
    """Normalize a connection onto the smaller base id of the pair."""
    if lam.id < lam.dual:
        return (p, lam.id, q)
    return (q, lam.dual, p)


def closed_boundaries(n_items: int, bases: Iterable[Base]) -> list[bool]:
    closed = [True] * (n_items + 2)
    for b in bases:
        for j in range(max(b.lo + 1, 1), min(b.hi, n_items + 2)):
            closed[j] = False
    return closed


def derive_sections(rho: int, n_items: int, bases: Sequence[Base], active: Sequence[bool]) -> tuple[Section, ...]:
    """Cut the interval at closed boundaries; a section is active if any of its items is."""
    closed = closed_boundaries(n_items, bases)
    out = []
    start = 1
    for j in range(2, n_items + 2):
        if closed[j]:
            act = any(active[i] for i in range(start, j)) and start <= rho
            out.append(Section(start, j, act))
            start = j
    return tuple(out)


def make_ge(
    rho: int,
    constants: Sequence[int],
    bases: Iterable[Base],
    connections: Iterable[tuple[int, int, int]] = (),
    active: Sequence[bool] | None = None,
) -> GeneralizedEquation:
    """Build an equation, deriving the closed sections from the bases.

    ``active`` is indexed by item (index 0 unused); by default every
    variable item is active.
    """
    bases = tuple(sorted(bases, key=lambda b: b.id))
    n = rho + len(constants)
    if active is None:
        active = [False] + [i <= rho for i in range(1, n + 1)]
    sections = derive_sections(rho, n, bases, active)
    return GeneralizedEquation(rho, tuple(constants), bases, frozenset(connections), sections)


# --- validation --------------------------------------------------------------


def validate(ge: GeneralizedEquation) -> list[str]:
    """List every breached structural condition; empty means valid."""
    out: list[str] = []
    bm: dict[int, Base] = {}
    for b in ge.bases:
        if b.id in bm:
            out.append(f"item 1: duplicate base id {b.id}")
        bm[b.id] = b
    for b in ge.bases:
        if b.dual == b.id:
            out.append(f"item 1: base {b.id} is its own dual")
        elif b.dual not in bm:
            out.append(f"item 1: base {b.id} has missing dual {b.dual}")
        elif bm[b.dual].dual != b.id:
            out.append(f"item 1: dual map is not an involution at base {b.id}")
        if b.sign not in (1, -1):
            out.append(f"item 1: base {b.id} has sign {b.sign}")
        for end in (b.alpha, b.beta):
            if not 1 <= end <= ge.n_boundaries:
                out.append(f"item 2: base {b.id} endpoint {end} outside 1..{ge.n_boundaries}")
        if b.sign == 1 and not b.alpha < b.beta:
            out.append(f"item 3: base {b.id} has sign 1 but alpha >= beta")
        if b.sign == -1 and not b.alpha > b.beta:
            out.append(f"item 3: base {b.id} has sign -1 but alpha <= beta")
    for p, lam, q in sorted(ge.connections):
        if lam not in bm or bm[lam].dual not in bm:
            out.append(f"item 4: connection ({p},{lam},{q}) names an unknown base")
            continue
        b, d = bm[lam], bm[bm[lam].dual]
        if lam > b.dual:
            out.append(f"item 4: connection ({p},{lam},{q}) not stored on the smaller base id")
        # stored on the smaller id, so the interior side may be either one
        if not (b.lo <= p <= b.hi and d.lo <= q <= d.hi):
            out.append(f"item 4: connection ({p},{lam},{q}) has a boundary off its base")
        elif not (b.lo < p < b.hi or d.lo < q < d.hi):
            out.append(f"item 4: connection ({p},{lam},{q}) joins two endpoints")
    # sections
    closed = closed_boundaries(ge.n_items, ge.bases)
    pos = 1
    for s in ge.sections:
        if s.start != pos or s.end <= s.start:
            out.append(f"sections: section [{s.start},{s.end}] breaks the partition at {pos}")
            break
        if not closed[s.start] or not closed[s.end]:
            out.append(f"sections: section [{s.start},{s.end}] has an open end")
        for j in range(s.start + 1, s.end):
            if closed[j]:
                out.append(f"sections: section [{s.start},{s.end}] has closed interior boundary {j}")
                break
        if s.active and s.end > ge.rho + 1:
            out.append(f"sections: constant section [{s.start},{s.end}] is active")
        pos = s.end
    else:
        if pos != ge.n_boundaries:
            out.append(f"sections: partition stops at {pos}, expected {ge.n_boundaries}")
    return out


# --- associated system -------------------------------------------------------


def _span(ge: GeneralizedEquation, lo: int, hi: int, h0: int) -> list[int]:
    return [h0 + i - 1 for i in range(lo, hi)]


def associated_system(ge: GeneralizedEquation, alphabet: Alphabet | None = None) -> EquationSystem:
    """Basic, boundary and constant equations in variables ``h1 .. h_n``.

    Each equation ``L = R`` is stored as ``L R^-1``.  Boundary equations use
    the prefix-reading semantics of connections.
    """
    n_const = max([abs(c) for c in ge.constants], default=1)
    if alphabet is None:
        names = tuple("abcdefg"[:n_const]) if n_const <= 7 else tuple(f"a{i}" for i in range(1, n_const + 1))
        alphabet = Alphabet(names)
    alph = Alphabet(alphabet.constants, tuple(f"h{i}" for i in range(1, ge.n_items + 1)))
    h0 = alphabet.n_constants + 1
    bm = ge.base_map()

    def prefix(b: Base, p: int) -> list[int]:
        if b.sign == 1:
            return _span(ge, b.alpha, p, h0)
        return [-x for x in reversed(_span(ge, p, b.alpha, h0))]

    eqs: list[Equation] = []
    for b, d in ge.pairs():
        left, right = prefix(b, b.beta), prefix(d, d.beta)
        eqs.append(Equation(Word(left + [-x for x in reversed(right)])))
    for p, lam, q in sorted(ge.connections):
        b = bm[lam]
        d = bm[b.dual]
        left, right = prefix(b, p), prefix(d, q)
        eqs.append(Equation(Word(left + [-x for x in reversed(right)])))
    for j, c in enumerate(ge.constants):
        eqs.append(Equation(Word([h0 + ge.rho + j, -c])))
    return EquationSystem(alph, tuple(eqs))


def boundary_equation_text(ge: GeneralizedEquation, conn: tuple[int, int, int]) -> str:
    """Bracket rendering ``[h_i ... h_j] = [h_k ... h_l]`` (``^-1`` for opposite signs)."""
    p, lam, q = conn
    b = ge.base(lam)
    d = ge.base(b.dual)

    def run(lo: int, hi: int) -> str:
        return "[" + " ".join(f"h{i}" for i in range(lo, hi)) + "]"

    left = run(b.alpha, p) if b.sign == 1 else run(p, b.alpha) + "^-1"
    right = run(d.alpha, q) if d.sign == 1 else run(q, d.alpha) + "^-1"
    if b.sign == -1 and d.sign == -1:
        left, right = left[:-3], right[:-3]
    elif b.sign == -1:
        left, right = left[:-3], right + "^-1"
    return f"{left} = {right}"


# --- solutions ---------------------------------------------------------------


def full_values(ge: GeneralizedEquation, sol: Sequence[Word]) -> list[Word]:
    if len(sol) == ge.n_items:
        return list(sol)
    if len(sol) == ge.rho:
        return list(sol) + [Word((c,)) for c in ge.constants]
    raise ValueError(f"solution has {len(sol)} values, expected {ge.rho} or {ge.n_items}")


def base_value(ge: GeneralizedEquation, b: Base, values: Sequence[Word], p: int | None = None) -> Word:
    """Value of ``b`` read from alpha up to boundary ``p`` (default: beta)."""
    p = b.beta if p is None else p
    lo, hi = (b.alpha, p) if b.sign == 1 else (p, b.alpha)
    out: list[int] = []
    for i in range(lo, hi):
        out.extend(values[i - 1])
    w = Word(out)
    return w if b.sign == 1 else w.inverse()


def _written_reduced(values: Sequence[Word], lo: int, hi: int) -> bool:
    for i in range(lo, hi - 1):
        u, v = values[i - 1], values[i]
        if u and v and u[-1] == -v[0]:
            return False
    return True


def check_solution(ge: GeneralizedEquation, sol: Sequence[Word], as_written: bool = True) -> bool:
    """Nonempty values, products under bases reduced as written, all equations hold.

    With ``as_written=False`` the products may cancel: the equations only
    have to hold in the free group.
    """
    values = full_values(ge, sol)
    if any(len(v) == 0 for v in values):
        return False
    for j, c in enumerate(ge.constants):
        if tuple(values[ge.rho + j]) != (c,):
            return False
    bm = ge.base_map()
    for b in ge.bases:
        if as_written and not _written_reduced(values, b.lo, b.hi):
            return False
    for b, d in ge.pairs():
        if base_value(ge, b, values) != base_value(ge, d, values):
            return False
    for p, lam, q in ge.connections:
        b = bm[lam]
        if base_value(ge, b, values, p) != base_value(ge, bm[b.dual], values, q):
            return False
    return True


def positions(values: Sequence[Word]) -> list[int]:
    """Letter offset of each boundary (index 0 unused)."""
    out = [0, 0]
    for v in values:
        out.append(out[-1] + len(v))
    return out


# --- measures ----------------------------------------------------------------


def gamma(ge: GeneralizedEquation) -> dict[int, int]:
    out = {i: 0 for i in range(1, ge.n_items + 1)}
    for b in ge.bases:
        for i in range(b.lo, b.hi):
            out[i] += 1
    return out


def complexity(ge: GeneralizedEquation) -> int:
    tau = 0
    for s in ge.active_sections():
        n = sum(1 for b in ge.bases if s.start <= b.lo and b.hi <= s.end)
        tau += max(0, n - 2)
    return tau


def excess(ge: GeneralizedEquation, sol: Sequence[Word], participating: Iterable[int], marker: int) -> int:
    """Sum of participating base lengths minus twice the length of ``[1, marker]``."""
    values = full_values(ge, sol)
    bm = ge.base_map()
    total = sum(sum(len(values[i - 1]) for i in range(bm[b].lo, bm[b].hi)) for b in participating)
    return total - 2 * sum(len(values[i - 1]) for i in range(1, marker))


def active_length(ge: GeneralizedEquation, values: Sequence[Word]) -> int:
    act = ge.item_active()
    return sum(len(values[i - 1]) for i in range(1, ge.n_items + 1) if act[i])


# --- structural identity -----------------------------------------------------


def canonical_key(ge: GeneralizedEquation) -> tuple:
    """Hashable form identifying equations up to renaming of base ids."""
    bm = ge.base_map()
    pair_keys = []
    for b, d in ge.pairs():
        options = []
        for x, y in ((b, d), (d, b)):
            conns = tuple(sorted((p, q) for p, q in ge.connections_of(x.id)))
            options.append(((x.alpha, x.beta), (y.alpha, y.beta), conns))
        pair_keys.append(min(options))
    secs = tuple((s.start, s.end, s.active) for s in ge.sections)
    return (ge.rho, ge.constants, secs, tuple(sorted(pair_keys)))


def permute_sections(ge: GeneralizedEquation, order: Sequence[int]) -> GeneralizedEquation:
    """Reorder the variable closed sections; ``order[k]`` is the old index of new section ``k``.

    Every base lies inside one closed section, so bases and connections
    move with their section.  Constant sections keep their place.
    """
    var = [s for s in ge.sections if s.end <= ge.rho + 1]
    shift: dict[int, int] = {}
    pos = 1
    for k in order:
        s = var[k]
        for i in range(s.start, s.end):
            shift[i] = i - s.start + pos
        pos += s.end - s.start
    active = [False] * (ge.n_items + 1)
    for k in order:
        s = var[k]
        for i in range(s.start, s.end):
            active[shift[i]] = s.active
    for s in ge.sections[len(var):]:
        for i in range(s.start, s.end):
            active[i] = s.active

    def move(j: int, lo: int) -> int:
        # boundary ``j`` of a base starting at boundary ``lo``
        if lo > ge.rho:
            return j
        return shift[lo] + (j - lo)

    bm = ge.base_map()
    bases = [replace(b, alpha=move(b.alpha, b.lo), beta=move(b.beta, b.lo)) for b in ge.bases]
    conns = []
    for p, lam, q in ge.connections:
        b = bm[lam]
        d = bm[b.dual]
        conns.append((move(p, b.lo), lam, move(q, d.lo)))
    return make_ge(ge.rho, ge.constants, bases, conns, active)


def section_key(ge: GeneralizedEquation) -> tuple:
    """``canonical_key`` minimized over all orders of the variable closed sections."""
    n = sum(1 for s in ge.sections if s.end <= ge.rho + 1)
    return min(canonical_key(permute_sections(ge, order)) for order in itertools.permutations(range(n)))


def relabel(ge: GeneralizedEquation, start: int = 1) -> GeneralizedEquation:
    """Renumber bases consecutively, keeping dual pairs adjacent."""
    mapping: dict[int, int] = {}
    nxt = start
    for b, d in sorted(ge.pairs(), key=lambda bd: (bd[0].lo, bd[0].hi, bd[1].lo, bd[1].hi)):
        mapping[b.id], mapping[d.id] = nxt, nxt + 1
        nxt += 2
    bases = [replace(b, id=mapping[b.id], dual=mapping[b.dual]) for b in ge.bases]
    bm = ge.base_map()
    conns = [connection(p, replace(bm[lam], id=mapping[lam], dual=mapping[bm[lam].dual]), q)
             for p, lam, q in ge.connections]
    return replace(ge, bases=tuple(sorted(bases, key=lambda b: b.id)), connections=frozenset(conns))


# --- serialization -----------------------------------------------------------


def to_json(ge: GeneralizedEquation) -> dict:
    return {
        "rho": ge.rho,
        "m": ge.m,
        "bases": [{"id": b.id, "sign": b.sign, "dual": b.dual, "alpha": b.alpha, "beta": b.beta} for b in ge.bases],
        "connections": [list(c) for c in sorted(ge.connections)],
        "sections": [{"from": s.start, "to": s.end, "active": s.active} for s in ge.sections],
        "constants": list(ge.constants),
    }


class SchemaError(ValueError):
    pass


def from_json(data: Mapping | str) -> GeneralizedEquation:
    """Load the JSON form; sections are taken as given (``validate`` checks them)."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        rho = int(data["rho"])
        constants = tuple(int(c) for c in data.get("constants", []))
        if "m" in data and int(data["m"]) != len(constants):
            raise SchemaError(f"m = {data['m']} but {len(constants)} constants listed")
        bases = tuple(
            Base(int(b["id"]), int(b["sign"]), int(b["dual"]), int(b["alpha"]), int(b["beta"])) for b in data["bases"]
        )
        conns = frozenset(tuple(int(x) for x in c) for c in data.get("connections", []))
        if any(len(c) != 3 for c in conns):
            raise SchemaError("connections must be [p, base, q] triples")
        if "sections" in data:
            sections = tuple(Section(int(s["from"]), int(s["to"]), bool(s["active"])) for s in data["sections"])
            return GeneralizedEquation(rho, constants, tuple(sorted(bases, key=lambda b: b.id)), conns, sections)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed generalized equation: {exc}") from None
    return make_ge(rho, constants, bases, conns)


def to_dot(ge: GeneralizedEquation, title: str = "GE") -> str:
    """Interval picture: boundaries across the top, one row per base."""
    lines = [f'digraph "{title}" {{', "  rankdir=LR;", "  node [shape=point];", "  edge [arrowhead=none];"]
    n = ge.n_boundaries
    act = ge.item_active()
    for j in range(1, n + 1):
        lines.append(f'  b0_{j} [shape=plaintext, label="{j}"];')
    for i in range(1, n):
        style = "bold" if act[i] else "dashed"
        lbl = f"h{i}" if i <= ge.rho else f"c{ge.constant_of(i)}"
        lines.append(f'  b0_{i} -> b0_{i + 1} [label="{lbl}", style={style}];')
    for row, b in enumerate(ge.bases, 1):
        color = "blue" if b.id < b.dual else "red"
        lines.append(f"  b{row}_{b.lo} -> b{row}_{b.hi} "
                     f'[label="{b.id}{"+" if b.sign == 1 else "-"} (dual {b.dual})", color={color}];')
    for p, lam, q in sorted(ge.connections):
        lines.append(f'  // connection ({p}, {lam}, {q})')
    lines.append("}")
    return "\n".join(lines) + "\n"
