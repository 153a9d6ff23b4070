"""Stallings graphs of finitely generated subgroups of a free group."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .words import Word, cyclic_reduce, primitive_root

Edge = tuple[int, int, int]  # (source, positive label, target)


@dataclass(frozen=True)
class SubgroupGraph:
    n_vertices: int
    edges: tuple[Edge, ...]
    basepoint: int = 0

    def out_map(self) -> dict[tuple[int, int], int]:
        """(vertex, signed label) -> vertex, reading inverse labels backwards."""
        out = {}
        for u, a, v in self.edges:
            out[(u, a)] = v
            out[(v, -a)] = u
        return out

    @property
    def rank(self) -> int:
        return len(self.edges) - self.n_vertices + 1 if self.n_vertices else 0

    def is_trivial(self) -> bool:
        return not self.edges

    def degree(self, v: int) -> int:
        return sum((u == v) + (w == v) for u, _, w in self.edges)

    def to_dot(self, names: Sequence[str] | None = None) -> str:
        lines = ["digraph subgroup {", "  rankdir=LR;"]
        for v in range(self.n_vertices):
            shape = "doublecircle" if v == self.basepoint else "circle"
            lines.append(f'  v{v} [shape={shape}, label="{v}"];')
        for u, a, v in self.edges:
            lbl = names[a - 1] if names else f"g{a}"
            lines.append(f'  v{u} -> v{v} [label="{lbl}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


# --- construction ------------------------------------------------------------


def _fold(n: int, edges: set[Edge], base: int) -> tuple[int, set[Edge], int]:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    while True:
        seen: dict[tuple[int, int], int] = {}
        merge = None
        for u, a, v in edges:
            for key, target in (((u, a), v), ((v, -a), u)):
                if key in seen and seen[key] != target:
                    merge = (seen[key], target)
                    break
                seen[key] = target
            if merge:
                break
        if merge is None:
            break
        x, y = find(merge[0]), find(merge[1])
        parent[max(x, y)] = min(x, y)
        edges = {(find(u), a, find(v)) for u, a, v in edges}
    return n, edges, find(base)


def _core(edges: set[Edge], base: int) -> set[Edge]:
    """Remove hanging trees, keeping the basepoint."""
    edges = set(edges)
    while True:
        deg: dict[int, int] = {}
        for u, _, v in edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        leaves = {v for v, d in deg.items() if d == 1 and v != base}
        if not leaves:
            return edges
        edges = {e for e in edges if e[0] not in leaves and e[2] not in leaves}


def _normalize(edges: set[Edge], base: int) -> SubgroupGraph:
    """Relabel vertices in breadth-first order from the basepoint."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for u, a, v in edges:
        adj.setdefault(u, []).append((a, v))
        adj.setdefault(v, []).append((-a, u))
    order = {base: 0}
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for a, v in sorted(adj.get(u, []), key=lambda t: (abs(t[0]), t[0] < 0)):
            if v not in order:
                order[v] = len(order)
                queue.append(v)
    new_edges = tuple(sorted((order[u], a, order[v]) for u, a, v in edges if u in order and v in order))
    return SubgroupGraph(len(order), new_edges, 0)


def build(generators: Iterable[Sequence[int]]) -> SubgroupGraph:
    """Wedge of generator loops at the basepoint, folded and cored."""
    edges: set[Edge] = set()
    n = 1
    for g in generators:
        w = Word(g)
        if not w:
            continue
        prev = 0
        for k, x in enumerate(w):
            nxt = 0 if k == len(w) - 1 else n
            if nxt:
                n += 1
            edges.add((prev, x, nxt) if x > 0 else (nxt, -x, prev))
            prev = nxt
    n, edges, base = _fold(n, edges, 0)
    return _normalize(_core(edges, base), base)


def membership(graph: SubgroupGraph, w: Sequence[int]) -> bool:
    out = graph.out_map()
    v = graph.basepoint
    for x in Word(w):
        if (v, x) not in out:
            return False
        v = out[(v, x)]
    return v == graph.basepoint


def _spanning_paths(n: int, edges: Sequence[Edge], base: int) -> dict[int, Word]:
    out_adj: dict[int, list[tuple[int, int]]] = {}
    for u, a, v in edges:
        out_adj.setdefault(u, []).append((a, v))
        out_adj.setdefault(v, []).append((-a, u))
    path = {base: Word()}
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for a, v in sorted(out_adj.get(u, []), key=lambda t: (abs(t[0]), t[0] < 0)):
            if v not in path:
                path[v] = Word._trusted(tuple(path[u]) + (a,))
                queue.append(v)
    return path


def generators(graph: SubgroupGraph) -> list[Word]:
    """Free basis read off a breadth-first spanning tree."""
    path = _spanning_paths(graph.n_vertices, graph.edges, graph.basepoint)
    tree = set()
    for v, p in path.items():
        if p:
            a = p[-1]
            u = _walk(graph, graph.basepoint, p[:-1])
            tree.add((u, a, v) if a > 0 else (v, -a, u))
    out = []
    for u, a, v in graph.edges:
        if (u, a, v) not in tree:
            out.append(Word(tuple(path[u]) + (a,) + tuple(path[v].inverse())))
    return out


def _walk(graph: SubgroupGraph, start: int, w: Sequence[int]) -> int:
    out = graph.out_map()
    v = start
    for x in w:
        v = out[(v, x)]
    return v


# --- pullbacks -------------------------------------------------------------------


def _product(g: SubgroupGraph, h: SubgroupGraph, start: tuple[int, int]) -> tuple[set, dict]:
    """Connected component of ``start`` in the label-synchronized product."""
    gout, hout = g.out_map(), h.out_map()
    labels = {a for _, a, _ in g.edges} & {a for _, a, _ in h.edges}
    seen = {start}
    queue = deque([start])
    edges = set()
    while queue:
        u1, u2 = queue.popleft()
        for a in labels:
            for s in (a, -a):
                if (u1, s) in gout and (u2, s) in hout:
                    v = (gout[(u1, s)], hout[(u2, s)])
                    edges.add(((u1, u2), a, v) if s > 0 else (v, a, (u1, u2)))
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
    return seen, edges


def _relabel_pairs(edges: set, base) -> tuple[set[Edge], int]:
    ids: dict = {base: 0}
    for u, _, v in sorted(edges):
        for x in (u, v):
            ids.setdefault(x, len(ids))
    return {(ids[u], a, ids[v]) for u, a, v in edges}, 0


def intersect(h: SubgroupGraph, k: SubgroupGraph) -> tuple[SubgroupGraph, list[Word]]:
    _, edges = _product(h, k, (h.basepoint, k.basepoint))
    e, base = _relabel_pairs(edges, (h.basepoint, k.basepoint))
    graph = _normalize(_core(e, base), base)
    return graph, generators(graph)


# --- centralizers --------------------------------------------------------------


def centralizer(w: Sequence[int]) -> Optional[Word]:
    """Generator of the centralizer of ``w``; ``None`` stands for the whole group."""
    w = Word(w)
    if not w:
        return None
    core, conj = cyclic_reduce(w)
    root, _ = primitive_root(core)
    return conj * root * conj.inverse()


def centralizer_of_set(ws: Iterable[Sequence[int]]) -> Optional[list[Word]]:
    """Generators of the common centralizer; ``None`` means the whole group, ``[]`` trivial."""
    gens = [centralizer(w) for w in ws]
    gens = [g for g in gens if g is not None]
    if not gens:
        return None
    c = gens[0]
    for g in gens[1:]:
        if g != c and g != c.inverse():
            return []
    return [c]


# --- malnormality and conjugacy --------------------------------------------------


def is_proper(graph: SubgroupGraph, n_letters: int) -> bool:
    full = graph.n_vertices == 1 and {a for _, a, _ in graph.edges} == set(range(1, n_letters + 1))
    return not full


def is_malnormal(graph: SubgroupGraph, n_letters: int) -> tuple[bool, Optional[tuple[Word, Word, Word]]]:
    """Malnormality via the pullback of the graph with itself.

    The witness ``(g, h, ghg^-1)`` has ``g`` outside the subgroup and both
    ``h`` and ``ghg^-1`` nontrivial elements of it.
    """
    if graph.is_trivial() or not is_proper(graph, n_letters):
        raise ValueError("malnormality is tested for nontrivial proper subgroups")
    base = (graph.basepoint, graph.basepoint)
    diagonal, _ = _product(graph, graph, base)
    paths = _spanning_paths(graph.n_vertices, graph.edges, graph.basepoint)
    done = set(diagonal)
    for u in range(graph.n_vertices):
        for v in range(graph.n_vertices):
            if (u, v) in done:
                continue
            comp, edges = _product(graph, graph, (u, v))
            done |= comp
            core = _core(edges, (u, v))
            if not core:
                continue
            # some vertex of the core carries a cycle; read one off
            start = next(iter(core))[0]
            e, b = _relabel_pairs(core, start)
            loops = generators(_normalize(e, b))
            c = loops[0]
            x, y = start
            p, q = paths[x], paths[y]
            g = p * q.inverse()
            h = q * c * q.inverse()
            return False, (g, h, g * h * g.inverse())
    return True, None


def _strip(graph: SubgroupGraph) -> tuple[SubgroupGraph, Word]:
    """Cut the hair at the basepoint; returns the core and the path to its new basepoint."""
    edges = set(graph.edges)
    base = graph.basepoint
    path: list[int] = []
    while True:
        inc = [e for e in edges if e[0] == base or e[2] == base]
        if len(inc) != 1 or inc[0][0] == inc[0][2]:
            break
        u, a, v = inc[0]
        if u == base:
            path.append(a)
            base = v
        else:
            path.append(-a)
            base = u
        edges.discard(inc[0])
    return _normalize(edges, base), Word(path)


def subgroups_conjugate(h: SubgroupGraph, k: SubgroupGraph) -> tuple[bool, Optional[Word]]:
    """Conjugacy via label-isomorphism of the basepoint-free cores.

    Returns a conjugator ``g`` with ``g H g^-1 = K`` when one exists.
    """
    if h.is_trivial() or k.is_trivial():
        return (h.is_trivial() and k.is_trivial()), (Word() if h.is_trivial() and k.is_trivial() else None)
    ch, th = _strip(h)
    ck, tk = _strip(k)
    if ch.n_vertices != ck.n_vertices or len(ch.edges) != len(ck.edges):
        return False, None
    hout, kout = ch.out_map(), ck.out_map()
    kedges = set(ck.edges)
    kpaths = _spanning_paths(ck.n_vertices, ck.edges, 0)
    for x in range(ck.n_vertices):
        iso = {0: x}
        queue = deque([0])
        ok = True
        while queue and ok:
            u = queue.popleft()
            for (src, s), dst in hout.items():
                if src != u:
                    continue
                if (iso[u], s) not in kout:
                    ok = False
                    break
                img = kout[(iso[u], s)]
                if dst in iso:
                    if iso[dst] != img:
                        ok = False
                        break
                else:
                    iso[dst] = img
                    queue.append(dst)
        if ok and len(set(iso.values())) == ch.n_vertices:
            mapped = {(iso[u], a, iso[v]) for u, a, v in ch.edges}
            if mapped == kedges:
                g = tk * kpaths[x] * th.inverse()
                return True, g
    return False, None
