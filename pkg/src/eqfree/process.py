"""From equations to generalized equations, and the solution-tree search."""

from __future__ import annotations

import enum
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence

from .eqsys import Assignment, Equation, EquationSystem, TriangulationMap, evaluate, substitute, triangulate
from .geq import Base, GeneralizedEquation, canonical_key, complexity, make_ge
from .bulitko import bulitko_bound, pump  # noqa: F401  (re-exported)
from .traces import analyze_trace, follow_witness  # noqa: F401  (re-exported)
from .transforms import (
    step_record,
    Inconsistent,
    SolutionTransport,
    TransformError,
    carrier,
    detect_inconsistency,
    entire_transformation_step,
    tietze_cleaning,
)
from .words import EMPTY, Word

log = logging.getLogger(__name__)


# --- case splits -------------------------------------------------------------


@dataclass(frozen=True)
class CaseSplit:
    trivial: frozenset[int]
    residual: EquationSystem


def case_splits(system: EquationSystem) -> list[CaseSplit]:
    """One split per set of variables sent to the identity, largest sets first.

    Splits whose residual contains a nonempty constant-only equation are dropped.
    """
    alph = system.alphabet
    variables = system.occurring_variables()
    out = []
    for k in range(len(variables), -1, -1):
        for trivial in itertools.combinations(variables, k):
            assignment = {v: (EMPTY if v in trivial else Word((v,))) for v in alph.variable_codes()}
            eqs = []
            ok = True
            for eq in system.equations:
                w = substitute(eq.lhs, assignment, alph)
                if not w:
                    continue
                if all(alph.is_constant(x) for x in w):
                    ok = False
                    break
                eqs.append(Equation(w))
            if ok:
                out.append(CaseSplit(frozenset(trivial), EquationSystem(alph, tuple(eqs))))
    return out


# --- generalized equations from a triangulated system -------------------------


@dataclass(frozen=True)
class Layout:
    """A generalized equation with the data to read a system solution off it."""

    ge: GeneralizedEquation
    alphabet_size: int
    # variable code -> (first item, end boundary, sign) of its first occurrence
    spans: tuple[tuple[int, int, int, int], ...]

    def assignment(self, values: Sequence[Word]) -> Assignment:
        out: Assignment = {}
        for v, lo, hi, s in self.spans:
            w = Word(x for i in range(lo, hi) for x in values[i - 1])
            out[v] = w if s == 1 else w.inverse()
        return out


_TRIANGLE = (((0, 1), (1, 1)), ((1, -1), (2, 1)), ((2, -1), (0, -1)))  # pieces per occurrence
_SEGMENT = (((0, 1),), ((0, -1),))


def _patterns(eq: Sequence[int], is_const) -> list[frozenset[int]]:
    pieces = _TRIANGLE if len(eq) == 3 else _SEGMENT
    n = 3 if len(eq) == 3 else 1
    out = []
    for mask in range(1, 2 ** n):
        nonempty = frozenset(j for j in range(n) if mask >> j & 1)
        ok = True
        for letter, occ in zip(eq, pieces):
            k = sum(1 for j, _ in occ if j in nonempty)
            if k == 0 or (is_const(letter) and k != 1):
                ok = False
                break
        if ok:
            out.append(nonempty)
    return out


def layouts(system: EquationSystem) -> list[Layout]:
    """Every combined cancellation pattern of a triangulated system.

    Each letter occurrence gets its own section holding the nonempty pieces
    of its pattern; a cancelled piece ``lam`` links its two occurrences by a
    dual pair; repeated variables are linked by pairs over whole sections;
    constant occurrences are linked to the constant items.
    """
    alph = system.alphabet
    eqs = [tuple(eq.lhs) for eq in system.equations if len(eq.lhs)]
    if any(len(e) > 3 for e in eqs):
        raise ValueError("system is not triangulated")
    if any(len(e) == 1 for e in eqs):
        return []  # a single nontrivial letter cannot be the identity
    m = alph.n_constants
    per_eq = [_patterns(e, alph.is_constant) for e in eqs]
    out = []
    for choice in itertools.product(*per_eq):
        item = 0
        occurrences: list[tuple[int, int, int, int]] = []  # (letter, lo, hi, sign)
        piece_items: dict[tuple[int, int], dict[int, int]] = {}  # (eq, lam) -> sign -> item
        for e, (letters, nonempty) in enumerate(zip(eqs, choice)):
            pieces = _TRIANGLE if len(letters) == 3 else _SEGMENT
            for letter, occ in zip(letters, pieces):
                lo = item + 1
                for j, s in occ:
                    if j in nonempty:
                        item += 1
                        piece_items.setdefault((e, j), {})[s] = item
                occurrences.append((abs(letter), lo, item + 1, 1 if letter > 0 else -1))
        rho = item
        bases: list[Base] = []
        nid = 1

        def pair(lo1, hi1, s1, lo2, hi2, s2):
            nonlocal nid
            bases.append(Base(nid, s1, nid + 1, lo1 if s1 == 1 else hi1, hi1 if s1 == 1 else lo1))
            bases.append(Base(nid + 1, s2, nid, lo2 if s2 == 1 else hi2, hi2 if s2 == 1 else lo2))
            nid += 2

        for (e, j), items in sorted(piece_items.items()):
            pair(items[1], items[1] + 1, 1, items[-1], items[-1] + 1, -1)
        first: dict[int, tuple[int, int, int]] = {}
        for letter, lo, hi, s in occurrences:
            if letter <= m:
                c = rho + letter
                pair(lo, hi, s, c, c + 1, 1)
            elif letter in first:
                f = first[letter]
                pair(f[0], f[1], f[2], lo, hi, s)
            else:
                first[letter] = (lo, hi, s)
        ge = make_ge(rho, tuple(range(1, m + 1)), bases)
        spans = tuple((v, lo, hi, s) for v, (lo, hi, s) in sorted(first.items()))
        out.append(Layout(ge, m, spans))
    return out


def ge_from_system(system: EquationSystem) -> list[GeneralizedEquation]:
    return [lay.ge for lay in layouts(system)]


# --- solution tree -----------------------------------------------------------


class LeafStatus(enum.Enum):
    SOLVED = "solved"
    INCONSISTENT = "inconsistent"
    EXHAUSTED = "budget-exhausted"
    REPEAT = "repeat"


@dataclass(frozen=True)
class Budget:
    max_depth: int = 60
    max_nodes: int = 20000
    max_period: Optional[int] = None  # consecutive entire steps on one carrier at constant tau
    record_steps: bool = False  # keep a record of every transformation applied


@dataclass
class Node:
    id: int
    ge: GeneralizedEquation
    depth: int
    tau: int
    parent: Optional[int] = None
    label: str = ""
    status: Optional[LeafStatus] = None
    children: list[int] = field(default_factory=list)


@dataclass
class SolutionTree:
    root: int
    nodes: dict[int, Node]
    solution: Optional[tuple[Word, ...]] = None  # root item values from the first solved leaf
    exhausted: bool = False
    n_nodes: int = 0
    steps: list[dict] = field(default_factory=list)

    def leaves(self) -> list[Node]:
        return [n for n in self.nodes.values() if n.status is not None]

    def max_depth(self) -> int:
        return max(n.depth for n in self.nodes.values())

    def max_tau(self) -> int:
        return max(n.tau for n in self.nodes.values())

    def to_dot(self) -> str:
        colors = {
            LeafStatus.SOLVED: "green",
            LeafStatus.INCONSISTENT: "red",
            LeafStatus.EXHAUSTED: "orange",
            LeafStatus.REPEAT: "gray",
        }
        lines = ["digraph tree {", "  node [shape=box, style=filled, fillcolor=white];"]
        for n in self.nodes.values():
            fill = colors.get(n.status, "white")
            lines.append(f'  n{n.id} [label="#{n.id} tau={n.tau} items={n.ge.rho}", fillcolor={fill}];')
            if n.parent is not None:
                lines.append(f'  n{n.parent} -> n{n.id} [label="{n.label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def leaf_values(ge: GeneralizedEquation) -> tuple[Word, ...]:
    """Values at a solved leaf: free items get the first letter, constants their own."""
    return tuple(Word((1,)) for _ in range(ge.rho)) + tuple(Word((c,)) for c in ge.constants)


class _Search:
    def __init__(self, budget: Budget, keep_nodes: bool = True, stop_at_solution: bool = True):
        self.budget = budget
        self.keep = keep_nodes
        self.stop = stop_at_solution
        self.nodes: dict[int, Node] = {}
        self.count = 0
        self.exhausted = False
        self.solution: Optional[tuple[Word, ...]] = None
        self.unsat: set = set()
        self.steps: list[dict] = []

    def run(self, ge: GeneralizedEquation) -> SolutionTree:
        self._visit(ge, 0, None, "", [], [], None, 0)
        return SolutionTree(0, self.nodes, self.solution, self.exhausted, self.count, self.steps)

    def _new(self, ge, depth, parent, label) -> Node:
        node = Node(self.count, ge, depth, complexity(ge), parent, label)
        self.count += 1
        if self.keep:
            self.nodes[node.id] = node
            if parent is not None and parent in self.nodes:
                self.nodes[parent].children.append(node.id)
        return node

    def _visit(self, ge, depth, parent, label, path_keys, path_tr, last, run) -> tuple[bool, int]:
        """Explore one node.

        Returns ``(found, reach)`` where ``reach`` is the smallest ancestor
        depth whose repeat closed a branch below (for safe caching).
        """
        node = self._new(ge, depth, parent, label)
        key = canonical_key(ge)
        inf = depth + 1
        if key in self.unsat:
            node.status = LeafStatus.INCONSISTENT
            return False, inf
        if detect_inconsistency(ge):
            node.status = LeafStatus.INCONSISTENT
            return False, inf
        if not ge.active_sections():
            node.status = LeafStatus.SOLVED
            values = leaf_values(ge)
            for tr in reversed(path_tr):
                values = tr.forward(values)
            if self.solution is None:
                self.solution = values
            return True, inf
        if key in path_keys:
            node.status = LeafStatus.REPEAT
            return False, path_keys.index(key)
        if depth >= self.budget.max_depth or self.count >= self.budget.max_nodes:
            node.status = LeafStatus.EXHAUSTED
            self.exhausted = True
            return False, inf
        try:
            res = tietze_cleaning(ge)
            progressed = any(res.params["traces"]) or len(res.children) != 1
            if progressed:
                step, nxt_last, nxt_run = res, None, 0
            else:
                cid = carrier(ge)
                step = entire_transformation_step(ge)
                tau = node.tau
                same = last is not None and last == (cid, tau)
                nxt_last, nxt_run = (cid, tau), (run + 1 if same else 1)
                cap = self.budget.max_period
                if cap is not None and nxt_run > cap + 2:
                    node.status = LeafStatus.EXHAUSTED
                    self.exhausted = True
                    return False, inf
        except Inconsistent:
            node.status = LeafStatus.INCONSISTENT
            return False, inf
        except TransformError:
            node.status = LeafStatus.EXHAUSTED
            self.exhausted = True
            return False, inf
        if step.params.get("exhausted"):
            self.exhausted = True
        if self.budget.record_steps:
            for inner in step.params.get("traces", []):
                self.steps.extend(inner)
            self.steps.append(step_record(step.label, {}, ge, [c for c, _ in step.children]))
        reach = inf
        keys = path_keys + [key]
        for child, tr in step.children:
            found, r = self._visit(child, depth + 1, node.id, step.label, keys, path_tr + [tr], nxt_last, nxt_run)
            reach = min(reach, r)
            if found and self.stop:
                return True, reach
        if reach >= depth and not self.exhausted:
            self.unsat.add(key)
        return False, reach


def build_solution_tree(ge: GeneralizedEquation, budget: Budget = Budget(), keep_nodes: bool = True) -> SolutionTree:
    return _Search(budget, keep_nodes).run(ge)


# --- verdicts ----------------------------------------------------------------


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass
class Verdict:
    status: Status
    witness: Optional[Assignment] = None
    stats: dict = field(default_factory=dict)


def _rounds(limit: int) -> list[int]:
    out, k = [], 40
    while k < limit:
        out.append(k)
        k *= 8
    return out + [limit]


def _run_job(args: tuple[GeneralizedEquation, Budget]):
    ge, budget = args
    tree = build_solution_tree(ge, budget, keep_nodes=False)
    return tree.solution, tree.exhausted, tree.n_nodes, tree.steps


def solve(system: EquationSystem, budget: Budget = Budget(), threads: int = 1) -> Verdict:
    """Decide solvability within the budget; SAT witnesses are always re-verified.

    Every (case split, layout) tree is searched with a growing node budget,
    so cheap branches of all splits are tried before any expensive one.
    With ``threads > 1`` the trees of one round run in worker processes;
    results are read back in job order, so the witness does not depend on
    the thread count.
    """
    tri, tmap = triangulate(system)
    if budget.max_period is None:
        budget = replace(budget, max_period=bulitko_bound(tri))
    stats = {"splits": 0, "equations": 0, "nodes": 0, "period_bound": budget.max_period}
    if budget.record_steps:
        stats["steps"] = []
    jobs = []
    for split in case_splits(tri):
        stats["splits"] += 1
        if not split.residual.equations:
            jobs.append((split, None))
        for lay in layouts(split.residual) if split.residual.equations else []:
            jobs.append((split, lay))
    stats["equations"] = sum(1 for _, lay in jobs if lay is not None)
    open_jobs = list(range(len(jobs)))
    pool = ProcessPoolExecutor(threads) if threads > 1 else None
    try:
        for limit in _rounds(budget.max_nodes):
            round_budget = replace(budget, max_nodes=limit)
            args = [(jobs[k][1].ge, round_budget) for k in open_jobs if jobs[k][1] is not None]
            results = iter(pool.map(_run_job, args, chunksize=8) if pool else map(_run_job, args))
            still_open = []
            for k in open_jobs:
                split, lay = jobs[k]
                if lay is None:
                    part: Assignment = {}
                else:
                    solution, exhausted, n, steps = next(results)
                    stats["nodes"] += n
                    if budget.record_steps:
                        stats["steps"] += steps
                    if solution is None:
                        if exhausted:
                            still_open.append(k)
                        continue
                    part = lay.assignment(solution)
                witness = _witness(system, tri, tmap, split, part)
                return Verdict(Status.SAT, witness, stats)
            open_jobs = still_open
            if not open_jobs:
                break
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    return Verdict(Status.UNKNOWN if open_jobs else Status.UNSAT, None, stats)


def _witness(system, tri, tmap, split: CaseSplit, part: Assignment) -> Assignment:
    assignment = {}
    for v in tri.alphabet.variable_codes():
        if v in split.trivial:
            assignment[v] = EMPTY
        else:
            assignment[v] = part.get(v, Word((1,)))
    if not evaluate(tri, assignment):
        raise AssertionError("reconstructed witness fails the triangulated system")
    witness = tmap.project(assignment)
    if not evaluate(system, witness):
        raise AssertionError("reconstructed witness fails the input system")
    return witness
