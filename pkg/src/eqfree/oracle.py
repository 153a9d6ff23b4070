"""Brute-force ground truth: word enumeration and exhaustive solvers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .eqsys import Assignment, EquationSystem, evaluate
from .geq import GeneralizedEquation, check_solution
from .words import Word

MAX_CANDIDATES = 10**7


class SpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    n_letters: int  # words use codes ±1..±n_letters
    max_length: int
    allow_empty: bool = True

    def __post_init__(self):
        if self.max_length < 0:
            raise ValueError("max_length must be nonnegative")


def count_words(n_letters: int, max_length: int, allow_empty: bool = True) -> int:
    total = 1 if allow_empty else 0
    for k in range(1, max_length + 1):
        total += 2 * n_letters * (2 * n_letters - 1) ** (k - 1)
    return total


def enumerate_words(space: SearchSpace) -> Iterator[Word]:
    """All reduced words of length <= L in length-lex order (a < a^-1 < b < ...)."""
    letters = [c for k in range(1, space.n_letters + 1) for c in (k, -k)]
    if space.allow_empty:
        yield Word()
    level: list[tuple[int, ...]] = [()]
    for _ in range(space.max_length):
        nxt = []
        for w in level:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        for w in nxt:
            yield Word._trusted(w)
        level = nxt


def _assignments(system: EquationSystem, max_length: int, variables: list[int] | None):
    """Backtracking over variables; an equation is checked once all its variables are set."""
    if variables is None:
        variables = system.occurring_variables()
    space = SearchSpace(system.alphabet.n_constants, max_length)
    size = count_words(space.n_letters, max_length) ** len(variables)
    if size > MAX_CANDIDATES:
        raise SpaceTooLarge(f"{size} candidate tuples exceed {MAX_CANDIDATES}")
    words = list(enumerate_words(space))
    assignment = {v: Word() for v in system.variables}
    position = {v: k for k, v in enumerate(variables)}
    stages: list[list] = [[] for _ in range(len(variables) + 1)]
    for eq in system.equations:
        last = max((position[abs(c)] + 1 for c in eq.lhs if abs(c) in position), default=0)
        stages[last].append(EquationSystem(system.alphabet, (eq,)))
    if not all(evaluate(s, assignment) for s in stages[0]):
        return

    def rec(k: int):
        if k == len(variables):
            yield dict(assignment)
            return
        v = variables[k]
        for w in words:
            assignment[v] = w
            if all(evaluate(s, assignment) for s in stages[k + 1]):
                yield from rec(k + 1)
        assignment[v] = Word()

    yield from rec(0)


def solve_exhaustive(system: EquationSystem, max_length: int, variables: list[int] | None = None) -> list[Assignment]:
    """Every assignment of words of length <= L to the occurring variables."""
    return list(_assignments(system, max_length, variables))


def has_solution(system: EquationSystem, max_length: int) -> bool:
    return next(_assignments(system, max_length, None), None) is not None


def ge_solve_exhaustive(
    ge: GeneralizedEquation,
    max_length: int,
    n_letters: int | None = None,
    first_only: bool = False,
    max_candidates: float = MAX_CANDIDATES * 1000,
    as_written: bool = True,
    accept: Callable[[tuple[Word, ...]], bool] | None = None,
    extra: Sequence[tuple[Iterable[int], Callable[[list[Word]], bool]]] = (),
) -> list[tuple[Word, ...]]:
    """All solutions with nonempty item values of length <= L.

    Plain product enumeration with every candidate re-checked by
    ``check_solution``.  Items are assigned so that small equations are
    complete early, and a partial tuple is abandoned once some equation
    among assigned items fails.
    ``as_written=False`` drops the reducedness of products under bases.
    ``accept`` filters complete solutions; ``extra`` holds further
    ``(items, check)`` pairs, each run on the full value list as soon as
    its items are assigned.  With ``first_only`` and no filters, an item under no base is fixed to the first word; such items
    appear in no equation, so no solution is lost.
    """
    if n_letters is None:
        n_letters = max([abs(c) for c in ge.constants], default=1)
    words = list(enumerate_words(SearchSpace(n_letters, max_length, allow_empty=False)))
    if float(len(words)) ** ge.rho > max_candidates:
        raise SpaceTooLarge(f"{len(words)}^{ge.rho} candidate tuples")
    consts = [Word((c,)) for c in ge.constants]
    order, checks = _staged_checks(ge, as_written, extra)
    covered = {i for b in ge.bases for i in range(b.lo, b.hi)}
    out: list[tuple[Word, ...]] = []
    values: list[Word] = [Word()] * ge.rho

    def rec(k: int) -> bool:
        if k == ge.rho:
            sol = tuple(values)
            if check_solution(ge, sol, as_written) and (accept is None or accept(sol)):
                out.append(sol)
                return first_only
            return False
        i = order[k]
        for w in words if not first_only or accept or extra or i in covered else words[:1]:
            values[i - 1] = w
            if all(chk(values + consts) for chk in checks[k]):
                if rec(k + 1):
                    return True
        values[i - 1] = Word()
        return False

    rec(0)
    return out


def _staged_checks(ge: GeneralizedEquation, as_written: bool = True, extra=()):
    """Item order and, per position in it, the checks that become decidable.

    Equations are taken by increasing number of still unassigned items;
    ``extra`` checks are only staged, they do not influence the order.
    """
    from .geq import base_value, _written_reduced

    bm = ge.base_map()
    found: list[tuple[set[int], object]] = []

    def items(*spans: tuple[int, int]) -> set[int]:
        return {i for lo, hi in spans for i in range(lo, hi) if i <= ge.rho}

    for b in ge.bases if as_written else ():
        found.append((items((b.lo, b.hi)), lambda v, b=b: _written_reduced(v, b.lo, b.hi)))
    for b, d in ge.pairs():
        found.append((items((b.lo, b.hi), (d.lo, d.hi)),
                      lambda v, b=b, d=d: base_value(ge, b, v) == base_value(ge, d, v)))
    for p, lam, q in ge.connections:
        b = bm[lam]
        d = bm[b.dual]
        spans = (min(b.alpha, p), max(b.alpha, p)), (min(d.alpha, q), max(d.alpha, q))
        found.append((items(*spans),
                      lambda v, b=b, d=d, p=p, q=q: base_value(ge, b, v, p) == base_value(ge, d, v, q)))
    order: list[int] = []
    todo = [s for s, _ in found]
    while todo:
        todo.sort(key=lambda s: (len(s - set(order)), min(s, default=0)))
        order += sorted(todo.pop(0) - set(order))
    order += [i for i in range(1, ge.rho + 1) if i not in order]
    found += [(set(items_), chk) for items_, chk in extra]
    at = {i: k for k, i in enumerate(order)}
    stages: list[list] = [[] for _ in range(max(ge.rho, 1))]
    for s, chk in found:
        stages[max((at[i] for i in s), default=0)].append(chk)
    return order, stages
