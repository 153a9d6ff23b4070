"""Replaying a known solution along the transformation process, and measuring it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geq import GeneralizedEquation, active_length, complexity, full_values, gamma
from .transforms import TransformError, entire_transformation_step, tietze_cleaning
from .words import Word, exponent_of_periodicity


class TraceMismatch(ValueError):
    """The carried solution is not accepted by any child."""


@dataclass
class Step:
    ge: GeneralizedEquation
    values: tuple[Word, ...]
    op: str  # "cleaning" or "entire"
    tau: int
    interval: int  # active length under the carried solution
    carrier: Optional[int] = None
    transfers: tuple[int, ...] = ()
    carrier_len: int = 0


@dataclass
class Trace:
    steps: list[Step]
    final: GeneralizedEquation
    final_values: tuple[Word, ...]
    ended: bool  # no active sections left


def _transfers(ge: GeneralizedEquation, cid: int) -> tuple[int, ...]:
    mu = ge.base(cid)
    return tuple(sorted(nu.id for nu in ge.bases
                        if nu.id not in (cid, mu.dual) and nu.lo >= mu.lo and nu.hi <= mu.hi))


def _base_len(ge: GeneralizedEquation, values: Sequence[Word], bid: int) -> int:
    b = ge.base(bid)
    full = full_values(ge, values)
    return sum(len(full[i - 1]) for i in range(b.lo, b.hi))


def follow_witness(ge: GeneralizedEquation, values: Sequence[Word], max_entire: int = 200) -> Trace:
    """Alternate cleaning and entire steps, always keeping the given solution."""
    steps: list[Step] = []
    vals = tuple(values)
    n_entire = 0
    while True:
        res = tietze_cleaning(ge)
        pick = res.witness_split(vals)
        if pick is None:
            raise TraceMismatch("no cleaning child accepts the solution")
        steps.append(Step(ge, vals, "cleaning", complexity(ge), active_length(ge, vals)))
        ge, vals = res.children[pick[0]][0], pick[1]
        if not ge.active_sections():
            return Trace(steps, ge, vals, True)
        if n_entire >= max_entire:
            return Trace(steps, ge, vals, False)
        try:
            res = entire_transformation_step(ge)
        except TransformError:
            return Trace(steps, ge, vals, False)
        cid = res.params["carrier"]
        step = Step(ge, vals, "entire", complexity(ge), active_length(ge, vals), cid,
                    _transfers(ge, cid), _base_len(ge, vals, cid))
        pick = res.witness_split(vals)
        if pick is None:
            raise TraceMismatch("no entire-step child accepts the solution")
        steps.append(step)
        n_entire += 1
        ge, vals = res.children[pick[0]][0], pick[1]


# --- analysis --------------------------------------------------------------------


@dataclass
class ReducingPath:
    start: int  # index into the entire steps of the run
    end: int  # index of the entire step whose input closes the path (or len for the final state)
    base: int
    case: int  # 1: next carrier clear of its dual, 2: it overlaps
    drop: int
    carrier_len: int

    @property
    def holds(self) -> bool:
        return 10 * self.drop >= self.carrier_len


@dataclass
class RunReport:
    steps: list[int]  # indices into Trace.steps
    tau: int
    psi: list[int]
    psi_constant: bool
    kind: int  # 1 ends, 2 quadratic, 3 overlapping pair, 0 undecided
    overlap_power: int = 0
    paths: list[ReducingPath] = field(default_factory=list)


@dataclass
class TraceReport:
    runs: list[RunReport]

    @property
    def paths(self) -> list[ReducingPath]:
        return [p for r in self.runs for p in r.paths]


def _overlaps(ge: GeneralizedEquation, bid: int) -> bool:
    b = ge.base(bid)
    d = ge.base(b.dual)
    return max(b.lo, d.lo) < min(b.hi, d.hi)


def _psi(step: Step, participating: set[int]) -> int:
    ge = step.ge
    full = full_values(ge, step.values)
    sec = ge.active_sections()[0]
    others = [b.lo for b in ge.bases if b.id not in participating and sec.start <= b.lo < sec.end]
    marker = min(others + [sec.end])
    total = sum(_base_len(ge, step.values, b) for b in participating if b in ge.base_map())
    return total - 2 * sum(len(full[i - 1]) for i in range(sec.start, marker))


def _leading_power(step: Step) -> int:
    """Power of the offset word at the start of an overlapping leading base."""
    ge = step.ge
    mu = ge.base(step.carrier)
    d = ge.base(mu.dual)
    full = full_values(ge, step.values)
    lo, hi = sorted((mu.lo, d.lo))
    offset = Word(x for i in range(lo, hi) for x in full[i - 1])
    value = Word(x for i in range(mu.lo, mu.hi) for x in full[i - 1])
    if not offset or not value:
        return 0
    n = 0
    while len(offset) * (n + 1) <= len(value) and tuple(value[: len(offset) * (n + 1)]) == tuple(offset ** (n + 1)):
        n += 1
    return n


def analyze_trace(trace: Trace, period_bound: int | None = None) -> TraceReport:
    """Reducing paths, excess and run classification for one trace.

    A run is a maximal stretch of entire steps separated only by cleaning.
    Excess is computed on each stretch of constant complexity inside a
    run; the bases counted are the carriers and transfer bases there,
    together with their duals.
    ``period_bound`` is the exponent of periodicity used for the second
    kind of reducing path; by default it is read off the solution at the
    start of each run.
    """
    entire = [i for i, s in enumerate(trace.steps) if s.op == "entire"]
    runs: list[list[int]] = []
    for i in entire:
        if runs and _adjacent(trace, runs[-1][-1], i):
            runs[-1].append(i)
        else:
            runs.append([i])
    reports = []
    for k, run in enumerate(runs):
        steps = [trace.steps[i] for i in run]
        after = _after(trace, run[-1])
        lengths = [s.interval for s in steps] + [after]
        m = period_bound
        if m is None:
            m = exponent_of_periodicity(steps[0].values)
        paths = []
        for a in range(len(steps)):
            mu = steps[a].carrier
            if a + 1 >= len(steps):
                break
            overlap = _overlaps(steps[a + 1].ge, steps[a + 1].carrier)
            need = m + 2 if overlap else 2
            seen = 0
            for b in range(a, len(steps)):
                if steps[b].carrier == mu:
                    seen += 1
                    if seen == need:
                        paths.append(ReducingPath(a, b + 1, mu, 2 if overlap else 1,
                                                  lengths[a] - lengths[b + 1], steps[a].carrier_len))
                        break
        psi = []
        psi_constant = True
        for seg in _segments(steps):
            participating = set()
            for s in seg:
                for b in (s.carrier, *s.transfers):
                    participating.update((b, s.ge.base(b).dual))
            vals = [_psi(s, participating) for s in seg]
            psi += vals
            psi_constant &= len(set(vals)) == 1
        last = k == len(runs) - 1
        g_all_two = any(all(g == 2 for i, g in gamma(s.ge).items() if s.ge.item_active()[i]) for s in steps)
        if g_all_two:
            kind = 2
        elif not last or trace.ended:
            kind = 1
        else:
            kind = 3 if any(_overlaps(s.ge, s.carrier) for s in steps) else 0
        power = 0
        if kind == 3:
            power = max(_leading_power(s) for s in steps if _overlaps(s.ge, s.carrier))
        reports.append(RunReport(run, steps[0].tau, psi, psi_constant, kind, power, paths))
    return TraceReport(reports)


def _segments(steps: list[Step]) -> list[list[Step]]:
    out: list[list[Step]] = []
    for s in steps:
        if out and out[-1][-1].tau == s.tau:
            out[-1].append(s)
        else:
            out.append([s])
    return out


def _adjacent(trace: Trace, i: int, j: int) -> bool:
    """True if only cleaning steps separate steps ``i`` and ``j``."""
    return all(trace.steps[t].op == "cleaning" for t in range(i + 1, j))


def _after(trace: Trace, i: int) -> int:
    if i + 1 < len(trace.steps):
        return trace.steps[i + 1].interval
    return active_length(trace.final, trace.final_values)
