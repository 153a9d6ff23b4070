"""Systems of equations ``S(X, A) = 1`` over a free group."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .words import EMPTY, Alphabet, Word, WordSyntaxError, format_word, parse_word

Assignment = dict[int, Word]  # variable code -> constant word


@dataclass(frozen=True)
class Equation:
    lhs: Word  # the equation reads lhs = 1

    def __len__(self) -> int:
        return len(self.lhs)


@dataclass(frozen=True)
class EquationSystem:
    alphabet: Alphabet
    equations: tuple[Equation, ...]

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(self.equations))
        top = len(self.alphabet.symbols)
        for eq in self.equations:
            for x in eq.lhs:
                if abs(x) > top:
                    raise ValueError(f"undeclared letter code {x}")

    @property
    def variables(self) -> list[int]:
        return list(self.alphabet.variable_codes())

    def occurring_variables(self) -> list[int]:
        seen = {abs(x) for eq in self.equations for x in eq.lhs if not self.alphabet.is_constant(x)}
        return sorted(seen)

    def format(self) -> str:
        return "\n".join(format_word(eq.lhs, self.alphabet) + " = 1" for eq in self.equations)


def substitute(word: Iterable[int], assignment: Mapping[int, Word], alphabet: Alphabet) -> Word:
    out: list[int] = []
    for x in word:
        if alphabet.is_constant(x):
            out.append(x)
            continue
        try:
            value = assignment[abs(x)]
        except KeyError:
            raise KeyError(f"no value for variable {alphabet.name(x)}") from None
        out.extend(value if x > 0 else value.inverse())
    return Word(out)


def evaluate(system: EquationSystem, assignment: Mapping[int, Word]) -> bool:
    """True iff every left-hand side reduces to the identity under ``assignment``."""
    return all(not substitute(eq.lhs, assignment, system.alphabet) for eq in system.equations)


# --- triangulation -----------------------------------------------------------


@dataclass(frozen=True)
class TriangulationMap:
    """Relates assignments of a triangulated system to the original one.

    ``definitions[t]`` is the word (in the original letters and earlier fresh
    variables) that fresh variable ``t`` abbreviates.
    """

    original: Alphabet
    triangulated: Alphabet
    definitions: tuple[tuple[int, Word], ...]

    def project(self, assignment: Mapping[int, Word]) -> Assignment:
        return {v: assignment[v] for v in self.original.variable_codes()}

    def lift(self, assignment: Mapping[int, Word]) -> Assignment:
        out = dict(assignment)
        for t, definition in self.definitions:
            out[t] = substitute(definition, out, self.triangulated)
        return out


def triangulate(system: EquationSystem, prefix: str = "T") -> tuple[EquationSystem, TriangulationMap]:
    """Rewrite every equation into pieces of length at most 3.

    Splits from the left: ``l1 l2 l3 ... lk = 1`` becomes ``l1 l2 t^-1 = 1``
    and ``t l3 ... lk = 1`` with a fresh ``t``, repeated until length 3.
    """
    alphabet = system.alphabet
    n_fresh = sum(max(0, len(eq) - 3) for eq in system.equations)
    names = []
    i = 1
    while len(names) < n_fresh:
        name = f"{prefix}{i}"
        if name not in alphabet.symbols:
            names.append(name)
        i += 1
    tri_alphabet = alphabet.with_variables(names)
    next_code = iter(range(len(alphabet.symbols) + 1, len(tri_alphabet.symbols) + 1))
    equations: list[Equation] = []
    definitions: list[tuple[int, Word]] = []
    for eq in system.equations:
        rest = list(eq.lhs)
        while len(rest) > 3:
            t = next(next_code)
            head = Word(rest[:2])
            definitions.append((t, head))
            equations.append(Equation(Word._trusted((rest[0], rest[1], -t))))
            rest = [t] + rest[2:]
        equations.append(Equation(Word._trusted(rest)))
    tri = EquationSystem(tri_alphabet, tuple(equations))
    return tri, TriangulationMap(alphabet, tri_alphabet, tuple(definitions))


# --- quadratic equations -----------------------------------------------------


def is_quadratic(system: EquationSystem) -> bool:
    counts: dict[int, int] = {}
    for eq in system.equations:
        for x in eq.lhs:
            if not system.alphabet.is_constant(x):
                counts[abs(x)] = counts.get(abs(x), 0) + 1
    return all(counts.get(v, 0) == 2 for v in system.occurring_variables()) and bool(counts)


class QuadraticKind(enum.Enum):
    ORIENTABLE = "orientable-coefficientless"
    ORIENTABLE_COEFF = "orientable-with-coefficients"
    NONORIENTABLE = "nonorientable-coefficientless"
    NONORIENTABLE_COEFF = "nonorientable-with-coefficients"


@dataclass(frozen=True)
class QuadraticForm:
    kind: QuadraticKind
    genus: int
    coefficients: int

    def __post_init__(self):
        n, m = self.genus, self.coefficients
        if self.kind in (QuadraticKind.ORIENTABLE, QuadraticKind.NONORIENTABLE):
            ok = n > 0 and m == 0
        else:
            ok = n >= 0 and m >= 0 and n + m >= 1
        if not ok:
            raise ValueError(f"invalid standard form parameters {self}")


def classify_standard_quadratic(eq: Equation, alphabet: Alphabet) -> QuadraticForm | None:
    """Recognise the four standard quadratic shapes; ``None`` if nonstandard.

    Shapes (``[x,y] = x y x^-1 y^-1``)::

        [x1,y1]...[xn,yn]                       n > 0
        [x1,y1]...[xn,yn] z1^-1 c1 z1 ... d     n + m >= 1
        x1^2 ... xn^2                           n > 0
        x1^2 ... xn^2 z1^-1 c1 z1 ... d         n + m >= 1

    Coefficients ``ci`` and ``d`` must be nontrivial constant words.  With
    ``n = 0`` the two coefficient shapes coincide; that case is reported
    as orientable.
    """
    w = list(eq.lhs)
    const = alphabet.is_constant
    used: set[int] = set()
    pos = 0

    def fresh(x: int) -> bool:
        return not const(x) and abs(x) not in used

    commutators = squares = 0
    # product of commutators x y X Y
    while pos + 4 <= len(w):
        x, y, xi, yi = w[pos : pos + 4]
        if x > 0 and y > 0 and x != y and fresh(x) and fresh(y) and xi == -x and yi == -y:
            used.update((x, y))
            commutators += 1
            pos += 4
        else:
            break
    if not commutators:
        while pos + 2 <= len(w):
            x, x2 = w[pos : pos + 2]
            if x > 0 and x == x2 and fresh(x):
                used.add(x)
                squares += 1
                pos += 2
            else:
                break
    n = commutators or squares
    # conjugated coefficients z^-1 c z
    m = 0
    while pos < len(w) and w[pos] < 0 and fresh(w[pos]):
        z = -w[pos]
        j = pos + 1
        while j < len(w) and const(w[j]):
            j += 1
        if j == pos + 1 or j >= len(w) or w[j] != z:
            return None
        used.add(z)
        m += 1
        pos = j + 1
    tail = w[pos:]
    if not all(const(x) for x in tail):
        return None
    if not tail:
        if m:
            return None
        if n == 0:
            return None
        kind = QuadraticKind.ORIENTABLE if commutators else QuadraticKind.NONORIENTABLE
        return QuadraticForm(kind, n, 0)
    if n + m < 1:
        return None
    kind = QuadraticKind.NONORIENTABLE_COEFF if squares else QuadraticKind.ORIENTABLE_COEFF
    return QuadraticForm(kind, n, m)


def standard_quadratic_word(form: QuadraticForm, alphabet: Alphabet, coefficients: list[Word], d: Word) -> Word:
    """Build the standard word for ``form`` using the alphabet's variables in order."""
    vars_ = list(alphabet.variable_codes())
    out: list[int] = []
    it = iter(vars_)
    if form.kind in (QuadraticKind.ORIENTABLE, QuadraticKind.ORIENTABLE_COEFF):
        for _ in range(form.genus):
            x, y = next(it), next(it)
            out += [x, y, -x, -y]
    else:
        for _ in range(form.genus):
            x = next(it)
            out += [x, x]
    if form.kind in (QuadraticKind.ORIENTABLE_COEFF, QuadraticKind.NONORIENTABLE_COEFF):
        for c in coefficients[: form.coefficients]:
            z = next(it)
            out += [-z, *c, z]
        out += list(d)
    return Word(out)


# --- file format -------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


def parse_equation(text: str, alphabet: Alphabet) -> Equation:
    """``u = v`` becomes ``u v^-1``; a bare word ``u`` or ``u = 1`` means ``u = 1``."""
    if text.count("=") > 1:
        raise WordSyntaxError("more than one '='", text.index("=", text.index("=") + 1) + 1)
    if "=" in text:
        left, right = text.split("=")
        offset = len(left) + 1
        u = parse_word(left, alphabet)
        try:
            v = parse_word(right, alphabet)
        except WordSyntaxError as exc:
            raise WordSyntaxError(str(exc).split(": ", 1)[1], exc.column + offset) from None
        return Equation(u * v.inverse())
    return Equation(parse_word(text, alphabet))


def parse_system(text: str) -> EquationSystem:
    """Parse the equation file format.

    Header lines ``consts: a b`` and ``vars: X Y`` declare the alphabet;
    ``#`` starts a comment; every other nonblank line is one equation.
    Without a header, lowercase symbols are constants and uppercase ones
    variables, in order of first appearance.
    """
    consts: list[str] | None = None
    vars_: list[str] | None = None
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        if _ and key.strip() in ("consts", "constants"):
            consts = rest.split()
        elif _ and key.strip() in ("vars", "variables"):
            vars_ = rest.split()
        else:
            body.append((lineno, line))
    if consts is None or vars_ is None:
        import re

        found = [s for _, line in body for s in re.findall(r"[A-Za-z](?:_?\d+)?", line)]
        if consts is None:
            consts = list(dict.fromkeys(s for s in found if s[0].islower()))
        if vars_ is None:
            vars_ = list(dict.fromkeys(s for s in found if s[0].isupper()))
    if not consts:
        raise ParseError("no constants declared", 1)
    try:
        alphabet = Alphabet(tuple(consts), tuple(vars_))
    except ValueError as exc:
        raise ParseError(str(exc), 1) from None
    equations = []
    for lineno, line in body:
        try:
            equations.append(parse_equation(line, alphabet))
        except WordSyntaxError as exc:
            raise ParseError(str(exc).split(": ", 1)[1], lineno, exc.column) from None
    return EquationSystem(alphabet, tuple(equations))


def format_assignment(assignment: Mapping[int, Word], alphabet: Alphabet) -> dict[str, str]:
    return {alphabet.name(v): format_word(assignment.get(v, EMPTY), alphabet) for v in alphabet.variable_codes()}
