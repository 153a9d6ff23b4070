"""Word algebra in a free group.

Letters are nonzero integers: ``k`` is the k-th symbol of an :class:`Alphabet`
(1-based) and ``-k`` its inverse.  Constants occupy codes ``1..m`` and
variables follow them, so a word over constants only is a word over
``{±1, ..., ±m}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence


class Letter(NamedTuple):
    symbol: int  # 0-based index into the alphabet
    sign: int

    @property
    def code(self) -> int:
        return (self.symbol + 1) * self.sign

    @classmethod
    def from_code(cls, code: int) -> "Letter":
        return cls(abs(code) - 1, 1 if code > 0 else -1)


@dataclass(frozen=True)
class Alphabet:
    constants: tuple[str, ...]
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "constants", tuple(self.constants))
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.constants:
            raise ValueError("alphabet needs at least one constant")
        names = self.constants + self.variables
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol in {names}")

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.constants + self.variables

    @property
    def n_constants(self) -> int:
        return len(self.constants)

    def code(self, name: str) -> int:
        try:
            return self.symbols.index(name) + 1
        except ValueError:
            raise KeyError(f"undeclared symbol {name!r}") from None

    def name(self, code: int) -> str:
        return self.symbols[abs(code) - 1]

    def is_constant(self, code: int) -> bool:
        return abs(code) <= len(self.constants)

    def variable_codes(self) -> range:
        m = len(self.constants)
        return range(m + 1, m + 1 + len(self.variables))

    def with_variables(self, extra: Sequence[str]) -> "Alphabet":
        return Alphabet(self.constants, self.variables + tuple(extra))


class Word(tuple):
    """An immutable freely reduced word.

    The constructor reduces its input, so every ``Word`` satisfies the
    no-``s s^-1`` invariant.  The empty word is the identity.
    """

    __slots__ = ()

    def __new__(cls, letters: Iterable[int] = ()):
        stack: list[int] = []
        for x in letters:
            if x == 0:
                raise ValueError("0 is not a letter")
            if stack and stack[-1] == -x:
                stack.pop()
            else:
                stack.append(x)
        return tuple.__new__(cls, stack)

    @classmethod
    def _trusted(cls, letters: Iterable[int]) -> "Word":
        return tuple.__new__(cls, letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word._trusted(tuple.__getitem__(self, item))
        return tuple.__getitem__(self, item)

    def __mul__(self, other):
        if not isinstance(other, tuple):
            return NotImplemented
        return concat_reduced(self, Word(other))[0]

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0 or not self:
            return Word()
        core, conj = cyclic_reduce(self)
        body = tuple(core) * n
        return Word._trusted(tuple(conj) + body + tuple(conj.inverse()))

    def inverse(self) -> "Word":
        return Word._trusted(-x for x in reversed(self))

    def __repr__(self) -> str:
        return f"Word({list(self)})"


EMPTY = Word()


def free_reduce(raw: Iterable[int]) -> Word:
    return Word(raw)


def concat_reduced(u: Word, v: Word) -> tuple[Word, int]:
    """Product ``u*v`` and the number of cancelled letter pairs.

    A cancelled length of zero means the product is written without
    cancellation.
    """
    k = 0
    n = min(len(u), len(v))
    while k < n and u[len(u) - 1 - k] == -v[k]:
        k += 1
    return Word._trusted(tuple.__getitem__(u, slice(0, len(u) - k)) + tuple.__getitem__(v, slice(k, None))), k


def is_reduced(letters: Sequence[int]) -> bool:
    return all(letters[i] != -letters[i + 1] for i in range(len(letters) - 1))


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return len(w) < 2 or w[0] != -w[-1]


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return ``(core, conjugator)`` with ``w = conjugator * core * conjugator^-1``."""
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[i : j + 1], w[:i]


def primitive_root(w: Word) -> tuple[Word, int]:
    """Return ``(root, k)`` with ``w = root^k`` and ``root`` not a proper power."""
    if not w:
        raise ValueError("primitive_root of the empty word")
    if not is_cyclically_reduced(w):
        raise ValueError("primitive_root needs a cyclically reduced word")
    n = len(w)
    # smallest period dividing n, via the prefix function
    fail = [0] * n
    k = 0
    for i in range(1, n):
        while k and w[i] != w[k]:
            k = fail[k - 1]
        if w[i] == w[k]:
            k += 1
        fail[i] = k
    p = n - fail[-1]
    if n % p:
        p = n
    return w[:p], n // p


def is_primitive(w: Word) -> bool:
    return bool(w) and is_cyclically_reduced(w) and primitive_root(w)[1] == 1


def exponent_of_periodicity(words: Iterable[Sequence[int]]) -> int:
    """Largest ``t`` such that some word contains ``u^t`` with ``u`` primitive.

    A run of period ``p`` starting at ``i`` covers ``p + l`` letters where
    ``l`` counts consecutive positions with ``w[j] == w[j+p]``.  Any square
    inside a reduced word has a cyclically reduced root, and a non-primitive
    root only lowers the count, so scanning all ``(i, p)`` is exact.
    """
    best = 0
    for w in words:
        n = len(w)
        if n:
            best = max(best, 1)
        for p in range(1, n // 2 + 1):
            run = 0  # length of the current stretch with w[j] == w[j+p]
            for j in range(n - p):
                if w[j] == w[j + p]:
                    run += 1
                    best = max(best, (run + p) // p)
                else:
                    run = 0
    return best


def p_decomposition(w: Word, period: Word) -> list[Word]:
    """Split ``w`` around its maximal stable ``period``-occurrences.

    Returns the alternating list ``[v0, P^(e1 r1), v1, ..., P^(em rm), vm]``.
    A series of ``k`` consecutive copies of ``P^e`` contributes the stable
    core ``P^(e(k-2))`` when ``k >= 3``; the outer copies are its flanks.
    """
    if not period:
        raise ValueError("period must be nonempty")
    if not is_primitive(period):
        raise ValueError("period must be primitive and cyclically reduced")
    occurrences: list[tuple[int, int]] = []  # (start, end) of stable cores
    n, p = len(w), len(period)
    for piece in (tuple(period), tuple(period.inverse())):
        hits = [w[i : i + p] == piece for i in range(n - p + 1)]
        for i in range(n - p + 1):
            if not hits[i] or (i >= p and hits[i - p]):
                continue
            k = 1
            while i + k * p <= n - p and hits[i + k * p]:
                k += 1
            if k >= 3:
                occurrences.append((i + p, i + (k - 1) * p))
    occurrences.sort()
    out: list[Word] = []
    pos = 0
    for start, end in occurrences:
        out.append(w[pos:start])
        out.append(w[start:end])
        pos = end
    out.append(w[pos:])
    return out


# --- text syntax -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<sym>[A-Za-z](?:_?\d+)?)|(?P<op>[()\[\],^'])|(?P<num>-?\d+))")


class WordSyntaxError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise WordSyntaxError(f"unexpected {text[pos]!r}", pos + 1)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return out


def _sym_ok(name: str, alphabet: Alphabet | None) -> bool:
    return alphabet is None or name in alphabet.symbols


def parse_word(text: str, alphabet: Alphabet) -> Word:
    """Parse words like ``a b A' a^-1``, ``[X,Y] (ab)^2`` or ``1``.

    Lowercase symbols are constants and uppercase symbols are variables by
    convention; here every symbol must simply be declared in ``alphabet``.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None, len(text) + 1)

    def take(kind=None, value=None):
        nonlocal pos
        tok = peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind or "token"
            got = tok[1] if tok[0] else "end of input"
            raise WordSyntaxError(f"expected {want}, got {got!r}", tok[2])
        pos += 1
        return tok

    def product(stop: set[str]) -> list[int]:
        letters: list[int] = []
        while True:
            tok = peek()
            if tok[0] is None or (tok[0] == "op" and tok[1] in stop):
                return letters
            letters.extend(factor())

    def factor() -> list[int]:
        kind, val, col = take()
        if kind == "sym":
            if not _sym_ok(val, alphabet):
                raise WordSyntaxError(f"undeclared symbol {val!r}", col)
            base = [alphabet.code(val)]
        elif kind == "num" and val == "1":
            base = []
        elif kind == "op" and val == "(":
            base = product({")"})
            take("op", ")")
        elif kind == "op" and val == "[":
            u = Word(product({","}))
            take("op", ",")
            v = Word(product({"]"}))
            take("op", "]")
            base = list(u) + list(v) + list(u.inverse()) + list(v.inverse())
        else:
            raise WordSyntaxError(f"unexpected {val!r}", col)
        while True:
            tok = peek()
            if tok[0] == "op" and tok[1] == "'":
                take()
                base = [-x for x in reversed(base)]
            elif tok[0] == "op" and tok[1] == "^":
                take()
                k = int(take("num")[1])
                unit = base if k >= 0 else [-x for x in reversed(base)]
                base = unit * abs(k)
            else:
                return base

    letters = product(set())
    if pos != len(tokens):
        tok = peek()
        raise WordSyntaxError(f"unexpected {tok[1]!r}", tok[2])
    return Word(letters)


def format_word(w: Sequence[int], alphabet: Alphabet | None = None) -> str:
    """Render a word, collapsing runs into powers (``a^3 b^-1``)."""
    if not w:
        return "1"
    parts = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        code = w[i]
        name = alphabet.name(code) if alphabet else f"g{abs(code)}"
        k = (j - i) * (1 if code > 0 else -1)
        parts.append(name if k == 1 else f"{name}^{k}")
        i = j
    return " ".join(parts)
