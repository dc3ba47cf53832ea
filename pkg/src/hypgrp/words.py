"""Free-group words over a named, ordered alphabet.

Letters are encoded as nonzero ints: generator ``i`` (0-based) is ``i + 1``
and its inverse is ``-(i + 1)``.  A :class:`Word` is always freely reduced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


class AlphabetMismatch(ValueError):
    pass


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    names: tuple[str, ...]

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if not names:
            raise ValueError("alphabet must be nonempty")
        for n in names:
            if not _NAME_RE.match(n):
                raise ValueError(f"invalid generator name {n!r}")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ParseError(f"unknown generator {name!r}") from None

    def letter(self, name: str, sign: int = 1) -> int:
        return sign * (self.index(name) + 1)

    def extend(self, *names: str) -> "Alphabet":
        return Alphabet(self.names + tuple(names))

    @property
    def single_char(self) -> bool:
        return all(len(n) == 1 for n in self.names)

    def letter_name(self, x: int) -> str:
        name = self.names[abs(x) - 1]
        return name if x > 0 else name.upper()

    def gen(self, name: str) -> "Word":
        return Word.from_reduced(self, (self.letter(name),))

    def gens(self) -> list["Word"]:
        return [Word.from_reduced(self, (i + 1,)) for i in range(len(self))]


def reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert_letters(letters: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(letters))


def concat_letters(u: Sequence[int], v: Sequence[int]) -> tuple[int, ...]:
    # both inputs reduced: only the seam can cancel
    k = 0
    n = min(len(u), len(v))
    while k < n and u[len(u) - 1 - k] == -v[k]:
        k += 1
    return tuple(u[: len(u) - k]) + tuple(v[k:])


def shortlex_key(letters: Sequence[int]) -> tuple:
    """Generators in alphabet order, each generator before its inverse."""
    return (len(letters), tuple(2 * (abs(x) - 1) + (x < 0) for x in letters))


class Word:
    """Freely reduced word; immutable and hashable."""

    __slots__ = ("alphabet", "letters", "_hash")

    def __init__(self, alphabet: Alphabet, letters: Iterable[int] = ()):
        n = len(alphabet)
        letters = tuple(letters)
        for x in letters:
            if x == 0 or abs(x) > n:
                raise ValueError(f"letter {x} outside alphabet of size {n}")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "letters", reduce_letters(letters))
        object.__setattr__(self, "_hash", None)

    @classmethod
    def from_reduced(cls, alphabet: Alphabet, letters: tuple[int, ...]) -> "Word":
        w = object.__new__(cls)
        object.__setattr__(w, "alphabet", alphabet)
        object.__setattr__(w, "letters", letters)
        object.__setattr__(w, "_hash", None)
        return w

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Word":
        return cls.from_reduced(alphabet, ())

    def __setattr__(self, key, value):
        raise AttributeError("Word is immutable")

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            # a contiguous piece of a reduced word is reduced
            return Word.from_reduced(self.alphabet, self.letters[item])
        return self.letters[item]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.letters == other.letters and self.alphabet == other.alphabet

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((self.alphabet.names, self.letters))
            object.__setattr__(self, "_hash", h)
        return h

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else invert(self)
        out = Word.identity(self.alphabet)
        for _ in range(abs(k)):
            out = concat(out, base)
        return out

    def inverse(self) -> "Word":
        return invert(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"

    def __str__(self) -> str:
        return format_word(self)

    def is_positive(self) -> bool:
        return all(x > 0 for x in self.letters)

    def shortlex_key(self) -> tuple:
        return shortlex_key(self.letters)


def _check(u: Word, v: Word) -> None:
    if u.alphabet != v.alphabet:
        raise AlphabetMismatch(f"{u.alphabet.names} vs {v.alphabet.names}")


def free_reduce(alphabet: Alphabet, raw: Iterable[int]) -> Word:
    return Word(alphabet, raw)


def concat(u: Word, v: Word) -> Word:
    _check(u, v)
    return Word.from_reduced(u.alphabet, concat_letters(u.letters, v.letters))


def product(alphabet: Alphabet, words: Iterable[Word]) -> Word:
    out: list[int] = []
    for w in words:
        if w.alphabet != alphabet:
            raise AlphabetMismatch(f"{w.alphabet.names} vs {alphabet.names}")
        for x in w.letters:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return Word.from_reduced(alphabet, tuple(out))


def invert(w: Word) -> Word:
    return Word.from_reduced(w.alphabet, invert_letters(w.letters))


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Split ``w`` as ``conjugator * core * conjugator^-1`` with ``core`` cyclically reduced."""
    s = w.letters
    i, j = 0, len(s) - 1
    while i < j and s[i] == -s[j]:
        i += 1
        j -= 1
    return (Word.from_reduced(w.alphabet, s[i : j + 1]),
            Word.from_reduced(w.alphabet, s[:i]))


def is_cyclically_reduced(letters: Sequence[int]) -> bool:
    return len(letters) < 2 or letters[0] != -letters[-1]


def common_prefix_len(u: Word, v: Word) -> int:
    _check(u, v)
    n = 0
    for x, y in zip(u.letters, v.letters):
        if x != y:
            break
        n += 1
    return n


def conjugate(w: Word, g: Word) -> Word:
    """``g w g^-1``."""
    return product(w.alphabet, (g, w, invert(g)))


_EXP_RE = re.compile(r"\^\s*(-?\d+)")


def parse_letters(alphabet: Alphabet, text: str) -> list[int]:
    """Tokenize ``text`` into raw (unreduced) letters.

    Lowercase names are generators and their uppercase spelling the inverse;
    a ``^k`` suffix repeats the preceding letter ``k`` times (negative ``k``
    inverts).  ``1`` alone denotes the identity.
    """
    table: list[tuple[str, int]] = []
    for i, name in enumerate(alphabet.names):
        table.append((name, i + 1))
        table.append((name.upper(), -(i + 1)))
    table.sort(key=lambda p: -len(p[0]))

    out: list[int] = []
    pos, n = 0, len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace() or ch in "*.·":
            pos += 1
            continue
        if ch == "1" and (pos + 1 == n or not text[pos + 1].isalnum()):
            pos += 1
            continue
        for tok, x in table:
            if text.startswith(tok, pos):
                pos += len(tok)
                break
        else:
            raise ParseError(f"unknown generator at {text[pos:pos + 8]!r} in {text!r}")
        if pos < n and text[pos] == "^":
            m = _EXP_RE.match(text, pos)
            if not m:
                raise ParseError(f"malformed exponent in {text!r}")
            k = int(m.group(1))
            pos = m.end()
            out.extend([x if k > 0 else -x] * abs(k))
        else:
            out.append(x)
    return out


def parse(alphabet: Alphabet, text: str) -> Word:
    return Word(alphabet, parse_letters(alphabet, text))


def format_letters(alphabet: Alphabet, letters: Sequence[int]) -> str:
    sep = "" if alphabet.single_char else " "
    return sep.join(alphabet.letter_name(x) for x in letters)


def format_word(w: Word) -> str:
    return format_letters(w.alphabet, w.letters)


def format_compact(w: Word) -> str:
    """Human-oriented spelling with ``^k`` exponents for runs (``c1 c2^3``)."""
    parts = []
    s = w.letters
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            j += 1
        name = w.alphabet.names[abs(s[i]) - 1]
        k = (j - i) * (1 if s[i] > 0 else -1)
        parts.append(name if k == 1 else f"{name}^{k}")
        i = j
    return " ".join(parts)
