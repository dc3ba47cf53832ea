"""Free-group endomorphisms given by generator substitutions.

Lengths of iterates are tracked exactly through letter-count matrices with
arbitrary-precision entries; for positive substitutions no cancellation can
occur, so the matrix answer is the true reduced length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import gmpy2

from . import stallings
from .words import Alphabet, AlphabetMismatch, Word, invert_letters

DEFAULT_SIZE_CAP = 10**6

Matrix = list[list]


# --- small dense matrices over any ring-like numeric type -------------------

def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, m, p = len(a), len(b), len(b[0])
    return [[sum((a[i][k] * b[k][j] for k in range(1, m)), a[i][0] * b[0][j])
             for j in range(p)] for i in range(n)]


def mat_identity(n: int, one=1, zero=0) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_pow(a: Matrix, k: int, one=1, zero=0) -> Matrix:
    result = mat_identity(len(a), one, zero)
    base = a
    while k:
        if k & 1:
            result = mat_mul(result, base)
        k >>= 1
        if k:
            base = mat_mul(base, base)
    return result


def mat_vec(a: Matrix, v: Sequence) -> list:
    return [sum((a[i][k] * v[k] for k in range(1, len(v))), a[i][0] * v[0]) for i in range(len(a))]


def _to_int_matrix(a: Matrix) -> Matrix:
    return [[int(x) for x in row] for row in a]


# --- endomorphisms ----------------------------------------------------------

class Endomorphism:
    """Substitution ``x_j -> images[j]`` on the free group over ``alphabet``."""

    def __init__(self, alphabet: Alphabet, images: Sequence[Word]):
        images = tuple(images)
        if len(images) != len(alphabet):
            raise ValueError(f"need {len(alphabet)} images, got {len(images)}")
        for w in images:
            if w.alphabet != alphabet:
                raise AlphabetMismatch(f"{w.alphabet.names} vs {alphabet.names}")
        if not any(images):
            raise ValueError("at least one image must be nonempty")
        self.alphabet = alphabet
        self.images = images

    @classmethod
    def from_strings(cls, alphabet: Alphabet, images: dict[str, str] | Sequence[str]) -> "Endomorphism":
        from .words import parse
        if isinstance(images, dict):
            images = [images.get(n, n) for n in alphabet.names]
        return cls(alphabet, [parse(alphabet, s) for s in images])

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Endomorphism":
        return cls(alphabet, alphabet.gens())

    def __eq__(self, other) -> bool:
        return (isinstance(other, Endomorphism) and self.alphabet == other.alphabet
                and self.images == other.images)

    def __hash__(self) -> int:
        return hash((self.alphabet, self.images))

    def __repr__(self) -> str:
        body = ", ".join(f"{n}->{w}" for n, w in zip(self.alphabet.names, self.images))
        return f"Endomorphism({body})"

    def __call__(self, w: Word) -> Word:
        return apply(self, w)

    def image_letters(self, x: int) -> tuple[int, ...]:
        img = self.images[abs(x) - 1].letters
        return img if x > 0 else invert_letters(img)

    def as_dict(self) -> dict[str, str]:
        return {n: str(w) for n, w in zip(self.alphabet.names, self.images)}


def apply_letters(phi: Endomorphism, letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        for y in phi.image_letters(x):
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


def apply(phi: Endomorphism, w: Word) -> Word:
    if w.alphabet != phi.alphabet:
        raise AlphabetMismatch(f"{w.alphabet.names} vs {phi.alphabet.names}")
    return Word.from_reduced(phi.alphabet, apply_letters(phi, w.letters))


def compose(phi: Endomorphism, psi: Endomorphism) -> Endomorphism:
    """``phi o psi`` (apply ``psi`` first)."""
    if phi.alphabet != psi.alphabet:
        raise AlphabetMismatch(f"{phi.alphabet.names} vs {psi.alphabet.names}")
    return Endomorphism(phi.alphabet, [apply(phi, w) for w in psi.images])


def is_positive(phi: Endomorphism) -> bool:
    return all(w.is_positive() for w in phi.images)


def letter_count_matrix(phi: Endomorphism) -> Matrix:
    """Entry (i, j): occurrences of generator i, either sign, in the image of generator j."""
    n = len(phi.alphabet)
    m = [[0] * n for _ in range(n)]
    for j, w in enumerate(phi.images):
        for x in w.letters:
            m[abs(x) - 1][j] += 1
    return m


def exponent_sum_matrix(phi: Endomorphism) -> Matrix:
    """Entry (i, j): exponent sum of generator i in the image of generator j (abelianization)."""
    n = len(phi.alphabet)
    m = [[0] * n for _ in range(n)]
    for j, w in enumerate(phi.images):
        for x in w.letters:
            m[abs(x) - 1][j] += 1 if x > 0 else -1
    return m


def count_vector(w: Word) -> list[int]:
    v = [0] * len(w.alphabet)
    for x in w.letters:
        v[abs(x) - 1] += 1
    return v


@dataclass(frozen=True)
class IterateLength:
    value: int
    exact: bool   # False: an upper bound (cancellation possible)

    @property
    def log10(self) -> float:
        return log10_int(self.value)


def log10_int(n: int) -> float:
    if n <= 0:
        return float("-inf") if n == 0 else float("nan")
    return math.log10(n)


def length_of_iterate(phi: Endomorphism, w: Word, n: int) -> IterateLength:
    """``|phi^n(w)|`` as ``1^T M^n c(w)``; exact iff ``phi`` and ``w`` are positive."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if w.alphabet != phi.alphabet:
        raise AlphabetMismatch(f"{w.alphabet.names} vs {phi.alphabet.names}")
    exact = (is_positive(phi) and w.is_positive()) or n == 0
    m = [[gmpy2.mpz(x) for x in row] for row in letter_count_matrix(phi)]
    v = mat_vec(mat_pow(m, n, gmpy2.mpz(1), gmpy2.mpz(0)), [gmpy2.mpz(x) for x in count_vector(w)])
    return IterateLength(int(sum(v)), exact)


@dataclass(frozen=True)
class Overflow:
    """``phi^n(w)`` exceeded the size cap; ``length`` is exact or an upper bound."""
    n: int
    length: IterateLength

    def __bool__(self) -> bool:
        return False


def iterate(phi: Endomorphism, n: int, w: Word, size_cap: int = DEFAULT_SIZE_CAP) -> Word | Overflow:
    if n < 0:
        raise ValueError("n must be >= 0")
    if w.alphabet != phi.alphabet:
        raise AlphabetMismatch(f"{w.alphabet.names} vs {phi.alphabet.names}")
    if len(w) > size_cap:
        return Overflow(n, IterateLength(len(w), True))
    sizes = [len(img) for img in phi.images]
    cur = w.letters
    for k in range(n):
        bound = sum(sizes[abs(x) - 1] for x in cur)
        if bound > size_cap:
            if is_positive(phi) and w.is_positive():
                return Overflow(n, length_of_iterate(phi, w, n))
            # upper bound for the remaining steps from the current word
            rest = length_of_iterate(phi, Word.from_reduced(phi.alphabet, cur), n - k)
            return Overflow(n, IterateLength(rest.value, False))
        cur = apply_letters(phi, cur)
    return Word.from_reduced(phi.alphabet, cur)


def injectivity_check(phi: Endomorphism) -> bool:
    """Images freely generate a subgroup of full rank (Hopfian argument)."""
    if any(len(img) == 0 for img in phi.images):
        return False
    g = stallings.build(list(phi.images), phi.alphabet)
    return g.rank == len(phi.alphabet)


@dataclass(frozen=True)
class GrowthRow:
    k: int
    length: int | None     # cyclically reduced length of phi^k(w); None past the cap
    exact: bool

    @property
    def log10(self) -> float | None:
        return None if self.length is None else log10_int(self.length)


@dataclass(frozen=True)
class GrowthReport:
    rows: tuple[GrowthRow, ...]
    monotone: bool
    ratio: float | None          # geometric mean of successive ratios over the tail
    proxy_only: bool = True      # growth is evidence, never a hyperbolicity certificate


def conjugate_growth_report(phi: Endomorphism, w: Word, n_max: int,
                            size_cap: int = DEFAULT_SIZE_CAP) -> GrowthReport:
    from .words import cyclic_reduce
    rows: list[GrowthRow] = []
    positive = is_positive(phi) and w.is_positive()
    cur: tuple[int, ...] | None = w.letters
    for k in range(n_max + 1):
        if positive:
            # positive words never cancel, cyclically or otherwise
            rows.append(GrowthRow(k, length_of_iterate(phi, w, k).value, True))
            continue
        if cur is not None and len(cur) <= size_cap:
            core, _ = cyclic_reduce(Word.from_reduced(phi.alphabet, cur))
            rows.append(GrowthRow(k, len(core), True))
            bound = sum(len(phi.images[abs(x) - 1]) for x in cur)
            cur = apply_letters(phi, cur) if bound <= size_cap else None
        else:
            rows.append(GrowthRow(k, None, False))
    known = [r.length for r in rows if r.length is not None]
    monotone = all(a <= b for a, b in zip(known, known[1:]))
    ratio = None
    tail = [x for x in known[-6:] if x > 0]
    if len(tail) >= 2 and tail[0] > 0:
        ratio = 10 ** ((log10_int(tail[-1]) - log10_int(tail[0])) / (len(tail) - 1))
    return GrowthReport(tuple(rows), monotone, ratio)


# --- composing substitutions along iterates ---------------------------------

def action_along_iterates(psi: Endomorphism, letter_mats: Sequence[Matrix], n: int,
                          one=1, zero=0) -> list[Matrix]:
    """Matrices ``P(psi^n(x_i))`` for the monoid map ``P`` fixed by ``letter_mats``.

    ``P`` sends a positive word ``y_1...y_L`` to ``letter_mats[y_1] ... letter_mats[y_L]``.
    Used for the length of ``u d u^-1`` when conjugation by each letter of the
    positive word ``u`` acts on another free factor by a positive substitution.
    Runs of a letter in ``psi``'s images are raised by repeated squaring.
    """
    if not is_positive(psi):
        raise ValueError("action_along_iterates needs a positive substitution")
    runs = [_runs(img.letters) for img in psi.images]
    cur = list(letter_mats)
    for _ in range(n):
        nxt = []
        for r in runs:
            acc = None
            for x, k in r:
                block = cur[x - 1] if k == 1 else mat_pow(cur[x - 1], k, one, zero)
                acc = block if acc is None else mat_mul(acc, block)
            nxt.append(acc)
        cur = nxt
    return cur


def _runs(letters: Sequence[int]) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for x in letters:
        if out and out[-1][0] == x:
            out[-1] = (x, out[-1][1] + 1)
        else:
            out.append((x, 1))
    return out
