"""Presentations, piece tables, the C'(lambda) condition and Dehn's algorithm."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .words import (Alphabet, Word, cyclic_reduce, format_compact, invert_letters,
                    parse, reduce_letters)


class NotSmallCancellation(ValueError):
    """Dehn's algorithm is only sound for C'(1/6) presentations."""


class PresentationFormatError(ValueError):
    pass


def _rotations(s: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [s[k:] + s[:k] for k in range(len(s))]


def _cyclic_class(s: tuple[int, ...]) -> frozenset:
    return frozenset(_rotations(s)) | frozenset(_rotations(invert_letters(s)))


class Presentation:
    """Finite presentation ``<alphabet | relators>``.

    Relators are stored cyclically reduced, in input order; a relator that is
    a cyclic permutation of an earlier one (or of its inverse) is dropped.
    ``assumptions`` holds hypotheses that are declared, not computed.
    """

    def __init__(self, alphabet: Alphabet, relators: Iterable[Word], name: str = "",
                 assumptions: Iterable[str] = ()):
        self.alphabet = alphabet
        self.name = name
        self.assumptions = tuple(assumptions)
        rels: list[Word] = []
        seen: set[tuple[int, ...]] = set()
        for r in relators:
            if r.alphabet != alphabet:
                raise ValueError(f"relator {r} over a different alphabet")
            core, _ = cyclic_reduce(r)
            if not core:
                raise ValueError(f"relator {r} is trivial in the free group")
            if core.letters in seen:
                continue
            seen |= _cyclic_class(core.letters)
            rels.append(core)
        self.relators: tuple[Word, ...] = tuple(rels)
        self._metric_cache: dict[Fraction, tuple[bool, "PieceTable"]] = {}
        self._dehn: _DehnIndex | None = None
        self._pieces: PieceTable | None = None

    def __eq__(self, other) -> bool:
        return (isinstance(other, Presentation) and self.alphabet == other.alphabet
                and self.relators == other.relators)

    def __hash__(self) -> int:
        return hash((self.alphabet, self.relators))

    def __repr__(self) -> str:
        return (f"Presentation({self.name or '?'}: {len(self.alphabet)} gens, "
                f"{len(self.relators)} relators)")

    @property
    def girth(self) -> int:
        return min((len(r) for r in self.relators), default=0)

    def word(self, text: str) -> Word:
        return parse(self.alphabet, text)

    # --- file format ------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        if self.name:
            lines.append(f"name: {self.name}")
        lines.append("gens: " + " ".join(self.alphabet.names))
        for a in self.assumptions:
            lines.append(f"assume: {a}")
        for r in self.relators:
            lines.append("rel: " + format_compact(r))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Presentation":
        gens = None
        name = ""
        assumptions = []
        raw_rels = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, rest = line.partition(":")
            if not sep:
                raise PresentationFormatError(f"line {lineno}: expected 'key: value'")
            key, rest = key.strip(), rest.strip()
            if key == "gens":
                gens = Alphabet(rest.split())
            elif key == "rel":
                raw_rels.append((lineno, rest))
            elif key == "name":
                name = rest
            elif key == "assume":
                assumptions.append(rest)
            else:
                raise PresentationFormatError(f"line {lineno}: unknown key {key!r}")
        if gens is None:
            raise PresentationFormatError("missing 'gens:' line")
        rels = []
        for lineno, body in raw_rels:
            try:
                rels.append(parse(gens, body))
            except ValueError as exc:
                raise PresentationFormatError(f"line {lineno}: {exc}") from None
        return cls(gens, rels, name, assumptions)

    @classmethod
    def load(cls, path: str | Path) -> "Presentation":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")


# --- symmetrization and pieces ---------------------------------------------

@dataclass(frozen=True)
class Occurrence:
    relator: int
    inverse: bool
    offset: int


def symmetrize(p: Presentation) -> list[Word]:
    """All cyclic rotations of all relators and their inverses, deduplicated."""
    out: list[Word] = []
    seen: set[tuple[int, ...]] = set()
    for r in p.relators:
        for s in (r.letters, invert_letters(r.letters)):
            for rot in _rotations(s):
                if rot not in seen:
                    seen.add(rot)
                    out.append(Word.from_reduced(p.alphabet, rot))
    return out


def _occurrences(p: Presentation):
    for i, r in enumerate(p.relators):
        for inv, s in ((False, r.letters), (True, invert_letters(r.letters))):
            for k in range(len(s)):
                yield Occurrence(i, inv, k), s[k:] + s[:k]


def _encode(letters: Sequence[int]) -> bytes:
    return bytes(2 * x if x > 0 else -2 * x + 1 for x in letters)


def _lcp(a: bytes, b: bytes, cap: int) -> int:
    lo, hi = 0, min(len(a), len(b), cap)
    if a[:hi] == b[:hi]:
        return hi
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if a[:mid] == b[:mid]:
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass(frozen=True)
class PieceTable:
    per_relator: tuple[int, ...]          # longest piece length in each relator
    relator_lengths: tuple[int, ...]
    ratio: Fraction                       # max over relators of piece / length
    witness: tuple[Word, Occurrence, Occurrence] | None

    @property
    def max_piece(self) -> int:
        return max(self.per_relator, default=0)


def piece_table(p: Presentation) -> PieceTable:
    """Exact longest pieces by sorting all rotations and comparing sorted neighbours.

    A piece is a proper subword read at two distinct occurrences (relator,
    orientation, offset) of the symmetrized set.
    """
    if len(p.alphabet) > 127:
        raise ValueError("alphabet too large for byte encoding")
    occ = []
    for o, rot in _occurrences(p):
        occ.append((_encode(rot), o))
    occ.sort(key=lambda t: t[0])
    n_rel = len(p.relators)
    lengths = tuple(len(r) for r in p.relators)
    best = [0] * n_rel
    best_pair: list[tuple[int, int] | None] = [None] * n_rel
    for idx in range(len(occ) - 1):
        a, oa = occ[idx]
        b, ob = occ[idx + 1]
        m = _lcp(a, b, max(len(a), len(b)))
        for self_idx, other_idx, o in ((idx, idx + 1, oa), (idx + 1, idx, ob)):
            mm = min(m, lengths[o.relator] - 1)
            if mm > best[o.relator]:
                best[o.relator] = mm
                best_pair[o.relator] = (self_idx, other_idx)
    ratio = Fraction(0)
    witness = None
    for i in range(n_rel):
        r = Fraction(best[i], lengths[i])
        if r > ratio:
            ratio = r
            ia, ib = best_pair[i]  # type: ignore[misc]
            a, oa = occ[ia]
            ob = occ[ib][1]
            word = Word.from_reduced(p.alphabet, _decode(a[:best[i]]))
            witness = (word, oa, ob)
    return PieceTable(tuple(best), lengths, ratio, witness)


def _decode(b: bytes) -> tuple[int, ...]:
    return tuple(x // 2 if x % 2 == 0 else -(x // 2) for x in b)


def check_metric(p: Presentation, lam: Fraction = Fraction(1, 6)) -> tuple[bool, PieceTable]:
    lam = Fraction(lam)
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    if lam in p._metric_cache:
        return p._metric_cache[lam]
    if p._pieces is None:
        p._pieces = piece_table(p)
    table = p._pieces
    ok = all(piece < lam * length
             for piece, length in zip(table.per_relator, table.relator_lengths))
    p._metric_cache[lam] = (ok, table)
    return ok, table


# --- Dehn's algorithm --------------------------------------------------------

@dataclass(frozen=True)
class DehnStep:
    position: int
    occurrence: Occurrence
    removed: int       # letters of the relator matched (> half)
    inserted: int      # complementary letters written in their place
    length_after: int


class _DehnIndex:
    def __init__(self, p: Presentation):
        self.classes: dict[int, tuple[list[bytes], list[Occurrence], list[tuple[int, ...]]]] = {}
        buckets: dict[int, list] = {}
        for o, rot in _occurrences(p):
            buckets.setdefault(len(rot), []).append((_encode(rot), o, rot))
        for L, items in buckets.items():
            items.sort(key=lambda t: (t[0], t[1].relator, t[1].inverse, t[1].offset))
            self.classes[L] = ([t[0] for t in items], [t[1] for t in items], [t[2] for t in items])
        self.min_len = min(buckets) if buckets else 0
        self.h = self.min_len // 2 + 1
        self.prefixes = {b[: self.h] for keys, _, _ in self.classes.values() for b in keys}
        self.max_len = max(buckets) if buckets else 0
        self.heads: dict[int, dict[bytes, list[int]]] = {}
        for L, (keys, _, _) in self.classes.items():
            d: dict[bytes, list[int]] = {}
            for j, k in enumerate(keys):
                d.setdefault(k[: L // 2 + 1], []).append(j)
            self.heads[L] = d

    def match_at(self, w: bytes, pos: int):
        """Longest over-half relator subword starting at ``pos``; ties by relator order."""
        h = self.h
        if w[pos:pos + h] not in self.prefixes:
            return None
        best = None
        for L, (keys, occs, rots) in self.classes.items():
            if len(w) - pos <= L // 2:
                continue
            # an over-half match shares the first L//2 + 1 letters with the rotation
            js = self.heads[L].get(w[pos:pos + L // 2 + 1])
            if not js:
                continue
            q = w[pos:pos + L]
            scored = [(_lcp(q, keys[j], L), j) for j in js]
            m = max(sc for sc, _ in scored)
            o_best = min((j for sc, j in scored if sc == m),
                         key=lambda j: (occs[j].relator, occs[j].inverse, occs[j].offset))
            cand = (-m, pos, occs[o_best].relator, occs[o_best].inverse,
                    occs[o_best].offset, rots[o_best], occs[o_best])
            if best is None or cand[:5] < best[:5]:
                best = cand
        return best

    def best_match(self, w: bytes, start: int = 0):
        """Longest over-half relator subword, leftmost; ties by relator order."""
        best = None
        for pos in range(start, len(w) - self.h + 1):
            cand = self.match_at(w, pos)
            if cand is not None and (best is None or cand[:5] < best[:5]):
                best = cand
        return best


def _index(p: Presentation) -> _DehnIndex:
    if p._dehn is None:
        p._dehn = _DehnIndex(p)
    return p._dehn


def _require(p: Presentation) -> None:
    ok, table = check_metric(p, Fraction(1, 6))
    if not ok:
        raise NotSmallCancellation(
            f"{p.name or 'presentation'} is not C'(1/6): piece ratio {table.ratio}")


def dehn_reduce(p: Presentation, w: Word, require_metric: bool = True,
                max_steps: int | None = None) -> tuple[Word, list[DehnStep]]:
    """Dehn's algorithm; returns the reduced word and the replacement trace."""
    if require_metric:
        _require(p)
    idx = _index(p)
    cur = w.letters
    trace: list[DehnStep] = []
    if not p.relators:
        return w, trace
    enc = _encode(cur)
    # per-position matches; a replacement only invalidates windows that overlap it
    at = [idx.match_at(enc, pos) for pos in range(len(enc))]
    while max_steps is None or len(trace) < max_steps:
        found = min((c for c in at if c is not None), key=lambda c: c[:5], default=None)
        if found is None:
            break
        neg_m, pos, _, _, _, rot, occ = found
        m = -neg_m
        comp = invert_letters(rot[m:])
        new = reduce_letters(cur[:pos] + comp + cur[pos + m:])
        trace.append(DehnStep(pos, occ, m, len(comp), len(new)))
        new_enc = _encode(new)
        a = _lcp(enc, new_enc, min(len(enc), len(new_enc)))
        b = 0
        limit = min(len(enc), len(new_enc)) - a
        while b < limit and enc[-1 - b] == new_enc[-1 - b]:
            b += 1
        front = max(0, a - idx.max_len)
        shift = len(new_enc) - len(enc)
        tail = [None if c is None else c[:1] + (c[1] + shift,) + c[2:] for c in at[len(enc) - b:]]
        mid = [idx.match_at(new_enc, q) for q in range(front, len(new_enc) - b)]
        at = at[:front] + mid + tail
        cur, enc = new, new_enc
    return Word.from_reduced(p.alphabet, cur), trace


def is_dehn_reduced(p: Presentation, w: Word, require_metric: bool = True) -> bool:
    if require_metric:
        _require(p)
    if not p.relators:
        return True
    return _index(p).best_match(_encode(w.letters)) is None


def is_trivial(p: Presentation, w: Word) -> bool:
    return not dehn_reduce(p, w)[0]


def words_equal(p: Presentation, u: Word, v: Word) -> bool:
    from .words import concat, invert
    return is_trivial(p, concat(u, invert(v)))
