"""Cayley-graph metric computations backed by word-problem oracles.

Balls are built by BFS with deduplication through the oracle.  Oracles with
canonical forms (free, free product, ascending HNN) hash directly; the Dehn
oracle buckets candidates by abelianization invariants and compares within
a bucket by triviality of ``u v^-1``.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import gog
from .smallcancellation import (Presentation, check_metric, dehn_reduce,
                                is_dehn_reduced)
from .words import (Alphabet, Word, concat_letters, invert_letters, reduce_letters)

DEFAULT_CAP = 2 * 10**6


def default_cap() -> int:
    env = os.environ.get("HYPGRP_CAP")
    return int(env) if env else DEFAULT_CAP


# --- oracles --------------------------------------------------------------------

class WordProblemOracle:
    kind = "abstract"
    alphabet: Alphabet

    def canonical(self, letters: tuple[int, ...]):
        """Hashable canonical form, or None when the oracle has none."""
        return None

    def is_trivial(self, letters: Sequence[int]) -> bool:
        raise NotImplementedError

    def eq(self, u: Sequence[int], v: Sequence[int]) -> bool:
        return self.is_trivial(concat_letters(tuple(u), invert_letters(v)))


class FreeOracle(WordProblemOracle):
    kind = "free"

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def canonical(self, letters):
        return reduce_letters(letters)

    def is_trivial(self, letters) -> bool:
        return not reduce_letters(letters)


class FreeProdOracle(FreeOracle):
    """``K * <t>`` with ``K`` free: the free group on base plus ``t``."""
    kind = "freeprod"

    def __init__(self, spec: gog.FreeProductSpec):
        super().__init__(spec.alphabet)
        self.spec = spec


class BrittonOracle(WordProblemOracle):
    kind = "britton"

    def __init__(self, spec: gog.AscendingHnnSpec):
        self.spec = spec
        self.alphabet = spec.alphabet

    def canonical(self, letters):
        f = gog.ascending_form(self.spec, tuple(letters))
        return (f.m, f.k, f.n)

    def is_trivial(self, letters) -> bool:
        return self.canonical(letters) == (0, (), 0)


class DehnOracle(WordProblemOracle):
    kind = "dehn"

    def __init__(self, p: Presentation, require_metric: bool = True):
        if require_metric:
            ok, table = check_metric(p)
            if not ok:
                from .smallcancellation import NotSmallCancellation
                raise NotSmallCancellation(f"{p.name or 'presentation'} is not C'(1/6): {table.ratio}")
        self.p = p
        self.alphabet = p.alphabet
        self._functionals = _abelian_functionals(p)
        self._memo: dict[tuple[int, ...], bool] = {}

    def reduce(self, letters) -> tuple[int, ...]:
        return dehn_reduce(self.p, Word(self.alphabet, letters), require_metric=False)[0].letters

    def invariant(self, letters) -> tuple[int, ...]:
        v = [0] * len(self.alphabet)
        for x in letters:
            v[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(sum(f * c for f, c in zip(fn, v)) for fn in self._functionals)

    def is_trivial(self, letters) -> bool:
        key = reduce_letters(letters)
        got = self._memo.get(key)
        if got is None:
            got = not self.reduce(key)
            self._memo[key] = got
        return got


def _abelian_functionals(p: Presentation) -> list[list[int]]:
    """Integer functionals vanishing on every relator's exponent-sum vector."""
    n = len(p.alphabet)
    rows = []
    for r in p.relators:
        v = [Fraction(0)] * n
        for x in r.letters:
            v[abs(x) - 1] += 1 if x > 0 else -1
        rows.append(v)
    # reduced row echelon form
    pivots: list[int] = []
    m = [row[:] for row in rows]
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv = m[rank][col]
        m[rank] = [x / pv for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(n) if c not in pivots]
    out = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -m[i][fc]
        den = 1
        for x in vec:
            den = den * x.denominator // _gcd(den, x.denominator)
        out.append([int(x * den) for x in vec])
    return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def oracle_for(obj) -> WordProblemOracle:
    if isinstance(obj, WordProblemOracle):
        return obj
    if isinstance(obj, gog.AscendingHnnSpec):
        return BrittonOracle(obj)
    if isinstance(obj, gog.FreeProductSpec):
        return FreeProdOracle(obj)
    if isinstance(obj, Presentation):
        return FreeOracle(obj.alphabet) if not obj.relators else DehnOracle(obj)
    if isinstance(obj, Alphabet):
        return FreeOracle(obj)
    raise TypeError(f"no word-problem oracle for {type(obj).__name__}")


# --- balls ----------------------------------------------------------------------

@dataclass
class Ball:
    oracle: WordProblemOracle
    gens: tuple[Word, ...]             # symmetric generating set
    radius: int                        # honest radius: all elements at distance <= radius present
    spellings: list[tuple[int, ...]]   # freely reduced product of generator words
    dist: list[int]
    parent: list[int]                  # -1 for the identity
    via: list[int]                     # generator index used from the parent
    complete: bool = True
    _canon: dict = field(default_factory=dict, repr=False)
    _buckets: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.spellings)

    @property
    def alphabet(self) -> Alphabet:
        return self.oracle.alphabet

    def sphere_sizes(self) -> list[int]:
        out = [0] * (max(self.dist) + 1 if self.dist else 0)
        for d in self.dist:
            out[d] += 1
        return out

    def find(self, letters: Sequence[int]) -> int | None:
        letters = reduce_letters(letters)
        o = self.oracle
        key = o.canonical(letters)
        if key is not None:
            return self._canon.get(key)
        red = o.reduce(letters)  # type: ignore[attr-defined]
        got = self._canon.get(red)
        if got is not None:
            return got
        for idx in self._buckets.get(o.invariant(letters), ()):  # type: ignore[attr-defined]
            if o.eq(self.spellings[idx], letters):
                self._canon[red] = idx
                return idx
        return None

    def _insert(self, letters, d, parent, via) -> int:
        idx = len(self.spellings)
        self.spellings.append(letters)
        self.dist.append(d)
        self.parent.append(parent)
        self.via.append(via)
        o = self.oracle
        key = o.canonical(letters)
        if key is not None:
            self._canon[key] = idx
        else:
            self._canon[o.reduce(letters)] = idx  # type: ignore[attr-defined]
            self._buckets.setdefault(o.invariant(letters), []).append(idx)  # type: ignore[attr-defined]
        return idx

    def geodesic(self, idx: int) -> list[int]:
        """Generator indices along the stored geodesic from 1."""
        path = []
        while self.parent[idx] >= 0:
            path.append(self.via[idx])
            idx = self.parent[idx]
        return path[::-1]

    def word(self, idx: int) -> Word:
        return Word.from_reduced(self.alphabet, self.spellings[idx])


def _symmetric(gens: Sequence[Word]) -> tuple[Word, ...]:
    out: list[Word] = []
    seen = set()
    for g in gens:
        for h in (g, g.inverse()):
            if h and h.letters not in seen:
                seen.add(h.letters)
                out.append(h)
    return tuple(out)


def build_ball(oracle, gens: Sequence[Word] | None, R: int, cap: int | None = None) -> Ball:
    o = oracle_for(oracle)
    if R < 0:
        raise ValueError("radius must be >= 0")
    cap = default_cap() if cap is None else cap
    gs = _symmetric(list(gens) if gens is not None else o.alphabet.gens())
    ball = Ball(o, gs, 0, [], [], [], [])
    ball._insert((), 0, -1, -1)
    frontier = [0]
    for d in range(1, R + 1):
        nxt = []
        for idx in frontier:
            base = ball.spellings[idx]
            for gi, g in enumerate(gs):
                cand = concat_letters(base, g.letters)
                if ball.find(cand) is not None:
                    continue
                if len(ball) >= cap:
                    ball.complete = False
                    ball.radius = d - 1
                    return ball
                nxt.append(ball._insert(cand, d, idx, gi))
        frontier = nxt
        ball.radius = d
        if not frontier:
            break
    ball.radius = R
    return ball


@dataclass(frozen=True)
class Distance:
    value: int | None      # exact distance, or None meaning "> bound"
    bound: int

    @property
    def known(self) -> bool:
        return self.value is not None

    def __str__(self) -> str:
        return str(self.value) if self.value is not None else f"> {self.bound}"


def distance(ball: Ball, w: Word | Sequence[int]) -> Distance:
    letters = w.letters if isinstance(w, Word) else tuple(w)
    idx = ball.find(letters)
    if idx is None:
        return Distance(None, ball.radius)
    return Distance(ball.dist[idx], ball.radius)


def gromov_product(ball: Ball, x: Word, y: Word, reach: int | None = None) -> Fraction | None:
    """``(d(1,x) + d(1,y) - d(x,y)) / 2``; None when a distance is out of reach.

    ``d(x, y) = d(1, x^-1 y)``; if the ball is too small a second ball of
    radius up to ``reach`` (default ``2R``) is built.
    """
    dx, dy = distance(ball, x), distance(ball, y)
    if not (dx.known and dy.known):
        return None
    z = concat_letters(invert_letters(x.letters), y.letters)
    dxy = distance(ball, z)
    if not dxy.known:
        reach = 2 * ball.radius if reach is None else reach
        if reach > ball.radius and len(z) <= reach:
            big = build_ball(ball.oracle, ball.gens, min(reach, len(z)))
            if big.complete:
                dxy = distance(big, z)
    if not dxy.known:
        return None
    return Fraction(dx.value + dy.value - dxy.value, 2)  # type: ignore[operator]


# --- geodesic certificates --------------------------------------------------------

class Uncertified(ValueError):
    pass


@dataclass(frozen=True)
class GeodesicCertificate:
    word: Word
    method: str        # "free" | "half-girth" | "ball"
    detail: str = ""


def certify_geodesic(w: Word, p: Presentation | None = None, ball: Ball | None = None) -> GeodesicCertificate:
    """Certify that ``w`` is a geodesic spelling.

    ``free``: no relators, so freely reduced means geodesic.  ``half-girth``:
    in a C'(1/6) presentation a trivial freely reduced word contains more
    than half a relator, so a shorter spelling ``v`` would give a nontrivial
    relation ``w v^-1`` of length ``< 2|w|``, impossible when
    ``4|w| <= girth``.  ``ball``: BFS distance equals ``|w|``.
    """
    if p is not None and not p.relators:
        return GeodesicCertificate(w, "free")
    if p is not None:
        ok, _ = check_metric(p)
        if ok and 4 * len(w) <= p.girth:
            return GeodesicCertificate(w, "half-girth", f"4*{len(w)} <= girth {p.girth} in {p.name}")
    if ball is not None:
        d = distance(ball, w)
        if d.known and d.value == len(w):
            return GeodesicCertificate(w, "ball", f"BFS radius {ball.radius}")
    raise Uncertified(f"cannot certify {w} as geodesic")


def prefix_gromov_lower_bound(u: GeodesicCertificate, v: GeodesicCertificate) -> int:
    if not isinstance(u, GeodesicCertificate) or not isinstance(v, GeodesicCertificate):
        raise Uncertified("prefix bound needs geodesic certificates")
    n = 0
    for x, y in zip(u.word.letters, v.word.letters):
        if x != y:
            break
        n += 1
    return n


# --- Mitra tables --------------------------------------------------------------------

@dataclass(frozen=True)
class MitraRow:
    N: int
    M_hat: int | None       # min outer distance from 1 to the sampled connecting geodesics
    pairs: int
    capped: int             # pairs skipped because a distance was out of reach


@dataclass(frozen=True)
class MitraTable:
    rows: tuple[MitraRow, ...]

    @property
    def monotone(self) -> bool:
        vals = [r.M_hat for r in sorted(self.rows, key=lambda r: r.N) if r.M_hat is not None]
        return all(a <= b for a, b in zip(vals, vals[1:]))


def mitra_table(inner, outer, ray: Callable[[int], Sequence[int]] | gog.RayDescriptor,
                depth: int, radius: int = 8, embed: Callable[[Sequence[int]], tuple[int, ...]] | None = None,
                cap: int | None = None) -> MitraTable:
    """Empirical ``M(N)``: over ray points ``p_i, p_j`` with ``N <= i < j <= depth``,
    the least outer distance from 1 to a connecting outer geodesic.

    The ray is given by its points in the inner group (``k -> letters``);
    ``embed`` maps inner letters to outer letters (default: by generator name).
    Points on the connecting geodesic are ``p_i`` times prefixes of a stored
    geodesic spelling of ``p_i^-1 p_j``; pairs whose distances fall outside
    the outer ball of the given radius are counted as capped.
    """
    if depth <= 0:
        return MitraTable(())
    o_in, o_out = oracle_for(inner), oracle_for(outer)
    if isinstance(ray, gog.RayDescriptor):
        rd = ray
        pts = lambda k: rd.point(k).letters  # noqa: E731
    else:
        pts = ray
    if embed is None:
        m = {i + 1: o_out.alphabet.index(n) + 1 for i, n in enumerate(o_in.alphabet.names)}
        embed = lambda s: tuple(m[x] if x > 0 else -m[-x] for x in s)  # noqa: E731
    ball = build_ball(o_out, None, radius, cap)
    points = [reduce_letters(embed(pts(k))) for k in range(depth + 1)]
    best: dict[int, int] = {}
    capped: dict[int, int] = {}
    for i in range(depth + 1):
        pi = points[i]
        for j in range(i + 1, depth + 1):
            z = concat_letters(invert_letters(pi), points[j])
            idx = ball.find(z)
            if idx is None:
                capped[i] = capped.get(i, 0) + 1
                continue
            cur = pi
            low = None
            d0 = distance(ball, cur)
            ok = d0.known
            low = d0.value if ok else None
            for gi in ball.geodesic(idx):
                if not ok:
                    break
                cur = concat_letters(cur, ball.gens[gi].letters)
                dd = distance(ball, cur)
                if not dd.known:
                    ok = False
                    break
                low = min(low, dd.value)  # type: ignore[type-var]
            if not ok:
                capped[i] = capped.get(i, 0) + 1
                continue
            best[i] = min(best.get(i, low), low)  # type: ignore[type-var]
    rows = []
    for N in range(depth):
        vals = [best[i] for i in range(N, depth) if i in best]
        cnt = sum(depth - i for i in range(N, depth))
        cap_n = sum(capped.get(i, 0) for i in range(N, depth))
        rows.append(MitraRow(N, min(vals) if vals else None, cnt, cap_n))
    return MitraTable(tuple(rows))


# --- JKLO evidence probe ----------------------------------------------------------------

class ProbeRejected(ValueError):
    pass


@dataclass(frozen=True)
class WordFamily:
    """``n -> outer spelling`` plus the inner-group data the probe consumes."""
    name: str
    outer: Callable[[int], Word]
    certify: Callable[[int], GeodesicCertificate]
    inner_log10: Callable[[int], tuple[float, float]]   # bounds on log10 of the inner length
    limit_kind: str                                      # label of the limit's syllable type


@dataclass(frozen=True)
class JkloReport:
    families: tuple[str, str]
    n_max: int
    grid: tuple[tuple[int, ...], ...]          # grid[n][m] = prefix bound
    inner_log10: tuple[tuple[float, float], ...]
    divergent: bool
    seqB_power: bool
    distinct_limits: bool
    certificates: tuple[str, ...]
    evidence: bool

    def rows(self):
        for n, row in enumerate(self.grid):
            for m, v in enumerate(row):
                yield n, m, min(n, m), v


def jklo_probe(seqA: WordFamily, seqB: WordFamily, n_max: int,
               assumptions: Sequence[str] = ()) -> JkloReport:
    """Finite evidence for the strong JKLO criterion; never a proof."""
    if n_max < 2:
        raise ProbeRejected("need n_max >= 2")
    bounds = [seqA.inner_log10(n) for n in range(n_max + 1)]
    divergent = all(bounds[n][0] > bounds[n - 1][1] for n in range(1, n_max + 1))
    if not divergent:
        raise ProbeRejected(f"{seqA.name}: inner lengths do not strictly increase")
    letters0 = seqB.outer(1).letters
    if len(letters0) != 1:
        raise ProbeRejected(f"{seqB.name} is not a single-letter power family")
    x = letters0[0]
    for m in range(n_max + 1):
        if seqB.outer(m).letters != (x,) * m:
            raise ProbeRejected(f"{seqB.name} is not a single-letter power family")
    if seqA.limit_kind == seqB.limit_kind:
        raise ProbeRejected("families do not have distinct limit types")
    certsA = [seqA.certify(n) for n in range(n_max + 1)]
    certsB = [seqB.certify(m) for m in range(n_max + 1)]
    grid = tuple(tuple(prefix_gromov_lower_bound(a, b) for b in certsB) for a in certsA)
    diag = [grid[k][k] for k in range(n_max + 1)]
    evidence = all(a < b for a, b in zip(diag, diag[1:]))
    methods = tuple(sorted({c.method for c in certsA + certsB}))
    return JkloReport((seqA.name, seqB.name), n_max, grid, tuple(bounds), divergent, True,
                      True, methods + tuple(assumptions), evidence)


# --- thinness ----------------------------------------------------------------------

def estimate_delta(ball: Ball, samples: int = 20000, seed: int = 0) -> Fraction:
    """Sampled lower bound for the four-point ``delta`` based at 1.

    ``(x.z) >= min((x.y), (y.z)) - delta`` over triples whose pairwise
    distances are all exact in the ball; unreachable triples are skipped.
    """
    if ball.radius < 2 or len(ball) < 3:
        return Fraction(0)
    rng = random.Random(seed)
    n = len(ball)
    cache: dict[tuple[int, int], int | None] = {}

    def d(i: int, j: int) -> int | None:
        if i == j:
            return 0
        key = (i, j) if i < j else (j, i)
        if key not in cache:
            z = concat_letters(invert_letters(ball.spellings[key[0]]), ball.spellings[key[1]])
            dd = distance(ball, z)
            cache[key] = dd.value
        return cache[key]

    total = n ** 3
    if total <= samples:
        triples = [(i, j, k) for i in range(n) for j in range(n) for k in range(n)]
    else:
        triples = [(rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(samples)]
    worst = Fraction(0)
    for i, j, k in triples:
        dij, djk, dik = d(i, j), d(j, k), d(i, k)
        if dij is None or djk is None or dik is None:
            continue
        di, dj, dk = ball.dist[i], ball.dist[j], ball.dist[k]
        xy = Fraction(di + dj - dij, 2)
        yz = Fraction(dj + dk - djk, 2)
        xz = Fraction(di + dk - dik, 2)
        worst = max(worst, min(xy, yz) - xz)
    return worst
