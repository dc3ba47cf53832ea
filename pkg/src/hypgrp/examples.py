"""Builders for the named example groups.

The Baker-Riley family lives on the alphabet ``c1 c2 d1 d2 b a``:
``G_cd`` uses the first four letters, ``G_bcd`` adds ``b`` and ``G`` adds
``a``.  Inner words (``psi^n(c1)``, the conjugates of ``d1``) live in the
free groups ``F(c1, c2)`` and ``F(d1, d2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import gmpy2
import mpmath
from mpmath import iv

from . import gog
from .smallcancellation import Presentation
from .substitution import (Endomorphism, action_along_iterates, apply_letters,
                           injectivity_check, is_positive, letter_count_matrix,
                           length_of_iterate)
from .words import Alphabet, Word, invert, parse, product

DEFAULT_R = 17
DEFAULT_L = 2
EXPANSION_BUDGET = 10**5
EXACT_DIGIT_BUDGET = 2 * 10**6

C_ALPHA = Alphabet(["c1", "c2"])
D_ALPHA = Alphabet(["d1", "d2"])
CD_ALPHA = Alphabet(["c1", "c2", "d1", "d2"])
BCD_ALPHA = CD_ALPHA.extend("b")
G_ALPHA = BCD_ALPHA.extend("a")


def _block(x1: int, x2: int, exps: Sequence[int]) -> tuple[int, ...]:
    """``prod_k x1 x2^{e_k}`` as positive letters."""
    out: list[int] = []
    for e in exps:
        out.append(x1)
        out.extend([x2] * e)
    return tuple(out)


@dataclass(frozen=True)
class InnerLength:
    """Exact length when within the digit budget, plus rigorous log10 bounds."""
    value: int | None
    log10_lo: float
    log10_hi: float
    method: str          # "expansion" | "matrix" | "interval"

    @property
    def log10(self) -> float:
        return (self.log10_lo + self.log10_hi) / 2


@dataclass
class BakerRileyFamily:
    r: int = DEFAULT_R
    l: int = DEFAULT_L
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.r < 2 or self.l < 2:
            raise ValueError(f"need r >= 2 and l >= 2, got r={self.r}, l={self.l}")

    # --- building words, as positive letter tuples over two-letter alphabets --
    def exps_C(self) -> list[int]:
        return list(range(1, self.r + 1))

    def exps_Ci(self, i: int) -> list[int]:
        return [self.r * i + k for k in range(1, self.r + 1)]

    def exps_Dj(self, j: int) -> list[int]:
        return [self.r * j + k for k in range(1, self.r + 1)]

    def exps_Dij(self, i: int, j: int) -> list[int]:
        return [self.r * (i * self.l + j) + k for k in range(1, self.r + 1)]

    def C(self, alphabet: Alphabet = C_ALPHA) -> Word:
        c1, c2 = alphabet.letter("c1"), alphabet.letter("c2")
        return Word.from_reduced(alphabet, _block(c1, c2, self.exps_C()))

    def Ci(self, i: int, alphabet: Alphabet = C_ALPHA) -> Word:
        c1, c2 = alphabet.letter("c1"), alphabet.letter("c2")
        return Word.from_reduced(alphabet, _block(c1, c2, self.exps_Ci(i)))

    def Dj(self, j: int, alphabet: Alphabet = D_ALPHA) -> Word:
        d1, d2 = alphabet.letter("d1"), alphabet.letter("d2")
        return Word.from_reduced(alphabet, _block(d1, d2, self.exps_Dj(j)))

    def Dij(self, i: int, j: int, alphabet: Alphabet = D_ALPHA) -> Word:
        d1, d2 = alphabet.letter("d1"), alphabet.letter("d2")
        return Word.from_reduced(alphabet, _block(d1, d2, self.exps_Dij(i, j)))

    # --- substitutions ----------------------------------------------------
    @cached_property
    def psi(self) -> Endomorphism:
        """``c_i -> C_i`` on ``F(c1, c2)``."""
        return Endomorphism(C_ALPHA, [self.Ci(1), self.Ci(2)])

    def sigma(self, i: int) -> Endomorphism:
        """``d_j -> D_ij`` on ``F(d1, d2)``; conjugation by ``c_i``."""
        return Endomorphism(D_ALPHA, [self.Dij(i, 1), self.Dij(i, 2)])

    # --- presentations ----------------------------------------------------
    @cached_property
    def G_cd(self) -> Presentation:
        A = CD_ALPHA
        rels = []
        for i in (1, 2):
            for j in (1, 2):
                ci, dj = A.gen(f"c{i}"), A.gen(f"d{j}")
                rels.append(product(A, [ci, dj, invert(ci), invert(self.Dij(i, j, A))]))
        return Presentation(A, rels, f"baker-riley-G_cd(r={self.r},l={self.l})")

    @cached_property
    def G_bcd(self) -> Presentation:
        A = BCD_ALPHA
        rels = [Word.from_reduced(A, r.letters) for r in self.G_cd.relators]
        b = A.gen("b")
        for i in (1, 2):
            ci = A.gen(f"c{i}")
            rels.append(product(A, [b, ci, invert(b), invert(self.Ci(i, A))]))
        return Presentation(A, rels, f"baker-riley-G_bcd(r={self.r},l={self.l})")

    @cached_property
    def G(self) -> Presentation:
        A = G_ALPHA
        rels = [Word.from_reduced(A, r.letters) for r in self.G_bcd.relators]
        a, b = A.gen("a"), A.gen("b")
        # a b a^-1 = b C^-1
        rels.append(product(A, [a, b, invert(a), self.C(A), invert(b)]))
        for j in (1, 2):
            dj = A.gen(f"d{j}")
            # a d_j a^-1 = b D_j b^-1
            rels.append(product(A, [a, dj, invert(a), b, invert(self.Dj(j, A)), invert(b)]))
        return Presentation(A, rels, f"baker-riley-G(r={self.r},l={self.l})")

    def presentation(self, which: str) -> Presentation:
        return {"G_cd": self.G_cd, "G_bcd": self.G_bcd, "G": self.G}[which]

    # --- outer spellings ------------------------------------------------------
    def spelling_u(self, n: int, alphabet: Alphabet = BCD_ALPHA) -> Word:
        """``b^n c1 b^-n``."""
        _check_n(n)
        b, c1 = alphabet.letter("b"), alphabet.letter("c1")
        return Word.from_reduced(alphabet, (b,) * n + (c1,) + (-b,) * n)

    def spelling_w(self, n: int, alphabet: Alphabet = BCD_ALPHA) -> Word:
        """``u_n d1 u_n^-1``, of length ``4n + 3``."""
        u = self.spelling_u(n, alphabet)
        return product(alphabet, [u, alphabet.gen("d1"), invert(u)])

    def spelling_b(self, m: int, alphabet: Alphabet = BCD_ALPHA) -> Word:
        return Word.from_reduced(alphabet, (alphabet.letter("b"),) * m)

    # --- inner words ---------------------------------------------------------
    def inner_u(self, n: int, budget: int = EXPANSION_BUDGET) -> Word | None:
        """``psi^n(c1)`` in ``F(c1, c2)``, or None past the budget."""
        _check_n(n)
        if self.inner_u_length(n) > budget:
            return None
        cur: tuple[int, ...] = (1,)
        for _ in range(n):
            cur = apply_letters(self.psi, cur)
        return Word.from_reduced(C_ALPHA, cur)

    def inner_u_length(self, n: int) -> int:
        return length_of_iterate(self.psi, C_ALPHA.gen("c1"), n).value

    def inner_w(self, n: int, budget: int = EXPANSION_BUDGET) -> Word | None:
        """``u_n d1 u_n^-1`` in ``F(d1, d2)``, expanded letter by letter along ``u_n``.

        Conjugation by the positive word ``y_1...y_L`` is
        ``sigma_{y_1} o ... o sigma_{y_L}``; returns None past the budget.
        """
        u = self.inner_u(n, budget)
        if u is None:
            return None
        lng = self.inner_w_length(n)
        if lng.value is None or lng.value > budget:
            return None
        sig = {1: self.sigma(1), 2: self.sigma(2)}
        cur: tuple[int, ...] = (1,)
        for y in reversed(u.letters):
            cur = apply_letters(sig[y], cur)
        return Word.from_reduced(D_ALPHA, cur)

    def _action(self, n: int, one, zero):
        mats = [[[one * x for x in row] for row in letter_count_matrix(self.sigma(i))] for i in (1, 2)]
        return action_along_iterates(self.psi, mats, n, one, zero)

    def inner_w_log10_bounds(self, n: int) -> tuple[float, float]:
        """Rigorous bounds on ``log10 |w_n|`` from interval matrix arithmetic."""
        _check_n(n)
        key = ("log", n)
        got = self._cache.get(key)
        if got is None:
            # interval arithmetic in log space would lose the sums; scale instead:
            # propagate matrices normalised by a power of ten kept exactly on the side
            got = _log_bounds(self, n)
            self._cache[key] = got
        return got

    def inner_w_length(self, n: int, digit_budget: int = EXACT_DIGIT_BUDGET) -> InnerLength:
        """``|w_n|`` in ``F(d1, d2)``.

        ``1^T A_n[c1] e_{d1}`` with ``A_0[c_i]`` the letter-count matrix of
        ``sigma_i`` and ``A_n[c_i] = prod_{y in C_i} A_{n-1}[y]``.  Exact
        integers are computed while the estimated size stays within
        ``digit_budget`` decimal digits.
        """
        _check_n(n)
        key = ("len", n, digit_budget)
        got = self._cache.get(key)
        if got is not None:
            return got
        lo, hi = self.inner_w_log10_bounds(n)
        if hi <= digit_budget:
            # the matrix entries above the final product stay below the final size
            mats = self._action(n, gmpy2.mpz(1), gmpy2.mpz(0))
            m = mats[0]
            v = int(m[0][0] + m[1][0])
            ll = _log10_exact(v)
            got = InnerLength(v, ll, ll, "matrix")
        else:
            got = InnerLength(None, lo, hi, "interval")
        self._cache[key] = got
        return got


def _log10_exact(v: int) -> float:
    if v.bit_length() < 1000:
        return math.log10(v)
    shift = v.bit_length() - 200
    return math.log10(v >> shift) + shift * math.log10(2)


def _log_bounds(fam: BakerRileyFamily, n: int) -> tuple[float, float]:
    """Interval bounds for ``log10 |w_n|``.

    Matrices are carried as ``(M, s)`` meaning ``M * 10^s`` with ``M`` an
    interval matrix of moderate magnitude; products add exponents, so the
    computation stays in double-range however large the true entries get.
    """
    iv.prec = 80
    one, zero = iv.mpf(1), iv.mpf(0)

    def norm(m, s):
        big = max(abs(x).b for row in m for x in row)
        if big == 0:
            return m, s
        e = int(mpmath.floor(mpmath.log10(big)))
        scale = iv.mpf(10) ** (-e)
        return [[x * scale for x in row] for row in m], s + e

    def mul(a, b):
        (ma, sa), (mb, sb) = a, b
        return norm([[ma[i][0] * mb[0][j] + ma[i][1] * mb[1][j] for j in range(2)] for i in range(2)],
                    sa + sb)

    def power(a, k):
        result = ([[one, zero], [zero, one]], 0)
        base = a
        while k:
            if k & 1:
                result = mul(result, base)
            k >>= 1
            if k:
                base = mul(base, base)
        return result

    cur = [norm([[iv.mpf(x) for x in row] for row in letter_count_matrix(fam.sigma(i))], 0)
           for i in (1, 2)]
    runs = []
    for img in fam.psi.images:
        rr: list[tuple[int, int]] = []
        for x in img.letters:
            if rr and rr[-1][0] == x:
                rr[-1] = (x, rr[-1][1] + 1)
            else:
                rr.append((x, 1))
        runs.append(rr)
    for _ in range(n):
        nxt = []
        for rr in runs:
            acc = None
            for x, k in rr:
                blk = power(cur[x - 1], k)
                acc = blk if acc is None else mul(acc, blk)
            nxt.append(acc)
        cur = nxt
    m, s = cur[0]
    total = iv.log10(m[0][0] + m[1][0]) + s
    # round outward when leaving interval arithmetic
    lo = math.nextafter(float(total.a), -math.inf)
    hi = math.nextafter(float(total.b), math.inf)
    return lo, hi


def _check_n(n: int) -> None:
    if n < 0:
        raise ValueError("n must be >= 0")


@lru_cache(maxsize=8)
def baker_riley(r: int = DEFAULT_R, l: int = DEFAULT_L) -> BakerRileyFamily:
    """Shared family instance; presentations and piece tables are cached on it."""
    return BakerRileyFamily(r, l)


# --- other named examples ---------------------------------------------------------

def ascending_demo() -> gog.AscendingHnnSpec:
    """``F(a, b) *_phi`` with ``phi: a -> ab, b -> ba``."""
    K = Alphabet("ab")
    return gog.AscendingHnnSpec(Endomorphism.from_strings(K, ["ab", "ba"]), "t")


def genus2() -> Presentation:
    A = Alphabet("abcd")
    return Presentation(A, [parse(A, "abABcdCD")], "genus2")


def free_group(rank: int = 2) -> Presentation:
    names = "abcdefgh"[:rank] if rank <= 8 else [f"x{i}" for i in range(rank)]
    return Presentation(Alphabet(names), [], f"free{rank}")


@dataclass(frozen=True)
class PipelineResult:
    H: Presentation
    G: Presentation
    G1: gog.FreeProductSpec


def thm_endo_pipeline(base: Alphabet, endos: Sequence[tuple[str, Endomorphism]],
                      phi_top: Endomorphism | Sequence[Word], top: str = "t",
                      q_gens: Sequence[str] | None = None) -> PipelineResult:
    """Multiple ascending HNN extension ``H`` of ``F(base)`` and ``G = H *_{Q, phi_top}``.

    ``Q`` is generated by the stable letters of ``H`` unless ``q_gens``
    names other generators.  ``phi_top`` is an endomorphism of the abstract
    free group on ``Q``'s generators, or explicit image words over ``H``.
    Hyperbolicity and malnormal quasiconvexity are recorded as assumptions.
    """
    for name, phi in endos:
        if not is_positive(phi):
            raise ValueError(f"endomorphism for {name} is not positive")
        if not injectivity_check(phi):
            raise ValueError(f"endomorphism for {name} is not injective")
    multi = gog.MultiHnnSpec(base, endos)
    H = multi.presentation("H", assumptions=["hyperbolic"])
    qn = list(q_gens) if q_gens is not None else [n for n, _ in endos]
    qw = [H.alphabet.gen(n) for n in qn]
    if isinstance(phi_top, Endomorphism) and not is_positive(phi_top):
        raise ValueError("top endomorphism must be positive")
    G = gog.compose_amalgam(H, qw, phi_top, top, "G",
                            assumptions=["malnormal quasiconvex Q", "G hyperbolic"])
    return PipelineResult(H, G, gog.FreeProductSpec(base, top))


def baker_riley_pipeline(fam: BakerRileyFamily) -> tuple[Presentation, Presentation]:
    """Rebuild ``G_bcd`` and ``G`` from ``G_cd`` by amalgam composition."""
    A = CD_ALPHA
    g_bcd = gog.compose_amalgam(fam.G_cd, [A.gen("c1"), A.gen("c2")], fam.psi, "b",
                                fam.G_bcd.name)
    B = g_bcd.alphabet
    b = B.gen("b")
    images = [product(B, [b, invert(fam.C(B))])]
    for j in (1, 2):
        images.append(product(B, [b, fam.Dj(j, B), invert(b)]))
    g = gog.compose_amalgam(g_bcd, [b, B.gen("d1"), B.gen("d2")], images, "a", fam.G.name)
    return g_bcd, g


# --- registry ------------------------------------------------------------------

@dataclass(frozen=True)
class NamedExample:
    label: str
    description: str
    build: Callable[..., object]


def _br(which: str):
    def f(r: int = DEFAULT_R, l: int = DEFAULT_L) -> Presentation:
        return baker_riley(r, l).presentation(which)
    return f


REGISTRY: dict[str, NamedExample] = {e.label: e for e in [
    NamedExample("baker-riley-G", "Baker-Riley group G (generators c1 c2 d1 d2 b a)", _br("G")),
    NamedExample("baker-riley-G_bcd", "Baker-Riley subgroup presentation G_bcd", _br("G_bcd")),
    NamedExample("baker-riley-G_cd", "Baker-Riley base presentation G_cd", _br("G_cd")),
    NamedExample("genus2", "closed genus-2 surface group", lambda **_: genus2()),
    NamedExample("ascending-demo", "F(a,b)*_phi, phi: a->ab, b->ba",
                 lambda **_: ascending_demo().presentation("ascending-demo")),
    NamedExample("free2", "free group on a, b", lambda **_: free_group(2)),
]}


def get(label: str, **params) -> Presentation:
    try:
        ex = REGISTRY[label]
    except KeyError:
        raise KeyError(f"unknown example {label!r}; known: {', '.join(sorted(REGISTRY))}") from None
    return ex.build(**params)


def baker_riley_jklo_families(fam: BakerRileyFamily):
    """``w_n`` and ``b^m`` as probe families over ``c1 c2 d1 d2 b``.

    Each spelling is checked Dehn-reduced against the full relator set of
    ``G`` (a syntactic test) and certified geodesic in ``G_bcd``, the
    C'(1/6) presentation containing every letter the spellings use.
    """
    from .cayley import Uncertified, WordFamily, certify_geodesic
    from .smallcancellation import is_dehn_reduced

    def certify(w: Word):
        wg = Word.from_reduced(G_ALPHA, w.letters)
        if not is_dehn_reduced(fam.G, wg, require_metric=False):
            raise Uncertified(f"{w} is not Dehn-reduced in G")
        return certify_geodesic(w, fam.G_bcd)

    seq_a = WordFamily("w_n", fam.spelling_w, lambda n: certify(fam.spelling_w(n)),
                       fam.inner_w_log10_bounds, "F(d1,d2)")
    seq_b = WordFamily("b^m", fam.spelling_b, lambda m: certify(fam.spelling_b(m)),
                       lambda m: ((math.log10(m),) * 2 if m else (float("-inf"),) * 2),
                       "b^+inf")
    return seq_a, seq_b
