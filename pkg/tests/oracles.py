"""Independent brute-force oracles used only by the tests.

Nothing here imports the Stallings or small-cancellation code: subgroups
are handled through Nielsen-reduced generating sets and pieces by direct
substring matching.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence


def red(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inv(w: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(w))


def mul(*ws: Sequence[int]) -> tuple[int, ...]:
    return red(x for w in ws for x in w)


def all_words(n_gens: int, max_len: int):
    """Every freely reduced word of length <= max_len."""
    letters = [i for g in range(1, n_gens + 1) for i in (g, -g)]
    yield ()
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                v = w + (x,)
                nxt.append(v)
                yield v
        frontier = nxt


# --- Nielsen reduction ----------------------------------------------------------

def _key(w: tuple[int, ...]):
    return tuple(2 * (abs(x) - 1) + (x < 0) for x in w)


def _n1_violation(ys):
    for i, j in itertools.permutations(range(len(ys)), 2):
        for a in (ys[i], inv(ys[i])):
            for b in (ys[j], inv(ys[j])):
                if len(mul(a, b)) < len(b):
                    return j, mul(a, b)
    return None


def _n2_violation(ys):
    signed = [(i, s) for i in range(len(ys)) for s in (1, -1)]

    def val(i, s):
        return ys[i] if s > 0 else inv(ys[i])

    for (i, si), (j, sj), (k, sk) in itertools.product(signed, repeat=3):
        if (i, si) == (j, -sj) or (j, sj) == (k, -sk):
            continue
        u, v, w = val(i, si), val(j, sj), val(k, sk)
        if len(mul(u, v, w)) <= len(u) - len(v) + len(w):
            return (i, si), (j, sj), (k, sk)
    return None


def is_nielsen_reduced(ys) -> bool:
    return all(ys) and _n1_violation(ys) is None and _n2_violation(ys) is None


def nielsen_reduce(gens: Sequence[Sequence[int]], max_iter: int = 10000) -> list[tuple[int, ...]]:
    """Nielsen-reduced generating set of the same subgroup.

    Length-decreasing moves first; in a length tie (N2 failing) the middle
    element ``v = v1 v2`` has even length and the move that replaces the
    ShortLex-larger half is taken.  The result is checked against N0-N2.
    """
    ys = [red(g) for g in gens]
    for _ in range(max_iter):
        ys = [y for y in ys if y]
        # drop duplicates up to inversion
        seen, uniq = set(), []
        for y in ys:
            if y not in seen and inv(y) not in seen:
                seen.add(y)
                uniq.append(y)
        ys = uniq
        v1 = _n1_violation(ys)
        if v1 is not None:
            j, new = v1
            ys[j] = new
            continue
        v2 = _n2_violation(ys)
        if v2 is None:
            return ys
        (i, si), (j, sj), (k, sk) = v2
        u = ys[i] if si > 0 else inv(ys[i])
        v = ys[j] if sj > 0 else inv(ys[j])
        h = len(v) // 2
        left, right = v[:h], v[h:]
        # uv keeps |u| and vw keeps |w|; replace whichever lowers the half-word order
        if _key(inv(right)) < _key(left):
            uv = mul(u, v)
            ys[i] = uv if si > 0 else inv(uv)
        else:
            w = ys[k] if sk > 0 else inv(ys[k])
            vw = mul(v, w)
            ys[k] = vw if sk > 0 else inv(vw)
    raise RuntimeError("Nielsen reduction did not terminate")


def elements_upto(ys: Sequence[tuple[int, ...]], n: int) -> set[tuple[int, ...]]:
    """All subgroup elements of length <= n.

    For a Nielsen-reduced set, prefix products of a reduced sequence never
    get shorter, so a BFS that discards products longer than ``n`` misses
    nothing.
    """
    assert is_nielsen_reduced(ys), ys
    signed = [y for g in ys for y in (g, inv(g))]
    found = {(): None}
    stack = [((), None)]
    while stack:
        p, last = stack.pop()
        for idx, y in enumerate(signed):
            if last is not None and idx == last ^ 1:
                continue
            q = mul(p, y)
            if len(q) > n:
                continue
            if q not in found:
                found[q] = None
                stack.append((q, idx))
    return set(found)


def member(ys: Sequence[tuple[int, ...]], w: Sequence[int]) -> bool:
    """Membership by pruned search over reduced products (``ys`` Nielsen-reduced).

    In a product ``y_1...y_k`` later factors cancel at most half of ``y_k``,
    so the current product minus ``floor(|y_k|/2)`` letters must be a prefix
    of the target.
    """
    w = red(w)
    if not w:
        return True
    signed = [y for g in ys for y in (g, inv(g))]
    seen = set()
    stack = [((), None)]
    while stack:
        p, last = stack.pop()
        for idx, y in enumerate(signed):
            if last is not None and idx == last ^ 1:
                continue
            q = mul(p, y)
            if q == w:
                return True
            if len(q) > len(w):
                continue
            keep = len(q) - len(y) // 2
            if q[:keep] != w[:keep]:
                continue
            if (q, idx) not in seen:
                seen.add((q, idx))
                stack.append((q, idx))
    return False


def malnormal_brute(ys, n_gens: int, conj_len: int = 4, elem_len: int = 6):
    """Search ``h`` with ``|h| <= conj_len``, ``h`` not in H, and nontrivial
    ``u`` in H with ``|u| <= elem_len`` and ``h^-1 u h`` in H."""
    elems = [u for u in elements_upto(ys, elem_len) if u]
    for h in all_words(n_gens, conj_len):
        if not h or member(ys, h):
            continue
        for u in elems:
            if member(ys, mul(inv(h), u, h)):
                return h, u
    return None


# --- pieces ------------------------------------------------------------------------

def brute_pieces(relators: Sequence[Sequence[int]]) -> list[int]:
    """Longest piece per relator by comparing all pairs of subword positions.

    A subword of a cyclic word of length ``L`` has length at most ``L``;
    pieces are counted only when shorter than the relator they lie in.
    """
    occ = []
    for ri, r in enumerate(relators):
        for orient, s in ((0, tuple(r)), (1, inv(r))):
            for off in range(len(s)):
                occ.append((ri, orient, off, s[off:] + s[:off]))
    best = [0] * len(relators)
    for a, b in itertools.combinations(occ, 2):
        ra, sa = a[0], a[3]
        rb, sb = b[0], b[3]
        m = 0
        cap = min(len(sa), len(sb))
        while m < cap and sa[m] == sb[m]:
            m += 1
        # a piece is a proper subword of the relator it is counted in
        best[ra] = max(best[ra], min(m, len(sa) - 1))
        best[rb] = max(best[rb], min(m, len(sb) - 1))
    return best


# --- endomorphisms --------------------------------------------------------------------

def kernel_witness(images: Sequence[Sequence[int]], max_len: int):
    """A nontrivial word of length <= max_len sent to 1, if any."""
    for w in all_words(len(images), max_len):
        if not w:
            continue
        img = red(y for x in w for y in (images[x - 1] if x > 0 else inv(images[-x - 1])))
        if not img:
            return w
    return None


# --- ascending HNN extensions ------------------------------------------------------------

def hnn_key(images: Sequence[Sequence[int]], t: int, w: Sequence[int], M: int):
    """Complete invariant of ``w`` in ``K*_phi`` (``phi`` injective) by height counting.

    With ``h_i`` the t-height before base letter ``x_i`` and ``e`` the total
    t-exponent, ``t^M w t^-e t^-M`` equals the product of ``phi^(M+h_i)(x_i)``
    in ``K``; for ``M >= -min h_i`` two words agree iff their ``e`` and these
    reduced products agree.
    """
    memo: dict[tuple[int, int], tuple[int, ...]] = {}

    def power(x: int, n: int) -> tuple[int, ...]:
        if (x, n) not in memo:
            if n == 0:
                memo[x, n] = (x,)
            else:
                memo[x, n] = red(y for z in power(x, n - 1)
                                 for y in (images[z - 1] if z > 0 else inv(images[-z - 1])))
        return memo[x, n]

    h = 0
    parts = []
    for x in w:
        if abs(x) == t:
            h += 1 if x > 0 else -1
        else:
            if M + h < 0:
                raise ValueError("M too small for this word")
            parts.append(power(x, M + h))
    return h, mul(*parts)
