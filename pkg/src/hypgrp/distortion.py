"""Subgroup distortion: exhaustive small-scale tables and witness families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import gmpy2

from . import stallings
from .cayley import Ball
from .examples import BCD_ALPHA, C_ALPHA, D_ALPHA, BakerRileyFamily, baker_riley
from .smallcancellation import dehn_reduce
from .substitution import Endomorphism, apply_letters, length_of_iterate
from .words import Alphabet, Word, format_compact, invert_letters, product


@dataclass(frozen=True)
class DistortionRow:
    n: int                     # outer length
    inner: int | None          # inner length, None when only log bounds exist
    log10_lo: float
    log10_hi: float
    witness: Word | None = None


@dataclass(frozen=True)
class DistortionTable:
    rows: tuple[DistortionRow, ...]
    method: str                # "exhaustive" | "witness-lower-bound"

    @property
    def monotone(self) -> bool:
        vals = [r.log10_lo for r in self.rows]
        return all(a <= b for a, b in zip(vals, vals[1:]))


def decimal(v: int) -> str:
    """Decimal digits of a possibly huge integer."""
    return gmpy2.mpz(v).digits()


def _log10(v: int) -> float:
    from .examples import _log10_exact
    return float("-inf") if v == 0 else _log10_exact(v)


def _row(n: int, v: int, witness: Word | None = None) -> DistortionRow:
    lg = _log10(v)
    return DistortionRow(n, v, lg, lg, witness)


def stallings_inner_length(g: stallings.SubgroupGraph) -> Callable[[Word], int | None]:
    """Inner length in the subgroup's basis; None for non-members."""
    def f(w: Word) -> int | None:
        m = g.contains(w)
        return len(m.expression) if m else None
    return f


def distortion_table_exhaustive(ball: Ball, membership, n_max: int) -> DistortionTable:
    """``Dist(n) = max{|h|_H : h in H, |h|_G <= n}`` over the ball.

    ``membership`` is a Stallings graph, a callable ``Word -> inner length or
    None``, or the string ``"whole"`` for ``H = G``.
    """
    if n_max > ball.radius:
        raise ValueError(f"n_max {n_max} exceeds ball radius {ball.radius}")
    if isinstance(membership, stallings.SubgroupGraph):
        inner = stallings_inner_length(membership)
    elif membership == "whole":
        inner = None
    else:
        inner = membership
    best = [0] * (n_max + 1)
    wit: list[Word | None] = [None] * (n_max + 1)
    for idx, d in enumerate(ball.dist):
        if d > n_max:
            continue
        w = ball.word(idx)
        v = d if inner is None else inner(w)
        if v is not None and (v > best[d] or wit[d] is None):
            if v >= best[d]:
                best[d], wit[d] = v, w
    rows = []
    run, run_w = 0, None
    for n in range(n_max + 1):
        if best[n] >= run:
            run, run_w = best[n], wit[n] if wit[n] is not None else run_w
        rows.append(_row(n, run, run_w))
    return DistortionTable(tuple(rows), "exhaustive")


# --- witness certificates -------------------------------------------------------------

@dataclass(frozen=True)
class TraceStep:
    rule: str          # "psi": b X b^-1 -> psi(X); "sigma": c_i Z c_i^-1 -> sigma_i(Z)
    letter: int = 0    # for "sigma": the conjugating c-letter (1 or 2)

    def to_json(self) -> dict:
        return {"rule": self.rule, "letter": self.letter} if self.rule == "sigma" else {"rule": self.rule}


@dataclass(frozen=True)
class WitnessCertificate:
    n: int
    outer: Word
    inner_length: int | None
    log10_lo: float
    log10_hi: float
    derivation: str                    # "matrix" | "expansion" | "interval"
    trace: tuple[TraceStep, ...] | None  # None when u_n itself is beyond the budget
    trace_summary: dict
    params: dict

    @property
    def outer_length(self) -> int:
        return len(self.outer)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "params": self.params,
            "outer": str(self.outer),
            "outer_length": self.outer_length,
            "inner_length": None if self.inner_length is None else decimal(self.inner_length),
            "log10_inner": [self.log10_lo, self.log10_hi],
            "derivation": self.derivation,
            "trace": self.trace_summary,
        }


def _trace(fam: BakerRileyFamily, n: int, budget: int) -> tuple[tuple[TraceStep, ...] | None, dict]:
    ulen = fam.inner_u_length(n)
    summary = {"psi_steps": n, "sigma_steps": ulen,
               "rules": ["b c_i b^-1 = C_i", "c_i d_j c_i^-1 = D_ij"]}
    u = fam.inner_u(n, budget)
    if u is None:
        return None, summary
    steps = [TraceStep("psi")] * n
    # conjugate d1 by u = y_1 ... y_L: innermost letter first
    steps += [TraceStep("sigma", y) for y in reversed(u.letters)]
    summary["u_n"] = format_compact(u)
    return tuple(steps), summary


def _lift(letters: Sequence[int], names: Sequence[str]) -> tuple[int, ...]:
    """Letters over a two-letter alphabet ``names`` as letters over ``c1 c2 d1 d2 b``."""
    m = {i + 1: BCD_ALPHA.letter(n) for i, n in enumerate(names)}
    return tuple(m[x] if x > 0 else -m[-x] for x in letters)


def replay(cert: WitnessCertificate, fam: BakerRileyFamily | None = None,
           check_each: bool = False, budget: int = 10**5) -> Word:
    """Run the rewriting trace from the outer spelling down to the inner word.

    ``psi`` steps peel one ``b`` off ``b^k X b^-k`` using ``b c_i b^-1 = C_i``;
    ``sigma`` steps then peel the conjugating ``c``-letters innermost first
    using ``c_i d_j c_i^-1 = D_ij``.  With ``check_each`` every step is also
    confirmed in ``G_bcd`` by Dehn's algorithm on ``before * after^-1``.
    Returns the final word over ``d1 d2`` (in the ``c1 c2 d1 d2 b`` alphabet).
    """
    fam = fam or baker_riley(cert.params["r"], cert.params["l"])
    if cert.trace is None:
        raise ValueError("certificate carries no expandable trace")
    b = BCD_ALPHA.letter("b")
    k = cert.n
    x: tuple[int, ...] = (1,)            # over c1 c2
    core: tuple[int, ...] = (1,)         # over d1 d2
    ys: list[int] = list(x) if k == 0 else []
    state = cert.outer
    for step in cert.trace:
        if step.rule == "psi":
            if k == 0:
                raise ValueError("psi step with no b left")
            x = apply_letters(fam.psi, x)
            k -= 1
            if k == 0:
                ys = list(x)
            u = (b,) * k + _lift(x, ("c1", "c2")) + (-b,) * k
        elif step.rule == "sigma":
            if k != 0 or not ys or ys[-1] != step.letter:
                raise ValueError("sigma step out of order")
            ys.pop()
            core = apply_letters(fam.sigma(step.letter), core)
            if len(core) > budget:
                raise ValueError("replay exceeded the expansion budget")
            u = _lift(ys, ("c1", "c2"))
        else:
            raise ValueError(f"unknown rule {step.rule!r}")
        dz = _lift(core, ("d1", "d2"))
        new = Word(BCD_ALPHA, u + dz + invert_letters(u))
        if check_each and dehn_reduce(fam.G_bcd, product(BCD_ALPHA, [state, new.inverse()]))[0]:
            raise ValueError(f"step {step} does not follow from the relations")
        state = new
    if k != 0 or ys:
        raise ValueError("trace incomplete")
    return state


def baker_riley_witnesses(r: int = 17, l: int = 2, n_max: int = 12,
                          budget: int = 10**5) -> list[WitnessCertificate]:
    fam = baker_riley(r, l)
    out = []
    for n in range(n_max + 1):
        L = fam.inner_w_length(n)
        derivation = L.method
        if L.value is not None and L.value <= budget:
            w = fam.inner_w(n, budget)
            if w is not None:
                if len(w) != L.value:
                    raise AssertionError(f"matrix length {L.value} != expansion {len(w)} at n={n}")
                derivation = "expansion"
        trace, summary = _trace(fam, n, budget)
        out.append(WitnessCertificate(n, fam.spelling_w(n), L.value, L.log10_lo, L.log10_hi,
                                      derivation, trace, summary, {"r": r, "l": l}))
    return out


def endo_witnesses(phi: Endomorphism, x: Word, n_max: int) -> list[WitnessCertificate]:
    """``t^n x t^-n = phi^n(x)`` in ``K *_phi``: outer length ``2n + |x|``."""
    A = phi.alphabet.extend("t")
    t = A.letter("t")
    out = []
    for n in range(n_max + 1):
        v = length_of_iterate(phi, x, n)
        lg = _log10(v.value)
        outer = Word(A, (t,) * n + x.letters + (-t,) * n)
        out.append(WitnessCertificate(n, outer, v.value, lg, lg, "matrix" if v.exact else "bound",
                                      None, {"phi^n": n}, {"endo": phi.as_dict()}))
    return out


def witness_lower_bound_table(certs: Sequence[WitnessCertificate]) -> DistortionTable:
    rows = tuple(DistortionRow(c.outer_length, c.inner_length, c.log10_lo, c.log10_hi, c.outer)
                 for c in certs)
    return DistortionTable(rows, "witness-lower-bound")
