"""Graph-of-groups combinatorics over free vertex groups.

Covers ascending HNN extensions ``K*_phi`` (Britton normal forms), free
products ``K*<t>``, Bass-Serre projections, boundary-ray descriptors with
their T-finite/T-infinite classification, and syntactic amalgam composition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import stallings
from .smallcancellation import Presentation
from .substitution import Endomorphism, apply, injectivity_check, is_positive
from .words import (Alphabet, Word, concat_letters, format_word, invert,
                    invert_letters, parse, product, reduce_letters)


class GogError(ValueError):
    pass


# --- group specs ---------------------------------------------------------------

@dataclass(frozen=True)
class FreeProductSpec:
    """``K * <t>`` with ``K`` free on ``base``."""
    base: Alphabet
    stable: str = "t"

    def __post_init__(self):
        if self.stable in self.base.names:
            raise GogError(f"stable letter {self.stable!r} collides with the base")

    @property
    def alphabet(self) -> Alphabet:
        return self.base.extend(self.stable)

    @property
    def t(self) -> int:
        return len(self.base) + 1

    def to_json(self) -> dict:
        return {"base": list(self.base.names), "stable": self.stable}


class AscendingHnnSpec:
    """``K*_phi = <K, t | t x t^-1 = phi(x)>`` for an injective endomorphism ``phi``."""

    def __init__(self, endo: Endomorphism, stable: str = "t"):
        if stable in endo.alphabet.names:
            raise GogError(f"stable letter {stable!r} collides with the base")
        if not injectivity_check(endo):
            raise GogError(f"{endo} is not injective")
        self.endo = endo
        self.base = endo.alphabet
        self.stable = stable
        self.alphabet = self.base.extend(stable)
        self.t = len(self.base) + 1
        self.image_graph = stallings.build(list(endo.images), self.base)
        self._powers: dict[tuple[int, int], tuple[int, ...]] = {}

    def __repr__(self) -> str:
        return f"AscendingHnnSpec({self.endo}, stable={self.stable!r})"

    def presentation(self, name: str = "") -> Presentation:
        t = Word.from_reduced(self.alphabet, (self.t,))
        rels = []
        for i, img in enumerate(self.endo.images):
            x = Word.from_reduced(self.alphabet, (i + 1,))
            rels.append(product(self.alphabet, [t, x, invert(t), invert(_lift(img, self.alphabet))]))
        return Presentation(self.alphabet, rels, name or "ascending-hnn")

    # phi^n on a single base letter, memoised
    def power_image(self, x: int, n: int) -> tuple[int, ...]:
        key = (x, n)
        got = self._powers.get(key)
        if got is None:
            if n == 0:
                got = (x,)
            else:
                prev = self.power_image(x, n - 1)
                got = _apply_base(self.endo, prev)
            self._powers[key] = got
        return got

    def preimage(self, k: tuple[int, ...]) -> tuple[int, ...] | None:
        if not k:
            return ()
        m = self.image_graph.contains(Word.from_reduced(self.base, k))
        return m.expression if m else None


def _apply_base(phi: Endomorphism, letters: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        for y in phi.image_letters(x):
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


def _lift(w: Word, alphabet: Alphabet) -> Word:
    """Reinterpret a word over a prefix of ``alphabet``."""
    return Word.from_reduced(alphabet, w.letters)


class MultiHnnSpec:
    """One free vertex group with several stable letters, each acting by an injective endomorphism."""

    def __init__(self, base: Alphabet, endos: Sequence[tuple[str, Endomorphism]]):
        if len(endos) < 2:
            raise GogError("a multiple ascending HNN extension needs at least two stable letters")
        names = [n for n, _ in endos]
        if len(set(names)) != len(names) or set(names) & set(base.names):
            raise GogError("stable letters must be distinct and disjoint from the base")
        for n, phi in endos:
            if phi.alphabet != base:
                raise GogError(f"endomorphism for {n} is over a different alphabet")
            if not injectivity_check(phi):
                raise GogError(f"endomorphism for {n} is not injective")
        self.base = base
        self.endos = list(endos)

    def presentation(self, name: str = "", stable_first: bool = True,
                     assumptions: Iterable[str] = ()) -> Presentation:
        """Relators ``t_j x t_j^-1 phi_j(x)^-1`` for every stable letter and base generator."""
        stables = [n for n, _ in self.endos]
        names = stables + list(self.base.names) if stable_first else list(self.base.names) + stables
        alpha = Alphabet(names)
        rels = []
        for t_name, phi in self.endos:
            t = alpha.gen(t_name)
            for b_name, img in zip(self.base.names, phi.images):
                x = alpha.gen(b_name)
                img_w = _rename(img, alpha)
                rels.append(product(alpha, [t, x, invert(t), invert(img_w)]))
        return Presentation(alpha, rels, name, assumptions)


def _rename(w: Word, target: Alphabet) -> Word:
    """Move a word to another alphabet by generator name."""
    src = w.alphabet
    m = {i + 1: target.index(n) + 1 for i, n in enumerate(src.names)}
    return Word.from_reduced(target, tuple(m[x] if x > 0 else -m[-x] for x in w.letters))


# --- normal forms ----------------------------------------------------------------

@dataclass(frozen=True)
class Syllable:
    kind: str                    # "base" or "stable"
    word: Word | None = None     # base payload
    exponent: int = 0            # stable payload

    def letters(self, t: int) -> tuple[int, ...]:
        if self.kind == "base":
            return self.word.letters  # type: ignore[union-attr]
        return (t if self.exponent > 0 else -t,) * abs(self.exponent)


@dataclass(frozen=True)
class NormalForm:
    syllables: tuple[Syllable, ...]
    alphabet: Alphabet
    stable: str
    kind: str                    # "britton" or "freeprod"

    @property
    def t(self) -> int:
        return self.alphabet.index(self.stable) + 1

    def to_word(self) -> Word:
        out: tuple[int, ...] = ()
        for s in self.syllables:
            out = out + s.letters(self.t)
        return Word(self.alphabet, out)

    def is_trivial(self) -> bool:
        return not self.syllables

    def stable_count(self) -> int:
        return sum(abs(s.exponent) for s in self.syllables if s.kind == "stable")

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        parts = []
        for s in self.syllables:
            if s.kind == "base":
                parts.append(f"[{format_word(Word.from_reduced(self.alphabet, s.word.letters))}]")
            else:
                parts.append(f"[{self.stable}^{s.exponent}]")
        return "".join(parts)


def _syllables(letters: Sequence[int], alphabet: Alphabet, t: int) -> tuple[Syllable, ...]:
    out: list[Syllable] = []
    i = 0
    while i < len(letters):
        j = i
        if abs(letters[i]) == t:
            e = 0
            while j < len(letters) and abs(letters[j]) == t:
                e += 1 if letters[j] > 0 else -1
                j += 1
            out.append(Syllable("stable", exponent=e))
        else:
            while j < len(letters) and abs(letters[j]) != t:
                j += 1
            out.append(Syllable("base", word=Word.from_reduced(alphabet, tuple(letters[i:j]))))
        i = j
    return tuple(out)


def _raw(raw, alphabet: Alphabet) -> tuple[int, ...]:
    if isinstance(raw, Word):
        if raw.alphabet != alphabet:
            raise GogError(f"word over {raw.alphabet.names}, expected {alphabet.names}")
        return raw.letters
    if isinstance(raw, str):
        return parse(alphabet, raw).letters
    return tuple(raw)


def freeprod_normal_form(spec: FreeProductSpec, raw) -> NormalForm:
    """Alternating syllables; in ``K*<t>`` with ``K`` free this is free reduction."""
    a = spec.alphabet
    letters = reduce_letters(_raw(raw, a))
    return NormalForm(_syllables(letters, a, spec.t), a, spec.stable, "freeprod")


@dataclass(frozen=True)
class AscendingForm:
    """``t^-m k t^n`` with ``m, n >= 0`` and never ``m, n > 0`` with ``k`` in ``phi(K)``."""
    m: int
    k: tuple[int, ...]
    n: int


def ascending_form(spec: AscendingHnnSpec, raw) -> AscendingForm:
    """Canonical form: push ``t`` right (``t x = phi(x) t``) and ``t^-1`` left, then pinch."""
    t = spec.t
    m, n = 0, 0
    k: tuple[int, ...] = ()
    for x in _raw(raw, spec.alphabet):
        if x == t:
            n += 1
        elif x == -t:
            if n > 0:
                n -= 1
            else:
                # t^-m k t^-1 = t^-(m+1) phi(k)
                m += 1
                k = _apply_base(spec.endo, k)
        else:
            k = concat_letters(k, spec.power_image(x, n))
        while m > 0 and n > 0:
            pre = spec.preimage(k)
            if pre is None:
                break
            k, m, n = pre, m - 1, n - 1
    return AscendingForm(m, k, n)


def britton_normal_form(spec: AscendingHnnSpec, raw) -> NormalForm:
    """Britton-reduced and canonical normal form in ``K*_phi``.

    Pinches ``t k t^-1 -> phi(k)`` always apply; ``t^-1 k t -> phi^-1(k)``
    applies exactly when the Stallings graph of ``phi(K)`` accepts ``k``,
    and the membership witness is the preimage.
    """
    f = ascending_form(spec, raw)
    a = spec.alphabet
    syl: list[Syllable] = []
    if f.m:
        syl.append(Syllable("stable", exponent=-f.m))
    if f.k:
        syl.append(Syllable("base", word=Word.from_reduced(a, f.k)))
    if f.n:
        syl.append(Syllable("stable", exponent=f.n))
    return NormalForm(tuple(syl), a, spec.stable, "britton")


def flatten(nf: NormalForm) -> Word:
    return nf.to_word()


# --- Bass-Serre projection ----------------------------------------------------------

@dataclass(frozen=True)
class TreeProjection:
    """Vertices as ``(vertex_type, coset_representative)``; ``'K'`` or ``'T'`` (= ``<t>``)."""
    vertices: tuple[tuple[str, Word], ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def describe(self) -> list[str]:
        out = []
        for kind, rep in self.vertices:
            group = "K" if kind == "K" else "<t>"
            out.append(f"{format_word(rep) or '1'}{group}")
        return out


def bass_serre_projection(nf: NormalForm) -> TreeProjection:
    a = nf.alphabet
    t = nf.t
    if nf.kind == "freeprod":
        verts: list[tuple[str, Word]] = []
        prefix: tuple[int, ...] = ()
        for s in nf.syllables:
            verts.append(("K" if s.kind == "base" else "T", Word.from_reduced(a, prefix)))
            prefix = prefix + s.letters(t)
        if not verts:
            verts.append(("K", Word.identity(a)))
        return TreeProjection(tuple(verts))
    # HNN tree: vertices are K-cosets, one edge per stable letter
    verts = [("K", Word.identity(a))]
    prefix = ()
    for x in nf.to_word().letters:
        prefix = prefix + (x,)
        if abs(x) == t:
            verts.append(("K", Word.from_reduced(a, prefix)))
    return TreeProjection(tuple(verts))


# --- rays --------------------------------------------------------------------------

TAIL_KINDS = ("stable+", "stable-", "base-endo", "periodic")


@dataclass(frozen=True)
class Tail:
    kind: str
    pattern: Word | None = None          # periodic
    endo: Endomorphism | None = None     # base-endo, over the base alphabet
    seed: Word | None = None             # base-endo


@dataclass(frozen=True)
class RayDescriptor:
    group: FreeProductSpec
    prefix: Word
    tail: Tail

    def __post_init__(self):
        a = self.group.alphabet
        if self.prefix.alphabet != a:
            raise GogError("prefix must be a word over base + stable letter")
        tl = self.tail
        if tl.kind not in TAIL_KINDS:
            raise GogError(f"unknown tail kind {tl.kind!r}")
        if tl.kind == "periodic":
            p = tl.pattern
            if p is None or not p or p.alphabet != a:
                raise GogError("periodic tail needs a nonempty pattern over the group alphabet")
            if p.letters[0] == -p.letters[-1]:
                raise GogError("periodic pattern must be cyclically reduced")
        if tl.kind == "base-endo":
            if tl.endo is None or tl.seed is None or not tl.seed:
                raise GogError("base-endo tail needs an endomorphism and a nonempty seed")
            if tl.endo.alphabet != self.group.base or tl.seed.alphabet != self.group.base:
                raise GogError("base-endo tail must live over the base alphabet")
            img = apply(tl.endo, tl.seed)
            if len(img) <= len(tl.seed) or img.letters[: len(tl.seed)] != tl.seed.letters:
                raise GogError("seed must be a proper prefix of its image")

    # --- stream ---------------------------------------------------------------
    def tail_letters(self, k: int) -> tuple[int, ...]:
        """First ``k`` letters of the tail stream."""
        tl = self.tail
        t = self.group.t
        if tl.kind == "stable+":
            return (t,) * k
        if tl.kind == "stable-":
            return (-t,) * k
        if tl.kind == "periodic":
            p = tl.pattern.letters  # type: ignore[union-attr]
            reps = k // len(p) + 1
            return (p * reps)[:k]
        cur = tl.seed.letters  # type: ignore[union-attr]
        while len(cur) < k:
            cur = _apply_base(tl.endo, cur)  # type: ignore[arg-type]
        return cur[:k]

    def point(self, k: int) -> Word:
        return Word(self.group.alphabet, self.prefix.letters + self.tail_letters(k))

    def with_prefix(self, g: Word) -> "RayDescriptor":
        return RayDescriptor(self.group, product(self.group.alphabet, [g, self.prefix]), self.tail)

    # --- JSON -----------------------------------------------------------------
    def to_json(self) -> dict:
        tl = self.tail
        tail: dict = {"kind": tl.kind}
        if tl.kind == "periodic":
            tail["pattern"] = format_word(tl.pattern)  # type: ignore[arg-type]
        if tl.kind == "base-endo":
            tail["endo"] = tl.endo.as_dict()  # type: ignore[union-attr]
            tail["seed"] = format_word(tl.seed)  # type: ignore[arg-type]
        return {"group": self.group.to_json(), "prefix": format_word(self.prefix), "tail": tail}

    @classmethod
    def from_json(cls, data: dict | str) -> "RayDescriptor":
        if isinstance(data, str):
            data = json.loads(data)
        g = data.get("group", {"base": ["a", "b"], "stable": "t"})
        spec = FreeProductSpec(Alphabet(g["base"]), g.get("stable", "t"))
        a = spec.alphabet
        prefix = parse(a, data.get("prefix", ""))
        td = data["tail"]
        kind = td["kind"]
        if kind == "periodic":
            tail = Tail(kind, pattern=parse(a, td["pattern"]))
        elif kind == "base-endo":
            endo = Endomorphism.from_strings(spec.base, td["endo"])
            tail = Tail(kind, endo=endo, seed=parse(spec.base, td["seed"]))
        else:
            tail = Tail(kind)
        return cls(spec, prefix, tail)


T_FINITE_BASE = "T-finite-base"
T_FINITE_STABLE = "T-finite-stable"
T_INFINITE = "T-infinite"


def classify_ray(rd: RayDescriptor) -> str:
    tl = rd.tail
    if tl.kind in ("stable+", "stable-"):
        return T_FINITE_STABLE
    if tl.kind == "base-endo":
        return T_FINITE_BASE
    t = rd.group.t
    letters = tl.pattern.letters  # type: ignore[union-attr]
    has_t = any(abs(x) == t for x in letters)
    has_base = any(abs(x) != t for x in letters)
    if has_t and has_base:
        return T_INFINITE
    return T_FINITE_STABLE if has_t else T_FINITE_BASE


def classify_truncation(rd: RayDescriptor, k: int) -> str:
    """Verdict read from the finite points at depths ``k`` and ``2k``."""
    nf1 = freeprod_normal_form(rd.group, rd.point(k))
    nf2 = freeprod_normal_form(rd.group, rd.point(2 * k))
    if len(nf2.syllables) > len(nf1.syllables):
        return T_INFINITE
    last = nf2.syllables[-1]
    return T_FINITE_BASE if last.kind == "base" else T_FINITE_STABLE


LANDS = "lands"
LANDS_BY_HYPOTHESIS = "lands-by-hypothesis"
UNKNOWN = "unknown"


def landing_verdict(rd: RayDescriptor, base_pair_has_rayCT: bool = False,
                    stable_pair_has_rayCT: bool = False) -> str:
    """T-infinite rays land outright; T-finite rays only through the component hypotheses."""
    c = classify_ray(rd)
    if c == T_INFINITE:
        return LANDS
    flag = base_pair_has_rayCT if c == T_FINITE_BASE else stable_pair_has_rayCT
    return LANDS_BY_HYPOTHESIS if flag else UNKNOWN


def omega_membership(rd: RayDescriptor) -> bool:
    """Is the endpoint a translate ``h . t^(+-inf)``?"""
    return classify_ray(rd) == T_FINITE_STABLE


# --- presentation surgery --------------------------------------------------------------

def compose_amalgam(h: Presentation, q_gens: Sequence[Word], phi: Endomorphism | Sequence[Word],
                    stable: str = "t", name: str = "",
                    assumptions: Iterable[str] = ()) -> Presentation:
    """Add a stable letter ``t`` with relators ``t q_i t^-1 phi(q_i)^-1``.

    ``phi`` is either an endomorphism of the abstract free group on the
    ``q_gens`` (images spelled through ``q_gens``) or explicit image words
    over ``h``'s alphabet.  Purely syntactic.
    """
    if stable in h.alphabet.names:
        raise GogError(f"stable letter {stable!r} collides with an existing generator")
    for q in q_gens:
        if q.alphabet != h.alphabet:
            raise GogError("q_gens must be words in the presentation's generators")
    if isinstance(phi, Endomorphism):
        if len(phi.alphabet) != len(q_gens):
            raise GogError(f"endomorphism rank {len(phi.alphabet)} != {len(q_gens)} q_gens")
        images = []
        for img in phi.images:
            parts = [q_gens[abs(x) - 1] if x > 0 else invert(q_gens[abs(x) - 1]) for x in img.letters]
            images.append(product(h.alphabet, parts))
    else:
        images = list(phi)
        if len(images) != len(q_gens):
            raise GogError("need one image per q_gen")
    alpha = h.alphabet.extend(stable)
    t = alpha.gen(stable)
    rels = [_rename(r, alpha) for r in h.relators]
    for q, img in zip(q_gens, images):
        rels.append(product(alpha, [t, _rename(q, alpha), invert(t), invert(_rename(img, alpha))]))
    return Presentation(alpha, rels, name or f"{h.name}*{stable}",
                        tuple(h.assumptions) + tuple(assumptions))
