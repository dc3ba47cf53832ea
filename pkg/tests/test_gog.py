import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypgrp import gog
from hypgrp.examples import CD_ALPHA, ascending_demo, baker_riley, baker_riley_pipeline, thm_endo_pipeline
from hypgrp.smallcancellation import Presentation
from hypgrp.substitution import Endomorphism, apply
from hypgrp.words import Alphabet, Word, free_reduce, parse
from strategies import AB, raw_letters, words

SPEC = ascending_demo()
G1 = gog.FreeProductSpec(AB, "t")
ABT = SPEC.alphabet


def bnf(text):
    return gog.britton_normal_form(SPEC, text)


def fnf(text):
    return gog.freeprod_normal_form(G1, text)


def test_spec_validation():
    with pytest.raises(gog.GogError):
        gog.AscendingHnnSpec(Endomorphism.from_strings(AB, ["a", "a"]))
    with pytest.raises(gog.GogError):
        gog.AscendingHnnSpec(SPEC.endo, "a")
    with pytest.raises(gog.GogError):
        gog.FreeProductSpec(AB, "b")


def test_britton_examples():
    assert str(bnf("taT")) == "[ab]"
    assert bnf("taT").stable_count() == 0
    assert str(bnf("T abba t")) == "[ab]"
    nf = bnf("Tat")
    assert str(nf) == "[t^-1][a][t^1]"
    assert nf.to_word() == parse(ABT, "Tat")
    assert bnf("tT").is_trivial()


def test_freeprod_examples():
    assert str(fnf("attA")) == "[a][t^2][A]"
    assert fnf("tT").is_trivial()
    assert str(fnf("a t 1 t")) == "[a][t^2]"


def test_bass_serre_examples():
    # the tree path of [a][t^2][b]: K-vertex, <t>-vertex, K-vertex
    p = gog.bass_serre_projection(fnf("attb"))
    assert [k for k, _ in p.vertices] == ["K", "T", "K"]
    assert p.length == 2
    assert gog.bass_serre_projection(fnf("abA")).length == 0
    assert gog.bass_serre_projection(fnf("ttttt")).length == 0
    assert gog.bass_serre_projection(bnf("Tat")).length == 2


def test_bass_serre_no_backtracking():
    p = gog.bass_serre_projection(fnf("atbTaTTb"))
    reps = [str(r) for _, r in p.vertices]
    assert len(set(zip([k for k, _ in p.vertices], reps))) == len(reps)


def _ray(prefix, kind, **kw):
    return gog.RayDescriptor(G1, parse(ABT, prefix), gog.Tail(kind, **kw))


THUE_TAIL = dict(endo=Endomorphism.from_strings(AB, ["ab", "ba"]), seed=parse(AB, "a"))


def test_classify_examples():
    assert gog.classify_ray(_ray("", "stable+")) == gog.T_FINITE_STABLE
    assert gog.classify_ray(_ray("", "base-endo", **THUE_TAIL)) == gog.T_FINITE_BASE
    assert gog.classify_ray(_ray("", "periodic", pattern=parse(ABT, "at"))) == gog.T_INFINITE


def test_landing_verdicts():
    inf = _ray("", "periodic", pattern=parse(ABT, "at"))
    stab = _ray("a", "stable-")
    base = _ray("t", "base-endo", **THUE_TAIL)
    for flags in [(False, False), (True, True)]:
        assert gog.landing_verdict(inf, *flags) == gog.LANDS
    assert gog.landing_verdict(stab, False, True) == gog.LANDS_BY_HYPOTHESIS
    assert gog.landing_verdict(stab, True, False) == gog.UNKNOWN
    assert gog.landing_verdict(base, False, True) == gog.UNKNOWN
    assert gog.landing_verdict(base, True, False) == gog.LANDS_BY_HYPOTHESIS


def test_omega_examples():
    assert gog.omega_membership(_ray("attt", "stable+"))
    assert not gog.omega_membership(_ray("", "periodic", pattern=parse(ABT, "aT")))
    assert not gog.omega_membership(_ray("", "base-endo", **THUE_TAIL))


def test_ray_validation_and_json():
    with pytest.raises(gog.GogError):
        _ray("", "periodic", pattern=Word.identity(ABT))
    with pytest.raises(gog.GogError):
        _ray("", "base-endo", endo=Endomorphism.from_strings(AB, ["ba", "ab"]), seed=parse(AB, "a"))
    with pytest.raises(gog.GogError):
        _ray("", "spiral")
    for rd in [_ray("aT", "stable+"), _ray("", "periodic", pattern=parse(ABT, "atb")),
               _ray("tb", "base-endo", **THUE_TAIL)]:
        back = gog.RayDescriptor.from_json(rd.to_json())
        assert back == rd
    assert _ray("", "base-endo", **THUE_TAIL).tail_letters(8) == parse(AB, "abbabaab").letters


tails = st.sampled_from([
    ("stable+", {}), ("stable-", {}), ("base-endo", THUE_TAIL),
    ("periodic", {"pattern": parse(ABT, "at")}), ("periodic", {"pattern": parse(ABT, "aTTb")}),
    ("periodic", {"pattern": parse(ABT, "ab")}), ("periodic", {"pattern": parse(ABT, "tt")}),
])


@settings(max_examples=80, deadline=None)
@given(words(ABT, 8), tails)
def test_truncation_verdict_stabilizes(prefix, tail):
    kind, kw = tail
    rd = gog.RayDescriptor(G1, prefix, gog.Tail(kind, **kw))
    assert gog.classify_truncation(rd, 16 + 2 * len(prefix)) == gog.classify_ray(rd)


@settings(max_examples=80, deadline=None)
@given(words(ABT, 8), words(ABT, 8), tails)
def test_omega_invariant_under_prefix(prefix, g, tail):
    kind, kw = tail
    rd = gog.RayDescriptor(G1, prefix, gog.Tail(kind, **kw))
    assert gog.omega_membership(rd.with_prefix(g)) == gog.omega_membership(rd)


@settings(max_examples=100, deadline=None)
@given(raw_letters(3, 12))
def test_britton_idempotent(s):
    nf = gog.britton_normal_form(SPEC, s)
    again = gog.britton_normal_form(SPEC, nf.to_word())
    assert again == nf
    # exponent sum of t is a homomorphism to Z
    assert sum(1 if x == 3 else -1 for x in nf.to_word().letters if abs(x) == 3) == \
        sum(1 if x == 3 else -1 for x in s if abs(x) == 3)


@settings(max_examples=100, deadline=None)
@given(raw_letters(3, 10), raw_letters(3, 10))
def test_britton_multiplicative(s, u):
    a = gog.britton_normal_form(SPEC, s).to_word()
    b = gog.britton_normal_form(SPEC, u).to_word()
    assert gog.britton_normal_form(SPEC, a.letters + b.letters) == gog.britton_normal_form(SPEC, s + u)
    w = free_reduce(ABT, s)
    assert gog.britton_normal_form(SPEC, w.letters + w.inverse().letters).is_trivial()


@settings(max_examples=100, deadline=None)
@given(words(AB, 8))
def test_britton_pinches(k):
    phik = apply(SPEC.endo, k)
    t = 3
    pinched = gog.britton_normal_form(SPEC, (-t,) + phik.letters + (t,))
    assert pinched.to_word().letters == k.letters
    assert gog.britton_normal_form(SPEC, (t,) + k.letters + (-t,)).to_word().letters == phik.letters


@settings(max_examples=60, deadline=None)
@given(raw_letters(3, 14))
def test_freeprod_inverse(s):
    nf = gog.freeprod_normal_form(G1, s)
    w = nf.to_word()
    assert gog.freeprod_normal_form(G1, w.letters + w.inverse().letters).is_trivial()
    kinds = [x.kind for x in nf.syllables]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))


def test_compose_baker_riley():
    fam = baker_riley(17)
    g_bcd, g = baker_riley_pipeline(fam)
    assert g_bcd == fam.G_bcd
    assert g == fam.G
    rels = [str(r) for r in g_bcd.relators[-2:]]
    assert rels[0].startswith("b c1 B") and len(g_bcd.relators) == 6
    assert len(g.relators) == 9


def test_compose_identity():
    h = Presentation(AB, [parse(AB, "abAB")], "Z2")
    g = gog.compose_amalgam(h, [parse(AB, "a")], Endomorphism.identity(Alphabet("x")), "t")
    assert str(g.relators[-1]) == "taTA"
    with pytest.raises(gog.GogError):
        gog.compose_amalgam(h, [parse(AB, "a")], Endomorphism.identity(Alphabet("x")), "b")
    with pytest.raises(gog.GogError):
        gog.compose_amalgam(h, [parse(AB, "a"), parse(AB, "b")], Endomorphism.identity(Alphabet("x")))


def test_multi_hnn_relators():
    K = Alphabet(["x1", "x2"])
    phi = Endomorphism.from_strings(K, ["x1 x2", "x2 x1"])
    psi = Endomorphism.from_strings(K, ["x1 x1 x2", "x2"])
    res = thm_endo_pipeline(K, [("t1", phi), ("t2", psi)], Endomorphism.from_strings(Alphabet(["p", "q"]), ["p q", "q p"]))
    H = res.H
    assert len(H.relators) == 4
    assert "hyperbolic" in H.assumptions
    # relator reads t x t^-1 phi(x)^-1
    assert str(H.relators[0]) == "t1 x1 T1 X2 X1"
    assert len(res.G.relators) == 6
    with pytest.raises(gog.GogError):
        gog.MultiHnnSpec(K, [("t1", phi)])


def test_britton_kills_conjugated_relators():
    import random
    from oracles import inv, mul
    rng = random.Random(4)
    rels = [r.letters for r in SPEC.presentation().relators]
    letters = [1, -1, 2, -2, 3, -3]
    for _ in range(200):
        parts = []
        for _ in range(rng.randint(1, 4)):
            g = tuple(rng.choice(letters) for _ in range(rng.randint(0, 6)))
            r = rng.choice(rels)
            parts.append(mul(g, r if rng.random() < 0.5 else inv(r), inv(g)))
        assert gog.britton_normal_form(SPEC, mul(*parts)).is_trivial()
