import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypgrp.examples import baker_riley, genus2
from hypgrp.smallcancellation import (NotSmallCancellation, Presentation, PresentationFormatError,
                                      check_metric, dehn_reduce, is_dehn_reduced, is_trivial,
                                      piece_table, symmetrize, words_equal)
from hypgrp.words import Alphabet, Word, free_reduce, parse
from oracles import brute_pieces, inv, mul, red
from strategies import AB, words

ABCD = Alphabet("abcd")


def pres(alpha, *rels):
    return Presentation(alpha, [parse(alpha, r) for r in rels])


def cyclic_contains(s, piece):
    doubled = tuple(s) + tuple(s)
    n = len(piece)
    return any(doubled[i:i + n] == tuple(piece) for i in range(len(s)))


def test_symmetrize_examples():
    assert {str(x) for x in symmetrize(pres(AB, "ab"))} == {"ab", "ba", "BA", "AB"}
    assert len(symmetrize(genus2())) == 16
    assert symmetrize(Presentation(AB, [])) == []


def test_presentation_dedup_and_cyclic_reduction():
    p = pres(AB, "abab", "baba", "BABA", "aabA")
    assert [str(r) for r in p.relators] == ["abab", "ab"]
    with pytest.raises(ValueError):
        pres(AB, "aA")


def test_piece_table_examples():
    t = piece_table(pres(AB, "abab"))
    assert t.max_piece == 3 and t.ratio == Fraction(3, 4)
    ok, t = check_metric(pres(AB, "abab"))
    assert not ok and str(t.witness[0]) in {"aba", "bab", "ABA", "BAB"}
    assert t.witness[1] != t.witness[2]
    ok, t = check_metric(genus2())
    assert ok and t.ratio == Fraction(1, 8) and t.max_piece == 1


def test_baker_riley_subpresentations_metric():
    fam = baker_riley(17)
    ok, t = check_metric(fam.G_cd)
    assert ok and t.ratio == Fraction(17, 130)
    ok, t = check_metric(fam.G_bcd)
    assert ok and t.ratio == Fraction(34, 231)


def test_baker_riley_full_presentation_piece_is_genuine():
    """The 34-letter piece reported for G lies in two distinct relators.

    Checked directly by cyclic substring search, independent of the piece
    table: the relator a b a^-1 C b^-1 of length 174 shares c2^16 c1 c2^17
    with the inverse of b c1 b^-1 C_1^-1, so the ratio is at least 34/174.
    """
    fam = baker_riley(17)
    G = fam.G
    c1, c2 = G.alphabet.letter("c1"), G.alphabet.letter("c2")
    piece = (c2,) * 16 + (c1,) + (c2,) * 17
    rels = [r.letters for r in G.relators]
    holders = [i for i, r in enumerate(rels) if cyclic_contains(r, piece) or cyclic_contains(inv(r), piece)]
    assert len(holders) >= 2
    short = min(len(rels[i]) for i in holders)
    assert short == 174 and Fraction(len(piece), short) > Fraction(1, 6)
    ok, t = check_metric(G)
    assert not ok and t.ratio == Fraction(17, 87)


def test_piece_table_matches_brute_force_random():
    rng = random.Random(11)
    letters = [1, -1, 2, -2, 3, -3]
    A = Alphabet("abc")
    for _ in range(200):
        rels = []
        for _ in range(rng.randint(1, 3)):
            while True:
                s = red(rng.choice(letters) for _ in range(rng.randint(2, 14)))
                if s and s[0] != -s[-1]:
                    break
            rels.append(s)
        p = Presentation(A, [Word(A, r) for r in rels])
        expect = brute_pieces([r.letters for r in p.relators])
        assert list(piece_table(p).per_relator) == expect


@pytest.mark.parametrize("r", [3, 4])
def test_piece_table_matches_brute_force_baker_riley(r):
    p = baker_riley(r).G_cd
    assert list(piece_table(p).per_relator) == brute_pieces([x.letters for x in p.relators])


def test_dehn_examples():
    g2 = genus2()
    rel = g2.relators[0]
    assert dehn_reduce(g2, rel)[0] == Word.identity(ABCD)
    w = parse(ABCD, "abc")
    assert dehn_reduce(g2, w) == (w, [])
    assert is_dehn_reduced(g2, Word.identity(ABCD))
    assert not is_dehn_reduced(g2, rel)


def test_dehn_rejects_non_c16():
    with pytest.raises(NotSmallCancellation):
        dehn_reduce(pres(AB, "abab"), parse(AB, "ab"))
    with pytest.raises(NotSmallCancellation):
        is_dehn_reduced(baker_riley(17).G, Word.identity(baker_riley(17).G.alphabet))


def test_dehn_tiebreak_deterministic():
    g2 = genus2()
    w = parse(ABCD, "abABcdCDabABcdCD")
    out1, tr1 = dehn_reduce(g2, w)
    out2, tr2 = dehn_reduce(g2, w)
    assert not out1 and tr1 == tr2 and tr1[0].position == 0


def _random_word(rng, n_gens, length):
    letters = [x for g in range(1, n_gens + 1) for x in (g, -g)]
    return red(rng.choice(letters) for _ in range(length))


@pytest.mark.parametrize("which", ["genus2", "G_cd"])
def test_dehn_soundness_on_trivial_words(which):
    p = genus2() if which == "genus2" else baker_riley(17).G_cd
    n = len(p.alphabet)
    rng = random.Random(5)
    rels = [r.letters for r in p.relators]
    count = 200 if which == "genus2" else 20
    for _ in range(count):
        parts = []
        for _ in range(rng.randint(1, 5)):
            g = _random_word(rng, n, rng.randint(0, 6))
            r = rng.choice(rels)
            if rng.random() < 0.5:
                r = inv(r)
            parts.append(mul(g, r, inv(g)))
        w = Word(p.alphabet, mul(*parts))
        out, trace = dehn_reduce(p, w)
        assert not out
        lengths = [len(w)] + [s.length_after for s in trace]
        assert all(b < a for a, b in zip(lengths, lengths[1:]))


def test_dehn_soundness_short_words_unchanged():
    p = genus2()
    rng = random.Random(8)
    for _ in range(200):
        s = _random_word(rng, 4, rng.randint(1, p.girth // 2))
        if not s:
            continue
        w = Word(ABCD, s)
        assert dehn_reduce(p, w) == (w, [])
        assert not is_trivial(p, w)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3, 4, -4]), max_size=40))
def test_dehn_never_lengthens(s):
    p = genus2()
    w = free_reduce(ABCD, s)
    out, trace = dehn_reduce(p, w)
    assert len(out) <= len(w)
    assert is_dehn_reduced(p, out)
    assert words_equal(p, out, w)


def test_words_equal():
    g2 = genus2()
    assert words_equal(g2, parse(ABCD, "abAB"), parse(ABCD, "dcDC"))
    assert not words_equal(g2, parse(ABCD, "ab"), parse(ABCD, "ba"))


def test_file_roundtrip(tmp_path):
    p = baker_riley(3).G
    path = tmp_path / "g.pres"
    p.save(path)
    q = Presentation.load(path)
    assert q == p and q.name == p.name
    text = "# comment\ngens: a b\nrel: abAB  # commutator\n"
    assert Presentation.from_text(text).relators[0] == parse(AB, "abAB")


def test_file_format_errors():
    with pytest.raises(PresentationFormatError):
        Presentation.from_text("rel: ab\n")
    with pytest.raises(PresentationFormatError):
        Presentation.from_text("gens: a b\nrel: az\n")
    with pytest.raises(PresentationFormatError):
        Presentation.from_text("gens: a b\nbogus\n")
