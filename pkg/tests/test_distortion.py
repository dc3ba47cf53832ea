import json
import math

import pytest

from hypgrp import gog, stallings
from hypgrp.cayley import build_ball
from hypgrp.distortion import (baker_riley_witnesses, decimal, distortion_table_exhaustive, endo_witnesses,
                               replay, witness_lower_bound_table)
from hypgrp.examples import D_ALPHA, ascending_demo, baker_riley, free_group
from hypgrp.substitution import Endomorphism
from hypgrp.words import Word, parse
from oracles import red
from strategies import AB

R, L = 17, 2


@pytest.fixture(scope="module")
def certs():
    return baker_riley_witnesses(R, L, 12)


def _sigma_count_matrix(r, l, i):
    """Letter counts of d_j -> D_ij straight from the block definition."""
    cols = []
    for j in (1, 2):
        exps = [r * (i * l + j) + k for k in range(1, r + 1)]
        cols.append((r, sum(exps)))
    return [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]


def _matmul(a, b):
    return [[a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]]]


def test_exhaustive_squares():
    ball = build_ball(free_group(2), None, 8)
    h = stallings.build([parse(AB, "aa"), parse(AB, "bb")], AB)
    t = distortion_table_exhaustive(ball, h, 8)
    assert [row.inner for row in t.rows] == [0, 0, 1, 1, 2, 2, 3, 3, 4]
    assert all(t.rows[2 * k].inner / k <= 2 for k in range(1, 5))
    assert t.monotone and t.method == "exhaustive"


def test_exhaustive_whole_group_is_identity():
    ball = build_ball(free_group(2), None, 5)
    t = distortion_table_exhaustive(ball, "whole", 5)
    assert [row.inner for row in t.rows] == list(range(6))
    z = distortion_table_exhaustive(ball, "whole", 0)
    assert [(row.n, row.inner) for row in z.rows] == [(0, 0)]
    with pytest.raises(ValueError):
        distortion_table_exhaustive(ball, "whole", 6)


def test_witness_outer_lengths(certs):
    assert len(certs) == 13
    for c in certs:
        assert c.outer_length == 4 * c.n + 3
        assert str(c.outer) == " ".join(["b"] * c.n + ["c1"] + ["B"] * c.n + ["d1"] + ["b"] * c.n + ["C1"] + ["B"] * c.n)


def test_w0_inner_length(certs):
    c = certs[0]
    assert c.inner_length == 1037 == R + R * R * (L + 1) + R * (R + 1) // 2
    assert c.derivation == "expansion"
    fam = baker_riley(R, L)
    assert len(fam.inner_w(0)) == 1037
    assert fam.inner_w(0) == fam.Dij(1, 1)


def test_w1_matches_direct_matrix_product(certs):
    fam = baker_riley(R, L)
    u1 = fam.inner_u(1).letters
    assert len(u1) == 459
    mats = {i: _sigma_count_matrix(R, L, i) for i in (1, 2)}
    acc = [[1, 0], [0, 1]]
    for y in u1:
        acc = _matmul(acc, mats[y])
    assert certs[1].inner_length == acc[0][0] + acc[1][0]


def test_log_bounds_enclose_exact_values(certs):
    fam = baker_riley(R, L)
    for n in (0, 1, 2):
        lo, hi = fam.inner_w_log10_bounds(n)
        v = certs[n].inner_length
        assert v is not None
        exact = math.log10(v) if n < 2 else (len(decimal(v)) - 1 + math.log10(int(decimal(v)[:15]) / 1e14))
        assert lo <= exact + 1e-9 and exact - 1e-9 <= hi


def test_double_exponential_signature(certs):
    for n in range(2, 13):
        ratio = certs[n].log10_lo / certs[n - 1].log10_hi
        assert ratio >= 1.5
    assert witness_lower_bound_table(certs).monotone


def test_replay_n0_checks_every_step(certs):
    fam = baker_riley(R, L)
    out = replay(certs[0], fam, check_each=True)
    d = fam.Dij(1, 1)
    assert [x - 2 for x in out.letters] == list(d.letters)   # d1, d2 sit at 3, 4 in c1 c2 d1 d2 b


def test_replay_rejects_tampering(certs):
    import dataclasses
    from hypgrp.distortion import TraceStep
    bad = dataclasses.replace(certs[0], trace=(TraceStep("sigma", 2),))
    with pytest.raises(ValueError):
        replay(bad)
    far = dataclasses.replace(certs[2], trace=None)
    with pytest.raises(ValueError):
        replay(far)


def test_certificate_json(certs):
    j = certs[1].to_json()
    json.dumps(j)
    assert j["outer_length"] == 7 and j["inner_length"] == decimal(certs[1].inner_length)
    assert j["trace"]["sigma_steps"] == 459


def test_endo_witnesses_rows():
    demo = ascending_demo()
    rows = witness_lower_bound_table(endo_witnesses(demo.endo, parse(AB, "a"), 10)).rows
    assert [(r.n, r.inner) for r in rows] == [(2 * n + 1, 2 ** n) for n in range(11)]
    assert witness_lower_bound_table([]).rows == ()


def test_witness_never_exceeds_exhaustive():
    spec = ascending_demo()
    ball = build_ball(spec, None, 7)

    def inner(w: Word):
        f = gog.ascending_form(spec, w.letters)
        return len(f.k) if f.m == 0 and f.n == 0 else None

    ex = distortion_table_exhaustive(ball, inner, 7)
    for c in endo_witnesses(spec.endo, parse(AB, "a"), 3):
        assert c.inner_length <= ex.rows[c.outer_length].inner


def test_decimal_handles_huge_values():
    v = 10 ** 5000 + 7
    s = decimal(v)
    assert len(s) == 5001 and s.endswith("7")
