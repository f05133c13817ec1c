import math
from fractions import Fraction

import numpy as np
import pytest

from oacspectra import (
    AlgebraicRate,
    CodeParams,
    NoRootIsolation,
    classify_species,
    find_zero_pairs,
    hds_soft,
    parse_poly,
    psi1_closed,
    psi2_closed,
    psi3_analytic,
    reduce_mod_alpha,
    scan_genus,
    species_audit,
)
from oacspectra.algebraic import poly_from_ints, poly_to_str

PHI = (1.0 + math.sqrt(5.0)) / 2.0


def test_parse_poly():
    assert parse_poly("x^2-x-1") == (-1, -1, 1)
    assert parse_poly("x^3 - x - 1") == (-1, -1, 0, 1)
    assert parse_poly("2x^2 + 3") == (3, 0, 2)
    assert parse_poly("x**2-2") == (-2, 0, 1)
    with pytest.raises(ValueError):
        parse_poly("x^2 + spam")


def test_poly_to_str_roundtrip():
    assert poly_to_str(poly_from_ints((-1, -1, 1))) == "x^2 - x - 1"
    assert poly_to_str(poly_from_ints((2, -1))) == "-x + 2"
    assert poly_to_str(()) == "0"


def test_root_isolation(golden, plastic):
    assert golden.root_float == pytest.approx(PHI, abs=1e-12)
    assert plastic.root_float == pytest.approx(1.3247179572447460, abs=1e-12)
    assert golden.r_float == pytest.approx(math.log2(PHI), abs=1e-12)
    sqrt2 = AlgebraicRate.parse("x^2-2")
    assert sqrt2.r_float == pytest.approx(0.5, abs=1e-12)


def test_root_isolation_rejects_bad_alpha():
    with pytest.raises(NoRootIsolation):
        AlgebraicRate.parse("x-2")  # degree 1
    with pytest.raises(NoRootIsolation):
        AlgebraicRate.parse("x^2-3x+2")  # roots at the bracket endpoints
    with pytest.raises(NoRootIsolation):
        AlgebraicRate.parse("x^4-5x^2+6")  # sqrt2 and sqrt3 both inside (1,2)
    with pytest.raises(NoRootIsolation):
        AlgebraicRate.parse("x^4-5x^2+4")  # no root inside (1,2)
    with pytest.raises(NoRootIsolation):
        AlgebraicRate.parse("x^4-2x^3+x^2")  # repeated roots


def test_sign_at_root(golden):
    assert golden.sign_at_root(poly_from_ints((-1, -1, 1))) == 0
    assert golden.sign_at_root(poly_from_ints((-1, 1))) > 0  # x - 1
    assert golden.sign_at_root(poly_from_ints((-2, 1))) < 0  # x - 2


def test_reduce_mod_alpha_reference():
    # x^3 = 2x + 1 over the golden field
    assert reduce_mod_alpha((0, 0, 0, 1), (-1, -1, 1)) == poly_from_ints((1, 2))
    assert reduce_mod_alpha((-1, -1, 1), (-1, -1, 1)) == ()
    # x^4 - x^3 - 1 reduces to x (the second golden zero-pair witness)
    assert reduce_mod_alpha((-1, 0, 0, -1, 1), (-1, -1, 1)) == poly_from_ints((0, 1))
    with pytest.raises(ValueError):
        reduce_mod_alpha((1, 1), (1, 2))  # not monic


def test_psi1_closed_values():
    v, j1 = psi1_closed(1.0)
    assert (v, j1) == (0, 0)
    v, j1 = psi1_closed(0.5)
    assert j1 == 3
    assert v == pytest.approx(1.1715728752538097, abs=1e-12)
    # the cutoff steps from 1 to 2 when 2^r crosses the golden ratio
    assert psi1_closed(math.log2(PHI) + 1e-4)[1] == 1
    assert psi1_closed(math.log2(PHI) - 1e-4)[1] == 2


def test_psi2_closed_values():
    c = psi2_closed(0.5)
    assert (c.j21, c.j22) == (0, 6)
    assert c.kappa2 == (3, 2, 2, 1, 1, 1)
    assert c.psi_00 == 0.0
    assert c.value == pytest.approx(2.2573593128807148, abs=1e-12)
    assert psi2_closed(1.0).value == 0.0


def test_psi2_exception_band():
    # between ~0.8114 and 1 the two-flip limit drops below the one-flip limit
    for r in (0.85, 0.9, 0.95):
        v1, _ = psi1_closed(r)
        c2 = psi2_closed(r)
        x = 2.0 ** r - 1.0
        assert v1 == pytest.approx(1.0 - x, abs=1e-12)
        assert c2.value == pytest.approx((1.0 - x * x) / 2.0, abs=1e-12)
        assert v1 > c2.value
        assert c2.value / v1 == pytest.approx(2.0 ** (r - 1.0), abs=1e-9)


def test_psi12_match_soft_enumeration():
    # closed forms against the truncated enumeration at a generic rate
    r, n = 0.55, 40
    p = CodeParams(n, r)
    t = hds_soft(p, [1, 2])
    assert psi1_closed(r)[0] == pytest.approx(t.psi[1], abs=1e-9)
    assert psi2_closed(r).value == pytest.approx(t.psi[2], abs=1e-9)


def test_zero_pairs(golden, plastic):
    assert find_zero_pairs(golden).pairs == ((1, 1),)
    zp = find_zero_pairs(plastic)
    assert set(zp.pairs) == {(1, 2), (4, 1)}
    assert zp.certified
    assert find_zero_pairs(0.5).pairs == ()
    assert not find_zero_pairs(0.5).certified
    assert find_zero_pairs(AlgebraicRate.parse("x^2-2")).pairs == ()


def test_classify_species_reference(plastic):
    sp = classify_species(3, 1, 1, -1, plastic)  # x^3 + x - 1
    assert sp.cls == "mortal" and sp.lifespan == 1
    assert sp.reduced == poly_from_ints((0, 2))
    assert sp.contribution == poly_from_ints((1, 2, -2))
    sp = classify_species(5, 4, -1, -1, plastic)  # x^5 - x^4 - 1
    assert sp.cls == "immortal" and sp.lifespan is None
    sp = classify_species(2, 1, -1, -1, plastic)  # x^2 - x - 1, negative branch
    assert sp.cls == "mortal" and sp.sign < 0 and sp.lifespan == 6
    assert sp.contribution == poly_from_ints((7, 0, -2))
    sp = classify_species(3, 2, 1, -1, plastic)  # x^3 + x^2 - 1: boundary extinct
    assert sp.cls == "extinct" and sp.lifespan == 0
    with pytest.raises(ValueError):
        classify_species(2, 2, 1, 1, plastic)


def test_genus_counts_plastic(plastic):
    by_genus = {
        (s1, s0): scan_genus(s1, s0, plastic)
        for s1, s0 in ((1, 1), (1, -1), (-1, 1), (-1, -1))
    }
    assert len(by_genus[(1, 1)]) == 0
    assert len(by_genus[(1, -1)]) == 3
    assert len(by_genus[(-1, 1)]) == 21
    assert len(by_genus[(-1, -1)]) == 36
    tally = {
        g: {c: sum(1 for s in sps if s.cls == c) for c in ("mortal", "immortal")}
        for g, sps in by_genus.items()
    }
    assert tally[(1, -1)] == {"mortal": 2, "immortal": 0}
    assert tally[(-1, 1)] == {"mortal": 10, "immortal": 0}
    assert tally[(-1, -1)] == {"mortal": 16, "immortal": 2}


def test_genus_counts_golden(golden):
    rows = species_audit(golden)
    mortal = [(g, s) for g, s in rows if s.cls == "mortal"]
    immortal = [(g, s) for g, s in rows if s.cls == "immortal"]
    assert len(immortal) == 1 and immortal[0][1].k == 2
    assert len(mortal) == 1
    g, s = mortal[0]
    assert (g, s.k, s.i, s.lifespan) == ((-1, -1), 3, 2, 2)
    assert s.contribution == poly_from_ints((1,))  # total contribution is exactly 1


def test_psi3_golden_law(golden):
    for n in range(5, 21):
        res = psi3_analytic(golden, n)
        assert res.stable and res.horizon == 5
        assert res.value == pytest.approx((n - 1) / 4.0, abs=1e-9)
    assert psi3_analytic(golden, 9).value == pytest.approx(2.0, abs=1e-12)


def test_psi3_plastic_law(plastic):
    x = plastic.root_float
    for n in range(14, 21):
        res = psi3_analytic(plastic, n)
        assert res.stable and res.horizon == 14
        assert res.value == pytest.approx((-12 * x * x - 17 * x + 79) / 4.0 + n / 2.0, abs=1e-9)
    below = psi3_analytic(plastic, 10)
    assert not below.stable


def test_psi3_equals_soft_enumeration(golden, plastic):
    # the species sum is an exact regrouping of the d=3 enumeration
    for rate in (golden, plastic):
        for n in (6, 10, 15, 20):
            s = hds_soft(CodeParams(n, rate), [3]).psi[3]
            assert psi3_analytic(rate, n).value == pytest.approx(float(s), abs=1e-9)


def test_psi3_slope_matches_pair_count(golden, plastic):
    for rate, slope in ((golden, 0.25), (plastic, 0.5)):
        a = psi3_analytic(rate, 19).value
        b = psi3_analytic(rate, 20).value
        assert b - a == pytest.approx(slope, abs=1e-9)


def test_psi3_convergent_sqrt2():
    rate = AlgebraicRate.parse("x^2-2")
    res20 = psi3_analytic(rate, 20)
    res40 = psi3_analytic(rate, 40)
    assert res20.zero_pairs == ()
    assert res40.value == pytest.approx(res20.value, abs=1e-9)  # flat beyond the horizon
    s = hds_soft(CodeParams(20, 0.5), [3]).psi[3]
    assert res20.value == pytest.approx(float(s), abs=1e-9)


def test_trinomial_sign_scan(golden):
    # at the golden rate x^j3 - x^j2 - x^j1 >= 0, zero iff consecutive gaps
    zeros = []
    for j1 in range(1, 13):
        for j2 in range(j1 + 1, 14):
            for j3 in range(j2 + 1, 15):
                poly = [Fraction(0)] * (j3 + 1)
                poly[j3] += 1
                poly[j2] -= 1
                poly[j1] -= 1
                sgn = golden.sign_at_root(tuple(poly))
                assert sgn >= 0
                if sgn == 0:
                    zeros.append((j1, j2, j3))
    assert zeros == [(j, j + 1, j + 2) for j in range(1, 13)]


def test_trinomial_positive_above_golden():
    r = 0.75  # 2^r > golden ratio
    vals = [
        2.0 ** (j3 * r) - 2.0 ** (j2 * r) - 2.0 ** (j1 * r)
        for j1 in range(1, 31)
        for j2 in range(j1 + 1, 31)
        for j3 in range(j2 + 1, 31)
    ]
    assert min(vals) > 0.0
