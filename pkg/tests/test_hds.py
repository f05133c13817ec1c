import math
from fractions import Fraction

import numpy as np
import pytest

from oacspectra import (
    BitBlock,
    CodeParams,
    IdentityViolation,
    NotInPartition,
    TooLarge,
    ccs_square_integral,
    codeword_hds,
    hds_binomial,
    hds_exhaustive,
    hds_fast,
    hds_hard,
    hds_identities_check,
    hds_mixed,
    hds_soft,
    hds_soft_and_hard,
    partition_cosets,
    psi_exact_by_masks,
    solve_asymptotic_ccs,
)

SQRT2 = math.sqrt(2.0)


def test_codeword_hds_reference(cp4):
    assert codeword_hds(BitBlock.from_string("0001"), 2, cp4) == 2
    assert codeword_hds(BitBlock.from_string("0001"), 0, cp4) == 1
    assert codeword_hds(BitBlock.from_string("0100"), 1, cp4) == 0
    with pytest.raises(NotInPartition):
        codeword_hds(BitBlock.from_string("01"), 1, cp4)


def test_exhaustive_reference_table(p4):
    t = hds_exhaustive(p4)
    assert t.counts.tolist() == [16, 20, 28, 12, 6]
    expect = [Fraction(1), Fraction(5, 4), Fraction(7, 4), Fraction(3, 4), Fraction(3, 8)]
    got = [Fraction(int(c), 16) for c in t.counts]
    assert got == expect
    assert np.allclose(t.psi, [float(v) for v in expect])


def test_exhaustive_n2():
    t = hds_exhaustive(CodeParams(2, 0.5))
    assert t.psi[2] == 0.5


def test_exhaustive_sum_identity():
    p = CodeParams(10, 0.5)
    t = hds_exhaustive(p)
    cp = partition_cosets(p)
    assert int(t.counts.sum()) == cp.pair_work()


def test_exhaustive_budget():
    with pytest.raises(TooLarge):
        hds_exhaustive(CodeParams(16, 0.5), pair_budget=1e4)


def test_masks_oracle_agrees_with_pairwise():
    # two independent exact routes over the full table
    p = CodeParams(12, 0.5)
    a = hds_exhaustive(p)
    b = psi_exact_by_masks(p, range(0, 13))
    assert np.allclose(a.psi, b.psi, atol=0)


def test_binomial_shape(f_half):
    p = CodeParams(20, 0.5)
    t = hds_binomial(p, f_half)
    base = 2.0 ** -10 * ccs_square_integral(f_half)
    assert t.psi[0] == pytest.approx(base)  # documented miss: psi(0;n) = 1 really
    assert t.psi[10] == pytest.approx(math.comb(20, 10) * base)


def test_binomial_rate_one():
    p = CodeParams(12, 1.0)
    f = solve_asymptotic_ccs(1.0, 256, 1e-12)
    t = hds_binomial(p, f)
    for d in (0, 3, 12):
        assert t.psi[d] == pytest.approx(math.comb(12, d) * 2.0 ** -12, rel=1e-9)


def test_soft_reference_d1(p4):
    # the four singleton shifts at r=1/2 clip to 2-sqrt2, sqrt2-1, 3-2sqrt2, 0
    t = hds_soft(p4, [1])
    expect = (2.0 - SQRT2) + (SQRT2 - 1.0) + (3.0 - 2.0 * SQRT2)
    assert t.psi[1] == pytest.approx(expect, abs=1e-9)
    assert t.psi[1] == pytest.approx(1.17157287525381, abs=1e-9)


def test_soft_d0_is_one(p4):
    assert hds_soft(p4, [0]).psi[0] == 1.0


def test_soft_doubles_at_full_distance():
    # alpha = 1 at d = n: one enumeration, prefactor 2^(1-d) instead of 2^-d
    p = CodeParams(6, 0.5)
    soft, hard = hds_soft_and_hard(p, [6])
    from oacspectra.shifts import IndexSet, tau_values_for_j

    vals = np.concatenate([v for _, v in tau_values_for_j(IndexSet.full(6), p)])
    assert soft.psi[6] == pytest.approx(2.0 ** (1 - 6) * np.maximum(1 - np.abs(vals), 0).sum())
    assert hard.psi[6] == pytest.approx(2.0 ** (1 - 6 - 1) * (np.abs(vals) < 1 - 1e-9).sum())


def test_hard_reference_values(p4):
    t = hds_hard(p4, [1])
    assert t.psi[1] == pytest.approx(1.5, abs=1e-12)  # six active singleton flips
    p2 = CodeParams(2, 0.5)
    assert hds_hard(p2, [2]).psi[2] == pytest.approx(hds_exhaustive(p2).psi[2])


def test_hard_exact_at_full_distance():
    # counting space: hard(d=n) equals the exhaustive count exactly
    for n in (6, 8, 10):
        p = CodeParams(n, 0.5)
        ex = hds_exhaustive(p)
        hd = hds_hard(p, [n])
        assert hd.psi[n] == pytest.approx(ex.psi[n], abs=0)


def test_fast_reference_values(f_half):
    p = CodeParams(20, 0.5)
    t = hds_fast(p, f_half, [19, 20])
    assert t.psi[20] == pytest.approx(0.0017, abs=5e-5)
    assert t.psi[19] == pytest.approx(20 * 1.7071 * 2.0 ** -11, rel=1e-3)
    with pytest.raises(ValueError):
        hds_fast(p, f_half, [2])


def test_fast_rate_one_alpha_doubling():
    p = CodeParams(12, 1.0)
    f = solve_asymptotic_ccs(1.0, 256, 1e-12)
    t = hds_fast(p, f, [11, 12])
    assert t.psi[12] == pytest.approx(2.0 ** -12, rel=1e-9)  # alpha doubles d = n
    assert t.psi[11] == pytest.approx(math.comb(12, 11) * 2.0 ** -13, rel=1e-9)


def test_mixed_covers_everything(f_half):
    p = CodeParams(20, 0.5)
    t = hds_mixed(p, f_half)
    assert t.covered() == list(range(21))
    methods = t.mixed_methods
    assert methods[1] == "soft" and methods[10] == "binomial" and methods[20] == "fast"


def test_identities_check_reference(p4, cp4, f_half):
    t = hds_exhaustive(p4)
    rep = hds_identities_check(t, cp4, f_half)
    assert rep.sum_psi == pytest.approx(82 / 16)
    assert rep.lower_bound == pytest.approx(4.0)
    assert rep.ok
    # per-coset: C_1 ordered pairs = 16 - 4
    c1 = cp4.cosets[1]
    assert int(np.count_nonzero(c1[:, None] ^ c1[None, :])) == 12


def test_identities_check_rate_one():
    p = CodeParams(8, 1.0)
    t = hds_exhaustive(p)
    cp = partition_cosets(p)
    f = solve_asymptotic_ccs(1.0, 256, 1e-12)
    rep = hds_identities_check(t, cp, f)
    assert rep.sum_psi == pytest.approx(rep.lower_bound)  # equal cosets: equality case
    assert rep.ratio == pytest.approx(1.0)


def test_identities_check_detects_tampering(p4, cp4, f_half):
    t = hds_exhaustive(p4)
    t.counts[2] += 4  # corrupt the table
    with pytest.raises(IdentityViolation):
        hds_identities_check(t, cp4, f_half)
