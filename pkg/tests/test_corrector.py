import itertools
import math
from collections import Counter
from fractions import Fraction

import pytest

from homtest import groups
from homtest.corrector import (
    binomial_even_probability,
    brute_force_rejection_probability,
    corrector,
    enumerate_fix_a,
    exact_linear_independence_probability,
    exact_rejection_probability,
    flatness_probe,
    linear_independence_probability,
    sample_fix_a,
    sample_fix_a_split,
    zeta_truncated_upper,
    zeta_upper_bound,
)
from homtest.functions import FunctionTable, gen_instance
from homtest.rng import Stream


Z3 = groups.parse_spec("Z3")
Z4 = groups.parse_spec("Z4")
S3 = groups.parse_spec("S3")


def test_exact_rejection_zero_on_hom():
    f = gen_instance("random_hom", Z4, groups.parse_spec("Z2"), Stream(0))
    for k in (1, 2, 3):
        assert exact_rejection_probability(f, k) == 0


def test_exact_matches_brute_force():
    f = gen_instance("random_function", Z4, Z3, Stream(7))
    for k in (1, 2):
        assert exact_rejection_probability(f, k) == brute_force_rejection_probability(f, k)
    g = gen_instance("random_function", S3, groups.parse_spec("Z2"), Stream(8))
    assert exact_rejection_probability(g, 2) == brute_force_rejection_probability(g, 2)


def test_shifted_hom_rejection_known_value():
    # f = h + s on Z3 with random signs: plus/minus imbalance leaves a
    # computable rejection probability, nonzero for k >= 2
    f = gen_instance("shifted_hom", Z3, Z3, Stream(1), shift=1)
    assert exact_rejection_probability(f, 4) > Fraction(1, 4)
    # all-plus k-tuples never reject a shifted hom when k = |shift order|
    # multiples line up; cross-checked by the tester-level test


def test_fix_a_tuples_hit_target():
    rng = Stream(2)
    for a in groups.elements(S3):
        for _ in range(20):
            entries = sample_fix_a(S3, a, 4, rng)
            assert groups.signed_sum(S3, list(entries)) == a


def test_fix_a_split_same_distribution():
    # both samplers uniform over Fix(a): compare empirical tallies
    rng = Stream(3)
    a = 2
    n = 4000
    c1 = Counter(tuple(sample_fix_a(Z3, a, 2, rng)) for _ in range(n))
    c2 = Counter(tuple(sample_fix_a_split(Z3, a, 2, rng)) for _ in range(n))
    fix = enumerate_fix_a(Z3, a, 2)
    assert set(c1) <= set(map(tuple, fix)) and set(c2) <= set(map(tuple, fix))
    expect = n / len(fix)
    for entries in map(tuple, fix):
        assert abs(c1[entries] - expect) < 6 * math.sqrt(expect)
        assert abs(c2[entries] - expect) < 6 * math.sqrt(expect)


def test_enumerate_fix_a_partitions_tuple_space():
    total = sum(len(enumerate_fix_a(Z4, a, 2)) for a in groups.elements(Z4))
    assert total == (2 * 4) ** 2
    # uniformity over targets
    sizes = {len(enumerate_fix_a(Z4, a, 2)) for a in groups.elements(Z4)}
    assert sizes == {(2 * 4) ** 2 // 4}


def test_corrector_on_hom_is_identity():
    f = gen_instance("random_hom", Z4, groups.parse_spec("Z2"), Stream(4))
    rep = corrector(f, 2, mode="exact")
    assert rep.mu == 0 and rep.delta == 0 and rep.eta_max == 0
    assert rep.g_is_hom
    assert all(rep.g(x) == f(x) for x in groups.elements(Z4))


def test_corrector_fixes_sparse_noise():
    # one flipped point out of 4: mu < 1/10 regime, corrector recovers the hom
    base = gen_instance("random_hom", Z4, groups.parse_spec("Z2"), Stream(5))
    vals = list(base.values)
    vals[3] ^= 1
    f = FunctionTable(Z4, groups.parse_spec("Z2"), values=vals)
    rep = corrector(f, 2, mode="exact")
    assert rep.g_is_hom
    assert float(rep.eta_max) <= 2 * float(rep.mu)
    assert float(rep.delta) <= 2 * float(rep.mu)


def test_corrector_monte_carlo_agrees_with_exact():
    # Z6 domain: no vote ties, so both modes must agree pointwise
    z6 = groups.parse_spec("Z6")
    base = gen_instance("random_hom", z6, groups.parse_spec("Z2"), Stream(6))
    vals = list(base.values)
    vals[1] ^= 1
    f = FunctionTable(z6, groups.parse_spec("Z2"), values=vals)
    ex = corrector(f, 2, mode="exact")
    mc = corrector(f, 2, mode="monte_carlo", samples=4000, rng=Stream(9))
    assert list(mc.g.values) == list(ex.g.values)
    assert abs(float(mc.mu) - float(ex.mu)) < 0.05


def test_flatness_probe_f2_small():
    g = groups.parse_spec("F2^10")
    rep = flatness_probe(g, None, 4, 100, Stream(10))
    assert rep.full_support == 6  # C(4, 2)
    assert len(rep.per_X_max_mass) == 100
    assert 0 <= rep.support_deficit_fraction <= 1
    # non-deficient draws spread mass exactly 1/6
    for mass, deficient in zip(rep.per_X_max_mass, rep.per_X_deficient):
        if not deficient:
            assert abs(mass - 1 / 6) < 1e-12


def test_flatness_probe_coefficient_variant():
    g = groups.parse_spec("F3^8")
    rep = flatness_probe(g, None, 4, 50, Stream(11), coefficient=True)
    assert rep.full_support == 6 * (3 - 1) ** 2
    assert 0 <= rep.support_deficit_fraction <= 1


def test_flatness_probe_odd_m_rejected():
    with pytest.raises(ValueError):
        flatness_probe(groups.parse_spec("F2^8"), None, 3, 10, Stream(0))


def test_binomial_even_probability_matches_enumeration():
    for n in range(0, 9):
        for p in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)):
            direct = sum(
                p**k * (1 - p) ** (n - k) * math.comb(n, k) for k in range(0, n + 1, 2)
            )
            assert binomial_even_probability(n, p) == direct


def test_zeta_upper_bound_dominates_series():
    for x in (2.0, 2.5, 3.0, 4.0):
        assert zeta_truncated_upper(x) <= zeta_upper_bound(x)


def test_linear_independence_exact_value():
    # p=2, n=4: probability two uniform vectors are independent
    assert exact_linear_independence_probability(2, 4) == Fraction(210, 256)


def test_linear_independence_monte_carlo_close():
    est = linear_independence_probability(2, 4, 20000, Stream(12))
    assert abs(est - 210 / 256) < 0.02


def test_linear_independence_bound():
    for p, n in ((2, 8), (3, 6), (5, 4)):
        est = linear_independence_probability(p, n, 20000, Stream(13))
        assert est >= 1 - 2 / p ** (n / 2) - 0.02
