import pytest

from homtest.rng import (
    MASK64,
    ROLE_ADVERSARY,
    ROLE_TESTER,
    Stream,
    derive_seed,
    stream,
)


def test_next_u64_is_deterministic():
    a = Stream(12345)
    b = Stream(12345)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_next_u64_stays_in_range():
    s = Stream(0)
    for _ in range(1000):
        assert 0 <= s.next_u64() <= MASK64


def test_different_seeds_diverge():
    xs = [Stream(seed).next_u64() for seed in range(64)]
    assert len(set(xs)) == 64


def test_derive_seed_separates_roles():
    base = 999
    seeds = {derive_seed(base, r) for r in (ROLE_TESTER, ROLE_ADVERSARY, 7, 8)}
    assert len(seeds) == 4


def test_stream_helper_matches_derive_seed():
    direct = Stream(derive_seed(5, 2, ROLE_TESTER))
    chained = stream(5, 2, ROLE_TESTER)
    assert [chained.next_u64() for _ in range(10)] == [direct.next_u64() for _ in range(10)]


def test_derive_seed_order_matters():
    assert derive_seed(5, 1, 2) != derive_seed(5, 2, 1)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 100, 2**32, 2**63])
def test_rand_below_bounds(n):
    s = Stream(42)
    for _ in range(200):
        assert 0 <= s.rand_below(n) < n


def test_rand_below_one_is_constant():
    s = Stream(9)
    assert all(s.rand_below(1) == 0 for _ in range(20))


def test_rand_below_roughly_uniform():
    s = Stream(2024)
    counts = [0] * 5
    trials = 50_000
    for _ in range(trials):
        counts[s.rand_below(5)] += 1
    for c in counts:
        assert abs(c - trials / 5) < 5 * (trials / 5) ** 0.5


def test_rand_fraction_in_unit_interval():
    s = Stream(3)
    vals = [s.rand_fraction() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in vals)
    assert 0.4 < sum(vals) / len(vals) < 0.6
