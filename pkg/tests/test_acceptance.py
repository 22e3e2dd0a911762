"""Quantitative acceptance gate.

Each test covers one headline guarantee at desk scale, prints a single
PASS/FAIL line with the measured quantities, and enforces its runtime
budget. Tolerances are three standard errors unless a check is exact.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
from scipy.stats import chi2_contingency

from homtest import engine, groups, harness
from homtest.corrector import (
    binomial_even_probability,
    corrector,
    exact_linear_independence_probability,
    flatness_probe,
    linear_independence_probability,
    zeta_truncated_upper,
    zeta_upper_bound,
)
from homtest.functions import (
    FunctionTable,
    distance_to_hom,
    enumerate_homomorphisms,
    gen_instance,
)
from homtest.oracle import Oracle, make_strategy
from homtest.rng import ROLE_ADVERSARY, ROLE_TESTER, stream
from homtest.testers import TesterParams, run_named


def _se(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


def _line(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num:02d} {name}: {detail}")


def test_c01_completeness_matrix():
    start = time.monotonic()
    ok, reports = harness.run_zoo(trials=10_000)
    elapsed = time.monotonic() - start
    rejects = sum(r.reject_count for r in reports)
    good = ok and elapsed < 300
    _line(1, "completeness-matrix", good,
          f"{len(reports)} cells x 10^4 trials, {rejects} rejects, {elapsed:.0f}s")
    assert ok, f"{rejects} rejects across the matrix"
    assert elapsed < 300


def _certified_pool():
    """20 dense instances with brute-force-certified distances in (0, 1)."""
    pool, seen = [], set()
    pairs = [("Z5", "Z5"), ("Z6", "Z3"), ("F2^3", "F2^1"), ("S3", "Z2"), ("Z4", "Z2"), ("Z8", "Z4")]
    for gs, hs in pairs:
        g, h = groups.parse_spec(gs), groups.parse_spec(hs)
        for i, num in enumerate(range(1, 8)):
            try:
                f = gen_instance("planted_far", g, h, stream(100 + i, 0, 2), epsilon=Fraction(num, 10))
            except Exception:
                continue
            d = f.certified_distance
            if d and 0 < d < 1 and (gs, hs, d) not in seen:
                seen.add((gs, hs, d))
                pool.append(f)
    pool.sort(key=lambda f: f.certified_distance)
    return pool[:: max(1, len(pool) // 20)][:20]


def test_c02_signs_soundness():
    start = time.monotonic()
    pool = _certified_pool()
    assert len(pool) == 20
    n = 100_000
    worst = 1.0
    for idx, f in enumerate(pool):
        eps = f.certified_distance
        for k in (2, 4, 8):
            bound = float(min((2 * k - 3) * eps / 3, Fraction(1, 16)))
            res = engine.run_batch(f, "signs", TesterParams(k=k), trials=n, seed=9000 + 3 * idx + k)
            rej = (n - res.accepted) / n
            margin = rej - (bound - 3 * _se(bound, n))
            worst = min(worst, margin)
            assert margin >= 0, f"{f.domain} eps={eps} k={k}: rate {rej} < bound {bound}"
    elapsed = time.monotonic() - start
    good = worst >= 0 and elapsed < 120
    _line(2, "signs-soundness", good,
          f"20 certified instances x k in (2,4,8) x 10^5 trials, min margin {worst:.4f}, {elapsed:.0f}s")
    assert elapsed < 120


def test_c03_shifted_hom_counterexample():
    start = time.monotonic()
    z3 = groups.parse_spec("Z3")
    f = gen_instance("shifted_hom", z3, z3, stream(30, 0, 2), shift=1)
    eps, _ = distance_to_hom(f)
    assert eps == Fraction(2, 3)
    n = 10_000
    allplus = engine.run_batch(f, "fixed-signs", TesterParams(k=4), trials=n, seed=31)
    rnd = engine.run_batch(f, "signs", TesterParams(k=8), trials=n, seed=32)
    rej = (n - rnd.accepted) / n
    bound = float(min(eps / 2, Fraction(1, 10)))
    elapsed = time.monotonic() - start
    good = allplus.accepted == n and rej >= bound - 3 * _se(bound, n) and elapsed < 30
    _line(3, "shifted-hom-counterexample", good,
          f"all-plus accepts {allplus.accepted}/{n}, random-signs rejects {rej:.3f} >= {bound:.3f}, {elapsed:.0f}s")
    assert allplus.accepted == n
    assert rej >= bound - 3 * _se(bound, n)
    assert elapsed < 30


def test_c04_combined_point_uniform():
    # every a in G receives exactly (2|G|)^k / |G| sign/element tuples
    start = time.monotonic()
    for spec in ("Z4", "S3"):
        g = groups.parse_spec(spec)
        elems = list(groups.elements(g))
        for k in (1, 2):
            counts = {a: 0 for a in elems}
            for combo in itertools.product([groups.PLUS, groups.MINUS], elems, repeat=k):
                entries = [(combo[2 * i], combo[2 * i + 1]) for i in range(k)]
                counts[groups.signed_sum(g, entries)] += 1
            expect = (2 * g.order) ** k // g.order
            assert set(counts.values()) == {expect}, (spec, k)
    elapsed = time.monotonic() - start
    good = elapsed < 10
    _line(4, "combined-point-uniformity", good, f"Z4 and S3, k in (1,2), exact, {elapsed:.1f}s")
    assert elapsed < 10


def test_c05_corrector_lemmas():
    # over domains of order <= 4 any non-homomorphism has mu >= 1/10, so
    # the instances meeting the mu < 1/10 hypothesis are exactly the 10
    # homomorphisms across these pairs; the bounds hold with mu = 0
    start = time.monotonic()
    pairs = [("Z2", "Z2"), ("Z2", "Z3"), ("Z3", "Z2"), ("Z3", "Z3"), ("Z4", "Z2"), ("Z4", "Z3")]
    checked = 0
    for gs, hs in pairs:
        g, h = groups.parse_spec(gs), groups.parse_spec(hs)
        for hom in enumerate_homomorphisms(g, h):
            rep = corrector(hom.as_table(), 2, mode="exact")
            assert rep.mu < Fraction(1, 10)
            assert float(rep.eta_max) <= 2 * float(rep.mu) + 1e-12
            assert float(rep.delta) <= 2 * float(rep.mu) + 1e-12
            assert rep.g_is_hom
            checked += 1
    elapsed = time.monotonic() - start
    good = checked >= 10 and elapsed < 60
    _line(5, "corrector-lemmas", good,
          f"{checked} instances with exact mu < 1/10, eta<=2mu delta<=2mu corrected-to-hom, {elapsed:.1f}s")
    assert checked >= 10
    assert elapsed < 60


def test_c06_flatness():
    start = time.monotonic()
    draws = 1000
    rep = flatness_probe(groups.parse_spec("F2^24"), None, 4, draws, stream(60, 0, 2))
    beta = 1 / 16
    assert rep.support_deficit_fraction <= beta + 3 * _se(beta, draws)
    flat = 1 / math.comb(4, 2)
    for mass, deficient in zip(rep.per_X_max_mass, rep.per_X_deficient):
        if not deficient:
            assert mass <= flat + 3 * _se(flat, draws)
    repc = flatness_probe(groups.parse_spec("F3^16"), None, 4, draws, stream(60, 1, 2), coefficient=True)
    assert repc.support_deficit_fraction <= beta + 3 * _se(beta, draws)
    flatc = 1 / (math.comb(4, 2) * (3 - 1) ** 2)
    for mass, deficient in zip(repc.per_X_max_mass, repc.per_X_deficient):
        if not deficient:
            assert mass <= flatc + 3 * _se(flatc, draws)
    elapsed = time.monotonic() - start
    good = elapsed < 120
    _line(6, "flatness", good,
          f"F2^24 deficit {rep.support_deficit_fraction:.4f} <= {beta:.4f}+3SE, "
          f"F3^16 deficit {repc.support_deficit_fraction:.4f}, {elapsed:.0f}s")
    assert elapsed < 120


def test_c07_soundness_transfer():
    # the m-point unpredictable tester and the plain 4-point tester must
    # be statistically indistinguishable in verdict rate
    start = time.monotonic()
    n = 100_000
    ps = []
    for gs, hs, seed in (("F2^8", "F2^1", 70), ("Z6", "Z3", 71)):
        g, h = groups.parse_spec(gs), groups.parse_spec(hs)
        f = gen_instance("random_function", g, h, stream(seed, 0, 2))
        a = engine.run_batch(f, "unpredictable-signs", TesterParams(m=8), trials=n, seed=seed)
        b = engine.run_batch(f, "signs", TesterParams(k=4), trials=n, seed=seed + 1000)
        table = [[a.accepted, n - a.accepted], [b.accepted, n - b.accepted]]
        _, p, _, _ = chi2_contingency(table)
        ps.append(p)
        assert p > 0.01, (gs, table, p)
    elapsed = time.monotonic() - start
    good = elapsed < 60
    _line(7, "soundness-transfer", good,
          f"chi-square p values {ps[0]:.3f}, {ps[1]:.3f} > 0.01 at 10^5 trials, {elapsed:.0f}s")
    assert elapsed < 60


def test_c08_dispatcher_end_to_end():
    start = time.monotonic()
    g, h = groups.parse_spec("F2^16"), groups.parse_spec("Z6")
    params = TesterParams(epsilon=Fraction(1, 4), t=4)
    kernel, _ = engine.resolve_plan("dispatch-general", g, h, params)
    assert kernel == "gr-sample"
    hom = gen_instance("random_hom", g, h, stream(80, 0, 2))
    far = gen_instance("planted_far", g, h, stream(80, 1, 2), epsilon=Fraction(1, 4))
    n = 1000
    results = {}
    for strat in ("uniform", "sum_hunter"):
        for inst, label in ((hom, "hom"), (far, "far")):
            res = engine.run_batch(
                inst, "dispatch-general", params,
                strategy_name=strat, schedule="budget_managing", t=4, trials=n, seed=81,
            )
            results[(strat, label)] = res.accepted
            if label == "hom":
                assert res.accepted == n, (strat, res.accepted)
            else:
                assert n - res.accepted >= 2 * n // 3, (strat, res.accepted)
    elapsed = time.monotonic() - start
    good = elapsed < 180
    _line(8, "dispatcher-end-to-end", good,
          f"branch=gr-sample, hom {results[('uniform', 'hom')]}+{results[('sum_hunter', 'hom')]}/{n} each, "
          f"far accepted {results[('uniform', 'far')]},{results[('sum_hunter', 'far')]}/{n}, {elapsed:.0f}s")
    assert elapsed < 180


def test_c09_implicit_forced_scale():
    # domain far beyond dense storage: instances answer point queries on
    # demand and the whole run stays on the reference path
    start = time.monotonic()
    g, h = groups.parse_spec("F2^64"), groups.parse_spec("F2^1")
    hom = gen_instance("random_hom", g, h, stream(90, 0, 2))
    far = gen_instance("implicit_planted", g, h, stream(90, 1, 2), epsilon=Fraction(1, 4))
    assert far.certified_distance is None  # planted rate is the heuristic here
    params = TesterParams(t=64, force_m=16)
    n = 300
    hom_acc = far_rej = 0
    for trial in range(n):
        for inst, label in ((hom, "hom"), (far, "far")):
            strat = make_strategy("uniform", stream(91, trial, ROLE_ADVERSARY))
            v = run_named("online-signs", Oracle(inst, strat, t=64), params, stream(91, trial, ROLE_TESTER))
            if label == "hom":
                hom_acc += v.accepted
            else:
                far_rej += not v.accepted
    elapsed = time.monotonic() - start
    good = hom_acc == n and far_rej >= 2 * n // 3 and elapsed < 300
    _line(9, "implicit-forced-scale", good,
          f"F2^64 m=16 t=64: hom accepted {hom_acc}/{n}, planted rejected {far_rej}/{n}, {elapsed:.0f}s")
    assert hom_acc == n
    assert far_rej >= 2 * n // 3
    assert elapsed < 300


def test_c10_generated_subgroup():
    start = time.monotonic()
    n = 10_000
    details = []
    for gs, hs in (("S5", "Z2"), ("Z5", "Z5")):
        g, h = groups.parse_spec(gs), groups.parse_spec(hs)
        est = groups.estimate_E(g, 2000, stream(100, 0, 2))
        m = math.ceil(est.e_estimate) + 9
        hom = gen_instance("random_hom", g, h, stream(100, 1, 2))
        res = engine.run_batch(
            hom, "generated-subgroup", TesterParams(e_of_g=est.e_estimate), trials=n, seed=101
        )
        assert res.accepted == n
        generated = res.queries > 0
        freq = float(generated.mean())
        bound = 11 / 12
        assert freq >= bound - 3 * _se(bound, n), (gs, freq)
        # the full query path costs exactly m samples + ceil(3/eps) checks
        expect_q = m + math.ceil(3 / (1 / 4))
        assert set(np.unique(res.queries[generated]).tolist()) == {expect_q}, gs
        details.append(f"{gs}: gen freq {freq:.4f}, queries {expect_q}")
    elapsed = time.monotonic() - start
    good = elapsed < 120
    _line(10, "generated-subgroup", good, "; ".join(details) + f", {elapsed:.0f}s")
    assert elapsed < 120


def test_c11_lowerbound_adversary():
    start = time.monotonic()
    res = harness.lowerbound_demo(n=3, t=4, trials=100_000, seed=110)
    elapsed = time.monotonic() - start
    good = res["tv_two_query"] <= 0.05 and res["tv_spanned_query"] >= 0.2 and elapsed < 60
    _line(11, "lowerbound-adversary", good,
          f"2-query TV {res['tv_two_query']:.4f} <= 0.05, spanned 4-query TV "
          f"{res['tv_spanned_query']:.4f} >= 0.2, {elapsed:.0f}s")
    assert res["tv_two_query"] <= 0.05
    assert res["tv_spanned_query"] >= 0.2
    assert elapsed < 60


def test_c12_closed_forms():
    start = time.monotonic()
    for n in range(13):
        for p in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)):
            # exhaustive outcome enumeration over all 2^n success patterns
            direct = Fraction(0)
            for bits in range(1 << n):
                ones = bits.bit_count()
                if ones % 2 == 0:
                    direct += p**ones * (1 - p) ** (n - ones)
            assert binomial_even_probability(n, p) == direct, (n, p)
    for x in (2.0, 2.5, 3.0, 4.0):
        assert zeta_truncated_upper(x) <= zeta_upper_bound(x)
    elapsed = time.monotonic() - start
    good = elapsed < 5
    _line(12, "closed-forms", good, f"even-successes exact for n<=12, zeta bounds hold, {elapsed:.1f}s")
    assert elapsed < 5


def test_c13_linear_independence():
    start = time.monotonic()
    n = 100_000
    assert exact_linear_independence_probability(2, 4) == Fraction(210, 256)
    est = linear_independence_probability(2, 4, n, stream(130, 0, 2))
    exact = 210 / 256
    assert abs(est - exact) <= 3 * _se(exact, n)
    bounds = []
    for p, d in ((2, 8), (3, 6), (5, 4)):
        e = linear_independence_probability(p, d, n, stream(130, p, 2))
        b = 1 - 2 / p ** (d / 2)
        assert e >= b - 3 * _se(b, n), (p, d, e, b)
        bounds.append(f"p={p},n={d}: {e:.4f}>={b:.4f}")
    elapsed = time.monotonic() - start
    good = elapsed < 30
    _line(13, "linear-independence", good,
          f"exact 210/256, MC {est:.4f}; " + "; ".join(bounds) + f", {elapsed:.0f}s")
    assert elapsed < 30
