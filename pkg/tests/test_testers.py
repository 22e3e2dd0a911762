from fractions import Fraction

import pytest

from homtest import groups
from homtest.functions import FunctionTable, gen_instance
from homtest.oracle import BUDGET_MANAGING, Oracle, make_strategy
from homtest.rng import ROLE_ADVERSARY, ROLE_TESTER, stream
from homtest.testers import (
    DEFAULT_REPS,
    TesterError,
    TesterParams,
    dispatch_general,
    dispatch_prime_field,
    fixed_signs_test,
    generated_subgroup_test,
    gr_sample_based_test,
    m_for_online_test,
    online_resilient_signs_test,
    random_coefficients_test,
    random_signs_test,
    run_named,
    theorem_range_ok,
    unpredictable_signs_test,
    zero_test,
)
from homtest.rng import Stream


Z3 = groups.parse_spec("Z3")
Z5 = groups.parse_spec("Z5")
F24 = groups.parse_spec("F2^4")
F21 = groups.parse_spec("F2^1")


def _hom(gs, hs, seed=0):
    g, h = groups.parse_spec(gs), groups.parse_spec(hs)
    return gen_instance("random_hom", g, h, stream(seed, 0, 2))


def _rate(test, inst, trials, seed=0, strategy=None, t=0, **kw):
    accepts = 0
    for trial in range(trials):
        strat = None
        if strategy:
            strat = make_strategy(strategy, stream(seed, trial, ROLE_ADVERSARY))
        oracle = Oracle(inst, strat, t=t)
        v = test(oracle, rng=stream(seed, trial, ROLE_TESTER), **kw)
        accepts += v.accepted
    return accepts / trials


def test_signs_completeness():
    inst = _hom("Z5", "Z5")
    assert _rate(random_signs_test, inst, 300, k=4) == 1.0


def test_signs_completeness_under_erasure():
    inst = _hom("F2^4", "F2^1")
    assert _rate(random_signs_test, inst, 200, k=4, strategy="uniform", t=3) == 1.0


def test_signs_soundness_on_shifted_hom():
    inst = gen_instance("shifted_hom", Z3, Z3, Stream(1), shift=1)
    r = _rate(random_signs_test, inst, 2000, k=8)
    # eps_f = 2/3; rejection rate must be visible at k=8
    assert 1 - r >= 0.25


def test_fixed_all_plus_blind_to_shift():
    # the classical counterexample: f = h + s passes every all-plus check
    inst = gen_instance("shifted_hom", Z3, Z3, Stream(2), shift=2)
    r = _rate(fixed_signs_test, inst, 500, k=4, signs=[groups.PLUS] * 4)
    assert r == 1.0


def test_signs_bad_k():
    inst = _hom("Z5", "Z5")
    with pytest.raises(TesterError):
        random_signs_test(Oracle(inst), 0, Stream(0))


def test_coefficients_need_matching_prime_fields():
    inst = _hom("Z6", "Z4")
    with pytest.raises(TesterError):
        random_coefficients_test(Oracle(inst), 4, Stream(0))


def test_coefficients_completeness_and_soundness():
    inst = _hom("F3^2", "F3^1")
    assert _rate(random_coefficients_test, inst, 300, k=4) == 1.0
    far = gen_instance(
        "planted_far",
        groups.parse_spec("F3^2"),
        groups.parse_spec("F3^1"),
        Stream(3),
        epsilon=Fraction(1, 3),
    )
    assert _rate(random_coefficients_test, far, 1000, k=4) < 0.8


def test_unpredictable_signs_needs_even_m():
    inst = _hom("F2^4", "F2^1")
    with pytest.raises(TesterError):
        unpredictable_signs_test(Oracle(inst), 5, Stream(0))


def test_unpredictable_signs_completeness():
    inst = _hom("F2^4", "F2^1")
    assert _rate(unpredictable_signs_test, inst, 200, m=4) == 1.0


def test_m_formula_values():
    assert m_for_online_test(2, Fraction(1, 2), base=2) == 136
    assert m_for_online_test(3, Fraction(1, 2), base=3) == 136
    for t in range(5):
        m = m_for_online_test(t, Fraction(1, 4))
        assert m % 2 == 0 and m >= 2
    assert m_for_online_test(8, Fraction(1, 4)) >= m_for_online_test(1, Fraction(1, 4))


def test_online_signs_forced_scale_completeness():
    inst = _hom("F2^4", "F2^1")
    accepts = 0
    for trial in range(100):
        oracle = Oracle(inst, make_strategy("span", stream(0, trial, ROLE_ADVERSARY)), t=2)
        v = online_resilient_signs_test(
            oracle, Fraction(1, 4), 2, stream(0, trial, ROLE_TESTER), force_m=4, force_reps=6
        )
        accepts += v.accepted
    assert accepts == 100


def test_gr_sample_completeness_and_soundness():
    inst = _hom("Z5", "Z5")
    assert _rate(gr_sample_based_test, inst, 200, epsilon=Fraction(1, 4)) == 1.0
    far = gen_instance("planted_far", Z5, Z5, Stream(5), epsilon=Fraction(1, 2))
    assert _rate(gr_sample_based_test, far, 300, epsilon=Fraction(1, 4)) < 1 / 3


def test_generated_subgroup_query_count():
    inst = _hom("Z5", "Z5")
    e = 1.25
    m = 2 + 9  # ceil(1.25) + 9
    checks = 12  # ceil(3 / (1/4))
    full = 0
    for trial in range(200):
        oracle = Oracle(inst)
        v = generated_subgroup_test(oracle, Fraction(1, 4), e, stream(1, trial, ROLE_TESTER))
        assert v.accepted
        if v.queries_made:
            full += 1
            assert v.queries_made == m + checks
    assert full > 150  # non-generating samples skip the query phase


def test_zero_test_logic():
    g, h = groups.parse_spec("Z2"), Z3
    zero = FunctionTable(g, h, values=[0, 0])
    one = FunctionTable(g, h, values=[0, 1])
    assert _rate(zero_test, zero, 50, epsilon=Fraction(1, 4)) == 1.0
    assert _rate(zero_test, one, 50, epsilon=Fraction(1, 4)) < 1.0


def test_dispatch_general_flags_branch():
    inst = _hom("F2^16", "Z6")
    oracle = Oracle(inst)
    v = dispatch_general(oracle, Fraction(1, 4), 4, Stream(0))
    assert v.accepted
    assert any(f.startswith("branch=") for f in v.flags)


def test_dispatch_prime_field_defaults_e():
    inst = _hom("F2^4", "F2^1")
    oracle = Oracle(inst)
    v = dispatch_prime_field(oracle, Fraction(1, 4), 4, Stream(0))
    assert v.accepted


def test_theorem_range_ok_monotone_in_t():
    assert theorem_range_ok(2**16, Fraction(1, 4), 0, 0.01)
    assert not theorem_range_ok(8, Fraction(1, 4), 100, 0.01)


def test_run_named_unknown():
    inst = _hom("Z5", "Z5")
    with pytest.raises(TesterError):
        run_named("nope", Oracle(inst), TesterParams(), Stream(0))


def test_run_named_generated_subgroup_needs_e():
    inst = _hom("S4", "Z2")
    with pytest.raises(TesterError):
        run_named("generated-subgroup", Oracle(inst), TesterParams(), Stream(0))


def test_run_named_covers_registry():
    inst = _hom("F2^4", "F2^1")
    params = TesterParams(e_of_g=7.0, force_m=4, force_reps=4, m=4)
    from homtest.testers import TESTER_NAMES

    zero_inst = FunctionTable(inst.domain, inst.codomain, values=[0] * 16)
    for name in TESTER_NAMES:
        # the zero tester's promise covers only the zero map
        target = zero_inst if name == "zero" else inst
        v = run_named(name, Oracle(target), params, Stream(11))
        assert v.accepted, name


def test_default_reps_constant():
    assert DEFAULT_REPS == 48


def test_budget_managing_completeness():
    inst = _hom("F2^4", "F2^1")
    accepts = 0
    for trial in range(200):
        strat = make_strategy("sum_hunter", stream(2, trial, ROLE_ADVERSARY))
        oracle = Oracle(inst, strat, schedule=BUDGET_MANAGING, t=2)
        v = random_signs_test(oracle, 4, stream(2, trial, ROLE_TESTER))
        accepts += v.accepted
    assert accepts == 200
