import math

import numpy as np
import pytest

from gle_anneal.theory import (
    TheoryConstants,
    coupling_norm_sq,
    constants_for,
    crossover_E,
    derive_constants,
    log_sobolev_C,
    rate_r,
    schedule_comparison,
)


def test_s1_polynomial_exact():
    for hess in (0.0, 1.0, 3.7, 90.0):
        consts = derive_constants(hess_sup=hess)
        s0 = consts.s0
        assert s0 >= 1.0
        assert consts.s1 == 2.0 + 156.0 * s0 ** 2 + 1024.0 * s0 ** 4


def test_beta_coefficients_positive_and_scaling():
    c1 = derive_constants(safety=1.0)
    c2 = derive_constants(safety=2.0)
    assert c2.beta0 == pytest.approx(2 * c1.beta0)
    assert c2.beta1 == pytest.approx(2 * c1.beta1)
    assert c2.beta2 == pytest.approx(2 * c1.beta2)
    assert min(c1.beta0, c1.beta1, c1.beta2) > 0


def test_constants_for_system():
    from gle_anneal.matrices import make_A, make_lambda
    from gle_anneal.potentials import quadratic

    pot = quadratic(2, [0.5, 0.5])
    coup = make_lambda(2, 2, 2.0)
    mem = make_A(2, 2, 1.0)
    consts = constants_for(pot, coup, mem)
    # |lam| = 2, |linv| = 1/2: the norm product dominates at 1
    assert coupling_norm_sq(coup) == pytest.approx(4.0)
    assert consts.s0 == pytest.approx(math.sqrt(1 + pot.bounds.hess_sup ** 2))


def test_rate_example():
    r = rate_r(1.0, gap=0.5, delta=1.0, alpha=0.1)
    assert r.value == pytest.approx(0.2)
    assert r.branch == 1


def test_rate_gap_zero():
    r = rate_r(2.0, gap=0.0, delta=1.0, alpha=0.25)
    assert r.value == pytest.approx(min((1 - 0.25) / 2, 0.75 / 2.0))


def test_rate_domain_errors():
    with pytest.raises(ValueError):
        rate_r(0.4, gap=0.5, delta=1.0, alpha=0.1)
    with pytest.raises(ValueError):
        rate_r(1.0, gap=0.5, delta=0.05, alpha=0.1)


def test_rate_continuity_at_crossover():
    rng = np.random.default_rng(0)
    for _ in range(20):
        gap = float(rng.uniform(0, 2))
        alpha = float(rng.uniform(0.01, 0.5))
        delta = alpha + float(rng.uniform(0.05, 2.0))
        e_star = crossover_E(gap, delta, alpha)
        lo = rate_r(e_star * (1 - 1e-9), gap, delta, alpha)
        hi = rate_r(e_star * (1 + 1e-9), gap, delta, alpha)
        at = rate_r(e_star, gap, delta, alpha)
        assert abs(lo.value - hi.value) < 1e-8
        b1 = 0.5 * (1 - gap / e_star - alpha)
        b2 = (delta - alpha) / e_star
        assert abs(b1 - b2) < 1e-12
        assert at.value == pytest.approx(min(b1, b2), abs=1e-12)


def test_rate_branch_split_matches_min():
    rng = np.random.default_rng(1)
    for _ in range(20):
        gap = float(rng.uniform(0, 2))
        alpha = float(rng.uniform(0.01, 0.4))
        delta = alpha + float(rng.uniform(0.05, 2.0))
        E = gap + float(rng.uniform(0.01, 5.0))
        res = rate_r(E, gap, delta, alpha)
        b1 = 0.5 * (1 - gap / E - alpha)
        b2 = (delta - alpha) / E
        assert res.value == pytest.approx(min(b1, b2), abs=1e-14)
        if E < res.crossover:
            assert res.branch == 1 and res.value == pytest.approx(b1)
        else:
            assert res.branch == 2 and res.value == pytest.approx(b2)


def test_rate_monotone_in_gap():
    values = [rate_r(3.0, gap, 1.0, 0.1).value for gap in (0.0, 0.5, 1.0, 2.0)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_log_sobolev_gap_zero_closed_form():
    consts = TheoryConstants(s0=1.0, beta0=5.0, beta1=0.0, beta2=0.0, a_star=1.0)
    for T in (0.1, 1.0, 7.0):
        want = 1.0 + (1.0 + 5.0) * T / 2.0
        assert log_sobolev_C(T, consts, gap=0.0, a_m=1.0) == pytest.approx(want)


def test_log_sobolev_monotone_in_gap():
    consts = derive_constants()
    vals = [log_sobolev_C(1.0, consts, gap=g, a_m=1.0) for g in (0.0, 0.5, 1.0, 2.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_log_sobolev_blows_up_as_T_to_zero():
    consts = derive_constants()
    vals = [log_sobolev_C(T, consts, gap=1.0, a_m=1.0)
            for T in (1e-1, 1e-2, 1e-3, 1e-4)]
    # strictly increasing until the float range is exhausted, then inf
    assert all(b > a for a, b in zip(vals, vals[1:]) if math.isfinite(b))
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert math.isinf(vals[-1]) or vals[-1] > 1e100


def test_log_sobolev_positive():
    consts = derive_constants()
    for T in (1e-3, 0.5, 10.0):
        assert log_sobolev_C(T, consts, gap=0.3, a_m=0.7) > 0


def test_schedule_comparison_f1_ratio_grows():
    report = schedule_comparison(lambda t: 1.0, 1e9, fprime=lambda t: 0.0)
    r = report.ratio
    assert len(r) == 7  # decades 1e3 .. 1e9
    assert np.all(np.diff(r) > 0)


def test_schedule_comparison_f_above_one_collapses():
    report = schedule_comparison(lambda t: 1.2, 1e9, fprime=lambda t: 0.0)
    assert report.ratio[-1] < 1e-3
    assert report.ratio[-1] < report.ratio[-2]  # falling at the tail
    assert np.all(report.ratio_poly < 1e-3)


def test_schedule_comparison_f1_two_horizons():
    report = schedule_comparison(lambda t: 1.0, 1e6, fprime=lambda t: 0.0)
    assert report.ratio[-1] > report.ratio[0]


def test_schedule_comparison_validates_p():
    with pytest.raises(ValueError):
        schedule_comparison(lambda t: 1.0, 1e6, p_coeffs=(1.0, 2.0))  # order < 5
    with pytest.raises(ValueError):
        schedule_comparison(lambda t: 1.0, 1e6, p_coeffs=(0, 0, 0, 0, 0, -1.0))


def test_constants_validation():
    with pytest.raises(ValueError):
        TheoryConstants(s0=0.5, beta0=1.0, beta1=1.0, beta2=1.0)
    with pytest.raises(ValueError):
        TheoryConstants(s0=1.0, beta0=-1.0, beta1=0.0, beta2=0.0)
