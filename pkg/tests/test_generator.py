import math

import numpy as np
import pytest

from gle_anneal.generator import (
    SmoothTestFunction,
    apply_generator,
    build_R,
    carre_du_champ,
    chained,
    delta_bound,
    squared,
    standard_test_functions,
    verify_drift,
)
from gle_anneal.integrators import DynamicsConfig, State
from gle_anneal.matrices import make_A, make_lambda, make_sigma
from gle_anneal.potentials import quadratic
from gle_anneal.schedules import constant_schedule


def gle_config(n=1, design=1, mu=1.0, lam_bar=1.0, T=1.0, coeffs=None):
    pot = quadratic(n, coeffs if coeffs is not None else [0.5] * n)
    mem = make_A(design, n, mu)
    return DynamicsConfig(kind="gle", potential=pot, schedule=constant_schedule(T),
                          dt=0.01, memory=mem, coupling=make_lambda(design, n, lam_bar),
                          noise=make_sigma(mem))


def random_state(rng, n, m, scale=2.0):
    return State(x=scale * rng.standard_normal(n), y=scale * rng.standard_normal(n),
                 z=scale * rng.standard_normal(m))


def constant_fn(n, m, c=3.0):
    return SmoothTestFunction(
        f=lambda x, y, z: c,
        grad=lambda x, y, z: (np.zeros(n), np.zeros(n), np.zeros(m)),
        hess_zz=lambda x, y, z: np.zeros((m, m)),
    )


def test_standard_functions_match_finite_differences():
    # the supplied grad / hess_zz must be the actual derivatives of f
    n = m = 2
    rng = np.random.default_rng(12)
    h = 1e-5
    for fn in standard_test_functions(n, m):
        for _ in range(10):
            st = random_state(rng, n, m, scale=1.0)
            gx, gy, gz = fn.grad(st.x, st.y, st.z)
            for block, g in (("x", gx), ("y", gy), ("z", gz)):
                for i in range(n if block in "xy" else m):
                    lo = {k: getattr(st, k).copy() for k in "xyz"}
                    hi = {k: getattr(st, k).copy() for k in "xyz"}
                    lo[block][i] -= h
                    hi[block][i] += h
                    fd = (fn.f(hi["x"], hi["y"], hi["z"])
                          - fn.f(lo["x"], lo["y"], lo["z"])) / (2 * h)
                    assert fd == pytest.approx(g[i], rel=1e-5, abs=1e-7)
            hess = fn.hess_zz(st.x, st.y, st.z)
            for j in range(m):
                zl, zh = st.z.copy(), st.z.copy()
                zl[j] -= h
                zh[j] += h
                col = (fn.grad(st.x, st.y, zh)[2] - fn.grad(st.x, st.y, zl)[2]) / (2 * h)
                assert col == pytest.approx(hess[:, j], rel=1e-4, abs=1e-6)


def test_generator_annihilates_constants():
    cfg = gle_config()
    st = State(x=[0.3], y=[-1.2], z=[0.7])
    assert apply_generator(constant_fn(1, 1), st, 1.0, cfg) == 0.0


def test_generator_memory_energy_closed_form():
    # f = |z|^2/2, negligible coupling, A = I_m: L f = -|z|^2/T + m
    n = m = 2
    cfg = gle_config(n=n, design=1, lam_bar=1e-300)
    fn = standard_test_functions(n, m)[1]
    rng = np.random.default_rng(0)
    for _ in range(5):
        st = random_state(rng, n, m)
        T = 0.7
        want = -float(st.z @ st.z) / T + m
        assert apply_generator(fn, st, T, cfg) == pytest.approx(want, rel=1e-9)


def test_generator_xy_product_closed_form():
    # f = x.y with U = x^2 (coeff 1): L f = |y|^2 - 2 x.x + z' lam x
    cfg = gle_config(n=1, design=2, coeffs=[1.0])
    fn = standard_test_functions(1, cfg.m)[0]
    rng = np.random.default_rng(1)
    lam = cfg.coupling.matrix
    for _ in range(10):
        st = random_state(rng, 1, cfg.m)
        want = float(st.y @ st.y) - 2.0 * float(st.x @ st.x) + float((st.z @ lam) @ st.x)
        got = apply_generator(fn, st, 0.9, cfg)
        assert got == pytest.approx(want, rel=1e-10)


def test_carre_examples():
    cfg = gle_config(n=1, design=1)
    st = State(x=[0.5], y=[1.0], z=[2.0])
    # f independent of z
    fn = standard_test_functions(1, 1)[0]
    assert carre_du_champ(fn, st, cfg) == 0.0
    # f = z_1, A = I: Gamma = 1
    z1 = SmoothTestFunction(
        f=lambda x, y, z: float(z[0]),
        grad=lambda x, y, z: (np.zeros(1), np.zeros(1), np.array([1.0])),
        hess_zz=lambda x, y, z: np.zeros((1, 1)),
    )
    assert carre_du_champ(z1, st, cfg) == pytest.approx(1.0)


@pytest.mark.parametrize("design", [1, 2, 4])
def test_carre_identity_is_half_l_f2_minus_f_lf(design):
    # the defining identity Gamma(f) = L(f^2)/2 - f L(f) is the oracle
    cfg = gle_config(n=1, design=design)
    fns = standard_test_functions(1, cfg.m)
    rng = np.random.default_rng(2)
    for fn in fns:
        for _ in range(100):
            st = random_state(rng, 1, cfg.m)
            lf = apply_generator(fn, st, 1.3, cfg)
            lf2 = apply_generator(squared(fn), st, 1.3, cfg)
            direct = carre_du_champ(fn, st, cfg)
            ident = 0.5 * lf2 - fn.f(st.x, st.y, st.z) * lf
            assert ident == pytest.approx(direct, rel=1e-8, abs=1e-10)


def test_chain_rule_exponential():
    # L(phi(f)) = phi'(f) L f + phi''(f) Gamma(f) for phi = exp
    cfg = gle_config(n=2, design=2)
    fns = standard_test_functions(2, cfg.m)
    rng = np.random.default_rng(3)
    for fn in fns:
        comp = chained(fn, math.exp, math.exp, math.exp)
        for _ in range(50):
            st = random_state(rng, 2, cfg.m, scale=1.0)
            lhs = apply_generator(comp, st, 0.8, cfg)
            s = math.exp(fn.f(st.x, st.y, st.z))
            rhs = s * apply_generator(fn, st, 0.8, cfg) + s * carre_du_champ(fn, st, cfg)
            assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-9)


def test_generator_linearity():
    cfg = gle_config(n=1, design=1)
    f1, f2, _ = standard_test_functions(1, 1)

    def combine(a, b):
        return SmoothTestFunction(
            f=lambda x, y, z: a * f1.f(x, y, z) + b * f2.f(x, y, z),
            grad=lambda x, y, z: tuple(
                a * u + b * v for u, v in zip(f1.grad(x, y, z), f2.grad(x, y, z))),
            hess_zz=lambda x, y, z: a * f1.hess_zz(x, y, z) + b * f2.hess_zz(x, y, z),
        )

    rng = np.random.default_rng(4)
    for _ in range(25):
        st = random_state(rng, 1, 1)
        a, b = rng.standard_normal(2)
        lhs = apply_generator(combine(a, b), st, 1.1, cfg)
        rhs = (a * apply_generator(f1, st, 1.1, cfg)
               + b * apply_generator(f2, st, 1.1, cfg))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_delta_bound_closed_form():
    # A = I, lam = I, n = m = 1, U = x^2/2 (r1 = r2 = 1), max T = 1:
    # delta = (1/2) / [(1/2 + 1 + 1) * 1 + 2] = 1/9
    cfg = gle_config()
    assert delta_bound(cfg, t_max=1.0) == pytest.approx(1.0 / 9.0, rel=1e-12)


def test_build_R_value_at_origin():
    cfg = gle_config()
    cert = build_R(cfg, t_max=1.0)
    assert cert.value(np.zeros(1), np.zeros(1), np.zeros(1), 1.0) == pytest.approx(0.0)


def test_R_cross_term_bounded_by_quarter_norm():
    cfg = gle_config()
    cert = build_R(cfg, t_max=1.0)
    rng = np.random.default_rng(5)
    pts = rng.uniform(-10, 10, size=(2000, 3))
    x, y, z = pts[:, :1], pts[:, 1:2], pts[:, 2:]
    linv = cfg.coupling.left_inverse
    cross = cert.delta * 1.0 * (np.sum(y * (z @ linv.T), axis=-1)
                                + 0.5 * np.sum(x * y, axis=-1))
    norm = np.sum(pts ** 2, axis=-1)
    assert np.all(np.abs(cross) <= 0.25 * norm + 1e-12)


def test_R_envelope_on_grid():
    cfg = gle_config()
    cert = build_R(cfg, t_max=1.0)
    rng = np.random.default_rng(6)
    pts = rng.uniform(-12, 12, size=(4000, 3))
    x, y, z = pts[:, :1], pts[:, 1:2], pts[:, 2:]
    vals = cert.value(x, y, z, 1.0)
    norm = np.sum(pts ** 2, axis=-1)
    assert np.all(vals >= cert.quad_lo * norm - cert.shift_d - 1e-9)
    assert np.all(vals <= cert.quad_hi * norm + cert.shift_d + 1e-9)


def test_generator_image_matches_apply_generator():
    # the vectorized closed form agrees with the term-by-term evaluation
    for design in (1, 4):
        cfg = gle_config(n=1, design=design)
        cert = build_R(cfg, t_max=1.0)
        fn = cert.as_test_function(0.6)
        rng = np.random.default_rng(7)
        for _ in range(40):
            st = random_state(rng, 1, cfg.m, scale=3.0)
            direct = apply_generator(fn, st, 0.6, cfg)
            closed = float(cert.generator_image(st.x, st.y, st.z, 0.6))
            assert closed == pytest.approx(direct, rel=1e-10, abs=1e-10)


def test_drift_verification_benchmark():
    cfg = gle_config()
    cert = build_R(cfg, t_max=1.0)
    report = verify_drift(cert, cfg, T=1.0, sample_count=10_000, radius=10.0)
    assert report.passes
    assert report.max_violation <= 1e-8
    assert report.far_field_max < 0.0
    assert cert.drift_c > 0 and cert.shift_d > 0


def test_drift_degenerate_c_zero():
    # with c = 0 the inequality is L R <= d, which a large d must satisfy
    cfg = gle_config()
    cert = build_R(cfg, t_max=1.0)
    report = verify_drift(cert, cfg, T=1.0, sample_count=2000, radius=10.0,
                          c=0.0, d=cert.shift_d)
    assert report.passes


def test_build_R_rejects_zero_coercivity():
    cfg = gle_config(design=2)
    with pytest.raises(ValueError, match="[Cc]oercivity"):
        build_R(cfg, t_max=1.0)


def test_generator_requires_gle():
    from gle_anneal.potentials import quadratic as quad

    cfg = DynamicsConfig(kind="underdamped", potential=quad(1, [0.5]),
                         schedule=constant_schedule(1.0), dt=0.1)
    with pytest.raises(ValueError):
        apply_generator(constant_fn(1, 1), State(x=[0.0], y=[0.0], z=[0.0]), 1.0, cfg)
