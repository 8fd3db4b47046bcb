import numpy as np
import pytest

from gle_anneal import potentials
from gle_anneal.potentials import (
    Potential,
    alpine12,
    bivariate_multiwell,
    bounds_violations,
    by_name,
    quadratic,
    u2,
    u3,
)

ALL_NAMED = ["quadratic", "bivar", "u2", "u3", "alpine12"]


def fd_gradient(pot, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (pot.value(x + e) - pot.value(x - e)) / (2 * h)
    return g


def test_quadratic_examples():
    p = quadratic(1, [0.5])
    assert p.value(np.array([0.0])) == 0.0
    assert p.gradient(np.array([0.0])) == pytest.approx([0.0])

    p2 = quadratic(2, [1.0, 1.0])
    x = np.array([1.0, 2.0])
    assert p2.value(x) == pytest.approx(5.0)
    assert p2.gradient(x) == pytest.approx([2.0, 4.0])

    # u_min = u_max = 0: the confinement bound is tight
    p = quadratic(1, [0.5])
    x = np.array([3.0])
    assert np.sum((p.bounds.a_bar * x) ** 2) == pytest.approx(p.value(x))
    assert p.value(x) == pytest.approx(4.5)


def test_quadratic_validation():
    with pytest.raises(ValueError):
        quadratic(2, [1.0, -1.0])
    with pytest.raises(ValueError):
        quadratic(2, [1.0])


def test_quadratic_metadata_exact():
    p = quadratic(3, [0.5, 2.0, 1.0])
    b = p.bounds
    assert b.a_bar == pytest.approx(np.sqrt([0.5, 2.0, 1.0]))
    assert b.a_m == pytest.approx(np.sqrt(0.5))
    assert b.u_min == 0.0 and b.u_max == 0.0
    assert b.hess_sup == pytest.approx(4.0)


def test_bivar_well_ordering():
    # frozen from a high-precision transcription of the formula (mpmath cross-check
    # in scripts during development): U(-5,3)=0.805305, U(5,-2)=1.853238, U(4,2)=2.292260
    p = bivariate_multiwell()
    g_min = p.value(np.array([-5.0, 3.0]))
    assert g_min == pytest.approx(0.805305, abs=1e-5)
    assert p.value(np.array([5.0, -2.0])) == pytest.approx(1.853238, abs=1e-5)
    assert p.value(np.array([4.0, 2.0])) == pytest.approx(2.292260, abs=1e-5)
    assert g_min < p.value(np.array([5.0, -2.0]))
    assert g_min < p.value(np.array([4.0, 2.0]))


def test_bivar_confinement_dominates():
    p = bivariate_multiwell()
    assert p.value(np.array([100.0, 0.0])) > p.value(np.array([10.0, 0.0]))


def test_u3_well_ordering():
    p = u3()
    assert p.value(np.array([-5.0, 3.0])) < p.value(np.array([5.0, -2.0]))


def test_u2_against_symbolic_oracle():
    sympy = pytest.importorskip("sympy")
    x1, x2 = sympy.symbols("x1 x2")
    expr = (
        x1 ** 2 / 7 + x2 ** 2 / 7
        + 5 * (1 - sympy.exp(-9 * x2 ** 2)) * sympy.exp(-(x1 ** 2))
        - 7 * sympy.exp(-((x1 + 5) ** 2) - (x2 - 3) ** 2)
        - 6 * sympy.exp(-((x1 - 5) ** 2) - (x2 + 2) ** 2)
        + 5 * x1 ** 2 * sympy.exp(-(x1 ** 2) / 9)
        * sympy.cos(x1 + 2 * x2) * sympy.cos(2 * x1 - x2) / (1 + x2 ** 2 / 9)
    )
    pt = {x1: sympy.Rational(4), x2: sympy.Rational(2)}
    want_v = float(expr.subs(pt).evalf(30))
    want_g = [float(sympy.diff(expr, s).subs(pt).evalf(30)) for s in (x1, x2)]

    p = u2()
    x = np.array([4.0, 2.0])
    assert p.value(x) == pytest.approx(want_v, abs=1e-10)
    assert p.gradient(x) == pytest.approx(want_g, abs=1e-10)


def test_alpine_origin_and_subgradient():
    p = alpine12()
    zero = np.zeros(12)
    assert p.value(zero) == 0.0
    assert np.all(p.gradient(zero) == 0.0)


@pytest.mark.parametrize("name", ALL_NAMED)
def test_gradient_matches_finite_differences(name):
    pot = by_name(name, n=3)
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 100:
        x = rng.uniform(-8, 8, size=pot.dim)
        if name == "alpine12":
            # skip the kink set |x sin x + 0.1 x| ~ 0 where U is not differentiable
            if np.any(np.abs(x * np.sin(x) + 0.1 * x) < 1e-3):
                continue
        g = pot.gradient(x)
        fd = fd_gradient(pot, x)
        scale = np.maximum(np.abs(fd), 1.0)
        assert np.max(np.abs(g - fd) / scale) < 1e-5, f"{name} at {x}"
        checked += 1


@pytest.mark.parametrize("name", ["quadratic", "bivar", "u2", "u3"])
def test_bound_inequalities_on_grid(name):
    pot = by_name(name, n=2)
    viol = bounds_violations(pot, radius=20.0, step=0.5)
    for key, value in viol.items():
        # 1e-9 absorbs roundoff where a bound holds with equality (exact quadratic)
        assert value <= 1e-9, f"{name}: {key} violated by {value}"


def test_alpine_declares_no_bounds():
    assert alpine12().bounds is None


def test_fit_bounds_reproduces_stored_constants():
    # freshly fitted constants must themselves satisfy the grid inequalities,
    # and the stored ones must dominate the fitted requirements
    p = bivariate_multiwell()
    fresh = potentials.fit_bounds(p.value, p.gradient, p.bounds.a_bar,
                                  hess_sup=p.bounds.hess_sup)
    assert p.bounds.u_min <= fresh.u_min and p.bounds.u_max >= fresh.u_max
    assert p.bounds.u_g >= fresh.u_g * 0.9
    cand = Potential(p.name, p.dim, p.value, p.gradient, fresh)
    viol = bounds_violations(cand)
    assert max(viol.values()) <= 0.0


def test_evaluations_are_pure():
    for name in ALL_NAMED:
        pot = by_name(name, n=2)
        x = np.linspace(-3, 3, 2 * pot.dim).reshape(2, pot.dim)
        assert np.array_equal(pot.value(x), pot.value(x))
        assert np.array_equal(pot.gradient(x), pot.gradient(x))


def test_batched_evaluation_matches_rowwise():
    for name in ALL_NAMED:
        pot = by_name(name, n=2)
        rng = np.random.default_rng(9)
        xs = rng.uniform(-6, 6, size=(7, pot.dim))
        vb = pot.value(xs)
        gb = pot.gradient(xs)
        for i in range(7):
            assert vb[i] == pot.value(xs[i])
            assert np.array_equal(gb[i], pot.gradient(xs[i]))


def test_by_name_unknown():
    with pytest.raises(ValueError):
        by_name("rosenbrock")
    with pytest.raises(ValueError):
        by_name("quadratic")  # needs n


def test_experiment_defaults():
    x0, tol = potentials.experiment_defaults("alpine12")
    assert x0 == pytest.approx(np.full(12, 6.0))
    assert tol == [(-2.0, 2.0)] * 12
    x0, tol = potentials.experiment_defaults("u2")
    assert x0 == pytest.approx([4.0, 2.0])
    assert tol == [(-6.5, -4.5), (1.5, 4.5)]
