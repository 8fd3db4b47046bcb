"""Benchmark cost functions with closed-form gradients and bound metadata.

Each potential is a pure pair ``(value, gradient)`` on arrays of shape
``(..., dim)``.  Where the growth metadata is known, a :class:`QuadraticBounds`
record certifies, for constants ``a_bar`` (positive vector), ``u_min <= u_max``
and ``r1, r2, u_g > 0``:

    |a_bar o x|^2 + u_min  <=  U(x)  <=  |a_bar o x|^2 + u_max
    grad U(x) . x          >=  r1 |x|^2 - u_g
    |grad U(x)|^2          <=  r2 |x|^2 + u_g

(``o`` is the elementwise product) together with a uniform bound ``hess_sup``
on the spectral norm of the Hessian.  For the multiwell surfaces the constants
were fitted once on the deterministic grid of radius 20 / step 0.5 and frozen
here; ``fit_bounds`` reproduces the fit and the test suite re-verifies the
inequalities on the same grid.

Catalogue (all selectable by name in the CLI):

* ``quadratic``  sum_i c_i x_i^2, exact metadata.
* ``bivar``      2-D multiwell: quadratic confinement, three Gaussian wells
                 (global minimum near (-5, 3)) and an oscillatory ridge along
                 the x1 barrier.
* ``u2``         variant with equal confinement in both directions and a
                 narrow passage through the x1 = 0 barrier.
* ``u3``         variant with elongated wells and no oscillatory term.
* ``alpine12``   0.5 * sum |x_i sin x_i + 0.1 x_i| in 12-D; nonsmooth, ships a
                 subgradient (sign(0) = 0 at the kinks) and no bound metadata.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class QuadraticBounds:
    """Growth metadata for a potential (see module docstring for the roles)."""

    a_bar: np.ndarray
    u_min: float
    u_max: float
    r1: float
    r2: float
    u_g: float
    hess_sup: float

    def __post_init__(self):
        a = np.asarray(self.a_bar, dtype=float)
        if a.ndim != 1 or np.any(a <= 0):
            raise ValueError("a_bar must be a strictly positive vector")
        object.__setattr__(self, "a_bar", a)
        for name in ("r1", "r2", "u_g"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.hess_sup < 0:
            raise ValueError("hess_sup must be nonnegative")
        if self.u_min > self.u_max:
            raise ValueError("u_min exceeds u_max")

    @property
    def a_m(self) -> float:
        """Smallest element of ``a_bar``."""
        return float(np.min(self.a_bar))

    @property
    def gap(self) -> float:
        """u_max - u_min, the critical scale for admissible schedules."""
        return self.u_max - self.u_min


@dataclass(frozen=True)
class Potential:
    """A cost function with its gradient (or subgradient) and metadata.

    ``value`` maps ``(..., dim) -> (...)`` and ``gradient`` maps
    ``(..., dim) -> (..., dim)``; both are pure and safe to call from any
    number of workers concurrently.
    """

    name: str
    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    bounds: Optional[QuadraticBounds] = None

    def __call__(self, x) -> np.ndarray:
        return self.value(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# quadratic


def quadratic(n: int, coeffs: Sequence[float]) -> Potential:
    """U(x) = sum_i c_i x_i^2 with exact bound metadata.

    All coefficients must be strictly positive; the metadata is then exact:
    a_bar = sqrt(c), u_min = u_max = 0, hess_sup = 2 max c.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (n,):
        raise ValueError(f"coeffs must have length {n}")
    if np.any(c <= 0):
        raise ValueError("quadratic coefficients must be strictly positive")

    def value(x):
        return np.sum(c * np.asarray(x, dtype=float) ** 2, axis=-1)

    def gradient(x):
        return 2.0 * c * np.asarray(x, dtype=float)

    bounds = QuadraticBounds(
        a_bar=np.sqrt(c),
        u_min=0.0,
        u_max=0.0,
        r1=2.0 * float(np.min(c)),
        r2=4.0 * float(np.max(c)) ** 2,
        u_g=1.0,  # any positive slack is admissible; the sharp value is 0
        hess_sup=2.0 * float(np.max(c)),
    )
    return Potential("quadratic", n, value, gradient, bounds)


# ---------------------------------------------------------------------------
# 2-D multiwell family

def _osc(x1, x2):
    """Oscillatory ridge 5 x1^2 e^{-x1^2/9} cos(x1+2x2) cos(2x1-x2) / (1+x2^2/9)."""
    g = 5.0 * x1 ** 2 * np.exp(-(x1 ** 2) / 9.0)
    return g * np.cos(x1 + 2.0 * x2) * np.cos(2.0 * x1 - x2) / (1.0 + x2 ** 2 / 9.0)


def _osc_grad(x1, x2):
    e = np.exp(-(x1 ** 2) / 9.0)
    g = 5.0 * x1 ** 2 * e
    gp = 10.0 * x1 * e * (1.0 - x1 ** 2 / 9.0)
    c1 = np.cos(x1 + 2.0 * x2)
    s1 = np.sin(x1 + 2.0 * x2)
    c2 = np.cos(2.0 * x1 - x2)
    s2 = np.sin(2.0 * x1 - x2)
    den = 1.0 + x2 ** 2 / 9.0
    d1 = (gp * c1 * c2 - g * s1 * c2 - 2.0 * g * c1 * s2) / den
    d2 = (-2.0 * g * s1 * c2 + g * c1 * s2) / den - g * c1 * c2 * (2.0 * x2 / 9.0) / den ** 2
    return d1, d2


def _bivar_value(x):
    x1, x2 = x[..., 0], x[..., 1]
    return (
        x1 ** 2 / 5.0
        + x2 ** 2 / 10.0
        + 5.0 * np.exp(-(x1 ** 2))
        - 7.0 * np.exp(-((x1 + 5.0) ** 2) - (x2 - 3.0) ** 2)
        - 6.0 * np.exp(-((x1 - 5.0) ** 2) - (x2 + 2.0) ** 2)
        + _osc(x1, x2)
    )


def _bivar_gradient(x):
    x1, x2 = x[..., 0], x[..., 1]
    ea = np.exp(-((x1 + 5.0) ** 2) - (x2 - 3.0) ** 2)
    eb = np.exp(-((x1 - 5.0) ** 2) - (x2 + 2.0) ** 2)
    o1, o2 = _osc_grad(x1, x2)
    g1 = 2.0 * x1 / 5.0 - 10.0 * x1 * np.exp(-(x1 ** 2)) + 14.0 * (x1 + 5.0) * ea + 12.0 * (x1 - 5.0) * eb + o1
    g2 = x2 / 5.0 + 14.0 * (x2 - 3.0) * ea + 12.0 * (x2 + 2.0) * eb + o2
    return np.stack([g1, g2], axis=-1)


def _u2_value(x):
    x1, x2 = x[..., 0], x[..., 1]
    return (
        x1 ** 2 / 7.0
        + x2 ** 2 / 7.0
        + 5.0 * (1.0 - np.exp(-9.0 * x2 ** 2)) * np.exp(-(x1 ** 2))
        - 7.0 * np.exp(-((x1 + 5.0) ** 2) - (x2 - 3.0) ** 2)
        - 6.0 * np.exp(-((x1 - 5.0) ** 2) - (x2 + 2.0) ** 2)
        + _osc(x1, x2)
    )


def _u2_gradient(x):
    x1, x2 = x[..., 0], x[..., 1]
    ex1 = np.exp(-(x1 ** 2))
    ex2 = np.exp(-9.0 * x2 ** 2)
    ea = np.exp(-((x1 + 5.0) ** 2) - (x2 - 3.0) ** 2)
    eb = np.exp(-((x1 - 5.0) ** 2) - (x2 + 2.0) ** 2)
    o1, o2 = _osc_grad(x1, x2)
    g1 = 2.0 * x1 / 7.0 - 10.0 * x1 * (1.0 - ex2) * ex1 + 14.0 * (x1 + 5.0) * ea + 12.0 * (x1 - 5.0) * eb + o1
    g2 = 2.0 * x2 / 7.0 + 90.0 * x2 * ex2 * ex1 + 14.0 * (x2 - 3.0) * ea + 12.0 * (x2 + 2.0) * eb + o2
    return np.stack([g1, g2], axis=-1)


def _u3_value(x):
    x1, x2 = x[..., 0], x[..., 1]
    return (
        x1 ** 2 / 5.0
        + x2 ** 2 / 10.0
        + 5.0 * np.exp(-(x1 ** 2))
        - 7.0 * np.exp(-2.0 * (x1 + 5.0) ** 2 - (x2 - 3.0) ** 2 / 5.0)
        - 6.0 * np.exp(-((x1 - 5.0) ** 2) / 5.0 - 2.0 * (x2 + 2.0) ** 2)
    )


def _u3_gradient(x):
    x1, x2 = x[..., 0], x[..., 1]
    ea = np.exp(-2.0 * (x1 + 5.0) ** 2 - (x2 - 3.0) ** 2 / 5.0)
    eb = np.exp(-((x1 - 5.0) ** 2) / 5.0 - 2.0 * (x2 + 2.0) ** 2)
    g1 = 2.0 * x1 / 5.0 - 10.0 * x1 * np.exp(-(x1 ** 2)) + 28.0 * (x1 + 5.0) * ea + 2.4 * (x1 - 5.0) * eb
    g2 = x2 / 5.0 + 2.8 * (x2 - 3.0) * ea + 24.0 * (x2 + 2.0) * eb
    return np.stack([g1, g2], axis=-1)


# Constants fitted on the radius-20 / step-0.5 grid (see fit_bounds), with
# headroom so the inequalities also hold off-grid; re-verified by the tests.
_BIVAR_BOUNDS = QuadraticBounds(
    a_bar=np.array([5.0, 10.0]) ** -0.5,
    u_min=-16.5, u_max=12.5, r1=0.1, r2=0.82, u_g=1160.0, hess_sup=90.0,
)
_U2_BOUNDS = QuadraticBounds(
    a_bar=np.array([7.0, 7.0]) ** -0.5,
    u_min=-16.5, u_max=12.5, r1=1.0 / 7.0, r2=0.67, u_g=1160.0, hess_sup=95.0,
)
_U3_BOUNDS = QuadraticBounds(
    a_bar=np.array([5.0, 10.0]) ** -0.5,
    u_min=-7.5, u_max=5.5, r1=0.1, r2=0.82, u_g=90.0, hess_sup=30.0,
)


def bivariate_multiwell() -> Potential:
    """The 2-D multiwell barrier-crossing benchmark (global minimum near (-5, 3))."""
    return Potential("bivar", 2, _bivar_value, _bivar_gradient, _BIVAR_BOUNDS)


def u2() -> Potential:
    """Multiwell variant with equal confinement and a narrow barrier passage."""
    return Potential("u2", 2, _u2_value, _u2_gradient, _U2_BOUNDS)


def u3() -> Potential:
    """Multiwell variant with elongated wells; no oscillatory ridge."""
    return Potential("u3", 2, _u3_value, _u3_gradient, _U3_BOUNDS)


# ---------------------------------------------------------------------------
# alpine, 12-D, nonsmooth


def _alpine_value(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * np.sum(np.abs(x * np.sin(x) + 0.1 * x), axis=-1)


def _alpine_subgradient(x):
    # sign(0) = 0 selects the zero element of the subdifferential at kinks.
    x = np.asarray(x, dtype=float)
    return 0.5 * np.sign(x * np.sin(x) + 0.1 * x) * (np.sin(x) + x * np.cos(x) + 0.1)


def alpine12() -> Potential:
    """0.5 * sum_{i=1..12} |x_i sin x_i + 0.1 x_i| with a declared subgradient."""
    return Potential("alpine12", 12, _alpine_value, _alpine_subgradient, bounds=None)


# ---------------------------------------------------------------------------
# registry and experiment defaults


def by_name(name: str, n: int | None = None, coeffs: Sequence[float] | None = None) -> Potential:
    """Look up a potential by its CLI name.

    ``quadratic`` additionally needs ``n`` and optionally ``coeffs``
    (default 0.5 each, i.e. U(x) = |x|^2 / 2).
    """
    if name == "quadratic":
        if n is None:
            raise ValueError("potential 'quadratic' requires a dimension n")
        if coeffs is None:
            coeffs = [0.5] * n
        return quadratic(n, coeffs)
    factories = {"bivar": bivariate_multiwell, "u2": u2, "u3": u3, "alpine12": alpine12}
    if name not in factories:
        raise ValueError(f"unknown potential {name!r}; choose from "
                         f"{['quadratic', *factories]}")
    return factories[name]()


def experiment_defaults(name: str) -> tuple[np.ndarray, list[tuple[float, float]]]:
    """Default initial point and per-coordinate tolerance intervals."""
    if name == "alpine12":
        return np.full(12, 6.0), [(-2.0, 2.0)] * 12
    if name in ("bivar", "u2", "u3"):
        return np.array([4.0, 2.0]), [(-6.5, -4.5), (1.5, 4.5)]
    raise ValueError(f"no experiment defaults for potential {name!r}")


# ---------------------------------------------------------------------------
# fitting / verification helpers


def _grid(radius: float, step: float, dim: int) -> np.ndarray:
    axis = np.arange(-radius, radius + step / 2, step)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, dim)


def fit_bounds(value, gradient, a_bar, radius: float = 20.0, step: float = 0.5,
               hess_sup: float | None = None) -> QuadraticBounds:
    """Fit bound constants for a potential over the deterministic grid.

    ``a_bar`` is taken from the potential's printed quadratic confinement;
    the remaining constants are measured on the grid with slack factors so
    they stay valid off-grid (r1 below, r2 above the asymptotic slopes).
    """
    a = np.asarray(a_bar, dtype=float)
    pts = _grid(radius, step, len(a))
    u = value(pts)
    g = gradient(pts)
    quad = np.sum((a * pts) ** 2, axis=-1)
    rad2 = np.sum(pts ** 2, axis=-1)
    r1 = float(np.min(a ** 2))
    r2 = 8.0 * float(np.max(a ** 4)) + 0.5
    need_g = max(
        float(np.max(r1 * rad2 - np.sum(g * pts, axis=-1))),
        float(np.max(np.sum(g ** 2, axis=-1) - r2 * rad2)),
        1e-6,
    )
    if hess_sup is None:
        hess_sup = _max_hessian_norm(gradient, pts)
    resid = u - quad
    return QuadraticBounds(
        a_bar=a,
        u_min=float(np.min(resid)) - 0.5,
        u_max=float(np.max(resid)) + 0.5,
        r1=r1,
        r2=r2,
        u_g=need_g * 1.05 + 1.0,
        hess_sup=hess_sup * 1.1,
    )


def _max_hessian_norm(gradient, pts, h: float = 1e-5) -> float:
    dim = pts.shape[-1]
    cols = []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = h
        cols.append((gradient(pts + e) - gradient(pts - e)) / (2.0 * h))
    hess = np.stack(cols, axis=-1)  # (..., dim, dim)
    return float(np.max(np.linalg.norm(hess, ord=2, axis=(-2, -1))))


def bounds_violations(potential: Potential, radius: float = 20.0, step: float = 0.5) -> dict:
    """Max violation of each bound inequality on the grid (<= 0 means it holds)."""
    b = potential.bounds
    if b is None:
        raise ValueError(f"potential {potential.name!r} declares no bounds")
    pts = _grid(radius, step, potential.dim)
    u = potential.value(pts)
    g = potential.gradient(pts)
    quad = np.sum((b.a_bar * pts) ** 2, axis=-1)
    rad2 = np.sum(pts ** 2, axis=-1)
    return {
        "lower": float(np.max(quad + b.u_min - u)),
        "upper": float(np.max(u - quad - b.u_max)),
        "grad_dot": float(np.max(b.r1 * rad2 - b.u_g - np.sum(g * pts, axis=-1))),
        "grad_sq": float(np.max(np.sum(g ** 2, axis=-1) - b.r2 * rad2 - b.u_g)),
    }
