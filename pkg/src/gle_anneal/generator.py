"""Numerical application of the dynamics' generator and drift certificates.

For the memory dynamics at temperature T the generator acting on a smooth
f(x, y, z) is the four-term sum

    L f = (y . grad_x f - grad U . grad_y f)
        + (z' lam grad_y f - y' lam' grad_z f)
        - T^-1 z' A grad_z f
        + A : D_z^2 f

and the associated carre du champ is Gamma(f) = grad_z f . (A grad_z f),
which also equals (1/2) L(f^2) - f L(f) (the defining identity, used as an
oracle in the tests).

The drift certificate is the coercive function

    R(x, y, z, T) = U(x) + |y|^2/2 + |z|^2/2 + delta T (y . linv z + x.y / 2)

with delta chosen small enough, for which constants a, b, c, d > 0 exist with
a|s|^2 - d <= R <= b|s|^2 + d and L R <= -c T R + d.  ``build_R`` constructs
delta from the closed-form admissibility bound,

    delta <= (A_c/2) [ (|lam|^2/(2 r1) + 1 + (r2/r1)|linv|^2) T_max^2
                       + 2 |A|^2 |linv|^2 ]^-1,

derives (a, b) from the potential's bound metadata, fits (c, d) by sampled
maximization, and ``verify_drift`` then checks the inequality on fresh
sample points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .integrators import DynamicsConfig, State


@dataclass(frozen=True)
class SmoothTestFunction:
    """A scalar test function with its gradient and z-Hessian.

    ``grad(x, y, z)`` returns the triple (grad_x, grad_y, grad_z);
    ``hess_zz(x, y, z)`` returns the (m, m) second-derivative block in z.
    """

    f: Callable
    grad: Callable
    hess_zz: Callable


def squared(fn: SmoothTestFunction) -> SmoothTestFunction:
    """The test function f^2 with derivatives induced by the product rule."""

    def value(x, y, z):
        return fn.f(x, y, z) ** 2

    def grad(x, y, z):
        v = fn.f(x, y, z)
        gx, gy, gz = fn.grad(x, y, z)
        return 2.0 * v * gx, 2.0 * v * gy, 2.0 * v * gz

    def hess_zz(x, y, z):
        v = fn.f(x, y, z)
        gz = fn.grad(x, y, z)[2]
        return 2.0 * (np.outer(gz, gz) + v * fn.hess_zz(x, y, z))

    return SmoothTestFunction(value, grad, hess_zz)


def chained(fn: SmoothTestFunction, phi, dphi, d2phi) -> SmoothTestFunction:
    """The composition phi(f) with chain-rule derivatives."""

    def value(x, y, z):
        return phi(fn.f(x, y, z))

    def grad(x, y, z):
        s = dphi(fn.f(x, y, z))
        gx, gy, gz = fn.grad(x, y, z)
        return s * gx, s * gy, s * gz

    def hess_zz(x, y, z):
        v = fn.f(x, y, z)
        gz = fn.grad(x, y, z)[2]
        return d2phi(v) * np.outer(gz, gz) + dphi(v) * fn.hess_zz(x, y, z)

    return SmoothTestFunction(value, grad, hess_zz)


def standard_test_functions(n: int, m: int) -> list[SmoothTestFunction]:
    """Three smooth functions exercising every generator term.

    position-velocity product x.y, memory energy |z|^2/2, and the Gaussian
    bump exp(-(|x|^2+|y|^2+|z|^2)/2).
    """
    zero_h = lambda x, y, z: np.zeros((m, m))

    xy = SmoothTestFunction(
        f=lambda x, y, z: float(x @ y),
        grad=lambda x, y, z: (y.copy(), x.copy(), np.zeros(m)),
        hess_zz=zero_h,
    )
    z_energy = SmoothTestFunction(
        f=lambda x, y, z: 0.5 * float(z @ z),
        grad=lambda x, y, z: (np.zeros(n), np.zeros(n), z.copy()),
        hess_zz=lambda x, y, z: np.eye(m),
    )

    def bump(x, y, z):
        return math.exp(-0.5 * float(x @ x + y @ y + z @ z))

    gaussian = SmoothTestFunction(
        f=bump,
        grad=lambda x, y, z: (-x * bump(x, y, z), -y * bump(x, y, z), -z * bump(x, y, z)),
        hess_zz=lambda x, y, z: bump(x, y, z) * (np.outer(z, z) - np.eye(m)),
    )
    return [xy, z_energy, gaussian]


def _require_gle(cfg: DynamicsConfig):
    if cfg.kind != "gle" or cfg.memory is None or cfg.coupling is None:
        raise ValueError("generator evaluation requires a gle configuration")


def apply_generator(fn: SmoothTestFunction, point: State, T: float,
                    cfg: DynamicsConfig) -> float:
    """Evaluate L f at a point, term by term, from the supplied derivatives."""
    _require_gle(cfg)
    if T <= 0:
        raise ValueError("temperature must be positive")
    x, y, z = point.x, point.y, point.z
    gx, gy, gz = fn.grad(x, y, z)
    lam = cfg.coupling.matrix
    mem = cfg.memory.matrix
    transport = float(y @ gx - cfg.potential.gradient(x) @ gy)
    exchange = float((z @ lam) @ gy - (lam @ y) @ gz)
    dissipation = -float(z @ (mem @ gz)) / T
    diffusion = float(np.sum(mem * fn.hess_zz(x, y, z)))
    return transport + exchange + dissipation + diffusion


def carre_du_champ(fn: SmoothTestFunction, point: State, cfg: DynamicsConfig) -> float:
    """Gamma(f) = grad_z f . (A grad_z f)."""
    _require_gle(cfg)
    gz = fn.grad(point.x, point.y, point.z)[2]
    return float(gz @ (cfg.memory.matrix @ gz))


# ---------------------------------------------------------------------------
# Lyapunov drift certificate


@dataclass
class LyapunovR:
    """Coercive certificate R with fitted envelope and drift constants.

    quad_lo/quad_hi/shift_d give a|s|^2 - d <= R <= b|s|^2 + d; drift_c is
    the fitted c with L R <= -c T R + d for temperatures up to t_max.
    """

    delta: float
    drift_c: float
    shift_d: float
    quad_lo: float
    quad_hi: float
    t_max: float
    cfg: DynamicsConfig

    def value(self, x, y, z, T: float):
        """R at points; accepts (..., n)/(..., n)/(..., m) batches."""
        linv = self.cfg.coupling.left_inverse
        u = self.cfg.potential.value(x)
        cross = np.sum(y * np.einsum("ij,...j->...i", linv, z), axis=-1)
        cross = cross + 0.5 * np.sum(x * y, axis=-1)
        return (u + 0.5 * np.sum(y * y, axis=-1) + 0.5 * np.sum(z * z, axis=-1)
                + self.delta * T * cross)

    def generator_image(self, x, y, z, T: float):
        """L R at points, in closed form (uses linv lam = I)."""
        cfg = self.cfg
        lam = cfg.coupling.matrix
        linv = cfg.coupling.left_inverse
        mem = cfg.memory.matrix
        d_t = self.delta * T
        grad_u = cfg.potential.gradient(x)
        lam_t_z = np.einsum("ji,...j->...i", lam, z)      # lam' z   (..., n)
        linv_z = np.einsum("ij,...j->...i", linv, z)      # linv z   (..., n)
        linv_t_y = np.einsum("ji,...j->...i", linv, y)    # linv' y  (..., m)
        z_mem_z = np.sum(z * np.einsum("ij,...j->...i", mem, z), axis=-1)
        z_mem_liy = np.sum(z * np.einsum("ij,...j->...i", mem, linv_t_y), axis=-1)
        return (
            -0.5 * d_t * np.sum(y * y, axis=-1)
            - d_t * np.sum(grad_u * linv_z, axis=-1)
            - 0.5 * d_t * np.sum(grad_u * x, axis=-1)
            + d_t * np.sum(lam_t_z * linv_z, axis=-1)
            + 0.5 * d_t * np.sum(lam_t_z * x, axis=-1)
            - z_mem_z / T
            - self.delta * z_mem_liy
            + np.trace(mem)
        )

    def as_test_function(self, T: float) -> SmoothTestFunction:
        """R at frozen temperature T as a SmoothTestFunction (for cross-checks)."""
        cfg = self.cfg
        linv = cfg.coupling.left_inverse
        d_t = self.delta * T

        def value(x, y, z):
            return float(self.value(x, y, z, T))

        def grad(x, y, z):
            gx = cfg.potential.gradient(x) + 0.5 * d_t * y
            gy = y + d_t * (linv @ z + 0.5 * x)
            gz = z + d_t * (linv.T @ y)
            return gx, gy, gz

        def hess_zz(x, y, z):
            return np.eye(cfg.m)

        return SmoothTestFunction(value, grad, hess_zz)


def _ball_points(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    v = rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / dim)
    return v * r[:, None]


def _shell_points(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    v = rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return radius * v


def _split(points: np.ndarray, n: int, m: int):
    return points[:, :n], points[:, n:2 * n], points[:, 2 * n:2 * n + m]


def delta_bound(cfg: DynamicsConfig, t_max: float) -> float:
    """Closed-form admissibility bound for the cross-term weight delta."""
    _require_gle(cfg)
    b = cfg.potential.bounds
    if b is None:
        raise ValueError("potential declares no quadratic bounds")
    a_c = cfg.memory.coercivity
    if a_c <= 0:
        raise ValueError("coercivity zero, Lyapunov construction inapplicable")
    lam_norm = float(np.linalg.norm(cfg.coupling.matrix, ord=2))
    linv_norm = float(np.linalg.norm(cfg.coupling.left_inverse, ord=2))
    a_norm = cfg.memory.op_norm
    denom = ((lam_norm ** 2 / (2.0 * b.r1) + 1.0 + (b.r2 / b.r1) * linv_norm ** 2) * t_max ** 2
             + 2.0 * a_norm ** 2 * linv_norm ** 2)
    return 0.5 * a_c / denom


def build_R(cfg: DynamicsConfig, t_max: float, fit_samples: int = 4096,
            fit_seed: int = 20) -> LyapunovR:
    """Construct the drift certificate for a memory configuration.

    delta is set to the closed-form bound; the quadratic envelope comes from
    the potential's bound metadata plus the worst case of the cross term;
    (c, d) are fitted by maximizing L R + (quadratic decay) over sampled
    points at several temperatures below t_max.
    """
    _require_gle(cfg)
    b = cfg.potential.bounds
    if b is None:
        raise ValueError("potential declares no quadratic bounds")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    delta = delta_bound(cfg, t_max)
    linv_norm = float(np.linalg.norm(cfg.coupling.left_inverse, ord=2))
    a_c = cfg.memory.coercivity

    # envelope: |delta T cross| <= kappa_x |x|^2 + kappa_y |y|^2 + kappa_z |z|^2
    kap_x = delta * t_max / 4.0
    kap_y = delta * t_max * (linv_norm / 2.0 + 0.25)
    kap_z = delta * t_max * linv_norm / 2.0
    a_min2 = b.a_m ** 2
    a_max2 = float(np.max(b.a_bar ** 2))
    quad_lo = min(a_min2 - kap_x, 0.5 - kap_y, 0.5 - kap_z)
    if quad_lo <= 0:
        raise ValueError("delta too large for a coercive envelope; check bounds metadata")
    quad_hi = max(a_max2 + kap_x, 0.5 + kap_y, 0.5 + kap_z)
    shift = max(-b.u_min, b.u_max, 0.0) + 1.0

    cert = LyapunovR(delta=delta, drift_c=0.0, shift_d=shift,
                     quad_lo=quad_lo, quad_hi=quad_hi, t_max=t_max, cfg=cfg)

    # fit the drift constants: sup of L R + decay must be finite
    n, m = cfg.n, cfg.m
    dim = 2 * n + m
    rng = np.random.default_rng(fit_seed)
    pts = np.vstack([
        _ball_points(rng, fit_samples, dim, 15.0),
        _shell_points(rng, 256, dim, 1e3),
    ])
    x, y, z = _split(pts, n, m)
    sup = -math.inf
    for t in (t_max, t_max / 4.0, t_max / 16.0, t_max * 1e-2):
        decay = (delta * t * b.r1 / 8.0 * np.sum(x * x, axis=-1)
                 + delta * t / 4.0 * np.sum(y * y, axis=-1)
                 + a_c / (2.0 * t_max) * np.sum(z * z, axis=-1))
        sup = max(sup, float(np.max(cert.generator_image(x, y, z, t) + decay)))
    c = min(delta * b.r1 / 8.0, delta / 4.0, a_c / (2.0 * t_max ** 2)) / quad_hi
    d = max(shift, sup + c * t_max * shift) * 1.05 + 0.5
    cert.drift_c = c
    cert.shift_d = d
    return cert


@dataclass
class DriftReport:
    """Result of a drift verification pass."""

    c: float
    d: float
    samples: int
    max_violation: float
    far_field_max: float
    passes: bool


def verify_drift(cert: LyapunovR, cfg: DynamicsConfig, T: float, sample_count: int,
                 radius: float = 10.0, seed: int = 7,
                 c: float | None = None, d: float | None = None) -> DriftReport:
    """Check L R + c T R - d <= 0 on fresh sample points in a ball.

    Passes iff the maximal violation is <= 1e-8.  Also reports the largest
    L R over a far shell (|s| = 1e3), where the decay must dominate.
    """
    if T <= 0 or T > cert.t_max + 1e-12:
        raise ValueError("T must lie in (0, t_max]")
    c = cert.drift_c if c is None else c
    d = cert.shift_d if d is None else d
    rng = np.random.default_rng(seed)
    pts = _ball_points(rng, sample_count, 2 * cfg.n + cfg.m, radius)
    x, y, z = _split(pts, cfg.n, cfg.m)
    lhs = cert.generator_image(x, y, z, T) + c * T * cert.value(x, y, z, T) - d
    far = _shell_points(rng, 64, 2 * cfg.n + cfg.m, 1e3)
    fx, fy, fz = _split(far, cfg.n, cfg.m)
    far_max = float(np.max(cert.generator_image(fx, fy, fz, T)))
    max_violation = float(np.max(lhs))
    return DriftReport(
        c=c, d=d, samples=sample_count,
        max_violation=max_violation,
        far_field_max=far_max,
        passes=max_violation <= 1e-8,
    )
