"""Closed-form convergence constants and rate functions.

The convergence rate of the annealed dynamics under the logarithmic schedule
T_t = E / ln(e + t), for target tolerance ``delta`` and any ``0 < alpha <
delta``, is

    r(E) = min( (1 - gap/E - alpha)/2 , (delta - alpha)/E ),

defined for E above the confinement gap ``gap = u_max - u_min``; the first
branch is active below the crossover E* = (gap + 2(delta - alpha))/(1 - alpha)
and the two branches agree there.

The entropy-to-Fisher-information constant at temperature T is

    C(T) = A* + beta(1/T) e^{gap / T} (T/4) max(2, a_m^-2),

where beta(s) = 1 + b0 + b1 s + b2 s^2 must have large enough coefficients.
``derive_constants`` builds sufficient coefficients from the explicit
inequalities behind the entropy-dissipation estimate (with a x2 safety
factor); they are intentionally conservative and configurable.

``schedule_comparison`` probes why the logarithmic decay is the right speed:
for schedules T_t = gap / (f(t) ln(e + t)) it traces the two sides of the
dissipation condition  2 C_t^-1 >> |T_t'| p(T_t^-1).  The reported ``ratio``
divides 2 C_t^-1 by the decay factor |T_t'| alone, i.e. it bounds the
polynomial p from below by 1 on the sampled range exactly as the optimality
argument does; ``ratio_poly`` keeps the full p.  Any f eventually above 1
collapses both ratios toward zero, while f == 1 keeps ``ratio`` growing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .matrices import Coupling, MemoryMatrix
from .potentials import Potential


@dataclass(frozen=True)
class TheoryConstants:
    """Constants entering the entropy machinery.

    ``s1`` is determined by ``s0`` (s1 = 2 + 156 s0^2 + 1024 s0^4) and is
    validated on construction; the beta coefficients only need to be large
    enough, so explicit overrides are accepted.
    """

    s0: float
    beta0: float
    beta1: float
    beta2: float
    a_star: float = 1.0
    lambda_hat_sq: float = 1.0

    def __post_init__(self):
        if self.s0 < 1.0:
            raise ValueError("s0 must be >= 1")
        if min(self.beta0, self.beta1, self.beta2) < 0:
            raise ValueError("beta coefficients must be nonnegative")
        if self.a_star <= 0:
            raise ValueError("a_star must be positive")

    @property
    def s1(self) -> float:
        return 2.0 + 156.0 * self.s0 ** 2 + 1024.0 * self.s0 ** 4

    def beta(self, x: float) -> float:
        """beta evaluated at x = 1/T."""
        return 1.0 + self.beta0 + self.beta1 * x + self.beta2 * x * x


def coupling_norm_sq(coupling: Coupling) -> float:
    """max(|lam|^2, |lam'|^2, |linv|^2, |linv||lam'|) for the beta coefficients."""
    lam = float(np.linalg.norm(coupling.matrix, ord=2))
    linv = float(np.linalg.norm(coupling.left_inverse, ord=2))
    return max(lam * lam, linv * linv, linv * lam)


def derive_constants(hess_sup: float = 1.0, lambda_hat_sq: float = 1.0,
                     memory_norm: float = 1.0, a_star: float = 1.0,
                     safety: float = 2.0) -> TheoryConstants:
    """Sufficient beta coefficients from the explicit dissipation inequalities.

    The negative z-derivative contributions that beta must absorb are
    2 s0^2 l^2 (1160 + 104 x^2 a^2) from the first distorted term and
    (l^2/2)(3 + s1 + s1^2 + 3 s1^4 + s1^2 x a + 3 s1^2 x^2 a^2) from the
    second (l^2 = lambda_hat_sq, a = |A'|, x = 1/T), plus one unit for the
    Fisher-information target; each power of x is covered separately and
    multiplied by ``safety``.
    """
    if hess_sup < 0:
        raise ValueError("hess_sup must be nonnegative")
    s0 = math.sqrt(1.0 + hess_sup ** 2)
    s1 = 2.0 + 156.0 * s0 ** 2 + 1024.0 * s0 ** 4
    l2 = lambda_hat_sq
    a = memory_norm
    beta0 = safety * (1.0 + 2.0 * 1160.0 * s0 ** 2 * l2
                      + l2 * (3.0 + s1 + s1 ** 2 + 3.0 * s1 ** 4))
    beta1 = safety * (l2 * s1 ** 2 * a)
    beta2 = safety * ((2.0 * 104.0 * s0 ** 2 + 3.0 * s1 ** 2) * l2 * a * a)
    return TheoryConstants(s0=s0, beta0=beta0, beta1=beta1, beta2=beta2,
                           a_star=a_star, lambda_hat_sq=l2)


def constants_for(potential: Potential, coupling: Coupling, memory: MemoryMatrix,
                  a_star: float = 1.0, safety: float = 2.0) -> TheoryConstants:
    """Constants for a concrete system (requires the potential's bound metadata)."""
    if potential.bounds is None:
        raise ValueError("potential declares no quadratic bounds")
    return derive_constants(
        hess_sup=potential.bounds.hess_sup,
        lambda_hat_sq=coupling_norm_sq(coupling),
        memory_norm=memory.op_norm,
        a_star=a_star,
        safety=safety,
    )


# ---------------------------------------------------------------------------
# convergence rate


@dataclass(frozen=True)
class RateResult:
    value: float
    branch: int          # 1: equilibration-limited (below E*), 2: concentration-limited
    crossover: float


def crossover_E(gap: float, delta: float, alpha: float) -> float:
    """The E at which the two rate branches meet."""
    return (gap + 2.0 * (delta - alpha)) / (1.0 - alpha)


def rate_r(E: float, gap: float, delta: float, alpha: float) -> RateResult:
    """The exponential convergence rate r(E) = min of the two branches.

    Defined for E > gap; requires delta > alpha > 0 and alpha < 1.
    """
    if gap < 0:
        raise ValueError("gap must be nonnegative")
    if E <= gap:
        raise ValueError(f"rate undefined: E must exceed the gap ({E} <= {gap})")
    if not 0.0 < alpha < delta:
        raise ValueError("need 0 < alpha < delta")
    if alpha >= 1.0:
        raise ValueError("alpha must be below 1")
    equilibration = 0.5 * (1.0 - gap / E - alpha)
    concentration = (delta - alpha) / E
    e_star = crossover_E(gap, delta, alpha)
    branch = 1 if E < e_star else 2
    return RateResult(value=min(equilibration, concentration), branch=branch,
                      crossover=e_star)


def log_sobolev_C(T: float, consts: TheoryConstants, gap: float, a_m: float) -> float:
    """C(T) = A* + beta(1/T) e^{gap/T} (T/4) max(2, a_m^-2); inf on overflow (T -> 0)."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    if a_m <= 0:
        raise ValueError("a_m must be positive")
    if gap < 0:
        raise ValueError("gap must be nonnegative")
    try:
        grow = math.exp(gap / T)
    except OverflowError:
        return math.inf
    return consts.a_star + consts.beta(1.0 / T) * grow * (T / 4.0) * max(2.0, a_m ** -2)


# ---------------------------------------------------------------------------
# schedule optimality probe


@dataclass
class ComparisonRow:
    t: float
    temperature: float
    lhs: float          # 2 / C_t
    rhs_decay: float    # |T_t'|
    rhs_poly: float     # |T_t'| p(1/T_t)
    ratio: float        # lhs / rhs_decay
    ratio_poly: float   # lhs / rhs_poly


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]

    @property
    def ts(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])

    @property
    def ratio(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows])

    @property
    def ratio_poly(self) -> np.ndarray:
        return np.array([r.ratio_poly for r in self.rows])


def _poly_value(coeffs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def schedule_comparison(f: Callable[[float], float], horizon: float, *,
                        gap: float = 1.0, a_m: float = 1.0,
                        consts: TheoryConstants | None = None,
                        p_coeffs: Sequence[float] = (0, 0, 0, 0, 0, 1),
                        fprime: Callable[[float], float] | None = None,
                        t_start: float = 1e3,
                        per_decade: int = 1) -> ComparisonReport:
    """Trace the dissipation-condition sides for T_t = gap / (f(t) ln(e+t)).

    ``p_coeffs`` are ascending polynomial coefficients; the polynomial must
    be of order at least five with nonnegative coefficients.  See the module
    docstring for the meaning of the two reported ratios.
    """
    if consts is None:
        consts = derive_constants()
    if gap <= 0:
        raise ValueError("gap must be positive for this schedule family")
    if horizon <= t_start:
        raise ValueError("horizon must exceed t_start")
    coeffs = list(p_coeffs)
    if any(c < 0 for c in coeffs):
        raise ValueError("p must have nonnegative coefficients")
    if len(coeffs) < 6 or all(c == 0 for c in coeffs[5:]):
        raise ValueError("p must be of order at least five")

    decades = np.arange(math.log10(t_start), math.log10(horizon) + 1e-9,
                        1.0 / per_decade)
    rows = []
    for t in 10.0 ** decades:
        ft = f(t)
        if ft <= 0:
            raise ValueError("f(t) must be positive")
        log_term = math.log(math.e + t)
        temp = gap / (ft * log_term)
        if fprime is not None:
            fp = fprime(t)
        else:
            h = 1e-6 * t
            fp = (f(t + h) - f(t - h)) / (2.0 * h)
        # T' for T = gap (f ln(e+t))^-1 by the quotient rule
        tp = -gap * (fp * log_term + ft / (math.e + t)) / (ft * log_term) ** 2
        c_t = log_sobolev_C(temp, consts, gap, a_m)
        lhs = 2.0 / c_t
        rhs_decay = abs(tp)
        rhs_poly = rhs_decay * _poly_value(coeffs, 1.0 / temp)
        rows.append(ComparisonRow(
            t=float(t), temperature=temp, lhs=lhs,
            rhs_decay=rhs_decay, rhs_poly=rhs_poly,
            ratio=lhs / rhs_decay if rhs_decay > 0 else math.inf,
            ratio_poly=lhs / rhs_poly if rhs_poly > 0 else math.inf,
        ))
    return ComparisonReport(rows=rows)
