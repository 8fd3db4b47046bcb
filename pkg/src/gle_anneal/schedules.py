"""Temperature schedules and their admissibility checks.

Two decaying schedules are provided and deliberately kept distinct:

* ``simulation``:   T_k = (offset + ln(1 + k dt) / E)^-1 with offset = 1/5,
                    the form used by the experiment harness;
* ``theoretical``:  T_t = E / ln(e + t), the classical logarithmic decay the
                    convergence theory is stated for;

plus a ``constant`` schedule for sampling checks.  Admissibility asks for
E strictly above the confinement gap u_max - u_min, monotone decay, and a
derivative bound -T~/t <= T' <= 0 for some finite T~.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("simulation", "theoretical", "constant")


@dataclass(frozen=True)
class Schedule:
    kind: str
    E: float = 0.0
    t0_offset: float = 0.2
    constant_T: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"schedule kind must be one of {KINDS}")
        if self.kind == "constant":
            # T = 0 is allowed: the noiseless gradient/Hamiltonian limit
            if self.constant_T < 0:
                raise ValueError("constant_T must be nonnegative")
        else:
            if self.E <= 0:
                raise ValueError("E must be positive")
            if self.kind == "simulation" and self.t0_offset <= 0:
                raise ValueError("t0_offset must be positive")

    @property
    def t_max(self) -> float:
        """Largest temperature the schedule ever takes (value at t = 0)."""
        if self.kind == "simulation":
            return 1.0 / self.t0_offset
        if self.kind == "theoretical":
            return self.E
        return self.constant_T


def simulation_schedule(E: float, t0_offset: float = 0.2) -> Schedule:
    return Schedule("simulation", E=E, t0_offset=t0_offset)


def theoretical_schedule(E: float) -> Schedule:
    return Schedule("theoretical", E=E)


def constant_schedule(T: float) -> Schedule:
    return Schedule("constant", constant_T=T)


def temperature(s: Schedule, k, dt: float):
    """Temperature at step index k (time t = k dt).  Accepts array k."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("step index must be nonnegative")
    t = k * dt
    if s.kind == "simulation":
        out = 1.0 / (s.t0_offset + np.log1p(t) / s.E)
    elif s.kind == "theoretical":
        out = s.E / np.log(math.e + t)
    else:
        out = np.full_like(t, s.constant_T)
    return float(out) if out.ndim == 0 else out


@dataclass
class AssumptionReport:
    """Outcome of the admissibility check; never raised, always returned."""

    valid: bool
    reasons: list[str] = field(default_factory=list)
    e_margin_ok: bool = True
    monotone_ok: bool = True
    derivative_ok: bool = True
    t_tilde: float = 0.0


def check_assumption(s: Schedule, gap: float, dt: float = 0.1,
                     horizon_steps: float = 1e7) -> AssumptionReport:
    """Check a schedule against the admissibility conditions for barrier gap ``gap``.

    Samples the horizon logarithmically, verifies E > gap and monotone decay,
    and fits the smallest T~ with -T~/t <= T'(t) <= 0 over the samples.
    The requirement that the schedule be constant on a small initial interval
    is an analytical convenience and is not enforced here.
    """
    if gap < 0:
        raise ValueError("gap must be nonnegative")
    rep = AssumptionReport(valid=True)

    if s.kind == "constant":
        rep.valid = False
        rep.e_margin_ok = False
        rep.reasons.append("temperature does not decay to zero")
        return rep
    if s.E <= gap:
        rep.valid = False
        rep.e_margin_ok = False
        rep.reasons.append(f"E <= u_max - u_min ({s.E} <= {gap})")

    ks = np.unique(np.round(np.logspace(0, math.log10(horizon_steps), 200)))
    temps = temperature(s, ks, dt)
    if np.any(np.diff(temps) > 0):
        rep.valid = False
        rep.monotone_ok = False
        rep.reasons.append("temperature is not nonincreasing over the horizon")
    if np.any(temps <= 0):
        rep.valid = False
        rep.monotone_ok = False
        rep.reasons.append("temperature is not strictly positive")

    # central-difference derivative at the sampled times
    t = ks * dt
    h = np.maximum(1e-6 * np.maximum(t, 1.0), 1e-9)
    tp = (temperature(s, (t + h) / dt, dt) - temperature(s, (t - h) / dt, dt)) / (2 * h)
    if np.any(tp > 1e-12):
        rep.valid = False
        rep.derivative_ok = False
        rep.reasons.append("temperature derivative is positive somewhere")
    rep.t_tilde = float(np.max(np.maximum(-tp * t, 0.0)))
    return rep
