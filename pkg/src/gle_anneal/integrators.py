"""Discrete-time steppers for the three annealing dynamics.

All three schemes advance with the temperature evaluated at the *current*
step index and draw their noise from a counter-addressed stream, so a run is
fully determined by ``(seed, config, initial state, step count)``.

Memory-augmented scheme (leapfrog-style, with theta = 1 - exp(-dt)):

    y_half = y - (dt/2) gamma grad U(x) + (dt/2) lam' z
    x'     = x + dt gamma y_half
    z'     = z - theta lam y_half - theta A z + alpha sqrt(T_k) Sigma xi
    y'     = y_half - (dt/2) gamma grad U(x') + (dt/2) lam' z'

Two choices of the noise coefficient alpha are supported.  The default,
``z_noise="equilibrated"``, uses alpha = sqrt((1 - exp(-2 dt)) / 2), the
value for which the frozen auxiliary update (decay factor 1 - theta) leaves
N(0, T I) exactly invariant for the identity memory design: the constant-T
chain then samples x, y and z at the nominal temperature for any dt.
``z_noise="printed"`` instead uses alpha = sqrt(1 - theta^2) as published
for this scheme; note that choice injects O(1) noise per step regardless of
dt and equilibrates the auxiliary variable near T/theta instead of T, so it
is kept only for strict scheme-fidelity comparisons
(:func:`ou_coefficients` returns that published pair).

Position-velocity (Euler-Maruyama):

    x' = x + dt gamma y
    y' = y - dt gamma grad U(x) - dt mu y + sqrt(dt mu T_k) xi

Position only (Euler-Maruyama):

    x' = x - dt grad U(x) + sqrt(2 T_k dt) xi

The stream yields one vector per step; the velocity scheme consumes the
first n components of the same vector the memory scheme would consume, which
is what makes same-seed comparisons across dynamics meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrices import Coupling, MemoryMatrix, NoiseMatrix
from .potentials import Potential
from .rng import NoiseStream
from .schedules import Schedule, temperature

KINDS = ("overdamped", "underdamped", "gle")

_SIGMA_TOL = 1e-10


class DivergenceError(RuntimeError):
    """A state coordinate became non-finite while stepping."""

    def __init__(self, step: int):
        super().__init__(f"state diverged (non-finite) at step {step}")
        self.step = step


@dataclass(frozen=True)
class State:
    """Point of the simulation: position x, velocity y, optional memory z."""

    x: np.ndarray
    y: np.ndarray
    z: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.z is not None:
            object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same shape")
        for arr in (self.x, self.y, self.z):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError("state entries must be finite")


def ou_coefficients(dt: float) -> tuple[float, float]:
    """The published memory-update pair theta = 1 - exp(-dt), alpha = sqrt(1 - theta^2)."""
    theta = 1.0 - math.exp(-dt)
    return theta, math.sqrt(1.0 - theta * theta)


def equilibrated_noise_scale(dt: float) -> float:
    """Noise coefficient sqrt((1 - exp(-2 dt)) / 2).

    With decay factor exp(-dt) = 1 - theta and Gram matrix constraint
    sigma sigma' = A + A' = 2 I (identity memory design), this is the unique
    scale for which z -> (1 - theta) z + alpha sqrt(T) sigma xi has N(0, T I)
    as its exact fixed-point law.
    """
    return math.sqrt(0.5 * (1.0 - math.exp(-2.0 * dt)))


@dataclass
class DynamicsConfig:
    """Everything a stepper needs; validated on construction.

    ``memory``, ``coupling`` and ``noise`` are required for the memory
    dynamics and ignored otherwise.  ``mu`` is the friction of the velocity
    dynamics (mu >= 0; zero gives free flight and is allowed for tests).
    """

    kind: str
    potential: Potential
    schedule: Schedule
    dt: float
    gamma: float = 1.0
    mu: float = 1.0
    memory: Optional[MemoryMatrix] = None
    coupling: Optional[Coupling] = None
    noise: Optional[NoiseMatrix] = None
    snapshot_stride: int = 1
    z_noise: str = "equilibrated"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"dynamics must be one of {KINDS}")
        if self.z_noise not in ("equilibrated", "printed"):
            raise ValueError("z_noise must be 'equilibrated' or 'printed'")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.kind == "gle":
            if self.memory is None or self.coupling is None or self.noise is None:
                raise ValueError("gle dynamics requires memory, coupling and noise matrices")
            if self.coupling.m != self.memory.m or self.coupling.n != self.n:
                raise ValueError("coupling dimensions do not match memory matrix / potential")
            gap = self.noise.sigma @ self.noise.sigma.T - self.memory.gram
            if np.max(np.abs(gap)) > _SIGMA_TOL:
                raise ValueError("noise matrix inconsistent: sigma sigma' != A + A'")

    @property
    def n(self) -> int:
        return self.potential.dim

    @property
    def m(self) -> int:
        return self.memory.m if self.memory is not None else 0

    @property
    def noise_width(self) -> int:
        """Components consumed per step: m for the memory dynamics, n otherwise."""
        return self.m if self.kind == "gle" else self.n

    @property
    def noise_capacity(self) -> int:
        """Stream capacity keeping all dynamics of this dimension aligned."""
        return max(2 * self.n, self.m, 1)

    def initial_state(self, x0) -> State:
        """State at ``x0`` with zero velocity (and zero memory when present)."""
        x0 = np.asarray(x0, dtype=float)
        z0 = np.zeros(self.m) if self.kind == "gle" else None
        return State(x=x0, y=np.zeros_like(x0), z=z0)


def _matvec(mat: np.ndarray, vec: np.ndarray) -> np.ndarray:
    # einsum keeps the reduction order fixed, so results do not depend on
    # how runs are batched (required for the determinism contract)
    return np.einsum("ij,...j->...i", mat, vec)


class Stepper:
    """Precompiled step map for one configuration; acts on single states or batches."""

    def __init__(self, cfg: DynamicsConfig):
        self.cfg = cfg
        self.grad = cfg.potential.gradient
        self.dt = cfg.dt
        self.half = 0.5 * cfg.dt
        if cfg.kind == "gle":
            self.lam = cfg.coupling.matrix
            self.lam_t = cfg.coupling.matrix.T
            self.mem = cfg.memory.matrix
            self.sigma = cfg.noise.sigma
            self.theta, printed_alpha = ou_coefficients(cfg.dt)
            self.alpha = (printed_alpha if cfg.z_noise == "printed"
                          else equilibrated_noise_scale(cfg.dt))

    def temperature_at(self, k: int) -> float:
        return temperature(self.cfg.schedule, k, self.cfg.dt)

    def __call__(self, x, y, z, k: int, xi):
        """One step from state arrays shaped (..., n) / (..., m)."""
        cfg = self.cfg
        t_k = self.temperature_at(k)
        if cfg.kind == "overdamped":
            x1 = x - self.dt * self.grad(x) + math.sqrt(2.0 * t_k * self.dt) * xi
            return x1, y, z
        if cfg.kind == "underdamped":
            x1 = x + self.dt * cfg.gamma * y
            y1 = (y - self.dt * cfg.gamma * self.grad(x) - self.dt * cfg.mu * y
                  + math.sqrt(self.dt * cfg.mu * t_k) * xi)
            return x1, y1, z
        g = cfg.gamma
        y_half = y - self.half * g * self.grad(x) + self.half * _matvec(self.lam_t, z)
        x1 = x + self.dt * g * y_half
        z1 = (z - self.theta * _matvec(self.lam, y_half) - self.theta * _matvec(self.mem, z)
              + (self.alpha * math.sqrt(t_k)) * _matvec(self.sigma, xi))
        y1 = y_half - self.half * g * self.grad(x1) + self.half * _matvec(self.lam_t, z1)
        return x1, y1, z1


def _check_finite(step: int, *arrays):
    for a in arrays:
        if a is not None and not np.all(np.isfinite(a)):
            raise DivergenceError(step)


def _step_state(cfg: DynamicsConfig, stepper: Stepper, state: State, k: int,
                noise: NoiseStream) -> State:
    xi = noise.vector(k, cfg.noise_width)
    x1, y1, z1 = stepper(state.x, state.y, state.z, k, xi)
    _check_finite(k, x1, y1, z1)
    return State(x=x1, y=y1, z=z1)


def gle_step(state: State, cfg: DynamicsConfig, k: int, noise: NoiseStream) -> State:
    """One step of the memory-augmented scheme (see module docstring)."""
    if cfg.kind != "gle":
        raise ValueError("gle_step requires a gle configuration")
    return _step_state(cfg, Stepper(cfg), state, k, noise)


def underdamped_step(state: State, cfg: DynamicsConfig, k: int, noise: NoiseStream) -> State:
    """One Euler-Maruyama step of the velocity dynamics; z is carried unchanged."""
    if cfg.kind != "underdamped":
        raise ValueError("underdamped_step requires an underdamped configuration")
    return _step_state(cfg, Stepper(cfg), state, k, noise)


def overdamped_step(state: State, cfg: DynamicsConfig, k: int, noise: NoiseStream) -> State:
    """One Euler-Maruyama step of the position-only dynamics."""
    if cfg.kind != "overdamped":
        raise ValueError("overdamped_step requires an overdamped configuration")
    return _step_state(cfg, Stepper(cfg), state, k, noise)


@dataclass
class Trajectory:
    """Strided snapshots of a single seeded run (snapshot 0 is the initial state)."""

    steps: np.ndarray           # state indices, steps[0] == 0
    times: np.ndarray
    xs: np.ndarray              # (snapshots, n)
    ys: np.ndarray              # (snapshots, n)
    zs: Optional[np.ndarray]    # (snapshots, m) for the memory dynamics
    seed: int = 0

    @property
    def final(self) -> State:
        z = None if self.zs is None else self.zs[-1]
        return State(x=self.xs[-1], y=self.ys[-1], z=z)


_CHUNK = 4096


def simulate(cfg: DynamicsConfig, initial: State, steps: int, seed: int,
             snapshot_stride: int | None = None) -> Trajectory:
    """Run ``steps`` steps from ``initial``; deterministic given the seed.

    Snapshots are recorded at stride ``snapshot_stride`` (state indices
    0, s, 2s, ...) plus the final state.  ``steps == 0`` returns just the
    initial state.  A non-finite coordinate aborts with
    :class:`DivergenceError` carrying the offending step index.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    stride = cfg.snapshot_stride if snapshot_stride is None else snapshot_stride
    if stride < 1:
        raise ValueError("snapshot_stride must be >= 1")
    if initial.x.shape != (cfg.n,):
        raise ValueError(f"initial state has dimension {initial.x.shape}, expected ({cfg.n},)")
    if cfg.kind == "gle" and (initial.z is None or initial.z.shape != (cfg.m,)):
        raise ValueError("gle dynamics needs an initial z of length m")

    stepper = Stepper(cfg)
    stream = NoiseStream(seed, cfg.noise_capacity)
    width = cfg.noise_width

    x = initial.x.copy()
    y = initial.y.copy()
    z = initial.z.copy() if initial.z is not None else None

    rec_steps = [0]
    rec_x, rec_y, rec_z = [x.copy()], [y.copy()], [z.copy() if z is not None else None]
    for k0 in range(0, steps, _CHUNK):
        k1 = min(k0 + _CHUNK, steps)
        block = stream.block(k0, k1, width)
        for k in range(k0, k1):
            x, y, z = stepper(x, y, z, k, block[k - k0])
            _check_finite(k, x, y, z)
            idx = k + 1
            if idx % stride == 0 or idx == steps:
                rec_steps.append(idx)
                rec_x.append(x.copy())
                rec_y.append(y.copy())
                rec_z.append(z.copy() if z is not None else None)

    rec = np.asarray(rec_steps)
    return Trajectory(
        steps=rec,
        times=rec * cfg.dt,
        xs=np.asarray(rec_x),
        ys=np.asarray(rec_y),
        zs=None if rec_z[0] is None else np.asarray(rec_z),
        seed=seed,
    )
