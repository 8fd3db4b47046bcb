"""Simulated annealing with plain, velocity and memory-augmented Langevin dynamics."""

from .experiments import (
    ExperimentResult,
    HistogramSpec,
    RunResult,
    SweepSpec,
    ToleranceRegion,
    count_crossings,
    histogram2d,
    run_experiment,
    sweep,
)
from .generator import (
    LyapunovR,
    SmoothTestFunction,
    apply_generator,
    build_R,
    carre_du_champ,
    verify_drift,
)
from .integrators import (
    DivergenceError,
    DynamicsConfig,
    State,
    Trajectory,
    equilibrated_noise_scale,
    gle_step,
    ou_coefficients,
    overdamped_step,
    simulate,
    underdamped_step,
)
from .matrices import Coupling, MemoryMatrix, NoiseMatrix, make_A, make_lambda, make_sigma
from .potentials import (
    Potential,
    QuadraticBounds,
    alpine12,
    bivariate_multiwell,
    by_name,
    quadratic,
    u2,
    u3,
)
from .rng import NoiseStream
from .schedules import (
    Schedule,
    check_assumption,
    constant_schedule,
    simulation_schedule,
    temperature,
    theoretical_schedule,
)
from .theory import (
    RateResult,
    TheoryConstants,
    constants_for,
    derive_constants,
    log_sobolev_C,
    rate_r,
    schedule_comparison,
)

__version__ = "0.1.0"
