"""Seeded multi-run experiments: crossing counts, success rates, sweeps.

Runs inside an experiment are independent: run ``i`` owns the noise stream
keyed by ``seed_base + i``, so aggregates depend only on the seed base and
never on how the runs are distributed over workers.  All runs of a chunk are
advanced together as one vectorized batch; the steppers and the potentials
only use elementwise operations and fixed-order reductions along the state
axis, which keeps every run's trajectory bit-identical no matter the batch
composition (verified by the test suite).

Recorded per run: final state, mean position over the last ``window``
recorded states, the number of sign changes of the first coordinate (exact
zeros skipped: a crossing is counted when the next nonzero sample has the
opposite sign of the last nonzero one), success of the final state and of
the window average against a tolerance region, and divergence with its step
index.  Divergent runs are recorded, never fatal; they count as failures and
are excluded from the crossing mean.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .integrators import DynamicsConfig, State, Stepper
from .rng import NoiseStream

CSV_VERSION_LINE = "# gle-anneal v1"

SWEEP_COLUMNS = (
    "E", "knob", "mu_drawn", "success_final", "success_window",
    "crossings_mean", "diverged_count",
    "lambda_bar", "runs", "steps", "dt", "dynamics", "A_design",
    "potential", "gamma", "seed_base",
)

HEATMAP_COLUMNS = ("x1_center", "x2_center", "count", "log1p_count")

_CHUNK_STEPS = 2048


@dataclass(frozen=True)
class ToleranceRegion:
    """Per-coordinate closed intervals; success means every coordinate is inside."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        for lo, hi in ivs:
            if lo > hi:
                raise ValueError("tolerance interval with lo > hi")
        object.__setattr__(self, "intervals", ivs)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo = np.array([iv[0] for iv in self.intervals])
        hi = np.array([iv[1] for iv in self.intervals])
        return np.all((x >= lo) & (x <= hi), axis=-1)


@dataclass(frozen=True)
class HistogramSpec:
    """Fixed 2-D visit grid; out-of-bounds states land in the edge bins."""

    bounds: tuple[float, float, float, float]  # x1_lo, x1_hi, x2_lo, x2_hi
    bins: int

    def __post_init__(self):
        x1_lo, x1_hi, x2_lo, x2_hi = self.bounds
        if not (x1_lo < x1_hi and x2_lo < x2_hi):
            raise ValueError("histogram bounds must be increasing")
        if self.bins < 1:
            raise ValueError("bins must be >= 1")

    def codes(self, x) -> np.ndarray:
        """Flattened bin index for points (..., 2)."""
        x1_lo, x1_hi, x2_lo, x2_hi = self.bounds
        b = self.bins
        i1 = np.clip(((x[..., 0] - x1_lo) / (x1_hi - x1_lo) * b).astype(np.int64), 0, b - 1)
        i2 = np.clip(((x[..., 1] - x2_lo) / (x2_hi - x2_lo) * b).astype(np.int64), 0, b - 1)
        return i1 * b + i2

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        x1_lo, x1_hi, x2_lo, x2_hi = self.bounds
        c1 = x1_lo + (np.arange(self.bins) + 0.5) * (x1_hi - x1_lo) / self.bins
        c2 = x2_lo + (np.arange(self.bins) + 0.5) * (x2_hi - x2_lo) / self.bins
        return c1, c2


@dataclass
class RunResult:
    final_state: State
    window_mean_x: np.ndarray
    crossings: int
    success_final: bool
    success_window: bool
    diverged: bool
    diverged_step: Optional[int] = None


@dataclass
class ExperimentResult:
    runs: list[RunResult]
    seeds: list[int]
    steps: int
    window: int
    crossings_mean: float          # over non-divergent runs
    success_final_rate: float      # over all runs; divergent runs fail
    success_window_rate: float
    diverged_count: int
    histogram: Optional[np.ndarray] = None   # raw counts, (bins, bins)
    histogram_spec: Optional[HistogramSpec] = None

    @property
    def log_histogram(self) -> Optional[np.ndarray]:
        if self.histogram is None:
            return None
        return np.log1p(self.histogram.astype(float))


def count_crossings(path) -> int:
    """Sign changes of a scalar path, skipping exact zeros.

    [1, 2, 3] -> 0;  [1, -1, 1] -> 2;  [1, 0, -1] -> 1.
    """
    v = np.asarray(path, dtype=float).ravel()
    if v.size < 1:
        raise ValueError("path must contain at least one sample")
    s = np.sign(v)
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.sum(s[1:] != s[:-1]))


def _run_block(cfg: DynamicsConfig, initial: State, steps: int, seeds: Sequence[int],
               window: int, tolerance: Optional[ToleranceRegion],
               hist: Optional[HistogramSpec]):
    """Advance one vectorized batch of runs; returns per-run records."""
    runs = len(seeds)
    n = cfg.n
    stepper = Stepper(cfg)
    width = cfg.noise_width
    streams = [NoiseStream(s, cfg.noise_capacity) for s in seeds]

    x = np.tile(initial.x, (runs, 1))
    y = np.tile(initial.y, (runs, 1))
    z = np.tile(initial.z, (runs, 1)) if initial.z is not None else None

    alive = np.ones(runs, dtype=bool)
    div_step = np.full(runs, -1, dtype=np.int64)
    crossings = np.zeros(runs, dtype=np.int64)
    last_sign = np.sign(x[:, 0])

    win_from = max(0, steps + 1 - window)   # first state index inside the window
    win_len = steps + 1 - win_from
    win_sum = np.zeros((runs, n))
    if win_from == 0:
        win_sum += x

    grid = np.zeros(hist.bins * hist.bins, dtype=np.int64) if hist is not None else None
    if grid is not None:
        np.add.at(grid, hist.codes(x), 1)

    any_dead = False
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k0 in range(0, steps, _CHUNK_STEPS):
            k1 = min(k0 + _CHUNK_STEPS, steps)
            xi = np.stack([st.block(k0, k1, width) for st in streams], axis=1)
            for k in range(k0, k1):
                x, y, z = stepper(x, y, z, k, xi[k - k0])
                finite = np.all(np.isfinite(x), axis=-1) & np.all(np.isfinite(y), axis=-1)
                if z is not None:
                    finite &= np.all(np.isfinite(z), axis=-1)
                if not finite.all():
                    newly = alive & ~finite
                    div_step[newly] = k
                    alive &= finite
                    any_dead = True
                if any_dead:
                    # freeze dead runs at zero so they stop producing warnings
                    x[~alive] = 0.0
                    y[~alive] = 0.0
                    if z is not None:
                        z[~alive] = 0.0

                sg = np.sign(x[:, 0])
                nz = sg != 0.0
                crossings[nz & (last_sign != 0.0) & (sg != last_sign) & alive] += 1
                last_sign = np.where(nz, sg, last_sign)

                if k + 1 >= win_from:
                    win_sum += np.where(alive[:, None], x, 0.0)
                if grid is not None and alive.any():
                    np.add.at(grid, hist.codes(x[alive]), 1)

    window_mean = win_sum / win_len
    results = []
    for i in range(runs):
        state = State(x=x[i].copy(), y=y[i].copy(),
                      z=z[i].copy() if z is not None else None)
        ok_final = ok_window = False
        if tolerance is not None and alive[i]:
            ok_final = bool(tolerance.contains(x[i]))
            ok_window = bool(tolerance.contains(window_mean[i]))
        results.append(RunResult(
            final_state=state,
            window_mean_x=window_mean[i].copy(),
            crossings=int(crossings[i]),
            success_final=ok_final,
            success_window=ok_window,
            diverged=not alive[i],
            diverged_step=int(div_step[i]) if not alive[i] else None,
        ))
    return results, grid


def run_experiment(cfg: DynamicsConfig, initial: State, steps: int, runs: int,
                   seed_base: int, tolerance: Optional[ToleranceRegion] = None,
                   window: int = 5000, threads: int = 1,
                   histogram: Optional[HistogramSpec] = None) -> ExperimentResult:
    """Execute ``runs`` independent seeded trajectories and aggregate them.

    Deterministic given ``seed_base``; the thread count only affects wall
    time.  ``window`` is the number of trailing recorded states entering the
    time-average success criterion.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if window < 1:
        raise ValueError("window must be >= 1")
    threads = max(1, int(threads))
    seeds = [seed_base + i for i in range(runs)]

    chunks: list[tuple[int, list[int]]] = []
    per = -(-runs // threads)
    for lo in range(0, runs, per):
        chunks.append((lo, seeds[lo:lo + per]))

    results: list[Optional[RunResult]] = [None] * runs
    grids = []
    if len(chunks) == 1:
        block_results, grid = _run_block(cfg, initial, steps, seeds, window,
                                         tolerance, histogram)
        results = list(block_results)
        grids.append(grid)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [(lo, pool.submit(_run_block, cfg, initial, steps, chunk,
                                     window, tolerance, histogram))
                    for lo, chunk in chunks]
            for lo, fut in futs:
                block_results, grid = fut.result()
                for j, rr in enumerate(block_results):
                    results[lo + j] = rr
                grids.append(grid)

    final: list[RunResult] = [r for r in results if r is not None]
    assert len(final) == runs
    survivors = [r.crossings for r in final if not r.diverged]
    hist_total = None
    if histogram is not None:
        hist_total = np.zeros(histogram.bins * histogram.bins, dtype=np.int64)
        for g in grids:
            hist_total += g
        hist_total = hist_total.reshape(histogram.bins, histogram.bins)
    return ExperimentResult(
        runs=final,
        seeds=seeds,
        steps=steps,
        window=window,
        crossings_mean=float(np.mean(survivors)) if survivors else math.nan,
        success_final_rate=sum(r.success_final for r in final) / runs,
        success_window_rate=sum(r.success_window for r in final) / runs,
        diverged_count=sum(r.diverged for r in final),
        histogram=hist_total,
        histogram_spec=histogram,
    )


def histogram2d(paths: Iterable, bounds: tuple[float, float, float, float],
                bins: int) -> np.ndarray:
    """Accumulate visit counts of (x1, x2) paths into a grid; returns log(1+count).

    ``paths`` is an iterable of (samples, 2) arrays (one per run).
    """
    spec = HistogramSpec(bounds=bounds, bins=bins)
    grid = np.zeros(bins * bins, dtype=np.int64)
    for p in paths:
        p = np.asarray(p, dtype=float).reshape(-1, 2)
        np.add.at(grid, spec.codes(p), 1)
    return np.log1p(grid.reshape(bins, bins).astype(float))


# ---------------------------------------------------------------------------
# parameter sweeps


@dataclass
class SweepSpec:
    """Grid of (E, knob) cells: knob is mu for the velocity dynamics and
    lambda_bar^2/mu for the memory dynamics (mu then drawn from mu_pool)."""

    e_grid: Sequence[float]
    knob_grid: Sequence[float]
    mu_pool: Sequence[float] = (0.5, 1.0, 2.0, 4.0)
    runs_per_cell: int = 20
    steps: int = 50_000
    dt: float = 0.02
    seed_base: int = 0

    def __post_init__(self):
        if not self.e_grid or not self.knob_grid:
            raise ValueError("sweep grids must be nonempty")
        if self.runs_per_cell < 1:
            raise ValueError("runs_per_cell must be >= 1")


def _cell_mu(spec: SweepSpec, cell_index: int) -> float:
    rng = np.random.Generator(np.random.Philox(key=spec.seed_base + 2 ** 62 + cell_index))
    return float(spec.mu_pool[rng.integers(len(spec.mu_pool))])


def sweep(spec: SweepSpec, kind: str, potential, initial: np.ndarray,
          tolerance: ToleranceRegion, a_design: int = 1, gamma: float = 1.0,
          window: int = 5000, threads: int = 1, t0_offset: float = 0.2,
          z_noise: str = "equilibrated") -> list[dict]:
    """One aggregate row per (E, knob) cell, in sweep-CSV column order."""
    from .matrices import make_A, make_lambda, make_sigma
    from .schedules import simulation_schedule

    if kind not in ("underdamped", "gle"):
        raise ValueError("sweep supports the underdamped and gle dynamics")
    rows = []
    n_knob = len(spec.knob_grid)
    for i_e, e_val in enumerate(spec.e_grid):
        for i_k, knob in enumerate(spec.knob_grid):
            cell = i_e * n_knob + i_k
            schedule = simulation_schedule(e_val, t0_offset=t0_offset)
            if kind == "underdamped":
                mu = float(knob)
                lam_bar = math.nan
                cfg = DynamicsConfig(kind="underdamped", potential=potential,
                                     schedule=schedule, dt=spec.dt, gamma=gamma, mu=mu)
            else:
                mu = _cell_mu(spec, cell)
                lam_bar = math.sqrt(knob * mu)
                mem = make_A(a_design, potential.dim, mu)
                cfg = DynamicsConfig(
                    kind="gle", potential=potential, schedule=schedule,
                    dt=spec.dt, gamma=gamma, mu=mu,
                    memory=mem,
                    coupling=make_lambda(a_design, potential.dim, lam_bar),
                    noise=make_sigma(mem),
                    z_noise=z_noise,
                )
            agg = run_experiment(
                cfg, cfg.initial_state(initial), spec.steps, spec.runs_per_cell,
                seed_base=spec.seed_base + cell * spec.runs_per_cell,
                tolerance=tolerance, window=window, threads=threads,
            )
            rows.append({
                "E": e_val, "knob": knob, "mu_drawn": mu,
                "success_final": agg.success_final_rate,
                "success_window": agg.success_window_rate,
                "crossings_mean": agg.crossings_mean,
                "diverged_count": agg.diverged_count,
                "lambda_bar": lam_bar,
                "runs": spec.runs_per_cell, "steps": spec.steps, "dt": spec.dt,
                "dynamics": kind, "A_design": a_design if kind == "gle" else "",
                "potential": potential.name, "gamma": gamma,
                "seed_base": spec.seed_base,
            })
    return rows


# ---------------------------------------------------------------------------
# CSV output (deterministic: no timestamps, shortest round-trip floats)


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path, columns: Sequence[str], rows: Iterable) -> None:
    """Write rows (dicts or sequences) with the versioned two-line header."""
    with open(path, "w", newline="") as fh:
        fh.write(CSV_VERSION_LINE + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                writer.writerow([_format(row.get(c, "")) for c in columns])
            else:
                writer.writerow([_format(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Read a versioned CSV; raises on a missing or wrong version line."""
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != CSV_VERSION_LINE:
            raise ValueError(f"unrecognized CSV header {first!r}")
        reader = csv.reader(fh)
        columns = next(reader)
        return columns, [row for row in reader]
