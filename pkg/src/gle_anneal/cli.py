"""Command-line entry point.

Subcommands: simulate | crossings | sweep | heatmap | verify | theory.
Every flag can also be supplied through ``--config FILE`` (JSON, or flat
``key = value`` lines using the flag spellings, e.g. ``A-design = 2``);
explicit flags win over config values.  CSV outputs are deterministic:
no timestamps, and the worker count never changes the bytes.

Exit codes: 0 success; 1 validation error (the message names the offending
key); 2 divergence-dominated experiment (more than half the runs diverged).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import experiments, generator, matrices, potentials, schedules, theory
from .integrators import DivergenceError, DynamicsConfig, State, simulate

_SCHEDULE_KINDS = {"sim": "simulation", "theory": "theoretical", "const": "constant"}


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


def _load_config(path: str) -> dict:
    with open(path) as fh:
        body = fh.read()
    if path.endswith(".json"):
        return json.load(open(path))
    values: dict = {}
    for line in body.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {line!r} is not 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        raw = raw.strip("\"'")
        try:
            values[key] = json.loads(raw)
        except json.JSONDecodeError:
            values[key] = raw
    return values


def _merge_config(ns: argparse.Namespace) -> None:
    if not getattr(ns, "config", None):
        return
    cfg = _load_config(ns.config)
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if hasattr(ns, dest) and getattr(ns, dest) is None:
            setattr(ns, dest, value)


def _require(ns: argparse.Namespace, dest: str, flag: str):
    value = getattr(ns, dest, None)
    if value is None:
        raise ValueError(f"{flag} required")
    return value


def _fill(ns: argparse.Namespace, **defaults) -> None:
    for dest, value in defaults.items():
        if getattr(ns, dest, None) is None:
            setattr(ns, dest, value)


def _threads(ns: argparse.Namespace) -> int:
    if getattr(ns, "threads", None) is not None:
        return int(ns.threads)
    return int(os.environ.get("GLE_ANNEAL_THREADS", "1"))


def _build_potential(ns: argparse.Namespace) -> potentials.Potential:
    name = _require(ns, "potential", "potential")
    coeffs = _parse_floats(ns.coeffs) if getattr(ns, "coeffs", None) else None
    n = int(ns.n) if getattr(ns, "n", None) is not None else None
    return potentials.by_name(name, n=n, coeffs=coeffs)


def _build_schedule(ns: argparse.Namespace) -> schedules.Schedule:
    kind = _SCHEDULE_KINDS[ns.schedule]
    if kind == "constant":
        return schedules.constant_schedule(float(_require(ns, "const_T", "const-T")))
    e_val = float(_require(ns, "E", "E"))
    if e_val <= 0:
        raise ValueError("E must be positive")
    if kind == "simulation":
        return schedules.simulation_schedule(e_val)
    return schedules.theoretical_schedule(e_val)


def _build_dynamics(ns: argparse.Namespace) -> DynamicsConfig:
    pot = _build_potential(ns)
    schedule = _build_schedule(ns)
    dt = float(_require(ns, "dt", "dt"))
    if dt <= 0:
        raise ValueError("dt must be positive")
    kind = _require(ns, "dynamics", "dynamics")
    kwargs = dict(kind=kind, potential=pot, schedule=schedule, dt=dt,
                  gamma=float(ns.gamma), mu=float(ns.mu))
    if kind == "gle":
        design = int(_require(ns, "A_design", "A-design"))
        mem = matrices.make_A(design, pot.dim, float(ns.mu))
        kwargs.update(
            memory=mem,
            coupling=matrices.make_lambda(design, pot.dim, float(ns.lambda_bar)),
            noise=matrices.make_sigma(mem),
            z_noise=getattr(ns, "z_noise", None) or "equilibrated",
        )
    cfg = DynamicsConfig(**kwargs)
    if pot.bounds is not None and schedule.kind != "constant":
        report = schedules.check_assumption(schedule, pot.bounds.gap, dt=dt)
        if not report.valid:
            print(f"warning: schedule fails admissibility: {'; '.join(report.reasons)}",
                  file=sys.stderr)
    return cfg


def _initial_and_tolerance(ns, cfg) -> tuple[np.ndarray, experiments.ToleranceRegion | None]:
    name = cfg.potential.name
    try:
        default_x0, default_tol = potentials.experiment_defaults(name)
    except ValueError:
        default_x0, default_tol = np.zeros(cfg.n), None
    x0 = np.array(_parse_floats(ns.initial)) if getattr(ns, "initial", None) else default_x0
    if x0.shape != (cfg.n,):
        raise ValueError(f"initial must have {cfg.n} coordinates")
    tol = None
    if getattr(ns, "tolerance", None):
        vals = _parse_floats(ns.tolerance)
        if len(vals) != 2 * cfg.n:
            raise ValueError(f"tolerance must list {2 * cfg.n} numbers (lo,hi per coordinate)")
        tol = experiments.ToleranceRegion(tuple(zip(vals[0::2], vals[1::2])))
    elif default_tol is not None:
        tol = experiments.ToleranceRegion(tuple(default_tol))
    return x0, tol


def _out_path(ns, filename: str) -> str:
    out = getattr(ns, "out", None) or "."
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, filename)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_simulate(ns) -> int:
    _fill(ns, schedule="sim", gamma=1.0, mu=1.0, lambda_bar=1.0, snapshot_stride=1)
    cfg = _build_dynamics(ns)
    x0, _ = _initial_and_tolerance(ns, cfg)
    steps = int(_require(ns, "steps", "steps"))
    seed = int(ns.seed if ns.seed is not None else 0)
    try:
        traj = simulate(cfg, cfg.initial_state(x0), steps, seed,
                        snapshot_stride=int(ns.snapshot_stride))
    except DivergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    cols = ["step", "time"]
    cols += [f"x{i + 1}" for i in range(cfg.n)]
    cols += [f"y{i + 1}" for i in range(cfg.n)]
    if traj.zs is not None:
        cols += [f"z{i + 1}" for i in range(cfg.m)]
    rows = []
    for j in range(len(traj.steps)):
        row = [int(traj.steps[j]), float(traj.times[j])]
        row += [float(v) for v in traj.xs[j]]
        row += [float(v) for v in traj.ys[j]]
        if traj.zs is not None:
            row += [float(v) for v in traj.zs[j]]
        rows.append(row)
    path = _out_path(ns, "trajectory.csv")
    experiments.write_csv(path, cols, rows)
    print(path)
    return 0


def _run_and_summarize(ns, cfg, x0, tol, steps, runs, histogram=None):
    seed_base = int(ns.seed if ns.seed is not None else 0)
    agg = experiments.run_experiment(
        cfg, cfg.initial_state(x0), steps, runs, seed_base,
        tolerance=tol, window=int(ns.window), threads=_threads(ns),
        histogram=histogram,
    )
    knob = float(ns.mu) if cfg.kind != "gle" else float(ns.lambda_bar) ** 2 / float(ns.mu)
    summary = {
        "E": float(ns.E) if ns.E is not None else math.nan,
        "knob": knob,
        "mu_drawn": float(ns.mu),
        "success_final": agg.success_final_rate,
        "success_window": agg.success_window_rate,
        "crossings_mean": agg.crossings_mean,
        "diverged_count": agg.diverged_count,
        "lambda_bar": float(ns.lambda_bar) if cfg.kind == "gle" else math.nan,
        "runs": runs, "steps": steps, "dt": cfg.dt,
        "dynamics": cfg.kind,
        "A_design": int(ns.A_design) if cfg.kind == "gle" else "",
        "potential": cfg.potential.name, "gamma": cfg.gamma,
        "seed_base": seed_base,
    }
    return agg, summary


def _cmd_crossings(ns) -> int:
    _fill(ns, schedule="sim", gamma=1.0, mu=1.0, lambda_bar=1.0, potential="bivar",
          dt=0.1, steps=100_000, runs=100, window=5000)
    cfg = _build_dynamics(ns)
    x0, tol = _initial_and_tolerance(ns, cfg)
    steps, runs = int(ns.steps), int(ns.runs)
    agg, summary = _run_and_summarize(ns, cfg, x0, tol, steps, runs)
    experiments.write_csv(_out_path(ns, "crossings.csv"), experiments.SWEEP_COLUMNS,
                          [summary])
    run_cols = ["run", "seed", "crossings", "success_final", "success_window",
                "diverged", "diverged_step"] + [f"x{i + 1}" for i in range(cfg.n)]
    run_rows = []
    for i, rr in enumerate(agg.runs):
        run_rows.append([i, agg.seeds[i], rr.crossings, rr.success_final,
                         rr.success_window, rr.diverged,
                         rr.diverged_step if rr.diverged else ""]
                        + [float(v) for v in rr.final_state.x])
    experiments.write_csv(_out_path(ns, "crossings_runs.csv"), run_cols, run_rows)
    print(f"crossings_mean={agg.crossings_mean} diverged={agg.diverged_count}/{runs}")
    return 2 if agg.diverged_count * 2 > runs else 0


def _cmd_heatmap(ns) -> int:
    _fill(ns, schedule="sim", gamma=1.0, mu=1.0, lambda_bar=1.0, potential="bivar",
          dt=0.1, steps=100_000, runs=20, window=5000, bins=100, bounds="-10,10,-8,8")
    cfg = _build_dynamics(ns)
    if cfg.n != 2:
        raise ValueError("heatmap requires a 2-D potential")
    x0, tol = _initial_and_tolerance(ns, cfg)
    bounds = _parse_floats(ns.bounds)
    if len(bounds) != 4:
        raise ValueError("bounds must be x1_lo,x1_hi,x2_lo,x2_hi")
    spec = experiments.HistogramSpec(bounds=tuple(bounds), bins=int(ns.bins))
    steps, runs = int(ns.steps), int(ns.runs)
    agg, _ = _run_and_summarize(ns, cfg, x0, tol, steps, runs, histogram=spec)
    c1, c2 = spec.centers()
    rows = []
    counts = agg.histogram
    logs = agg.log_histogram
    for i in range(spec.bins):
        for j in range(spec.bins):
            rows.append([float(c1[i]), float(c2[j]), int(counts[i, j]), float(logs[i, j])])
    experiments.write_csv(_out_path(ns, "heatmap.csv"), experiments.HEATMAP_COLUMNS, rows)
    print(f"total_visits={int(counts.sum())} diverged={agg.diverged_count}/{runs}")
    return 2 if agg.diverged_count * 2 > runs else 0


def _cmd_sweep(ns) -> int:
    _fill(ns, gamma=1.0, runs=20, steps=50_000, dt=0.02, window=5000)
    pot = _build_potential(ns)
    kind = _require(ns, "dynamics", "dynamics")
    e_grid = _parse_floats(_require(ns, "E_grid", "E-grid"))
    knob_grid = _parse_floats(_require(ns, "knob_grid", "knob-grid"))
    mu_pool = _parse_floats(ns.mu_pool) if ns.mu_pool else [0.5, 1.0, 2.0, 4.0]
    spec = experiments.SweepSpec(
        e_grid=e_grid, knob_grid=knob_grid, mu_pool=mu_pool,
        runs_per_cell=int(ns.runs), steps=int(ns.steps), dt=float(ns.dt),
        seed_base=int(ns.seed if ns.seed is not None else 0),
    )
    default_x0, default_tol = potentials.experiment_defaults(pot.name)
    x0 = np.array(_parse_floats(ns.initial)) if ns.initial else default_x0
    if x0.shape != (pot.dim,):
        raise ValueError(f"initial must have {pot.dim} coordinates")
    tol = experiments.ToleranceRegion(tuple(default_tol))
    if ns.tolerance:
        vals = _parse_floats(ns.tolerance)
        if len(vals) != 2 * pot.dim:
            raise ValueError(f"tolerance must list {2 * pot.dim} numbers")
        tol = experiments.ToleranceRegion(tuple(zip(vals[0::2], vals[1::2])))
    design = int(ns.A_design) if ns.A_design is not None else 1
    rows = experiments.sweep(spec, kind, pot, x0, tol, a_design=design,
                             gamma=float(ns.gamma), window=int(ns.window),
                             threads=_threads(ns),
                             z_noise=getattr(ns, "z_noise", None) or "equilibrated")
    experiments.write_csv(_out_path(ns, "sweep.csv"), experiments.SWEEP_COLUMNS, rows)
    total_runs = spec.runs_per_cell * len(rows)
    total_div = sum(r["diverged_count"] for r in rows)
    print(f"cells={len(rows)} diverged={total_div}/{total_runs}")
    return 2 if total_div * 2 > total_runs else 0


def _cmd_verify(ns) -> int:
    _fill(ns, what="generator", samples=100, radius=10.0, n=1, A_design=1,
          mu=1.0, lambda_bar=1.0, T=1.0)
    n = int(ns.n)
    pot = potentials.quadratic(n, [0.5] * n)
    mem = matrices.make_A(int(ns.A_design), n, float(ns.mu))
    cfg = DynamicsConfig(
        kind="gle", potential=pot,
        schedule=schedules.constant_schedule(float(ns.T)), dt=0.01,
        memory=mem, coupling=matrices.make_lambda(int(ns.A_design), n, float(ns.lambda_bar)),
        noise=matrices.make_sigma(mem),
    )
    temp = float(ns.T)
    samples = int(ns.samples)
    rng = np.random.default_rng(11)
    report: dict = {"what": ns.what}
    passed = True
    if ns.what in ("generator", "carre"):
        fns = generator.standard_test_functions(cfg.n, cfg.m)
        worst = 0.0
        for fn in fns:
            for _ in range(samples):
                pt = State(x=rng.standard_normal(cfg.n), y=rng.standard_normal(cfg.n),
                           z=rng.standard_normal(cfg.m))
                lf = generator.apply_generator(fn, pt, temp, cfg)
                if ns.what == "carre":
                    lf2 = generator.apply_generator(generator.squared(fn), pt, temp, cfg)
                    gamma_direct = generator.carre_du_champ(fn, pt, cfg)
                    gamma_ident = 0.5 * lf2 - fn.f(pt.x, pt.y, pt.z) * lf
                    scale = max(1.0, abs(gamma_direct))
                    worst = max(worst, abs(gamma_direct - gamma_ident) / scale)
                else:
                    two_lf = generator.apply_generator(
                        generator.chained(fn, lambda v: 2.0 * v, lambda v: 2.0,
                                          lambda v: 0.0), pt, temp, cfg)
                    scale = max(1.0, abs(lf))
                    worst = max(worst, abs(two_lf - 2.0 * lf) / scale)
        report["max_error"] = worst
        passed = worst <= 1e-8
    else:  # lyapunov
        cert = generator.build_R(cfg, t_max=temp)
        drift = generator.verify_drift(cert, cfg, temp, samples, radius=float(ns.radius))
        report.update(delta=cert.delta, c=drift.c, d=drift.d,
                      max_violation=drift.max_violation,
                      far_field_max=drift.far_field_max, passes=drift.passes)
        passed = drift.passes and drift.far_field_max < 0
    report["passed"] = passed
    print(json.dumps(report))
    return 0 if passed else 1


def _cmd_theory(ns) -> int:
    actions = [bool(ns.rate), bool(ns.log_sobolev), bool(ns.schedule_opt)]
    if sum(actions) != 1:
        raise ValueError("theory requires exactly one of --rate, --log-sobolev, --schedule-opt")
    _fill(ns, gap=1.0, a_m=1.0, hess_sup=1.0, memory_norm=1.0, lambda_hat_sq=1.0,
          A_star=1.0, f=1.0, horizon=1e9)
    if ns.rate:
        result = theory.rate_r(float(_require(ns, "E", "E")), float(ns.gap),
                               float(_require(ns, "delta", "delta")),
                               float(_require(ns, "alpha", "alpha")))
        print(json.dumps({"rate": result.value, "branch": result.branch,
                          "crossover": result.crossover}))
        return 0
    consts = theory.derive_constants(
        hess_sup=float(ns.hess_sup), lambda_hat_sq=float(ns.lambda_hat_sq),
        memory_norm=float(ns.memory_norm), a_star=float(ns.A_star))
    if ns.log_sobolev:
        temp = float(_require(ns, "T", "T"))
        value = theory.log_sobolev_C(temp, consts, float(ns.gap), float(ns.a_m))
        print(json.dumps({"C": value, "T": temp, "gap": float(ns.gap)}))
        return 0
    f_val = float(ns.f)
    report = theory.schedule_comparison(lambda t: f_val, float(ns.horizon),
                                        gap=float(ns.gap), a_m=float(ns.a_m),
                                        consts=consts, fprime=lambda t: 0.0)
    print(json.dumps({
        "f": f_val,
        "t": [r.t for r in report.rows],
        "ratio": [r.ratio for r in report.rows],
        "ratio_poly": [r.ratio_poly for r in report.rows],
    }))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub, *, runs_default=False):
    sub.add_argument("--config", help="JSON or flat key=value file supplying flags")
    sub.add_argument("--dynamics", choices=("overdamped", "underdamped", "gle"))
    sub.add_argument("--potential")
    sub.add_argument("--n", type=int, help="dimension for the quadratic potential")
    sub.add_argument("--coeffs", help="comma list of quadratic coefficients")
    sub.add_argument("--A-design", dest="A_design", type=int, choices=(1, 2, 3, 4))
    sub.add_argument("--mu", type=float)
    sub.add_argument("--lambda-bar", dest="lambda_bar", type=float)
    sub.add_argument("--gamma", type=float)
    sub.add_argument("--z-noise", dest="z_noise", choices=("equilibrated", "printed"),
                     help="memory-noise scale: temperature-exact (default) or the "
                          "published scheme coefficient")
    sub.add_argument("--E", type=float)
    sub.add_argument("--schedule", choices=tuple(_SCHEDULE_KINDS), default=None)
    sub.add_argument("--const-T", dest="const_T", type=float)
    sub.add_argument("--dt", type=float)
    sub.add_argument("--steps", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--threads", type=int)
    sub.add_argument("--out")
    sub.add_argument("--initial", help="comma list of initial coordinates")
    sub.add_argument("--tolerance", help="comma list lo,hi per coordinate")
    sub.add_argument("--window", type=int)
    if runs_default:
        sub.add_argument("--runs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gle-anneal",
        description="Simulated annealing with plain, velocity and memory-augmented "
                    "Langevin dynamics.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="single seeded trajectory to CSV")
    _add_common(p)
    p.add_argument("--snapshot-stride", dest="snapshot_stride", type=int, default=1)
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("crossings", help="barrier-crossing experiment summary")
    _add_common(p, runs_default=True)
    p.set_defaults(func=_cmd_crossings)

    p = subs.add_parser("sweep", help="success/crossings grid over (E, knob)")
    _add_common(p, runs_default=True)
    p.add_argument("--E-grid", dest="E_grid")
    p.add_argument("--knob-grid", dest="knob_grid")
    p.add_argument("--mu-pool", dest="mu_pool")
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("heatmap", help="2-D visit histogram over independent runs")
    _add_common(p, runs_default=True)
    p.add_argument("--bins", type=int)
    p.add_argument("--bounds", help="x1_lo,x1_hi,x2_lo,x2_hi")
    p.set_defaults(func=_cmd_heatmap)

    p = subs.add_parser("verify", help="numerical checks of the generator machinery")
    p.add_argument("--config")
    p.add_argument("--what", choices=("generator", "carre", "lyapunov"))
    p.add_argument("--samples", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--A-design", dest="A_design", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--mu", type=float)
    p.add_argument("--lambda-bar", dest="lambda_bar", type=float)
    p.add_argument("--T", type=float)
    p.set_defaults(func=_cmd_verify)

    p = subs.add_parser("theory", help="closed-form constants and rate evaluations")
    p.add_argument("--config")
    p.add_argument("--rate", action="store_true")
    p.add_argument("--log-sobolev", dest="log_sobolev", action="store_true")
    p.add_argument("--schedule-opt", dest="schedule_opt", action="store_true")
    p.add_argument("--E", type=float)
    p.add_argument("--gap", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--a-m", dest="a_m", type=float)
    p.add_argument("--hess-sup", dest="hess_sup", type=float)
    p.add_argument("--memory-norm", dest="memory_norm", type=float)
    p.add_argument("--lambda-hat-sq", dest="lambda_hat_sq", type=float)
    p.add_argument("--A-star", dest="A_star", type=float)
    p.add_argument("--f", type=float)
    p.add_argument("--horizon", type=float)
    p.set_defaults(func=_cmd_theory)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return args.func(args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
