"""Render gle-anneal CSVs to raster images.

Three job kinds, each tied to one documented CSV schema:

* ``trajectory-contour``: a path (columns ``x1, x2``) drawn over contour
  lines of a named benchmark surface;
* ``visit-heatmap``: a row-major visit grid (``x1_center, x2_center,
  log1p_count``) shown as a heat map of log(1 + count);
* ``sweep-grid``: per-cell aggregates (``E, knob`` plus a value column,
  default ``success_window``) shown as an (E, knob) tile grid.

A job is rejected before anything is written when the version line is
wrong, a required column is missing (the error names it), or the CSV has
no data rows.  Rendering embeds no timestamps, so output bytes depend only
on the input.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np  # noqa: E402

from .surfaces import SURFACES  # noqa: E402

CSV_VERSION_LINE = "# gle-anneal v1"

KINDS = ("trajectory-contour", "visit-heatmap", "sweep-grid")

_REQUIRED = {
    "trajectory-contour": ("x1", "x2"),
    "visit-heatmap": ("x1_center", "x2_center", "log1p_count"),
    "sweep-grid": ("E", "knob"),
}


class SchemaError(ValueError):
    """The input CSV does not match the documented schema."""


@dataclass(frozen=True)
class PlotJob:
    input_csv: str
    kind: str
    output: str
    potential: Optional[str] = None
    value_column: str = "success_window"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}; choose from {KINDS}")


def _read_table(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != CSV_VERSION_LINE:
            raise SchemaError(f"missing version line {CSV_VERSION_LINE!r} "
                              f"(found {first!r})")
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise SchemaError("CSV has no header row") from None
        for col in required:
            if col not in columns:
                raise SchemaError(f"required column {col!r} missing from {columns}")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError("CSV contains no data rows; nothing to plot")
    out = {}
    for col in required:
        idx = columns.index(col)
        try:
            out[col] = np.array([float(r[idx]) for r in rows])
        except ValueError as err:
            raise SchemaError(f"column {col!r} is not numeric: {err}") from None
    return out


def _save(fig, path: str):
    # suppress the Software tag so output bytes depend only on the input
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def _render_trajectory(job: PlotJob):
    data = _read_table(job.input_csv, _REQUIRED["trajectory-contour"])
    x1, x2 = data["x1"], data["x2"]
    fig, ax = plt.subplots(figsize=(5, 4))
    lo1, hi1 = min(x1.min(), -10.0), max(x1.max(), 10.0)
    lo2, hi2 = min(x2.min(), -8.0), max(x2.max(), 8.0)
    if job.potential is not None:
        if job.potential not in SURFACES:
            raise SchemaError(f"no contour surface named {job.potential!r}; "
                              f"choose from {sorted(SURFACES)}")
        g1 = np.linspace(lo1, hi1, 240)
        g2 = np.linspace(lo2, hi2, 240)
        m1, m2 = np.meshgrid(g1, g2)
        ax.contour(m1, m2, SURFACES[job.potential](m1, m2), levels=24,
                   linewidths=0.5, cmap="Greys")
    ax.plot(x1, x2, lw=0.6, color="tab:red")
    ax.plot(x1[0], x2[0], "o", ms=4, color="tab:blue")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_xlim(lo1, hi1)
    ax.set_ylim(lo2, hi2)
    _save(fig, job.output)


def _render_heatmap(job: PlotJob):
    data = _read_table(job.input_csv, _REQUIRED["visit-heatmap"])
    c1 = np.unique(data["x1_center"])
    c2 = np.unique(data["x2_center"])
    grid = np.full((len(c1), len(c2)), np.nan)
    i1 = np.searchsorted(c1, data["x1_center"])
    i2 = np.searchsorted(c2, data["x2_center"])
    grid[i1, i2] = data["log1p_count"]
    fig, ax = plt.subplots(figsize=(5, 4))
    img = ax.imshow(grid.T, origin="lower", aspect="auto", cmap="magma",
                    extent=(c1[0], c1[-1], c2[0], c2[-1]))
    fig.colorbar(img, ax=ax, label="log(1 + visits)")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    _save(fig, job.output)


def _render_sweep(job: PlotJob):
    required = _REQUIRED["sweep-grid"] + (job.value_column,)
    data = _read_table(job.input_csv, required)
    es = np.unique(data["E"])
    knobs = np.unique(data["knob"])
    grid = np.full((len(es), len(knobs)), np.nan)
    for e, k, v in zip(data["E"], data["knob"], data[job.value_column]):
        grid[np.searchsorted(es, e), np.searchsorted(knobs, k)] = v
    fig, ax = plt.subplots(figsize=(5, 4))
    img = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    fig.colorbar(img, ax=ax, label=job.value_column)
    ax.set_xticks(range(len(knobs)), [f"{k:g}" for k in knobs])
    ax.set_yticks(range(len(es)), [f"{e:g}" for e in es])
    ax.set_xlabel("knob")
    ax.set_ylabel("E")
    _save(fig, job.output)


def render(job: PlotJob) -> str:
    """Render the job; returns the output path.  Raises SchemaError first
    (before creating the file) when the input does not match the schema."""
    {"trajectory-contour": _render_trajectory,
     "visit-heatmap": _render_heatmap,
     "sweep-grid": _render_sweep}[job.kind](job)
    return job.output
