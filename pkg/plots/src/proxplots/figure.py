"""Semilog convergence figures from solver trace CSVs.

The input contract is the trace CSV the solver writes: one header row with
the columns in TRACE_COLUMNS, one row per outer iteration. Everything here
is a pure function of the CSV contents and the PlotSpec, so re-rendering
the same inputs reproduces the same figure.
"""

import csv
import warnings
from dataclasses import dataclass
from itertools import zip_longest

import numpy as np

__all__ = [
    "TRACE_COLUMNS",
    "CLAMP_FLOOR",
    "FSTAR_MARGIN",
    "PlotSpec",
    "TraceSchemaError",
    "EmptyTraceError",
    "load_trace",
    "build_series",
    "render",
]

# must match the writer on the solver side; this is the interchange contract
TRACE_COLUMNS = [
    "iter", "t", "f", "norm_Gf", "lambda_pred", "eta",
    "inner_iters", "cum_fev", "cum_gev", "cum_prox", "elapsed_sec",
]

CLAMP_FLOOR = 1e-16
FSTAR_MARGIN = 1e-12

_X_COLUMN = {"fevals": "cum_fev", "seconds": "elapsed_sec"}
_X_LABEL = {"fevals": "function evaluations", "seconds": "seconds"}


class TraceSchemaError(ValueError):
    """Header does not match the trace contract; carries the offending column."""

    def __init__(self, column, path):
        super().__init__("%s: trace schema mismatch at column %r" % (path, column))
        self.column = column


class EmptyTraceError(ValueError):
    pass


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: traces as (path, label) pairs, one x axis, one output.

    f_star None means the reference optimum is taken as the minimum f seen
    across all supplied traces minus FSTAR_MARGIN, so every plotted
    suboptimality is strictly positive.
    """

    traces: tuple
    x_axis: str = "fevals"
    out_path: str = "figure.svg"
    f_star: float | None = None
    log_y: bool = True

    def __post_init__(self):
        if len(self.traces) == 0:
            raise ValueError("need at least one trace")
        if self.x_axis not in _X_COLUMN:
            raise ValueError("x_axis must be one of %s" % sorted(_X_COLUMN))


def load_trace(path):
    """Read one trace CSV into a dict of column name -> float array."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyTraceError("%s: empty trace file" % path)
    header = rows[0]
    for want, got in zip_longest(TRACE_COLUMNS, header):
        if want != got:
            raise TraceSchemaError(want if want is not None else got, path)
    if len(rows) == 1:
        raise EmptyTraceError("%s: trace has a header but no rows" % path)
    body = np.array([[float(v) for v in row] for row in rows[1:]])
    return {name: body[:, j] for j, name in enumerate(TRACE_COLUMNS)}


def build_series(spec):
    """Resolve the reference optimum and return (f_star, [(label, x, y)]).

    y is relative suboptimality (f - f_star) / max(1, |f_star|). Differences
    below CLAMP_FLOOR, exact zero included, are clamped up to it so they can
    sit on a log axis. Negative or undefined differences are real
    disagreements with the reference, not rounding: those points are dropped
    with a warning rather than clamped into fake data.
    """
    loaded = [(label, load_trace(path)) for path, label in spec.traces]
    if spec.f_star is None:
        f_star = min(float(np.min(t["f"])) for _, t in loaded) - FSTAR_MARGIN
    else:
        f_star = float(spec.f_star)
    scale = max(1.0, abs(f_star))

    series = []
    x_col = _X_COLUMN[spec.x_axis]
    for label, trace in loaded:
        diff = trace["f"] - f_star
        keep = diff >= 0.0
        dropped = int(diff.size - np.count_nonzero(keep))
        if dropped:
            warnings.warn("%s: dropped %d points below the reference optimum"
                          % (label, dropped))
        y = np.maximum(diff[keep], CLAMP_FLOOR) / scale
        series.append((label, trace[x_col][keep], y))
    return f_star, series


def render(spec):
    """Draw the figure described by spec and return its output path."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    # stable ids and searchable text keep the SVG byte-reproducible
    matplotlib.rcParams["svg.hashsalt"] = "proxplots"
    matplotlib.rcParams["svg.fonttype"] = "none"

    _, series = build_series(spec)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, x, y in series:
        ax.plot(x, y, marker=".", label=label)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(_X_LABEL[spec.x_axis])
    ax.set_ylabel("relative suboptimality")
    ax.grid(True, which="both", alpha=0.25)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out_path, metadata={"Date": None})
    plt.close(fig)
    return spec.out_path
