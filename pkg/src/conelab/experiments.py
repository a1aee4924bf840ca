"""Batch experiment harness: randomized phase-transition grids with
logistic fits, theoretical overlays, and deterministic file outputs.

Six experiments are built in:

* ``l1_grid``             sparse recovery by l1 basis pursuit, axes (s, m)
* ``s1_grid``             low-rank recovery by nuclear-norm pursuit, axes (r, m)
* ``demix_l1l1_grid``     sparse + sparse demixing, axes (s_x, s_y)
* ``demix_s1l1_grid``     low-rank + sparse demixing, axes (rank, s_y)
* ``socp_feas``           random cone-program feasibility over m
* ``vectors_from_lists``  permutahedron-gauge recovery over m

Reproducibility contract: every (cell, repetition) derives its own
counter-based random substream from the master seed and the cell
coordinates, so results are identical for any worker count and any batch
schedule; aggregation is by cell index and therefore order-independent.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .cones import Circular, ConeSpec, Product
from .numerics import RngStream, logistic_fit
from .solvers import (
    SUCCESS_TOL,
    SolverParams,
    bp_l1_batch,
    bp_nuclear_batch,
    cone_feasibility_batch,
    demix_l1l1_batch,
    demix_s1l1_batch,
    permutahedron_gauge_min,
    success_check,
)
from .statdim import (
    harmonic_number,
    psi_l1,
    psi_l1_inverse,
    statdim_circular_exact,
    psi_s1,
)
from .kinematics import ivols_circular, ivols_product, tail as ivols_tail

__all__ = [
    "ExperimentConfig",
    "GridResult",
    "run_experiment",
    "run_l1_grid",
    "run_s1_grid",
    "run_demix_grid",
    "run_socp_feasibility",
    "run_vectors_from_lists",
    "fit_empirical_transition",
    "emit_outputs",
    "parse_config_file",
    "EXPERIMENT_NAMES",
]

EXPERIMENT_NAMES = (
    "l1_grid",
    "s1_grid",
    "demix_l1l1_grid",
    "demix_s1l1_grid",
    "socp_feas",
    "vectors_from_lists",
)

_DIM_CAP = 128
_MATRIX_CAP = 20


@dataclass
class ExperimentConfig:
    """Scale, axes, seeding, and solver knobs for one experiment run.

    ``a_values``/``b_values`` are the grid axes (rows/columns); when omitted
    the desk-scale defaults for the experiment are used.  ``d`` is the
    ambient dimension, or the matrix order n for the matrix experiments.
    """

    experiment: str = "l1_grid"
    d: int = 0  # 0 -> per-experiment desk-scale default
    reps: int = 25
    master_seed: int = 2024
    a_values: Optional[tuple] = None
    b_values: Optional[tuple] = None
    workers: int = 1
    out_dir: Optional[str] = None
    solver: SolverParams = field(default_factory=SolverParams)
    cone_count: int = 1          # socp_feas: number of circular factors
    tan_sq_alpha: float = 0.2    # socp_feas: tan^2 of the half-angle
    allow_large: bool = False    # lift the desk-scale dimension caps

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_NAMES:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.d == 0:
            self.d = _DEFAULT_DIM[self.experiment]
        cap = _MATRIX_CAP if self.experiment in _MATRIX_EXPERIMENTS else _DIM_CAP
        if self.d > cap and not self.allow_large:
            raise ValueError(
                f"d={self.d} exceeds the desk-scale cap {cap}; set allow_large"
            )
        if self.a_values is None:
            self.a_values = _default_a(self.experiment, self.d)
        if self.b_values is None:
            self.b_values = _default_b(self.experiment, self.d)
        self.a_values = tuple(int(a) for a in self.a_values)
        self.b_values = tuple(int(b) for b in self.b_values)


_MATRIX_EXPERIMENTS = ("s1_grid", "demix_s1l1_grid")

_DEFAULT_DIM = {
    "l1_grid": 40,
    "s1_grid": 12,
    "demix_l1l1_grid": 60,
    "demix_s1l1_grid": 12,
    "socp_feas": 96,
    "vectors_from_lists": 60,
}


def _default_a(experiment: str, d: int) -> tuple:
    if experiment == "l1_grid":
        return tuple(range(max(d // 10, 1), d, max(d // 10, 1)))
    if experiment == "s1_grid":
        return tuple(range(1, d, 2))
    if experiment == "demix_l1l1_grid":
        step = max(d // 10, 1)
        return tuple(range(step, d // 2 + 1, step))
    if experiment == "demix_s1l1_grid":
        return (1, 2, 3)
    return (0,)  # single-row experiments


def _default_b(experiment: str, d: int) -> tuple:
    if experiment == "l1_grid":
        return tuple(range(2, d + 1, 2))
    if experiment == "s1_grid":
        return tuple(range(8, d * d + 1, 8))
    if experiment == "demix_l1l1_grid":
        return tuple(range(2, d - d // 4, 2))
    if experiment == "demix_s1l1_grid":
        return tuple(range(4, d * d // 2 + 1, 8))
    if experiment == "socp_feas":
        return tuple(range(2, d // 3 + 1, 2))
    if experiment == "vectors_from_lists":
        return tuple(range(d - 12, d + 1))
    raise ValueError(experiment)


@dataclass
class GridResult:
    experiment: str
    row_name: str
    col_name: str
    rows: tuple
    cols: tuple
    successes: np.ndarray
    trials: np.ndarray
    solver_failures: np.ndarray
    stream_ids: np.ndarray
    fits: list
    theory: dict
    config: dict
    wall_time: float
    version: str


# ---------------------------------------------------------------------------
# Instance generation + cell workers (top level: must pickle into the pool)
# ---------------------------------------------------------------------------


def _sparse_sign_vector(d: int, s: int, gen: np.random.Generator) -> np.ndarray:
    x = np.zeros(d)
    if s > 0:
        idx = gen.choice(d, size=s, replace=False)
        x[idx] = gen.choice([-1.0, 1.0], size=s)
    return x


def _stiefel_factor(n: int, r: int, gen: np.random.Generator) -> np.ndarray:
    g = gen.standard_normal((n, r))
    q, rr = np.linalg.qr(g)
    return q * np.sign(np.diagonal(rr))


def _haar_orthogonal(d: int, gen: np.random.Generator) -> np.ndarray:
    g = gen.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s


def _cell_l1(d, s, m, streams, params):
    R = len(streams)
    As = np.empty((R, m, d))
    z0s = np.empty((R, m))
    x0s = np.empty((R, d))
    for i, sid in enumerate(streams):
        gen = RngStream(*sid).generator()
        x0s[i] = _sparse_sign_vector(d, s, gen)
        As[i] = gen.standard_normal((m, d))
        z0s[i] = As[i] @ x0s[i]
    sols, iters, prim, dual, done = bp_l1_batch(As, z0s, params)
    err = np.linalg.norm(sols - x0s, axis=1)
    succ = done & (err <= SUCCESS_TOL)
    return int(succ.sum()), int((~done).sum())


def _cell_s1(n, r, m, streams, params):
    # degrees-of-freedom shortcut: declare failure without solving
    if r >= math.ceil(math.sqrt(m)) + 1:
        return 0, 0
    R = len(streams)
    D = n * n
    As = np.empty((R, m, D))
    z0s = np.empty((R, m))
    x0s = np.empty((R, D))
    for i, sid in enumerate(streams):
        gen = RngStream(*sid).generator()
        X0 = _stiefel_factor(n, r, gen) @ _stiefel_factor(n, r, gen).T
        x0s[i] = X0.ravel()
        As[i] = gen.standard_normal((m, D))
        z0s[i] = As[i] @ x0s[i]
    sols, iters, prim, dual, done = bp_nuclear_batch(As, z0s, n, n, params)
    err = np.linalg.norm(sols - x0s, axis=1)
    succ = done & (err <= SUCCESS_TOL)
    return int(succ.sum()), int((~done).sum())


def _cell_demix_l1l1(d, sx, sy, streams, params):
    R = len(streams)
    Us = np.empty((R, d, d))
    z0s = np.empty((R, d))
    x0s = np.empty((R, d))
    y0s = np.empty((R, d))
    for i, sid in enumerate(streams):
        gen = RngStream(*sid).generator()
        x0s[i] = _sparse_sign_vector(d, sx, gen)
        y0s[i] = _sparse_sign_vector(d, sy, gen)
        Us[i] = _haar_orthogonal(d, gen)
        z0s[i] = x0s[i] + Us[i] @ y0s[i]
    bounds = np.abs(y0s).sum(axis=1)
    xh, yh, iters, prim, dual, done = demix_l1l1_batch(Us, z0s, bounds, params)
    ok = (
        done
        & (np.linalg.norm(xh - x0s, axis=1) <= SUCCESS_TOL)
        & (np.linalg.norm(yh - y0s, axis=1) <= SUCCESS_TOL)
    )
    return int(ok.sum()), int((~done).sum())


def _cell_demix_s1l1(n, r, sy, streams, params):
    R = len(streams)
    D = n * n
    Us = np.empty((R, D, D))
    z0s = np.empty((R, D))
    x0s = np.empty((R, D))
    y0s = np.empty((R, D))
    for i, sid in enumerate(streams):
        gen = RngStream(*sid).generator()
        X0 = _stiefel_factor(n, r, gen) @ _stiefel_factor(n, r, gen).T
        x0s[i] = X0.ravel()
        y0s[i] = _sparse_sign_vector(D, sy, gen)
        Us[i] = _haar_orthogonal(D, gen)
        z0s[i] = x0s[i] + Us[i] @ y0s[i]
    bounds = np.abs(y0s).sum(axis=1)
    xh, yh, iters, prim, dual, done = demix_s1l1_batch(Us, z0s, bounds, n, n, params)
    ok = (
        done
        & (np.linalg.norm(xh - x0s, axis=1) <= SUCCESS_TOL)
        & (np.linalg.norm(yh - y0s, axis=1) <= SUCCESS_TOL)
    )
    return int(ok.sum()), int((~done).sum())


def _socp_cone(d: int, count: int, tan_sq: float) -> ConeSpec:
    alpha = math.atan(math.sqrt(tan_sq))
    if d % count:
        raise ValueError(f"dimension {d} not divisible into {count} factors")
    factors = tuple(Circular(d // count, alpha) for _ in range(count))
    return factors[0] if count == 1 else Product(factors)


def _cell_socp(d, _row, m, streams, params, cone_count, tan_sq_alpha):
    cone = _socp_cone(d, cone_count, tan_sq_alpha)
    R = len(streams)
    As = np.empty((R, m, d))
    bs = np.empty((R, m))
    for i, sid in enumerate(streams):
        gen = RngStream(*sid).generator()
        As[i] = gen.standard_normal((m, d))
        gen.standard_normal(d)  # the objective vector u (unused by feasibility)
        bs[i] = gen.standard_normal(m)
    feasible, iters, relres, stalled = cone_feasibility_batch(As, bs, cone, params)
    unresolved = ~(feasible | stalled)
    return int(feasible.sum()), int(unresolved.sum())


def _cell_lists(d, _row, m, streams, params):
    x0 = np.arange(1.0, d + 1)
    y0 = x0[::-1].copy()  # entries in decreasing order
    succ = 0
    failures = 0
    for sid in streams:
        gen = RngStream(*sid).generator()
        A = gen.standard_normal((m, d))
        z0 = A @ x0
        res = permutahedron_gauge_min(y0, A, z0, params, truth=x0)
        if res.status == "max_iters":
            failures += 1
        elif res.success:
            succ += 1
    return succ, failures


def _run_cell(payload):
    """Pool entry point: returns (row_index, col_index, successes, failures)."""
    (experiment, d, i, j, a, b, streams, params, extra) = payload
    if experiment == "l1_grid":
        out = _cell_l1(d, a, b, streams, params)
    elif experiment == "s1_grid":
        out = _cell_s1(d, a, b, streams, params)
    elif experiment == "demix_l1l1_grid":
        out = _cell_demix_l1l1(d, a, b, streams, params)
    elif experiment == "demix_s1l1_grid":
        out = _cell_demix_s1l1(d, a, b, streams, params)
    elif experiment == "socp_feas":
        out = _cell_socp(d, a, b, streams, params, *extra)
    elif experiment == "vectors_from_lists":
        out = _cell_lists(d, a, b, streams, params)
    else:  # pragma: no cover
        raise ValueError(experiment)
    return (i, j, out[0], out[1])


# ---------------------------------------------------------------------------
# Theory overlays
# ---------------------------------------------------------------------------


def _theory_for(config: ExperimentConfig) -> dict:
    d = config.d
    exp = config.experiment
    if exp == "l1_grid":
        return {"m_star": [d * psi_l1(s / d) for s in range(d + 1)]}
    if exp == "s1_grid":
        return {"m_star": [d * d * psi_s1(r / d, 1.0) for r in range(d + 1)]}
    if exp == "demix_l1l1_grid":
        curve = []
        for sx in range(d + 1):
            rest = 1.0 - psi_l1(sx / d)
            curve.append(d * psi_l1_inverse(max(rest, 0.0)))
        return {"sy_star": curve}
    if exp == "demix_s1l1_grid":
        curve = []
        D = d * d
        for r in range(d + 1):
            if r == 0:
                used = 0.0
            elif r == d:
                used = 1.0
            else:
                used = psi_s1(r / d, 1.0)
            curve.append(D * psi_l1_inverse(max(1.0 - used, 0.0)))
        return {"sy_star": curve}
    if exp == "socp_feas":
        alpha = math.atan(math.sqrt(config.tan_sq_alpha))
        block = d // config.cone_count
        delta = config.cone_count * statdim_circular_exact(block, alpha)
        vols = ivols_circular(block, alpha)
        for _ in range(config.cone_count - 1):
            vols = ivols_product(vols, ivols_circular(block, alpha))
        mmax = max(config.b_values)
        probs = [ivols_tail(vols, min(m, vols.d)) for m in range(mmax + 1)]
        return {"delta": [delta], "feasible_prob": probs}
    if exp == "vectors_from_lists":
        return {"delta": [d - harmonic_number(d)]}
    raise ValueError(exp)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

_ROW_NAMES = {
    "l1_grid": "s",
    "s1_grid": "r",
    "demix_l1l1_grid": "s_x",
    "demix_s1l1_grid": "rank",
    "socp_feas": "row",
    "vectors_from_lists": "row",
}
_COL_NAMES = {
    "l1_grid": "m",
    "s1_grid": "m",
    "demix_l1l1_grid": "s_y",
    "demix_s1l1_grid": "s_y",
    "socp_feas": "m",
    "vectors_from_lists": "m",
}


def run_experiment(config: ExperimentConfig) -> GridResult:
    """Run all grid cells of the configured experiment and fit transitions."""
    t0 = time.perf_counter()
    base = RngStream(config.master_seed)
    extra = ()
    if config.experiment == "socp_feas":
        extra = (config.cone_count, config.tan_sq_alpha)

    payloads = []
    stream_ids = np.zeros((len(config.a_values), len(config.b_values)), dtype=np.uint64)
    for i, a in enumerate(config.a_values):
        for j, b in enumerate(config.b_values):
            streams = [
                base.substream(config.experiment, a, b, rep)
                for rep in range(config.reps)
            ]
            stream_ids[i, j] = np.uint64(streams[0].stream_id)
            payloads.append(
                (
                    config.experiment,
                    config.d,
                    i,
                    j,
                    a,
                    b,
                    [(s.master_seed, s.stream_id) for s in streams],
                    config.solver,
                    extra,
                )
            )

    successes = np.zeros_like(stream_ids, dtype=int)
    failures = np.zeros_like(stream_ids, dtype=int)
    trials = np.full_like(successes, config.reps)
    if config.workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for i, j, s, f in pool.map(_run_cell, payloads, chunksize=1):
                successes[i, j] = s
                failures[i, j] = f
    else:
        for payload in payloads:
            i, j, s, f = _run_cell(payload)
            successes[i, j] = s
            failures[i, j] = f

    fits = []
    if len(config.b_values) >= 4:
        for i, a in enumerate(config.a_values):
            column = list(zip(config.b_values, successes[i], trials[i]))
            fit = fit_empirical_transition(column)
            fits.append(
                {
                    "row": a,
                    "mu": fit.mu,
                    "beta1": fit.beta1,
                    "separated": fit.separated,
                }
            )

    config_echo = dataclasses.asdict(config)
    config_echo["solver"] = dataclasses.asdict(config.solver)
    return GridResult(
        experiment=config.experiment,
        row_name=_ROW_NAMES[config.experiment],
        col_name=_COL_NAMES[config.experiment],
        rows=config.a_values,
        cols=config.b_values,
        successes=successes,
        trials=trials,
        solver_failures=failures,
        stream_ids=stream_ids,
        fits=fits,
        theory=_theory_for(config),
        config=config_echo,
        wall_time=time.perf_counter() - t0,
        version=__version__,
    )


def run_l1_grid(config: ExperimentConfig) -> GridResult:
    if config.experiment != "l1_grid":
        raise ValueError("config is not an l1_grid configuration")
    return run_experiment(config)


def run_s1_grid(config: ExperimentConfig) -> GridResult:
    if config.experiment != "s1_grid":
        raise ValueError("config is not an s1_grid configuration")
    return run_experiment(config)


def run_demix_grid(config: ExperimentConfig, variant: str) -> GridResult:
    expected = {"l1l1": "demix_l1l1_grid", "s1l1": "demix_s1l1_grid"}[variant]
    if config.experiment != expected:
        raise ValueError(f"config is not a {expected} configuration")
    return run_experiment(config)


def run_socp_feasibility(config: ExperimentConfig) -> GridResult:
    if config.experiment != "socp_feas":
        raise ValueError("config is not a socp_feas configuration")
    return run_experiment(config)


def run_vectors_from_lists(config: ExperimentConfig) -> GridResult:
    if config.experiment != "vectors_from_lists":
        raise ValueError("config is not a vectors_from_lists configuration")
    return run_experiment(config)


def fit_empirical_transition(column):
    """Logistic fit of one (abscissa, successes, trials) column."""
    pts = list(column)
    if len(pts) < 4:
        raise ValueError("need at least 4 points to fit a transition")
    return logistic_fit(pts)


# ---------------------------------------------------------------------------
# Output files (byte-deterministic)
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def emit_outputs(result: GridResult, out_dir: str) -> dict:
    """Write grid.csv, summary.json, and heatmap.svg; returns the paths.

    All three files are byte-deterministic functions of the grid content;
    wall time and other run-varying metadata are deliberately excluded.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "csv": os.path.join(out_dir, "grid.csv"),
        "json": os.path.join(out_dir, "summary.json"),
        "svg": os.path.join(out_dir, "heatmap.svg"),
    }

    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(
        [result.row_name, result.col_name, "successes", "trials", "solver_failures", "stream_id"]
    )
    for i, a in enumerate(result.rows):
        for j, b in enumerate(result.cols):
            writer.writerow(
                [
                    a,
                    b,
                    int(result.successes[i, j]),
                    int(result.trials[i, j]),
                    int(result.solver_failures[i, j]),
                    int(result.stream_ids[i, j]),
                ]
            )
    with open(paths["csv"], "w", newline="") as fh:
        fh.write(buf.getvalue())

    summary = {
        "experiment": result.experiment,
        "version": result.version,
        "config": {k: v for k, v in result.config.items() if k != "out_dir"},
        "fits": result.fits,
        "theory": result.theory,
        "errors": _fit_errors(result),
    }
    with open(paths["json"], "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(paths["svg"], "w") as fh:
        fh.write(_heatmap_svg(result))
    return paths


def _fit_errors(result: GridResult) -> list:
    """Per-fitted-row |mu - theory| / d, where a theory value exists."""
    d = result.config.get("d", 0)
    out = []
    theory = result.theory
    for fit in result.fits:
        row = fit["row"]
        ref = None
        if result.experiment == "l1_grid":
            ref = theory["m_star"][row]
        elif result.experiment == "s1_grid":
            ref = theory["m_star"][row]
        elif result.experiment in ("demix_l1l1_grid", "demix_s1l1_grid"):
            ref = theory["sy_star"][row]
        elif result.experiment == "socp_feas":
            ref = theory["delta"][0]
        elif result.experiment == "vectors_from_lists":
            ref = theory["delta"][0]
        if ref is None or math.isnan(fit["mu"]):
            out.append({"row": row, "abs_error": None, "rel_error": None})
            continue
        scale = d * d if result.experiment in _MATRIX_EXPERIMENTS else d
        err = abs(fit["mu"] - ref)
        out.append(
            {
                "row": row,
                "theory": ref,
                "abs_error": err,
                "rel_error": err / scale if scale else None,
            }
        )
    return out


def _heatmap_svg(result: GridResult) -> str:
    """Grayscale success map with the theory curve as a polyline."""
    width, height = 640, 480
    margin = 48
    nr, nc = len(result.rows), len(result.cols)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#202020"/>',
    ]
    if nr and nc:
        cw = (width - 2 * margin) / nc
        ch = (height - 2 * margin) / nr
        frac = result.successes / np.maximum(result.trials, 1)
        for i in range(nr):
            for j in range(nc):
                g = int(round(255 * float(frac[i, j])))
                x = margin + j * cw
                y = height - margin - (i + 1) * ch
                parts.append(
                    f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cw)}" '
                    f'height="{_fmt(ch)}" fill="rgb({g},{g},{g})"/>'
                )
        curve_pts = _theory_polyline(result)
        if curve_pts:
            coords = []
            a_lo, a_hi = min(result.rows), max(result.rows)
            b_lo, b_hi = min(result.cols), max(result.cols)
            a_span = max(a_hi - a_lo, 1)
            b_span = max(b_hi - b_lo, 1)
            for a, b in curve_pts:
                if not (a_lo <= a <= a_hi and b_lo <= b <= b_hi):
                    continue
                px = margin + (b - b_lo) / b_span * (width - 2 * margin)
                py = height - margin - (a - a_lo) / a_span * (height - 2 * margin)
                coords.append(f"{_fmt(px)},{_fmt(py)}")
            if len(coords) >= 2:
                parts.append(
                    '<polyline fill="none" stroke="#e6c300" stroke-width="2" '
                    f'points="{" ".join(coords)}"/>'
                )
    parts.append(
        f'<text x="{margin}" y="{height - 12}" fill="#cccccc" font-size="12">'
        f"{result.experiment}: {result.col_name} (x) vs {result.row_name} (y)</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _theory_polyline(result: GridResult):
    """(row_value, col_value) pairs of the theoretical transition curve."""
    theory = result.theory
    if result.experiment in ("l1_grid", "s1_grid"):
        return [(a, m) for a, m in enumerate(theory["m_star"])]
    if result.experiment in ("demix_l1l1_grid", "demix_s1l1_grid"):
        return [(a, sy) for a, sy in enumerate(theory["sy_star"])]
    if result.experiment in ("socp_feas", "vectors_from_lists"):
        delta = theory["delta"][0]
        return [(min(result.rows), delta), (max(result.rows), delta)]
    return []


# ---------------------------------------------------------------------------
# Flat key = value config files
# ---------------------------------------------------------------------------

_CONFIG_KEYS = """
experiment d reps master_seed workers out_dir cone_count tan_sq_alpha
a_values b_values allow_large
solver.rho solver.over_relaxation solver.tol solver.max_iters
solver.feas_tol solver.feas_max_iters solver.stall_window solver.stall_eps
solver.lp_violation_tol solver.lp_max_rounds
""".split()


def _parse_value(text: str):
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if "," in text or ":" in text:
        if ":" in text and "," not in text:  # start:stop[:step] range shorthand
            parts = [int(p) for p in text.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            return tuple(range(start, stop + 1, step))
        return tuple(int(p) for p in text.split(",") if p.strip())
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_config_file(path: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a flat ``key = value`` text file.

    Grid axes accept comma lists (``4,8,12``) or ``start:stop[:step]``
    ranges.  Solver knobs use the ``solver.`` prefix.  Unknown keys are an
    error, to catch typos early.
    """
    raw: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = _parse_value(val)
    if overrides:
        raw.update(overrides)
    solver_kwargs = {
        k.split(".", 1)[1]: v for k, v in raw.items() if k.startswith("solver.")
    }
    config_kwargs = {k: v for k, v in raw.items() if not k.startswith("solver.")}
    if solver_kwargs:
        config_kwargs["solver"] = SolverParams(**solver_kwargs)
    return ExperimentConfig(**config_kwargs)
