"""Reproducible Monte Carlo RMSE experiments.

Randomness contract: all draws come from a counter-based generator (Philox)
keyed on (master_seed, row), consumed as a fixed-width table of uniforms
with one row per trial:

  column 0        component choice (rectangle or segment, area weighted)
  columns 1-2     position inside the component (column 2 idle in 1-D)
  columns 3...    observation noise, one column per reading

Normals come from the inverse CDF of those uniforms, never from a platform
normal sampler. Trial t therefore depends only on (master_seed, row, t), the
estimator stage is pure, and the squared-error reduction runs in fixed index
order, so results are bit-identical across repeat runs and thread counts.

Standard errors are computed on the MSE from the sample variance of squared
errors, then delta-method mapped to the RMSE scale.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtri

from . import _kernels
from .bounds import (
    DEFAULT_JS,
    CondFim,
    PriorFim,
    bcrb,
    ezzb_1d,
    ezzb_2d,
    prior_fim_1d,
    prior_fim_2d,
    wwb_1d,
    wwb_2d,
)
from .errors import UnknownParam, ValidationError
from .estimators import GaussianObsModel, RangingObsModel, _RangingGrid
from .geometry import Rect, RectMap, SegmentUnion

ESTIMATORS = ("MMSE", "MAP", "ML")
SWEEP_PARAMS = ("sigma", "dx", "w", "w2", "rho")

# uniform-table layout
_COL_COMPONENT = 0
_COL_X = 1
_COL_Y = 2
_COL_NOISE = 3


def _thread_count() -> int:
    raw = os.environ.get("MAPBOUND_THREADS", "")
    if raw.strip():
        return max(1, int(raw))
    return min(os.cpu_count() or 1, 8)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment: a support, an observation model, an
    estimator, and a seed that fully determines the outcome.

    `geometry` optionally carries the parametric family the map was built
    from; sweeps over geometric parameters need it to rebuild the map.
    `grid_step` tunes the ranging search lattice (default sigma/10).
    """

    map: object
    model: object
    estimator: str = "MMSE"
    n_runs: int = 10_000
    master_seed: int = 0
    geometry: object = None
    grid_step: float | None = None

    def __post_init__(self):
        if not isinstance(self.map, (SegmentUnion, RectMap)):
            raise ValidationError(
                f"map must be a SegmentUnion or RectMap, got {type(self.map).__name__}"
            )
        if self.estimator not in ESTIMATORS:
            raise ValidationError(
                f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}"
            )
        if not (isinstance(self.n_runs, int) and self.n_runs >= 1):
            raise ValidationError(f"n_runs must be a positive integer, got {self.n_runs}")
        if not (isinstance(self.master_seed, int) and 0 <= self.master_seed < 2**64):
            raise ValidationError(
                f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}"
            )
        if isinstance(self.model, RangingObsModel):
            if isinstance(self.map, SegmentUnion):
                raise ValidationError("range readings need a 2-D map")
            if self.estimator == "MMSE":
                raise ValidationError(
                    "the posterior mean under range readings has no closed form; "
                    "use MAP or ML"
                )
        elif not isinstance(self.model, GaussianObsModel):
            raise ValidationError(
                f"model must be a GaussianObsModel or RangingObsModel, "
                f"got {type(self.model).__name__}"
            )

    @property
    def is_1d(self) -> bool:
        return isinstance(self.map, SegmentUnion)


@dataclass(frozen=True)
class ExperimentResult:
    """Per-axis and overall RMSE with standard errors.

    1-D results leave the y fields as None and set rmse_total = rmse_x.
    n_underflow counts trials whose posterior mass underflowed and fell back
    to the support projection.
    """

    n_runs: int
    master_seed: int
    rmse_x: float
    stderr_x: float
    rmse_y: float | None = None
    stderr_y: float | None = None
    rmse_total: float = 0.0
    stderr_total: float = 0.0
    n_underflow: int = 0

    def __post_init__(self):
        for name in ("rmse_x", "rmse_total"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"{name} must be nonnegative")
        if self.rmse_y is not None:
            if self.rmse_y < 0.0:
                raise ValidationError("rmse_y must be nonnegative")
            gap = abs(self.rmse_total**2 - (self.rmse_x**2 + self.rmse_y**2))
            if gap > 1e-12 * max(1.0, self.rmse_total**2):
                raise ValidationError(
                    "rmse_total is not the root of the per-axis MSE sum"
                )

    @property
    def mse_x(self) -> float:
        return self.rmse_x**2

    @property
    def mse_y(self) -> float | None:
        return None if self.rmse_y is None else self.rmse_y**2


def _component_tables(support):
    """Cumulative area fractions plus per-component lows and sizes."""
    if isinstance(support, SegmentUnion):
        lo = np.array([s.lo for s in support.segments])
        size = np.array([s.width for s in support.segments])
        cum = np.cumsum(size / size.sum())
        return cum, lo, size, None, None
    areas = np.array([r.area for r in support.rects])
    cum = np.cumsum(areas / areas.sum())
    xlo = np.array([r.x_lo for r in support.rects])
    xw = np.array([r.width for r in support.rects])
    ylo = np.array([r.y_lo for r in support.rects])
    yh = np.array([r.height for r in support.rects])
    return cum, xlo, xw, ylo, yh


def _positions_from_uniforms(tables, u):
    """Map uniform rows (component, x, y) to positions; u has shape (n, 3)."""
    cum, xlo, xw, ylo, yh = tables
    idx = np.minimum(
        np.searchsorted(cum, u[:, _COL_COMPONENT], side="right"), cum.size - 1
    )
    px = xlo[idx] + u[:, _COL_X] * xw[idx]
    if ylo is None:
        return px, None
    py = ylo[idx] + u[:, _COL_Y] * yh[idx]
    return px, py


def sample_uniform(support, rng):
    """One uniform draw over the support: component chosen with probability
    proportional to its measure, then uniform inside."""
    tables = _component_tables(support)
    u = np.empty((1, 3))
    u[0, :] = rng.random(3)
    px, py = _positions_from_uniforms(tables, u)
    if py is None:
        return float(px[0])
    return (float(px[0]), float(py[0]))


def _normals(u):
    # inverse-CDF sampling; the generator emits [0, 1), so only the lower
    # edge can reach an infinite quantile
    return ndtri(np.maximum(u, 1e-300))


def _rmse_and_stderr(e2):
    n = e2.shape[0]
    mse = e2.sum() / n
    if n < 2:
        return math.sqrt(mse), math.nan
    var = max((np.sum(e2 * e2) - n * mse * mse) / (n - 1), 0.0)
    se_mse = math.sqrt(var / n)
    rmse = math.sqrt(mse)
    if se_mse == 0.0:
        return rmse, 0.0
    return rmse, math.nan if rmse == 0.0 else se_mse / (2.0 * rmse)


def _solve_ranging_batch(grid, z, n_threads):
    n = z.shape[0]
    out = np.empty((n, 2))

    def work(a, b):
        for t in range(a, b):
            try:
                out[t, :] = grid.solve(z[t])
            except Exception as exc:
                exc.args = (f"trial {t}: {exc}",)
                raise

    if n_threads <= 1 or n < 64:
        work(0, n)
        return out
    block = -(-n // n_threads)
    spans = [(a, min(a + block, n)) for a in range(0, n, block)]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        futures = [pool.submit(work, a, b) for a, b in spans]
        for f in futures:
            f.result()
    return out


def _estimate_batch(cfg: ExperimentConfig, px, py, z):
    """Vector of estimates for all trials; returns (ex, ey, n_underflow)."""
    model = cfg.model
    underflow = 0
    if cfg.is_1d:
        lo = np.array([s.lo for s in cfg.map.segments])
        hi = np.array([s.hi for s in cfg.map.segments])
        if cfg.estimator == "ML":
            ph = z
        elif cfg.estimator == "MAP":
            ph = _kernels.map_1d_batch(lo, hi, z)
        else:
            ph = _kernels.mmse_1d_batch(lo, hi, z, model.sigma_x)
            bad = np.isnan(ph)
            if bad.any():
                underflow = int(bad.sum())
                ph = np.where(bad, _kernels.map_1d_batch(lo, hi, z), ph)
        return ph - px, None, underflow

    if isinstance(model, GaussianObsModel):
        xlo = np.array([r.x_lo for r in cfg.map.rects])
        xhi = np.array([r.x_hi for r in cfg.map.rects])
        ylo = np.array([r.y_lo for r in cfg.map.rects])
        yhi = np.array([r.y_hi for r in cfg.map.rects])
        zx, zy = z
        if cfg.estimator == "ML":
            phx, phy = zx, zy
        elif cfg.estimator == "MAP":
            phx, phy = _kernels.map_2d_gaussian_batch(
                xlo, xhi, ylo, yhi, zx, zy, model.sigma_x, model.sigma_y
            )
        else:
            phx, phy = _kernels.mmse_2d_batch(
                xlo, xhi, ylo, yhi, zx, zy, model.sigma_x, model.sigma_y
            )
            bad = np.isnan(phx)
            if bad.any():
                underflow = int(bad.sum())
                fx, fy = _kernels.map_2d_gaussian_batch(
                    xlo, xhi, ylo, yhi, zx, zy, model.sigma_x, model.sigma_y
                )
                phx = np.where(bad, fx, phx)
                phy = np.where(bad, fy, phy)
        return phx - px, phy - py, underflow

    # ranging: grid search per trial, the one genuinely hot loop
    step = model.sigma / 10.0 if cfg.grid_step is None else cfg.grid_step
    if cfg.estimator == "MAP":
        grid = _RangingGrid(model.anchors, step, cfg.map.bounding_box(), cfg.map)
    else:
        pad = 3.0 * model.sigma
        box = cfg.map.bounding_box()
        grid = _RangingGrid(
            model.anchors,
            step,
            Rect(box.x_lo - pad, box.y_lo - pad, box.x_hi + pad, box.y_hi + pad),
            None,
        )
    est = _solve_ranging_batch(grid, z, _thread_count())
    return est[:, 0] - px, est[:, 1] - py, underflow


def _draw_trials(cfg: ExperimentConfig, row: int = 0):
    """All positions and observations for one experiment, in one shot."""
    model = cfg.model
    n_noise = (
        len(model.anchors) if isinstance(model, RangingObsModel) else 2
    )
    bits = np.random.Philox(np.random.SeedSequence([cfg.master_seed, row]))
    u = np.random.Generator(bits).random((cfg.n_runs, _COL_NOISE + n_noise))
    tables = _component_tables(cfg.map)
    px, py = _positions_from_uniforms(tables, u[:, : _COL_NOISE])
    if cfg.is_1d:
        z = px + model.sigma_x * _normals(u[:, _COL_NOISE])
        return px, None, z
    if isinstance(model, GaussianObsModel):
        zx = px + model.sigma_x * _normals(u[:, _COL_NOISE])
        zy = py + model.sigma_y * _normals(u[:, _COL_NOISE + 1])
        return px, py, (zx, zy)
    ax, ay = model.anchor_arrays()
    d = np.hypot(px[:, None] - ax[None, :], py[:, None] - ay[None, :])
    z = d + model.sigma * _normals(u[:, _COL_NOISE:])
    return px, py, z


def run_experiment(cfg: ExperimentConfig, row: int = 0) -> ExperimentResult:
    """Run all trials and reduce to RMSE per axis with standard errors."""
    px, py, z = _draw_trials(cfg, row)
    ex, ey, underflow = _estimate_batch(cfg, px, py, z)
    e2x = ex * ex
    rmse_x, se_x = _rmse_and_stderr(e2x)
    if ey is None:
        return ExperimentResult(
            n_runs=cfg.n_runs,
            master_seed=cfg.master_seed,
            rmse_x=rmse_x,
            stderr_x=se_x,
            rmse_total=rmse_x,
            stderr_total=se_x,
            n_underflow=underflow,
        )
    e2y = ey * ey
    rmse_y, se_y = _rmse_and_stderr(e2y)
    rmse_t, se_t = _rmse_and_stderr(e2x + e2y)
    return ExperimentResult(
        n_runs=cfg.n_runs,
        master_seed=cfg.master_seed,
        rmse_x=rmse_x,
        stderr_x=se_x,
        rmse_y=rmse_y,
        stderr_y=se_y,
        rmse_total=rmse_t,
        stderr_total=se_t,
        n_underflow=underflow,
    )


def bounds_for(support, model, j_s: float = DEFAULT_JS):
    """Theoretical bounds for a support under a Gaussian reading model.

    Range models have a position-dependent information matrix that the
    constant-information bounds here do not cover, so they get no entries.
    """
    if not isinstance(model, GaussianObsModel):
        return {}
    if isinstance(support, SegmentUnion):
        prior = PriorFim(j_x=prior_fim_1d(support, j_s))
        cond = CondFim(j_zx=1.0 / model.sigma_x**2)
        return {
            "bcrb": bcrb(prior, cond).b_x,
            "ezzb": ezzb_1d(support, model.sigma_x),
            "wwb": wwb_1d(support, model.sigma_x),
        }
    prior = prior_fim_2d(support, j_s)
    cond = CondFim(j_zx=1.0 / model.sigma_x**2, j_zy=1.0 / model.sigma_y**2)
    return {
        "bcrb": bcrb(prior, cond),
        "ezzb": ezzb_2d(support, model.sigma_x, model.sigma_y),
        "wwb": wwb_2d(support, model.sigma_x, model.sigma_y),
    }


@dataclass(frozen=True)
class SweepRow:
    """One sweep point: the parameter value, per-estimator results, and the
    bound values recomputed for that point's support and model."""

    param: str
    value: float
    results: dict
    bounds: dict
    master_seed: int


def _with_sigma(model, sigma):
    if isinstance(model, GaussianObsModel):
        return GaussianObsModel.isotropic(sigma)
    return RangingObsModel(model.anchors, sigma)


def _row_config(cfg: ExperimentConfig, param: str, value: float) -> ExperimentConfig:
    if param == "sigma":
        return replace(cfg, model=_with_sigma(cfg.model, value))
    if param == "rho":
        # rho = w / sigma sweeps the noise scale against a fixed width
        if cfg.geometry is None or not hasattr(cfg.geometry, "w"):
            raise ValidationError(
                "a rho sweep needs a parametric geometry with a width"
            )
        return replace(cfg, model=_with_sigma(cfg.model, cfg.geometry.w / value))
    if cfg.geometry is None:
        raise ValidationError(f"a {param!r} sweep needs a parametric geometry")
    geom = cfg.geometry.with_param(param, value)
    return replace(cfg, geometry=geom, map=geom.build())


def sweep(cfg: ExperimentConfig, param: str, values, estimators=None):
    """One experiment per value, each on its own derived seed.

    Row seeds mix the master seed with the row index through a seed
    sequence, so rows are independent and the whole table is reproducible.
    Every estimator in `estimators` (default: the config's) runs on the same
    draws, since draws depend only on (seed, row).
    """
    if param not in SWEEP_PARAMS:
        raise UnknownParam(
            f"sweep parameter must be one of {SWEEP_PARAMS}, got {param!r}"
        )
    if estimators is None:
        estimators = (cfg.estimator,)
    rows = []
    for i, value in enumerate(values):
        row_cfg = _row_config(cfg, param, float(value))
        row_seed = int(
            np.random.SeedSequence([cfg.master_seed, i]).generate_state(
                1, np.uint64
            )[0]
        )
        row_cfg = replace(row_cfg, master_seed=row_seed)
        results = {}
        for est in estimators:
            results[est] = run_experiment(replace(row_cfg, estimator=est))
        rows.append(
            SweepRow(
                param=param,
                value=float(value),
                results=results,
                bounds=bounds_for(row_cfg.map, row_cfg.model),
                master_seed=row_seed,
            )
        )
    return rows
