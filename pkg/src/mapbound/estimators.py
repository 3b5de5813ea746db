"""Position estimators under map-constrained priors.

Observation models: additive per-axis Gaussian position readings, and range
measurements to fixed anchors. Estimators: posterior mean (MMSE) in closed
form per segment or rectangle, posterior mode (MAP) by exact projection for
Gaussian readings and grid-plus-refine search for ranging, and the
unconstrained maximum-likelihood point.

Scalar entry points delegate to the batch kernels in `_kernels`, so single
calls and Monte Carlo sweeps share one numeric path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    AllMassUnderflow,
    EmptyGrid,
    NonFinite,
    NonpositiveSigma,
    ValidationError,
)
from .geometry import Rect, RectMap, SegmentUnion

_METHODS = ("MMSE", "MAP", "ML")


def _check_sigma(sigma, name="sigma"):
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise NonpositiveSigma(f"{name} must be positive and finite, got {sigma}")


def _check_finite(value, name):
    if not math.isfinite(value):
        raise NonFinite(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class GaussianObsModel:
    """Noisy position reading z = p + n, per-axis independent Gaussian n."""

    sigma_x: float
    sigma_y: float

    def __post_init__(self):
        _check_sigma(self.sigma_x, "sigma_x")
        _check_sigma(self.sigma_y, "sigma_y")

    @classmethod
    def isotropic(cls, sigma: float) -> "GaussianObsModel":
        return cls(sigma, sigma)


@dataclass(frozen=True)
class RangingObsModel:
    """Range readings z_i = ||p - a_i|| + n_i to fixed anchors a_i.

    Three anchors is the minimum for unambiguous 2-D use; typical setups
    place four at the corners of the deployment region.
    """

    anchors: tuple
    sigma: float

    def __post_init__(self):
        anchors = tuple((float(x), float(y)) for x, y in self.anchors)
        object.__setattr__(self, "anchors", anchors)
        if len(anchors) < 3:
            raise ValidationError(
                f"ranging needs at least 3 anchors, got {len(anchors)}"
            )
        for i, (x, y) in enumerate(anchors):
            if not (math.isfinite(x) and math.isfinite(y)):
                raise NonFinite(f"anchor {i} has non-finite coordinates ({x}, {y})")
        _check_sigma(self.sigma)

    def anchor_arrays(self):
        ax = np.array([a[0] for a in self.anchors])
        ay = np.array([a[1] for a in self.anchors])
        return ax, ay


@dataclass(frozen=True)
class Estimate:
    """A point estimate tagged with the rule that produced it."""

    p_hat: object
    method: str

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValidationError(
                f"method must be one of {_METHODS}, got {self.method!r}"
            )


def gen_gaussian_obs(p, model: GaussianObsModel, rng):
    """Draw one noisy position reading. Draw order is x then y."""
    x, y = float(p[0]), float(p[1])
    zx = x + model.sigma_x * rng.standard_normal()
    zy = y + model.sigma_y * rng.standard_normal()
    return (zx, zy)


def gen_ranging_obs(p, model: RangingObsModel, rng):
    """Draw one vector of noisy ranges, one entry per anchor, anchor order."""
    ax, ay = model.anchor_arrays()
    d = np.hypot(ax - float(p[0]), ay - float(p[1]))
    return d + model.sigma * rng.standard_normal(d.shape[0])


def _union_arrays(support: SegmentUnion):
    lo = np.array([s.lo for s in support.segments])
    hi = np.array([s.hi for s in support.segments])
    return lo, hi


def _map_arrays(rmap: RectMap):
    xlo = np.array([r.x_lo for r in rmap.rects])
    xhi = np.array([r.x_hi for r in rmap.rects])
    ylo = np.array([r.y_lo for r in rmap.rects])
    yhi = np.array([r.y_hi for r in rmap.rects])
    return xlo, xhi, ylo, yhi


def mmse_1d(support: SegmentUnion, z: float, sigma: float) -> float:
    """Posterior mean of position given a 1-D Gaussian reading.

    Per-segment mass and first moment are closed-form in the normal CDF; the
    estimate is the mass-weighted mean over segments. If every segment mass
    underflows (reading absurdly far from the support) the nearest support
    point is returned and AllMassUnderflow is issued.
    """
    _check_sigma(sigma)
    _check_finite(z, "z")
    lo, hi = _union_arrays(support)
    out = _kernels.mmse_1d_batch(lo, hi, [z], sigma)
    if math.isnan(out[0]):
        warnings.warn(
            "all segment masses underflowed; returning nearest support point",
            AllMassUnderflow,
            stacklevel=2,
        )
        return map_1d(support, z, sigma)
    return float(out[0])


def map_1d(support: SegmentUnion, z: float, sigma: float) -> float:
    """Posterior mode: the support point nearest to the reading.

    Interior readings are fixed points. Equidistant segments resolve to the
    lower-index one.
    """
    _check_sigma(sigma)
    _check_finite(z, "z")
    lo, hi = _union_arrays(support)
    return float(_kernels.map_1d_batch(lo, hi, [z])[0])


def _check_point(z):
    zx, zy = float(z[0]), float(z[1])
    _check_finite(zx, "z[0]")
    _check_finite(zy, "z[1]")
    return zx, zy


def _require_gaussian(model):
    if not isinstance(model, GaussianObsModel):
        raise ValidationError(
            f"expected a GaussianObsModel, got {type(model).__name__}"
        )


def _require_ranging(model):
    if not isinstance(model, RangingObsModel):
        raise ValidationError(
            f"expected a RangingObsModel, got {type(model).__name__}"
        )


def mmse_2d(rmap: RectMap, z, model: GaussianObsModel):
    """Posterior mean of position given a 2-D Gaussian reading.

    Within each rectangle the posterior factorizes per axis, so masses and
    moments are products of 1-D closed forms; rectangles couple only through
    their mass weights. Total-mass underflow falls back to the support
    projection, flagged with AllMassUnderflow.
    """
    _require_gaussian(model)
    zx, zy = _check_point(z)
    xlo, xhi, ylo, yhi = _map_arrays(rmap)
    xh, yh = _kernels.mmse_2d_batch(
        xlo, xhi, ylo, yhi, [zx], [zy], model.sigma_x, model.sigma_y
    )
    if math.isnan(xh[0]):
        warnings.warn(
            "all rectangle masses underflowed; returning nearest support point",
            AllMassUnderflow,
            stacklevel=2,
        )
        return map_2d_gaussian(rmap, z, model)
    return (float(xh[0]), float(yh[0]))


def map_2d_gaussian(rmap: RectMap, z, model: GaussianObsModel):
    """Posterior mode for Gaussian readings: noise-weighted support projection.

    Each rectangle contributes its axis-wise clamp of z; the clamp with the
    smallest sum of squared per-axis distances, each scaled by its noise
    spread, wins. Ties resolve to the lowest rectangle index.
    """
    _require_gaussian(model)
    zx, zy = _check_point(z)
    xlo, xhi, ylo, yhi = _map_arrays(rmap)
    px, py = _kernels.map_2d_gaussian_batch(
        xlo, xhi, ylo, yhi, [zx], [zy], model.sigma_x, model.sigma_y
    )
    return (float(px[0]), float(py[0]))


def _contains_mask(rmap: RectMap, x, y):
    mask = np.zeros(x.shape, dtype=bool)
    for r in rmap.rects:
        mask |= (x >= r.x_lo) & (x <= r.x_hi) & (y >= r.y_lo) & (y <= r.y_hi)
    return mask


class _RangingGrid:
    """Lattice solver for range-likelihood maximization.

    Precomputes the candidate lattice (cell centers of `step`-sized cells
    over `box`, optionally restricted to a map's support) and the true range
    from every candidate to every anchor. Building this table dominates the
    cost of a single solve, so batch callers construct one grid per
    experiment and reuse it across trials.

    solve() runs the coarse argmin and then one refinement pass at step/10
    over the 3x3 cell neighborhood of the winner. The winner itself is
    always among the refined candidates, so refinement never worsens the
    score and never leaves the support. Ties resolve to the first candidate
    in row-major scan order.
    """

    def __init__(self, anchors, step, box: Rect, rmap: RectMap | None = None):
        if not (math.isfinite(step) and step > 0.0):
            raise ValidationError(f"grid_step must be positive and finite, got {step}")
        nx = max(1, math.ceil(box.width / step))
        ny = max(1, math.ceil(box.height / step))
        xs = box.x_lo + (np.arange(nx) + 0.5) * step
        ys = box.y_lo + (np.arange(ny) + 0.5) * step
        gx, gy = np.meshgrid(xs, ys)
        px = gx.ravel()
        py = gy.ravel()
        if rmap is not None:
            keep = _contains_mask(rmap, px, py)
            px = px[keep]
            py = py[keep]
        if px.size == 0:
            raise EmptyGrid(
                f"no lattice point with step {step} falls inside the support; "
                "reduce grid_step"
            )
        self._ax = np.array([a[0] for a in anchors])
        self._ay = np.array([a[1] for a in anchors])
        self._px = px
        self._py = py
        self._dists = np.hypot(
            px[:, None] - self._ax[None, :], py[:, None] - self._ay[None, :]
        )
        self._step = float(step)
        self._rmap = rmap

    @property
    def n_points(self) -> int:
        return self._px.shape[0]

    def solve(self, z):
        z = np.asarray(z, dtype=np.float64)
        if z.shape[0] != self._ax.shape[0]:
            raise ValidationError(
                f"got {z.shape[0]} ranges for {self._ax.shape[0]} anchors"
            )
        scores = _kernels.ranging_scores(self._dists, z)
        best = int(np.argmin(scores))
        return self._refine(self._px[best], self._py[best], z)

    def _refine(self, x0, y0, z):
        offs = (np.arange(21) - 10.0) * (self._step / 10.0)
        gx, gy = np.meshgrid(x0 + offs, y0 + offs)
        px = gx.ravel()
        py = gy.ravel()
        if self._rmap is not None:
            keep = _contains_mask(self._rmap, px, py)
            px = px[keep]
            py = py[keep]
        d = np.hypot(px[:, None] - self._ax[None, :], py[:, None] - self._ay[None, :])
        scores = _kernels.ranging_scores(d, z)
        best = int(np.argmin(scores))
        return (float(px[best]), float(py[best]))


def map_2d_ranging(rmap: RectMap, z, model: RangingObsModel, grid_step=None):
    """Posterior mode for range readings by support-restricted grid search.

    No closed form exists, so the range likelihood is maximized over a
    cell-center lattice restricted to the support, then refined once at a
    tenth of the step around the winner. grid_step defaults to sigma/10.
    Raises EmptyGrid when no lattice point lands inside the support.
    """
    _require_ranging(model)
    step = model.sigma / 10.0 if grid_step is None else float(grid_step)
    grid = _RangingGrid(model.anchors, step, rmap.bounding_box(), rmap)
    return grid.solve(z)


def _anchor_box(model: RangingObsModel) -> Rect:
    ax, ay = model.anchor_arrays()
    return Rect(float(ax.min()), float(ay.min()), float(ax.max()), float(ay.max()))


def ml_estimate(z, model, grid_step=None, box: Rect | None = None):
    """Maximum-likelihood estimate, ignoring any support constraint.

    Gaussian readings: the reading itself (scalar in, scalar out; pair in,
    pair out). Range readings: grid-plus-refine argmax over `box` inflated
    by 3 sigma on every side; `box` defaults to the anchor bounding box,
    which in the standard corner-anchored deployments coincides with the
    region of interest.
    """
    if isinstance(model, GaussianObsModel):
        if np.isscalar(z):
            zf = float(z)
            _check_finite(zf, "z")
            return zf
        zx, zy = _check_point(z)
        return (zx, zy)
    _require_ranging(model)
    step = model.sigma / 10.0 if grid_step is None else float(grid_step)
    base = _anchor_box(model) if box is None else box
    pad = 3.0 * model.sigma
    search = Rect(base.x_lo - pad, base.y_lo - pad, base.x_hi + pad, base.y_hi + pad)
    grid = _RangingGrid(model.anchors, step, search, rmap=None)
    return grid.solve(z)
