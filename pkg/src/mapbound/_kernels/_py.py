"""Pure-numpy batch kernels (reference backend).

Each function processes a whole batch of observations against the fixed
geometry arrays of one support. Segment and rectangle bounds broadcast
against observations as (n_obs, n_parts). MMSE entries whose total posterior
mass underflows come back as NaN; the caller owns the fallback policy.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_MASS_FLOOR = 1e-300


def _phi_mass(alpha, beta):
    """Standard-normal mass on [alpha, beta], stable in both tails.

    When the whole interval sits in the upper tail the direct difference of
    CDFs cancels catastrophically, so it is reflected to the lower tail
    where ndtr keeps relative accuracy.
    """
    flip = alpha > 0.0
    lo = np.where(flip, -beta, alpha)
    hi = np.where(flip, -alpha, beta)
    return ndtr(hi) - ndtr(lo)


def mmse_1d_batch(lo, hi, z, sigma):
    """Posterior-mean positions for a batch of 1-D observations.

    lo/hi are the segment bounds of the support; the prior is uniform on
    their union and the likelihood is Gaussian with spread sigma.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    alpha = (lo[None, :] - z[:, None]) / sigma
    beta = (hi[None, :] - z[:, None]) / sigma
    c = _phi_mass(alpha, beta)
    mom = z[:, None] * c + sigma * _INV_SQRT_2PI * (
        np.exp(-0.5 * alpha * alpha) - np.exp(-0.5 * beta * beta)
    )
    mass = c.sum(axis=1)
    ok = mass > _MASS_FLOOR
    return np.where(ok, mom.sum(axis=1) / np.where(ok, mass, 1.0), np.nan)


def map_1d_batch(lo, hi, z):
    """Nearest support point per observation; ties go to the lower index."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    cand = np.clip(z[:, None], lo[None, :], hi[None, :])
    idx = np.abs(cand - z[:, None]).argmin(axis=1)
    return cand[np.arange(z.shape[0]), idx]


def mmse_2d_batch(xlo, xhi, ylo, yhi, zx, zy, sigma_x, sigma_y):
    """Posterior-mean positions over a rectangle union, per-axis Gaussian
    noise. Axis separability inside each rectangle gives closed-form masses
    and first moments; rectangles couple only through the mass weights."""
    xlo = np.asarray(xlo, dtype=np.float64)
    xhi = np.asarray(xhi, dtype=np.float64)
    ylo = np.asarray(ylo, dtype=np.float64)
    yhi = np.asarray(yhi, dtype=np.float64)
    zx = np.atleast_1d(np.asarray(zx, dtype=np.float64))
    zy = np.atleast_1d(np.asarray(zy, dtype=np.float64))
    ax = (xlo[None, :] - zx[:, None]) / sigma_x
    bx = (xhi[None, :] - zx[:, None]) / sigma_x
    ay = (ylo[None, :] - zy[:, None]) / sigma_y
    by = (yhi[None, :] - zy[:, None]) / sigma_y
    cx = _phi_mass(ax, bx)
    cy = _phi_mass(ay, by)
    mx = zx[:, None] * cx + sigma_x * _INV_SQRT_2PI * (
        np.exp(-0.5 * ax * ax) - np.exp(-0.5 * bx * bx)
    )
    my = zy[:, None] * cy + sigma_y * _INV_SQRT_2PI * (
        np.exp(-0.5 * ay * ay) - np.exp(-0.5 * by * by)
    )
    mass = (cx * cy).sum(axis=1)
    ok = mass > _MASS_FLOOR
    safe = np.where(ok, mass, 1.0)
    xhat = np.where(ok, (mx * cy).sum(axis=1) / safe, np.nan)
    yhat = np.where(ok, (cx * my).sum(axis=1) / safe, np.nan)
    return xhat, yhat


def map_2d_gaussian_batch(xlo, xhi, ylo, yhi, zx, zy, sigma_x, sigma_y):
    """Support projection under per-axis noise weighting.

    Each rectangle offers its axis-wise clamp of z; the candidate with the
    smallest noise-normalized squared distance wins, lower index on ties.
    """
    xlo = np.asarray(xlo, dtype=np.float64)
    xhi = np.asarray(xhi, dtype=np.float64)
    ylo = np.asarray(ylo, dtype=np.float64)
    yhi = np.asarray(yhi, dtype=np.float64)
    zx = np.atleast_1d(np.asarray(zx, dtype=np.float64))
    zy = np.atleast_1d(np.asarray(zy, dtype=np.float64))
    cx = np.clip(zx[:, None], xlo[None, :], xhi[None, :])
    cy = np.clip(zy[:, None], ylo[None, :], yhi[None, :])
    dx = (zx[:, None] - cx) / sigma_x
    dy = (zy[:, None] - cy) / sigma_y
    idx = (dx * dx + dy * dy).argmin(axis=1)
    rows = np.arange(zx.shape[0])
    return cx[rows, idx], cy[rows, idx]


def ranging_scores(dists, z):
    """Sum of squared range residuals per lattice point.

    dists has shape (n_points, n_anchors) and holds precomputed true ranges;
    z holds one observed range per anchor.
    """
    dists = np.asarray(dists, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    r = dists - z[None, :]
    return (r * r).sum(axis=1)
