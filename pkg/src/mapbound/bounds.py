"""Accuracy lower bounds for position estimation over bounded supports.

Three bound families are computed per axis: the Bayesian Cramer-Rao bound
(BCRB) from prior plus observation Fisher information, the extended
Ziv-Zakai bound (EZZB) built from the zeta kernels, and the Weiss-Weinstein
bound (WWB) as a sup over test displacements h. The 1-D engines work on
SegmentUnion supports; the 2-D engines decompose a RectMap into strips of
constant cross-section, which turns every integral over the support into a
finite sum, so nothing here is approximated beyond scalar quadrature.

map1_bounds and map2_bounds are independent closed forms for two reference
layouts (two collinear segments; an L-shaped pair of rectangles). They share
only the scalar kernels with the strip engines, so agreement between the two
paths is a meaningful end-to-end check and is enforced by the test suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import (
    DegenerateDenominator,
    EmptyMap,
    NonpositiveJs,
    NonpositiveSigma,
    NonpositiveWidth,
    ValidationError,
)
from .geometry import RectMap, SegmentUnion, area, strips_h, strips_v
from .specfun import (
    QuadConfig,
    TAIL_CUTOFF,
    adaptive_quad,
    erfc_fn,
    omega,
    omega_ov,
    zeta,
    zeta_ov,
)

__all__ = [
    "DEFAULT_JS",
    "PriorFim",
    "CondFim",
    "BoundPair",
    "WwbResult",
    "WwbSearchConfig",
    "prior_fim_1d",
    "prior_fim_2d",
    "bcrb",
    "ezzb_1d",
    "ezzb_1d_bruteforce",
    "ezzb_2d",
    "lambda_gamma_1d",
    "wwb_1d",
    "wwb_2d",
    "map1_bounds",
    "map2_bounds",
]

# Default strength of the prior edge-smoothing information. Matches the
# variance of a uniform density: with no observations the 1-D bound on a
# single segment collapses to L^2/12.
DEFAULT_JS = 12.0

_SQRT8 = 2.0 * math.sqrt(2.0)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _check_sigma(sigma: float) -> None:
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise NonpositiveSigma(f"sigma must be positive and finite, got {sigma}")


def _check_js(j_s: float) -> None:
    if not (math.isfinite(j_s) and j_s > 0.0):
        raise NonpositiveJs(f"j_s must be positive and finite, got {j_s}")


def _check_support(support: SegmentUnion) -> None:
    if support.is_empty:
        raise EmptyMap("support has no segments")


@dataclass(frozen=True)
class PriorFim:
    """Per-axis prior Fisher information in m^-2; j_y is None for 1-D."""

    j_x: float
    j_y: float | None = None

    def __post_init__(self):
        for name, v in (("j_x", self.j_x), ("j_y", self.j_y)):
            if v is not None and not (math.isfinite(v) and v > 0.0):
                raise ValidationError(f"{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class CondFim:
    """Per-axis observation Fisher information in m^-2.

    Zero is allowed and means "no observation on this axis"; the BCRB then
    reduces to the inverse prior information. Under the Gaussian positional
    observation model the entries are simply sigma_x^-2 and sigma_y^-2.
    """

    j_zx: float
    j_zy: float | None = None

    def __post_init__(self):
        for name, v in (("j_zx", self.j_zx), ("j_zy", self.j_zy)):
            if v is not None and not (math.isfinite(v) and v >= 0.0):
                raise ValidationError(f"{name} must be nonnegative and finite, got {v}")


@dataclass(frozen=True)
class BoundPair:
    """Per-axis bound values in m^2. family is one of BCRB, EZZB, WWB."""

    b_x: float
    b_y: float | None = None
    family: str = ""
    diagnostics: dict | None = None

    def __post_init__(self):
        for name, v in (("b_x", self.b_x), ("b_y", self.b_y)):
            if v is not None and not (math.isfinite(v) and v >= 0.0):
                raise ValidationError(f"{name} must be nonnegative and finite, got {v}")


@dataclass(frozen=True)
class WwbResult:
    """Weiss-Weinstein value together with the maximizing displacement.

    degenerate is True when no candidate displacement produced a valid
    denominator; value is then the trivial 0.0 and h_opt is NaN.
    """

    value: float
    h_opt: float
    degenerate: bool = False

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class WwbSearchConfig:
    """Controls the sup-over-h search.

    Displacements below h_min_factor * sigma are excluded: numerator and
    denominator both vanish as h -> 0 and the BCRB covers that regime.
    coarse_points sets the geometric probing grid on
    [h_min_factor * sigma, span + 5 sigma]; refine_iters bounds the
    golden-section polish around each local peak of the candidate profile.
    """

    h_min_factor: float = 1e-4
    coarse_points: int = 400
    refine_iters: int = 60

    def __post_init__(self):
        if not (math.isfinite(self.h_min_factor) and self.h_min_factor > 0.0):
            raise ValidationError(
                f"h_min_factor must be positive, got {self.h_min_factor}"
            )
        if self.coarse_points < 1:
            raise ValidationError(
                f"coarse_points must be positive, got {self.coarse_points}"
            )
        if self.refine_iters < 1:
            raise ValidationError(
                f"refine_iters must be positive, got {self.refine_iters}"
            )


# ---------------------------------------------------------------------------
# Fisher information and BCRB


def prior_fim_1d(support: SegmentUnion, j_s: float = DEFAULT_JS) -> float:
    """Prior information of the uniform density on a segment union.

    Each segment of width w contributes j_s/w to the average, so the result
    is (1/W) * sum_n j_s/w_n with W the total width. Gaps between segments
    carry no probability mass and do not enter.
    """
    _check_support(support)
    _check_js(j_s)
    acc = 0.0
    for w in support.widths():
        acc += j_s / w
    return acc / support.total_width


def prior_fim_2d(rmap: RectMap, j_s: float = DEFAULT_JS) -> PriorFim:
    """Exact prior information pair for a rectangular-cover map.

    Strips of constant cross-section turn the defining integrals into finite
    sums: each strip contributes band_height * sum_n 1/w_n to the x entry
    (and the transposed quantity to the y entry).
    """
    _check_js(j_s)
    a = area(rmap)

    def one_axis(strips) -> float:
        acc = 0.0
        for st in strips:
            inner = 0.0
            for w in st.slice.widths():
                inner += 1.0 / w
            acc += st.band.width * inner
        return j_s / a * acc

    return PriorFim(one_axis(strips_h(rmap)), one_axis(strips_v(rmap)))


def bcrb(prior: PriorFim, cond: CondFim) -> BoundPair:
    """Bayesian Cramer-Rao bound: per axis 1 / (j_z + j_prior).

    Always strictly below the support-unaware 1/j_z whenever the prior
    carries information, which it does for every bounded support.
    """
    if (prior.j_y is None) != (cond.j_zy is None):
        raise ValidationError(
            "prior and conditional information disagree on dimensionality"
        )
    b_x = 1.0 / (cond.j_zx + prior.j_x)
    b_y = None if prior.j_y is None else 1.0 / (cond.j_zy + prior.j_y)
    return BoundPair(b_x, b_y, "BCRB")


# ---------------------------------------------------------------------------
# Extended Ziv-Zakai


def _ezzb_union_sum(support: SegmentUnion, sigma: float, quad_cfg) -> float:
    # One zeta term per segment, one zeta_ov term per gap between
    # neighbouring segments; non-neighbour pairs are dropped (their
    # contribution is positive, so dropping them only lowers the bound).
    widths = support.widths()
    gaps = support.gaps()
    acc = 0.0
    for w in widths:
        acc += zeta(w / sigma, quad_cfg)
    for g, wl, wr in zip(gaps, widths, widths[1:]):
        acc += zeta_ov(g / sigma, wl / sigma, wr / sigma, quad_cfg)
    return acc


def ezzb_1d(
    support: SegmentUnion, sigma: float, quad_cfg: QuadConfig | None = None
) -> float:
    """Extended Ziv-Zakai bound on a segment union under additive Gaussian
    position noise of spread sigma. Single segment: (sigma^3 / 2L) zeta(L/sigma)."""
    _check_support(support)
    _check_sigma(sigma)
    return (
        sigma**3 / (2.0 * support.total_width) * _ezzb_union_sum(support, sigma, quad_cfg)
    )


def ezzb_1d_bruteforce(
    support: SegmentUnion, sigma: float, quad_cfg: QuadConfig | None = None
) -> float:
    """Reference EZZB evaluation that keeps every pair contribution.

    Integrates h * erfc(h / (2 sqrt(2) sigma)) against the overlap length of
    the support with its h-shifted copy, split at the displacements where
    the overlap profile changes slope. Never below ezzb_1d, which discards
    the cross terms of non-neighbouring segments; equal when there are at
    most two segments. Meant as a test oracle, not a fast path.
    """
    _check_support(support)
    _check_sigma(sigma)
    if quad_cfg is None:
        # tighter than the display default: this value backs equality checks
        quad_cfg = QuadConfig(abs_tol=1e-13, rel_tol=1e-10)
    segs = support.segments
    h_max = min(support.span, TAIL_CUTOFF * sigma)
    knots = {0.0, h_max}
    for a in segs:
        for b in segs:
            for d in (b.lo - a.hi, b.lo - a.lo, b.hi - a.lo, b.hi - a.hi):
                if 0.0 < d < h_max:
                    knots.add(d)
    scale = _SQRT8 * sigma

    def integrand(h: float) -> float:
        ov = 0.0
        for a in segs:
            for b in segs:
                lo = a.lo if a.lo > b.lo - h else b.lo - h
                hi = a.hi if a.hi < b.hi - h else b.hi - h
                if hi > lo:
                    ov += hi - lo
        return h * erfc_fn(h / scale) * ov

    xs = sorted(knots)
    total = 0.0
    for lo, hi in zip(xs, xs[1:]):
        total += adaptive_quad(integrand, lo, hi, quad_cfg)
    return total / (2.0 * support.total_width)


def _ezzb_strip_sum(strips, sigma: float, quad_cfg) -> float:
    acc = 0.0
    for st in strips:
        acc += st.band.width * _ezzb_union_sum(st.slice, sigma, quad_cfg)
    return acc


def ezzb_2d(
    rmap: RectMap,
    sigma_x: float,
    sigma_y: float,
    quad_cfg: QuadConfig | None = None,
) -> BoundPair:
    """Per-axis EZZB for a rectangular-cover map via exact strip sums."""
    _check_sigma(sigma_x)
    _check_sigma(sigma_y)
    a2 = 2.0 * area(rmap)
    z_x = sigma_x**3 / a2 * _ezzb_strip_sum(strips_h(rmap), sigma_x, quad_cfg)
    z_y = sigma_y**3 / a2 * _ezzb_strip_sum(strips_v(rmap), sigma_y, quad_cfg)
    return BoundPair(z_x, z_y, "EZZB")


# ---------------------------------------------------------------------------
# Weiss-Weinstein


def lambda_gamma_1d(support: SegmentUnion, h: float) -> tuple[float, float]:
    """Overlap sums entering the WWB at displacement h.

    lambda keeps the self-overlap of every segment plus the cross-overlap of
    neighbouring pairs; gamma is twice the self-overlap at half widths. Both
    equal the total width at h = 0, gamma never exceeds lambda, and both
    vanish once h clears the support.
    """
    widths = support.widths()
    gaps = support.gaps()
    lam = 0.0
    for w in widths:
        lam += omega(w, h)
    for g, wl, wr in zip(gaps, widths, widths[1:]):
        lam += omega_ov(g, wl, wr, h)
    gam = 0.0
    for w in widths:
        gam += omega(0.5 * w, h)
    return lam, 2.0 * gam


def _wwb_value(h: float, lam: float, gam: float, norm: float, sigma: float):
    """WWB objective at displacement h, or None where it is undefined.

    norm is 2*W (total width) in 1-D and 2*A (area) in 2-D.
    """
    if lam <= 0.0:
        return None
    s2 = sigma * sigma
    denom = norm * (lam - math.exp(-h * h / (2.0 * s2)) * gam)
    if denom <= 0.0 or not math.isfinite(denom):
        return None
    return h * h * math.exp(-h * h / (4.0 * s2)) * lam * lam / denom


def _breakpoints(support: SegmentUnion) -> list[float]:
    # where the piecewise-linear lambda/gamma change slope
    widths = support.widths()
    gaps = support.gaps()
    pts = []
    for w in widths:
        pts.append(w)
        pts.append(0.5 * w)
    for g, wl, wr in zip(gaps, widths, widths[1:]):
        lo, hi = (wl, wr) if wl <= wr else (wr, wl)
        pts.extend((g, g + lo, g + hi, g + wl + wr))
    return pts


def _wwb_candidates(
    pts, sigma: float, span: float, cfg: WwbSearchConfig
) -> list[float]:
    h_lo = cfg.h_min_factor * sigma
    h_hi = span + 5.0 * sigma
    cands = {p for p in pts if h_lo <= p <= h_hi}
    n = cfg.coarse_points
    if n < 2:
        cands.add(h_lo)
    else:
        ratio = h_hi / h_lo
        cands.update(h_lo * ratio ** (k / (n - 1.0)) for k in range(n))
    return sorted(cands)


def _golden_max(f, a: float, b: float, iters: int):
    """Golden-section polish of a max inside [a, b]; returns (h, value)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = f(c)
    fd = f(d)
    if fc >= fd:
        best_h, best_v = c, fc
    else:
        best_h, best_v = d, fd
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
            if fc > best_v:
                best_h, best_v = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
            if fd > best_v:
                best_h, best_v = d, fd
    return best_h, best_v


def _wwb_search(objective, candidates, cfg: WwbSearchConfig):
    """Evaluate all candidates, then polish every local peak.

    Returns (value, h_opt, degenerate). The returned value is the max over
    every displacement evaluated, so it can only improve on the raw grid.
    """
    neg = float("-inf")

    def f(h: float) -> float:
        v = objective(h)
        return neg if v is None else v

    vals = [f(h) for h in candidates]
    n = len(vals)
    best_i = max(range(n), key=vals.__getitem__)
    if vals[best_i] == neg:
        warnings.warn(
            "no test displacement produced a usable denominator; "
            "reporting the trivial bound 0.0",
            DegenerateDenominator,
        )
        return 0.0, float("nan"), True
    best_h, best_v = candidates[best_i], vals[best_i]
    peaks = []
    for i in range(n):
        left = vals[i - 1] if i > 0 else neg
        right = vals[i + 1] if i + 1 < n else neg
        if vals[i] > neg and vals[i] >= left and vals[i] >= right:
            peaks.append(i)
    peaks.sort(key=vals.__getitem__, reverse=True)
    # polishing only the single best peak can lose a twin peak that the
    # coarse grid underestimates, so polish the leading few
    for i in peaks[:16]:
        a = candidates[i - 1] if i > 0 else candidates[i]
        b = candidates[i + 1] if i + 1 < n else candidates[i]
        if b <= a:
            continue
        h, v = _golden_max(f, a, b, cfg.refine_iters)
        if v > best_v:
            best_h, best_v = h, v
    return best_v, best_h, False


def wwb_1d(
    support: SegmentUnion, sigma: float, cfg: WwbSearchConfig | None = None
) -> WwbResult:
    """Weiss-Weinstein bound on a segment union.

    sup over h of h^2 exp(-h^2/4s^2) lambda^2 / (2W [lambda - exp(-h^2/2s^2) gamma]).
    The profile is piecewise smooth with breakpoints inherited from lambda
    and gamma, so candidates are those breakpoints plus a geometric grid,
    and every local peak of the candidate profile gets a golden-section
    polish. The maximizing displacement is reported alongside the value.
    """
    _check_support(support)
    _check_sigma(sigma)
    if cfg is None:
        cfg = WwbSearchConfig()
    norm = 2.0 * support.total_width

    def objective(h: float):
        lam, gam = lambda_gamma_1d(support, h)
        return _wwb_value(h, lam, gam, norm, sigma)

    cands = _wwb_candidates(_breakpoints(support), sigma, support.span, cfg)
    value, h_opt, degenerate = _wwb_search(objective, cands, cfg)
    return WwbResult(value, h_opt, degenerate)


def wwb_2d(
    rmap: RectMap,
    sigma_x: float,
    sigma_y: float,
    cfg: WwbSearchConfig | None = None,
) -> BoundPair:
    """Per-axis WWB for a rectangular-cover map.

    lambda and gamma are strip sums of their 1-D counterparts weighted by
    band height, normalized by twice the map area; the sup search matches
    wwb_1d. Diagnostics carry the maximizing displacement of each axis.
    """
    _check_sigma(sigma_x)
    _check_sigma(sigma_y)
    if cfg is None:
        cfg = WwbSearchConfig()
    norm = 2.0 * area(rmap)
    box = rmap.bounding_box()

    def one_axis(strips, sigma: float, span: float):
        def objective(h: float):
            lam = 0.0
            gam = 0.0
            for st in strips:
                l1, g1 = lambda_gamma_1d(st.slice, h)
                lam += st.band.width * l1
                gam += st.band.width * g1
            return _wwb_value(h, lam, gam, norm, sigma)

        pts = []
        for st in strips:
            pts.extend(_breakpoints(st.slice))
        return _wwb_search(objective, _wwb_candidates(pts, sigma, span, cfg), cfg)

    w_x, h_x, dg_x = one_axis(strips_h(rmap), sigma_x, box.width)
    w_y, h_y, dg_y = one_axis(strips_v(rmap), sigma_y, box.height)
    diag = {
        "h_opt_x": h_x,
        "h_opt_y": h_y,
        "coarse_points": cfg.coarse_points,
        "degenerate_x": dg_x,
        "degenerate_y": dg_y,
    }
    return BoundPair(w_x, w_y, "WWB", diag)


# ---------------------------------------------------------------------------
# Closed-form presets


def map1_bounds(
    w: float,
    dx: float,
    sigma: float,
    j_s: float = DEFAULT_JS,
    *,
    cfg: WwbSearchConfig | None = None,
    quad_cfg: QuadConfig | None = None,
) -> dict:
    """Closed forms for the two-segment line layout: widths w, gap dx.

    Returns {"bcrb": float, "ezzb": float, "wwb": WwbResult}. Written
    without the generic strip engines (only the scalar kernels and the sup
    search are shared), so the two paths check each other.
    """
    if not (math.isfinite(w) and w > 0.0):
        raise NonpositiveWidth(f"segment width must be positive, got {w}")
    if not (math.isfinite(dx) and dx >= 0.0):
        raise ValidationError(f"segment gap must be nonnegative, got {dx}")
    _check_sigma(sigma)
    _check_js(j_s)
    if cfg is None:
        cfg = WwbSearchConfig()
    rho = w / sigma
    b = sigma * sigma * rho * rho / (rho * rho + j_s)
    z = (
        sigma
        * sigma
        / (4.0 * rho)
        * (2.0 * zeta(rho, quad_cfg) + zeta_ov(dx / sigma, rho, rho, quad_cfg))
    )
    norm = 4.0 * w

    def objective(h: float):
        lam = 2.0 * omega(w, h) + omega_ov(dx, w, w, h)
        gam = 4.0 * omega(0.5 * w, h)
        return _wwb_value(h, lam, gam, norm, sigma)

    pts = [w, 0.5 * w, w, 0.5 * w, dx, dx + w, dx + w, dx + 2.0 * w]
    span = 2.0 * w + dx
    value, h_opt, degenerate = _wwb_search(
        objective, _wwb_candidates(pts, sigma, span, cfg), cfg
    )
    return {"bcrb": b, "ezzb": z, "wwb": WwbResult(value, h_opt, degenerate)}


def map2_bounds(
    w1: float,
    w2: float,
    h1: float,
    h2: float,
    sigma: float,
    j_s: float = DEFAULT_JS,
    *,
    cfg: WwbSearchConfig | None = None,
    quad_cfg: QuadConfig | None = None,
) -> dict:
    """Closed forms for the two-rectangle corner layout.

    The layout is a (w1+w2) x h1 base with a w1 x h2 block sitting on the
    left part of its top edge, so horizontal cross-sections have width
    w1+w2 below the step and w1 above it, and vertical cross-sections have
    height h1+h2 left of the step and h1 right of it. Returns BoundPair
    values keyed "bcrb", "ezzb", "wwb"; computed without the strip engines.
    """
    for name, v in (("w1", w1), ("w2", w2), ("h1", h1), ("h2", h2)):
        if not (math.isfinite(v) and v > 0.0):
            raise NonpositiveWidth(f"{name} must be positive, got {v}")
    _check_sigma(sigma)
    _check_js(j_s)
    if cfg is None:
        cfg = WwbSearchConfig()
    a_r = (w1 + w2) * h1 + w1 * h2
    j_z = 1.0 / (sigma * sigma)
    j_x = j_s / a_r * (h1 / (w1 + w2) + h2 / w1)
    j_y = j_s / a_r * (w1 / (h1 + h2) + w2 / h1)
    b_pair = BoundPair(1.0 / (j_z + j_x), 1.0 / (j_z + j_y), "BCRB")
    z_x = (
        sigma**3
        / (2.0 * a_r)
        * (h1 * zeta((w1 + w2) / sigma, quad_cfg) + h2 * zeta(w1 / sigma, quad_cfg))
    )
    z_y = (
        sigma**3
        / (2.0 * a_r)
        * (w1 * zeta((h1 + h2) / sigma, quad_cfg) + w2 * zeta(h1 / sigma, quad_cfg))
    )
    z_pair = BoundPair(z_x, z_y, "EZZB")
    norm = 2.0 * a_r

    def obj_x(h: float):
        lam = h1 * omega(w1 + w2, h) + h2 * omega(w1, h)
        gam = h1 * (2.0 * omega(0.5 * (w1 + w2), h)) + h2 * (2.0 * omega(0.5 * w1, h))
        return _wwb_value(h, lam, gam, norm, sigma)

    def obj_y(h: float):
        lam = w1 * omega(h1 + h2, h) + w2 * omega(h1, h)
        gam = w1 * (2.0 * omega(0.5 * (h1 + h2), h)) + w2 * (2.0 * omega(0.5 * h1, h))
        return _wwb_value(h, lam, gam, norm, sigma)

    pts_x = [w1 + w2, 0.5 * (w1 + w2), w1, 0.5 * w1]
    w_x, h_x, dg_x = _wwb_search(
        obj_x, _wwb_candidates(pts_x, sigma, w1 + w2, cfg), cfg
    )
    pts_y = [h1 + h2, 0.5 * (h1 + h2), h1, 0.5 * h1]
    w_y, h_y, dg_y = _wwb_search(
        obj_y, _wwb_candidates(pts_y, sigma, h1 + h2, cfg), cfg
    )
    w_pair = BoundPair(
        w_x,
        w_y,
        "WWB",
        {
            "h_opt_x": h_x,
            "h_opt_y": h_y,
            "coarse_points": cfg.coarse_points,
            "degenerate_x": dg_x,
            "degenerate_y": dg_y,
        },
    )
    return {"bcrb": b_pair, "ezzb": z_pair, "wwb": w_pair}
