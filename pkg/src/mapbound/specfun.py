"""Special functions shared by every bound formula.

zeta and zeta_ov are the detection-kernel integrals entering the Ziv-Zakai
style bound; omega and omega_ov are the piecewise-linear overlap lengths
entering the Weiss-Weinstein style bound. Both integral kernels are evaluated
with an adaptive Simpson rule rather than symbolic antiderivatives: the
erfc-polynomial antiderivative is error-prone while the integrand is smooth,
and the 1e-10 tolerance keeps quadrature error far below every downstream
tolerance. Values are memoized per (argument, config).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.special import erfc as _erfc

from .errors import (
    NegativeArgument,
    NegativeSnr,
    NonFinite,
    QuadratureNoConvergence,
    ValidationError,
)

# 2*sqrt(2): erfc argument scale of the binary-test error probability
_A = 2.0 * math.sqrt(2.0)
# beyond u/(2*sqrt(2)) = 27 the erfc factor is < 1e-300; exact to double precision
TAIL_CUTOFF = 27.0 * _A

# erfc(x) < 5e-393 for x > 30; clamp rather than trust subnormals
_ERFC_CLAMP = 30.0


@dataclass(frozen=True)
class QuadConfig:
    """Adaptive-quadrature termination contract."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_depth: int = 60

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValidationError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValidationError("max_depth must be at least 1")


DEFAULT_QUAD = QuadConfig()


def erfc_fn(x: float) -> float:
    """Complementary error function, clamped to {2, 0} beyond |x| = 30."""
    if not math.isfinite(x):
        raise NonFinite(f"erfc argument must be finite, got {x}")
    if x > _ERFC_CLAMP:
        return 0.0
    if x < -_ERFC_CLAMP:
        return 2.0
    return float(_erfc(x))


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    if not math.isfinite(fm):
        raise NonFinite(f"integrand not finite at {m}")
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_quad(f, a: float, b: float, cfg: QuadConfig | None = None) -> float:
    """Adaptive Simpson integration of f over [a, b].

    Subdivides until the Richardson error estimate meets abs_tol or rel_tol
    (relative to the running whole-interval estimate); raises
    QuadratureNoConvergence if max_depth is exhausted anywhere.
    """
    cfg = cfg or DEFAULT_QUAD
    if a > b:
        raise ValidationError(f"integration limits out of order: {a} > {b}")
    if a == b:
        return 0.0

    # fixed initial partition so narrow features cannot hide between the
    # coarse Simpson nodes (an integrand concentrated well inside [a, b] would
    # otherwise be accepted as zero)
    n0 = 16
    xs = [a + (b - a) * i / n0 for i in range(n0 + 1)]
    fs = [f(x) for x in xs]
    for x, v in zip(xs, fs):
        if not math.isfinite(v):
            raise NonFinite(f"integrand not finite at {x}")
    panels = []
    pilot = 0.0
    for (x0, f0), (x1, f1) in zip(zip(xs, fs), zip(xs[1:], fs[1:])):
        m, fm, s = _simpson(f, x0, f0, x1, f1)
        panels.append((x0, f0, m, fm, x1, f1, s))
        pilot += s
    # error budget: halved at every split so the leaf thresholds sum to tol0
    tol0 = max(cfg.abs_tol, cfg.rel_tol * abs(pilot))

    def recurse(a, fa, m, fm, b, fb, whole, tol, depth):
        lm, flm, left = _simpson(f, a, fa, m, fm)
        rm, frm, right = _simpson(f, m, fm, b, fb)
        err = (left + right - whole) / 15.0
        if abs(err) <= tol:
            return left + right + err
        if depth <= 0:
            raise QuadratureNoConvergence(
                f"max_depth={cfg.max_depth} exhausted on [{a}, {b}]"
            )
        half = 0.5 * tol
        return recurse(a, fa, lm, flm, m, fm, left, half, depth - 1) + recurse(
            m, fm, rm, frm, b, fb, right, half, depth - 1
        )

    return sum(recurse(*p, tol0 / n0, cfg.max_depth) for p in panels)


@lru_cache(maxsize=None)
def _zeta_cached(rho: float, cfg: QuadConfig) -> float:
    hi = min(rho, TAIL_CUTOFF)
    return adaptive_quad(lambda u: (rho - u) * u * erfc_fn(u / _A), 0.0, hi, cfg)


def zeta(rho: float, cfg: QuadConfig | None = None) -> float:
    """Kernel integral of (rho - u) * u * erfc(u / (2*sqrt(2))) over [0, rho].

    Monotone nondecreasing; zeta(0) = 0; behaves as rho^3/6 for small rho and
    as 2*rho - 4.25539... for large rho.
    """
    if not math.isfinite(rho):
        raise NonFinite(f"rho must be finite, got {rho}")
    if rho < 0:
        raise NegativeSnr(f"rho must be nonnegative, got {rho}")
    if rho == 0.0:
        return 0.0
    return _zeta_cached(float(rho), cfg or DEFAULT_QUAD)


@lru_cache(maxsize=None)
def _zeta_ov_cached(rho_gap: float, rho1: float, rho2: float, cfg: QuadConfig) -> float:
    # rho1 >= rho2 guaranteed by the caller
    tot = rho_gap + rho1 + rho2
    pieces = (
        (rho_gap, rho_gap + rho2, lambda u: (u - rho_gap) * u * erfc_fn(u / _A)),
        (rho_gap + rho2, rho_gap + rho1, lambda u: rho2 * u * erfc_fn(u / _A)),
        (rho_gap + rho1, tot, lambda u: (tot - u) * u * erfc_fn(u / _A)),
    )
    total = 0.0
    for lo, hi, f in pieces:
        hi = min(hi, TAIL_CUTOFF)
        if hi > lo:
            total += adaptive_quad(f, lo, hi, cfg)
    return total


def zeta_ov(rho_gap: float, rho1: float, rho2: float, cfg: QuadConfig | None = None) -> float:
    """Cross-kernel integral over [rho_gap, rho_gap + rho1 + rho2].

    Symmetric in (rho1, rho2) by construction: the pair is sorted before the
    three-piece integral, which assumes rho1 >= rho2.
    """
    for name, v in (("rho_gap", rho_gap), ("rho1", rho1), ("rho2", rho2)):
        if not math.isfinite(v):
            raise NonFinite(f"{name} must be finite, got {v}")
        if v < 0:
            raise NegativeArgument(f"{name} must be nonnegative, got {v}")
    rho1, rho2 = max(rho1, rho2), min(rho1, rho2)
    if rho2 == 0.0:
        return 0.0
    if rho_gap >= TAIL_CUTOFF:
        return 0.0
    return _zeta_ov_cached(float(rho_gap), float(rho1), float(rho2), cfg or DEFAULT_QUAD)


def omega(w: float, h: float) -> float:
    """Self-overlap length of a width-w segment with its h-shifted copy:
    (w - h) on 0 <= h <= w, else 0."""
    if w <= 0:
        raise ValidationError(f"segment width must be positive, got {w}")
    if 0.0 <= h <= w:
        return w - h
    return 0.0


def omega_ov(gap: float, w1: float, w2: float, h: float) -> float:
    """Cross-overlap length of two segments (widths w1, w2, separated by gap)
    under an h-shift: a trapezoid profile on [gap, gap + w1 + w2], 0 outside."""
    if gap < 0:
        raise NegativeArgument(f"gap must be nonnegative, got {gap}")
    if w1 <= 0 or w2 <= 0:
        raise ValidationError("segment widths must be positive")
    w1, w2 = max(w1, w2), min(w1, w2)
    wtot = gap + w1 + w2
    if h < gap or h > wtot:
        return 0.0
    if h <= gap + w2:
        return h - gap
    if h <= gap + w1:
        return w2
    return wtot - h
