"""Accuracy bounds and Monte Carlo RMSE benchmarks for map-aware positioning.

A position is drawn uniformly over a map (a union of segments in 1-D or of
axis-aligned rectangles in 2-D) and observed through Gaussian position or
range measurements. The package evaluates three families of theoretical
lower bounds on the mean squared estimation error, runs the matching
Bayesian and classical estimators under reproducible Monte Carlo sampling,
and ships a CSV-emitting command line (`mapbound`) for the standard sweeps.

Hot numeric kernels run in a compiled extension when available; set
MAPBOUND_BACKEND=python to force the pure NumPy fallback. BACKEND reports
which one is active.
"""

from ._kernels import BACKEND
from .bounds import (
    DEFAULT_JS,
    BoundPair,
    CondFim,
    PriorFim,
    WwbResult,
    WwbSearchConfig,
    bcrb,
    ezzb_1d,
    ezzb_2d,
    map1_bounds,
    map2_bounds,
    prior_fim_1d,
    prior_fim_2d,
    wwb_1d,
    wwb_2d,
)
from .errors import (
    AllMassUnderflow,
    NumericError,
    QuadratureNoConvergence,
    ValidationError,
)
from .estimators import (
    Estimate,
    GaussianObsModel,
    RangingObsModel,
    gen_gaussian_obs,
    gen_ranging_obs,
    map_1d,
    map_2d_gaussian,
    map_2d_ranging,
    ml_estimate,
    mmse_1d,
    mmse_2d,
)
from .geometry import (
    Rect,
    RectMap,
    Segment,
    SegmentUnion,
    build_map,
    build_segments,
    contains,
    load_map,
    parse_map,
    save_map,
)
from .montecarlo import (
    ESTIMATORS,
    SWEEP_PARAMS,
    ExperimentConfig,
    ExperimentResult,
    SweepRow,
    bounds_for,
    run_experiment,
    sample_uniform,
    sweep,
)
from .presets import (
    FixedAreaLShape,
    LShapeGeometry,
    TwoSegmentGeometry,
    corner_anchors,
    floor_bounding_box,
    floor_map,
    map1_support,
    map2_map,
)
from .specfun import omega, omega_ov, zeta, zeta_ov

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DEFAULT_JS",
    "ESTIMATORS",
    "SWEEP_PARAMS",
    "AllMassUnderflow",
    "BoundPair",
    "CondFim",
    "Estimate",
    "ExperimentConfig",
    "ExperimentResult",
    "FixedAreaLShape",
    "GaussianObsModel",
    "LShapeGeometry",
    "NumericError",
    "PriorFim",
    "QuadratureNoConvergence",
    "RangingObsModel",
    "Rect",
    "RectMap",
    "Segment",
    "SegmentUnion",
    "SweepRow",
    "TwoSegmentGeometry",
    "ValidationError",
    "WwbResult",
    "WwbSearchConfig",
    "bcrb",
    "bounds_for",
    "build_map",
    "build_segments",
    "contains",
    "corner_anchors",
    "ezzb_1d",
    "ezzb_2d",
    "floor_bounding_box",
    "floor_map",
    "gen_gaussian_obs",
    "gen_ranging_obs",
    "load_map",
    "map1_bounds",
    "map1_support",
    "map2_bounds",
    "map2_map",
    "map_1d",
    "map_2d_gaussian",
    "map_2d_ranging",
    "ml_estimate",
    "mmse_1d",
    "mmse_2d",
    "omega",
    "omega_ov",
    "parse_map",
    "prior_fim_1d",
    "prior_fim_2d",
    "run_experiment",
    "sample_uniform",
    "save_map",
    "sweep",
    "wwb_1d",
    "wwb_2d",
    "zeta",
    "zeta_ov",
]
