"""Batch numeric kernels with a selectable backend.

The compiled extension (`_native`) and the pure-numpy fallback (`_py`)
implement the same functions with the same contracts. The backend is chosen
once at import time from the MAPBOUND_BACKEND environment variable:

  auto    use the compiled extension when built, else fall back (default)
  native  require the compiled extension, fail loudly if missing
  python  force the numpy fallback

Both backends agree to floating-point noise (their libm calls may differ in
the last ulp), not bit-for-bit; pin the backend when exact reproducibility
across machines matters.
"""

import os as _os
import warnings as _warnings

_choice = _os.environ.get("MAPBOUND_BACKEND", "auto").strip().lower()
if _choice not in {"auto", "native", "python"}:
    _warnings.warn(
        "unrecognized MAPBOUND_BACKEND value %r; using 'auto'" % _choice,
        stacklevel=2,
    )
    _choice = "auto"

if _choice == "python":
    from . import _py as _impl

    BACKEND = "python"
elif _choice == "native":
    from . import _native as _impl  # type: ignore[attr-defined]

    BACKEND = "native"
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]

        BACKEND = "native"
    except ImportError:
        from . import _py as _impl

        BACKEND = "python"

mmse_1d_batch = _impl.mmse_1d_batch
map_1d_batch = _impl.map_1d_batch
mmse_2d_batch = _impl.mmse_2d_batch
map_2d_gaussian_batch = _impl.map_2d_gaussian_batch
ranging_scores = _impl.ranging_scores

__all__ = [
    "BACKEND",
    "map_1d_batch",
    "map_2d_gaussian_batch",
    "mmse_1d_batch",
    "mmse_2d_batch",
    "ranging_scores",
]
