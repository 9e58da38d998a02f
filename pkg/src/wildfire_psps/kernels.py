"""Kernel dispatch: compiled Cython kernels when available, pure Python otherwise.

Set ``WILDFIRE_PSPS_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names
the active implementation.
"""

import os

from . import _purepy

BACKEND = "python"

if not os.environ.get("WILDFIRE_PSPS_PURE_PYTHON"):
    try:
        from . import _speedups as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _purepy
else:
    _impl = _purepy

segment_cells = _impl.segment_cells
line_day_metrics = _impl.line_day_metrics
pixel_moments = _impl.pixel_moments

__all__ = ["BACKEND", "segment_cells", "line_day_metrics", "pixel_moments"]
