"""Pick the compiled kernels when available, else the numpy fallback.

Set ``WMH2_PURE_PYTHON=1`` to force the fallback.
"""
import os

BACKEND = "python"
if os.environ.get("WMH2_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels

null_frame_gather = kernels.null_frame_gather
mixed_norm = kernels.mixed_norm
wave_products = kernels.wave_products

__all__ = ["BACKEND", "kernels", "null_frame_gather", "mixed_norm", "wave_products"]
