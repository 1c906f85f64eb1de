"""Hot-path kernels with a compiled core and a pure-Python fallback.

The compiled module (Cython) is selected at import when available; set
SEALPRINT_PURE_PYTHON=1 to force the fallback.  Both implementations share
one contract and produce bit-identical floats (the extension is compiled
with fused multiply-add disabled).
"""

import os

if os.environ.get("SEALPRINT_PURE_PYTHON"):
    from sealprint.kernels.pure import resample_polyline, scan_line

    BACKEND = "python"
else:
    try:
        from sealprint.kernels._native import resample_polyline, scan_line

        BACKEND = "native"
    except ImportError:
        from sealprint.kernels.pure import resample_polyline, scan_line

        BACKEND = "python"

__all__ = ["BACKEND", "resample_polyline", "scan_line"]
