"""Kernel backend selection.

The compiled extension is used when importable; ``GNF_PURE_PYTHON=1`` forces
the reference implementation.  ``BACKEND`` names the active one.
"""

from __future__ import annotations

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("GNF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

divisor_minima_int = _impl.divisor_minima_int
divisor_minima_float = _impl.divisor_minima_float
log_eta_dp = _impl.log_eta_dp
log_sigma_dp = _impl.log_sigma_dp

# int64 headroom for the exact divisor scan
INT_SCAN_LIMIT = 2 ** 62
