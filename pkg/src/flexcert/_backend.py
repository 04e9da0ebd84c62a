"""Selects the compiled kernels when importable, else the numpy fallback.

Set ``FLEXCERT_PURE=1`` to force the fallback (used by tests and the benchmark).
"""

import os

if os.environ.get("FLEXCERT_PURE", "") not in ("", "0"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
