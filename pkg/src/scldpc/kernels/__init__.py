"""Decoder kernel backend selection.

Prefers the compiled extension when it was built; falls back to the pure
numpy implementation otherwise.  Set SCLDPC_FORCE_NUMPY=1 to force the
fallback (used by the benchmark and the cross-backend tests).
"""

import os

from . import numpy_backend

if os.environ.get("SCLDPC_FORCE_NUMPY") == "1":
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _bp_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"

check_pass = _impl.check_pass
var_pass = _impl.var_pass
syndrome_ok = _impl.syndrome_ok

__all__ = ["BACKEND", "check_pass", "var_pass", "syndrome_ok", "numpy_backend"]
