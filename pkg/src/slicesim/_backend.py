"""Kernel backend selection: compiled extension if present, numpy otherwise.

Set SLICESIM_BACKEND=numpy to force the fallback (used by the benchmark and
the backend equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SLICESIM_BACKEND", "").lower() in ("numpy", "py", "python"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND_NAME
digest_vector = _impl.digest_vector
exec_draws = _impl.exec_draws
device_draws = _impl.device_draws
xor_fold = _impl.xor_fold
