"""Stepper kernel backend, chosen once at import.

The compiled extension is preferred; the numpy fallback is selected when the
extension is missing or when FRONTSPEED_BACKEND=python is set.  Both expose
identical functions and identical keyed-draw semantics.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("FRONTSPEED_BACKEND", "").lower() in ("python", "numpy"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

particle_step = _impl.particle_step
column_argmax_step = _impl.column_argmax_step
uniform_fill = _impl.uniform_fill
raw_u64 = _impl.raw_u64


def implementations():
    """All available kernel implementations, keyed by backend name."""
    impls = {"python": _kernels_py}
    try:
        from . import _kernels

        impls["cython"] = _kernels
    except ImportError:
        pass
    return impls
