"""Stencil kernel backend selection.

The compiled Cython core is preferred; the NumPy implementation is the
fallback and the reference.  Set SEL_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _numpy as _numpy_backend

if os.environ.get("SEL_PURE_PYTHON"):
    _impl = _numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _numpy_backend
        BACKEND = "numpy"

line_system = _impl.line_system


def available_backends() -> dict:
    """Name -> line_system callable for every importable backend."""
    out = {"numpy": _numpy_backend.line_system}
    try:
        from . import _core
        out["cython"] = _core.line_system
    except ImportError:
        pass
    return out
