"""Kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set TWOWAY_PURE_PYTHON=1 to force the fallback (useful for benchmarking the
two backends against each other; `twoway bench` does exactly that).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("TWOWAY_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
segment_pass = _impl.segment_pass


def available_backends() -> dict:
    """Map backend name -> segment_pass callable for every importable backend."""
    out = {"python": _kernels_py.segment_pass}
    try:
        from . import _kernels  # type: ignore[attr-defined]
        out["compiled"] = _kernels.segment_pass
    except ImportError:
        pass
    return out
