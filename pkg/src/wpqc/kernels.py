"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``WPQC_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("WPQC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
else:
    _impl = _kernels_py

expand_local = _impl.expand_local
rank_states = _impl.rank_states
weight_states = _impl.weight_states
