"""Kernel backend selector.

Prefers the compiled Cython extension; falls back to the numpy twin when
the extension is missing or when BGAME_PURE=1 is set. Both expose the same
three callables: project_simplex, objective_grad, fista_stage.
"""

from __future__ import annotations

import os

if os.environ.get("BGAME_PURE", "") == "1":
    from . import _purekernel as _impl
else:
    try:
        from . import _fastkernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _purekernel as _impl

BACKEND = _impl.BACKEND
project_simplex = _impl.project_simplex
objective_grad = _impl.objective_grad
fista_stage = _impl.fista_stage
