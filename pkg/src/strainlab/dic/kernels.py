"""Correlation kernel backend selection.

The compiled Cython extension is used when importable; otherwise the
pure-NumPy fallback. STRAINLAB_KERNELS=python|compiled forces a backend
(forcing 'compiled' raises if the extension is missing). Both backends
implement the same match_point contract; results agree to interpolation
round-off but are not guaranteed bit-identical across backends.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _icgn as _compiled
except ImportError:
    _compiled = None

_FORCE = os.environ.get("STRAINLAB_KERNELS", "").strip().lower()
if _FORCE == "python":
    _impl = _kernels_py
elif _FORCE == "compiled":
    if _compiled is None:
        raise ImportError(
            "STRAINLAB_KERNELS=compiled but the strainlab.dic._icgn extension "
            "is not built; install with the Cython extension or unset the variable"
        )
    _impl = _compiled
else:
    _impl = _compiled if _compiled is not None else _kernels_py

# Status codes (identical in both backends).
OK = _kernels_py.OK
FLAT_REF = _kernels_py.FLAT_REF
SINGULAR_HESSIAN = _kernels_py.SINGULAR_HESSIAN
OUT_OF_BOUNDS = _kernels_py.OUT_OF_BOUNDS
FLAT_TARGET = _kernels_py.FLAT_TARGET
MAX_ITER = _kernels_py.MAX_ITER
SEARCH_EMPTY = _kernels_py.SEARCH_EMPTY

match_point = _impl.match_point


def active_backend() -> str:
    """Name of the kernel backend in use ('compiled' or 'python')."""
    return "compiled" if _impl is not _kernels_py else "python"


def get_backend(name: str):
    """Explicit backend module by name, for parity tests and benchmarks."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel extension not available")
        return _compiled
    raise ValueError(f"unknown backend '{name}'")
