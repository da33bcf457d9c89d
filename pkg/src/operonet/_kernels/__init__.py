"""Hot kernels, compiled when available.

The Cython extension ``_ckernels`` is used if it was built; otherwise the numpy
fallback in ``_pykernels`` is selected. Setting ``OPERONET_PURE_PYTHON=1`` forces
the fallback. Both produce bit-identical results.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("OPERONET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if _active is compiled_backend else "python"

vecmat = _active.vecmat
vecmat_backward = _active.vecmat_backward
xoshiro_fill = _active.xoshiro_fill
fisher_yates = _active.fisher_yates

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "vecmat",
    "vecmat_backward",
    "xoshiro_fill",
    "fisher_yates",
]
