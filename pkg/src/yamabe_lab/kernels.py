"""Backend selection for the lattice stencils.

The compiled extension is used when importable; set ``YAMABE_LAB_PURE=1``
to force the numpy fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("YAMABE_LAB_PURE"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass


def _prep(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 4 or len(set(a.shape)) != 1:
        raise ValueError(f"expected an N^4 lattice array, got shape {a.shape}")
    return a


def laplacian(phi, h):
    return _impl.laplacian(_prep(phi), float(h))


def div_grad(phi, coef, h):
    phi = _prep(phi)
    coef = _prep(coef)
    if phi.shape != coef.shape:
        raise ValueError("phi and coef must live on the same lattice")
    return _impl.div_grad(phi, coef, float(h))


def backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
