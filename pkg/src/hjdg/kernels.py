"""Backend selection for the explicit-step kernel.

The compiled extension ``hjdg._ckernels`` is used for one and two space
dimensions when it imports; everything else (and any run with
``HJDG_PURE_PYTHON=1`` in the environment) goes through the numpy kernel.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("HJDG_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("compiled kernels disabled by HJDG_PURE_PYTHON")
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

HAVE_COMPILED = _ckernels is not None
BACKENDS = ("cython", "numpy") if HAVE_COMPILED else ("numpy",)
DEFAULT_BACKEND = BACKENDS[0]


def face_coefficients(a: np.ndarray) -> list[list[np.ndarray]]:
    """Face averages of a cell-centred matrix field ``a`` of shape ``(n, n, *cells)``.

    ``faces[d][e]`` sits on the faces normal to axis ``d``.
    """
    n = a.shape[0]
    faces = []
    for d in range(n):
        lo = tuple(slice(0, -1) if k == d else slice(None) for k in range(n))
        hi = tuple(slice(1, None) if k == d else slice(None) for k in range(n))
        faces.append([np.ascontiguousarray(0.5 * (a[d, e][lo] + a[d, e][hi])) for e in range(n)])
    return faces


class StepKernel:
    """Pre-bound kernel for one problem: call with ``(u, bnd, f, dt)``."""

    def __init__(self, a: np.ndarray, h: float, p: float, inv_lam: float, backend: str | None = None):
        self.faces = face_coefficients(a)
        self.h, self.p, self.inv_lam = float(h), float(p), float(inv_lam)
        self.dim = a.shape[0]
        backend = backend or DEFAULT_BACKEND
        if backend not in BACKENDS:
            raise ValueError(f"backend {backend!r} unavailable (have {BACKENDS})")
        if backend == "cython" and self.dim > 2:
            backend = "numpy"
        self.backend = backend

    def max_gradient(self, u: np.ndarray) -> float:
        if self.backend == "cython":
            u = np.ascontiguousarray(u, dtype=float)
            if self.dim == 1:
                return _ckernels.max_upwind_gradient_1d(u, self.h)
            return _ckernels.max_upwind_gradient_2d(u, self.h)
        return _kernels_py.max_upwind_gradient(u, self.h)

    def __call__(self, u: np.ndarray, bnd: np.ndarray, f: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        if self.backend == "numpy":
            return _kernels_py.step(u, bnd, self.faces, f, self.h, dt, self.p, self.inv_lam)
        u = np.ascontiguousarray(u, dtype=float)
        bnd = np.ascontiguousarray(bnd, dtype=float)
        f = np.ascontiguousarray(f, dtype=float)
        if self.dim == 1:
            return _ckernels.step_1d(u, bnd, self.faces[0][0], f, self.h, dt, self.p, self.inv_lam)
        (axx, axy), (ayx, ayy) = self.faces
        return _ckernels.step_2d(u, bnd, axx, axy, ayx, ayy, f, self.h, dt, self.p, self.inv_lam)
