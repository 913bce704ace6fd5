"""Pure numpy explicit-step kernel, any spatial dimension.

Same contract as the compiled kernels in ``_ckernels.pyx``; ``faces[d][e]``
holds the face-averaged entry ``A_de`` on the faces normal to axis ``d``
(length ``cells[d] - 1`` along ``d``, full length elsewhere).
"""

from __future__ import annotations

import numpy as np


def _shift(n: int, axis: int, lo: int, hi: int | None, inner: bool = True) -> tuple:
    """Slice tuple: ``lo:hi`` on ``axis`` and the interior ``1:-1`` (or all) on the others."""
    rest = slice(1, -1) if inner else slice(None)
    return tuple(slice(lo, hi) if d == axis else rest for d in range(n))


def upwind_gradient_squared(u: np.ndarray, h: float) -> np.ndarray:
    """``sum_d max(D^-u, 0)^2 + min(D^+u, 0)^2`` on the interior cells."""
    n = u.ndim
    inner = tuple(slice(1, -1) for _ in range(n))
    g2 = np.zeros(tuple(s - 2 for s in u.shape))
    for d in range(n):
        dm = (u[inner] - u[_shift(n, d, 0, -2)]) / h
        dp = (u[_shift(n, d, 2, None)] - u[inner]) / h
        g2 += np.maximum(dm, 0.0) ** 2 + np.minimum(dp, 0.0) ** 2
    return g2


def max_upwind_gradient(u: np.ndarray, h: float) -> float:
    return float(np.sqrt(upwind_gradient_squared(u, h).max()))


def divergence(u: np.ndarray, faces: list[list[np.ndarray]], h: float) -> np.ndarray:
    """Face-averaged ``div(A grad u)`` on the interior cells."""
    n = u.ndim
    div = np.zeros(tuple(s - 2 for s in u.shape))
    for d in range(n):
        # fluxes on the faces normal to d, for interior transverse indices
        lo = _shift(n, d, 0, -1)
        hi = _shift(n, d, 1, None)
        on_faces = _shift(n, d, 0, None)
        flux = faces[d][d][on_faces] * (u[hi] - u[lo]) / h
        for e in range(n):
            if e == d:
                continue
            coef = faces[d][e][on_faces]
            if not np.any(coef):
                continue

            def cross(sl):
                # centred difference along e of the slab selected by sl on axis d
                plus = tuple(slice(2, None) if k == e else (sl[k] if k == d else slice(1, -1)) for k in range(n))
                minus = tuple(slice(0, -2) if k == e else (sl[k] if k == d else slice(1, -1)) for k in range(n))
                return u[plus] - u[minus]

            flux = flux + coef * (cross(lo) + cross(hi)) / (4 * h)
        left = tuple(slice(0, -1) if k == d else slice(None) for k in range(n))
        right = tuple(slice(1, None) if k == d else slice(None) for k in range(n))
        div += (flux[right] - flux[left]) / h
    return div


def step(u: np.ndarray, bnd: np.ndarray, faces: list[list[np.ndarray]], f: np.ndarray,
         h: float, dt: float, p: float, inv_lam: float) -> tuple[np.ndarray, float]:
    inner = tuple(slice(1, -1) for _ in range(u.ndim))
    ham = inv_lam * upwind_gradient_squared(u, h) ** (0.5 * p)
    out = np.array(bnd, dtype=float, copy=True)
    out[inner] = u[inner] + dt * (f[inner] - ham + divergence(u, faces, h))
    if not np.all(np.isfinite(out)):
        return out, float("nan")
    return out, max_upwind_gradient(out, h)
