"""Explicit subsolution ``sigma = -2 + lam^2 beta(|x|/lam) - lam^2 t / 8`` and its checks.

``beta`` is the quintic smoothstep bump: 1 on ``[0, 1/2]``, 0 on
``[1, inf)``, ``1 - S(2r - 1)`` in between with
``S(s) = 6s^5 - 15s^4 + 10s^3``.  Its derivative norms are
``|beta'| <= 15/4`` and ``|beta''| <= 40/sqrt(3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import smoothstep, smoothstep_slope
from .grid import GridField, ball_mask, time_window


@dataclass(frozen=True)
class BumpProfile:
    d1_norm: float = 15.0 / 4.0
    d2_norm: float = 40.0 / math.sqrt(3.0)

    def value(self, r):
        return 1.0 - smoothstep(2.0 * np.asarray(r, dtype=float) - 1.0)

    def d1(self, r):
        return -2.0 * smoothstep_slope(2.0 * np.asarray(r, dtype=float) - 1.0)

    def d2(self, r):
        s = np.clip(2.0 * np.asarray(r, dtype=float) - 1.0, 0.0, 1.0)
        return -4.0 * (120 * s**3 - 180 * s**2 + 60 * s)


def k0_display(K: float, Lambda: float, p: float, n: int, profile: BumpProfile | None = None) -> float:
    """``Lambda K^(p-2) |b'|^p + K |b''| + 2 K^2 (n-1) |b'| - 1/8``."""
    prof = profile or BumpProfile()
    return (Lambda * K ** (p - 2) * prof.d1_norm**p + K * prof.d2_norm
            + 2 * K * K * (n - 1) * prof.d1_norm - 0.125)


def k0_search(Lambda: float, p: float, n: int, profile: BumpProfile | None = None, tol: float = 1e-6,
              margin: float = 1e-9) -> float:
    """Largest ``K0 <= 1`` (to ``tol``) with ``k0_display(K0) <= -margin``.

    The display is increasing in ``K`` for ``p > 2``, so bisection applies.
    """
    if not p > 2:
        raise ValueError("k0_search needs p > 2")
    prof = profile or BumpProfile()

    def ok(k):
        return k0_display(k, Lambda, p, n, prof) <= -margin

    if ok(1.0):
        return 1.0
    lo, hi = 1e-12, 1.0
    if not ok(lo):
        raise ValueError("no admissible K0 above 1e-12")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


@dataclass(frozen=True)
class BarrierSpec:
    lam: float
    lam0: float
    Lambda: float
    p: float
    n: int = 1
    K0: float = 0.0
    profile: BumpProfile = field(default_factory=BumpProfile)

    @classmethod
    def build(cls, Lambda: float, p: float, n: int = 1, lam: float | None = None,
              lam0: float | None = None) -> BarrierSpec:
        """``K0`` from :func:`k0_search`; ``lam`` defaults to ``K0`` and ``lam0`` to ``lam^2 K0``."""
        k0 = k0_search(Lambda, p, n)
        lam = k0 if lam is None else lam
        lam0 = lam * lam * k0 if lam0 is None else lam0
        return cls(lam, lam0, Lambda, p, n, k0)

    def violations(self) -> list[str]:
        out = []
        if not 0 < self.lam <= self.K0:
            out.append("lambda must lie in (0, K0]")
        if not self.K0 <= 1:
            out.append("K0 must not exceed 1")
        if self.lam0 > self.lam**2 * self.K0 * (1 + 1e-12):
            out.append("Lambda0 must not exceed lambda^2 K0")
        return out


def _radius(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.abs(x) if x.ndim == 0 else np.sqrt(np.sum(x * x, axis=0))


def barrier_value(spec: BarrierSpec, t, x):
    """``sigma(t, x)``; ``x`` carries the coordinates on axis 0 (a scalar in one dimension)."""
    lam = spec.lam
    return -2.0 + lam * lam * spec.profile.value(_radius(x) / lam) - lam * lam * np.asarray(t, dtype=float) / 8.0


def hessian_eigenvalues(spec: BarrierSpec, x) -> tuple[np.ndarray, np.ndarray]:
    """Radial eigenvalue ``beta''(r/lam)`` and tangential ``(lam/r) beta'(r/lam)`` (0 at the origin)."""
    lam = spec.lam
    r = _radius(x)
    radial = spec.profile.d2(r / lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        tangential = np.where(r > 0, lam / np.where(r > 0, r, 1.0) * spec.profile.d1(r / lam), 0.0)
    return radial, tangential


def barrier_residual(spec: BarrierSpec, t, x):
    """``d_t sigma + Lambda |grad sigma|^p - Lambda0 m^-(D^2 sigma)`` from the closed forms."""
    lam = spec.lam
    r = _radius(x)
    grad = lam * np.abs(spec.profile.d1(r / lam))
    radial, tangential = hessian_eigenvalues(spec, x)
    low = np.minimum(radial, 0.0)
    if spec.n > 1:
        low = np.minimum(low, tangential)
    out = -lam * lam / 8.0 + spec.Lambda * grad**spec.p - spec.lam0 * low
    return out + 0.0 * np.asarray(t, dtype=float)


@dataclass
class ComparisonReport:
    hypotheses: list[str]
    boundary_ordered: bool
    margin: float
    tolerance: float
    passed: bool
    min_gap: float


def comparison_check(u: GridField, spec: BarrierSpec, T: float, center=None) -> ComparisonReport:
    """Compare ``u`` with the barrier on ``[0, T] x B_2`` (shifted by ``center = (t0, x0)``).

    Checks ``u >= -2`` there and ``u >= -2 + lam^2`` on ``{0} x B_lam``, the
    ordering on the parabolic-boundary samples, and the lower bound
    ``u >= -2 + lam^2/2`` on ``[0, T] x B_(lam/2)`` within ``h + dt``.
    """
    if not T < 4:
        raise ValueError("T must be below 4")
    grid = u.grid
    t0 = 0.0 if center is None else float(center[0])
    x0 = np.zeros(grid.dim) if center is None else np.atleast_1d(np.asarray(center[1], dtype=float))
    idx = time_window(grid, t0, t0 + T)
    if idx.size == 0 or abs(grid.times[idx[0]] - t0) > 1e-9 * max(1.0, abs(t0)):
        raise ValueError("the field has no sample at the initial time")
    ball2 = ball_mask(grid, 2.0, x0)
    lam = spec.lam
    block = u.values[idx]
    hypotheses = []
    if block[:, ball2].min() < -2.0:
        hypotheses.append("u >= -2 fails on [0,T] x B_2")
    ball_lam = ball_mask(grid, lam, x0)
    if not ball_lam.any():
        hypotheses.append("B_lambda holds no sample")
    elif block[0][ball_lam].min() < -2.0 + lam * lam:
        hypotheses.append("u >= -2 + lambda^2 fails on {0} x B_lambda")

    x = grid.coords() - x0.reshape((-1,) + (1,) * grid.dim)
    ts = (grid.times[idx] - t0).reshape((-1,) + (1,) * grid.dim)
    sigma = barrier_value(spec, ts, x[:, None])
    gap = block - sigma
    rim = ball2 & ~ball_mask(grid, 2.0 - grid.h, x0)
    boundary_ordered = bool(gap[0][ball2].min() >= 0 and (not rim.any() or gap[:, rim].min() >= 0))
    inner = ball_mask(grid, lam / 2, x0)
    margin = float((block[:, inner] + 2.0 - lam * lam / 2).min()) if inner.any() else float("nan")
    tol = grid.h + grid.dt
    passed = not hypotheses and boundary_ordered and margin >= -tol
    return ComparisonReport(hypotheses, boundary_ordered, margin, tol, bool(passed), float(gap[:, ball2].min()))
