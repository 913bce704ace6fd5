"""Scaling symmetries of the equation as discrete maps between grids.

Two families:

* mode ``"61"``: ``v(t, x) = alpha u(t0 + alpha^(p-1) beta^p t, x0 + beta x)``,
  with ``A' = alpha^(p-1) beta^(p-2) A``, ``f' = alpha^p beta^p f`` and
  ``lam0' = alpha^(p-1) beta^(p-2) lam0``;
* mode ``"62"``: ``v(t, x) = alpha u(t0 + beta^e1 t, x0 + beta x)``, with
  ``A' = beta^(e1-2) A`` and ``f' = alpha beta^e1 f``.

By default the image lives on the exact image grid (spacing ``h / beta``,
step ``dt / s``), so ``v`` is ``alpha * u`` sample by sample and every
identity holds to rounding.  A ``target`` grid switches to multilinear
resampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import HypothesisViolation
from .grid import GridField, SpaceTimeGrid, resample
from .problem import DataSpec, ProblemSpec


@dataclass(frozen=True)
class ScalingExponents:
    e1: float
    e2: float
    p: float
    m: float
    n: int


def compute_exponents(p: float, m: float, n: int) -> ScalingExponents:
    """``e1`` at the midpoint of ``(max(2, n/(m-1)), p)`` and the matching ``e2 < 0``."""
    if not m > 1:
        raise ValueError("need m > 1")
    lo = max(2.0, n / (m - 1))
    if not lo < p:
        raise ValueError(f"empty exponent interval ({lo}, {p}); m is below the integrability threshold")
    e1 = 0.5 * (lo + p)
    e2 = max(-(p - e1) / (p - 1), n / m - e1 * (m - 1) / m)
    return ScalingExponents(e1, e2, p, m, n)


@dataclass(frozen=True)
class ScaleParams:
    alpha: float
    beta: float
    mode: str = "61"

    def __post_init__(self):
        if self.mode not in ("61", "62"):
            raise ValueError("mode is '61' or '62'")
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")

    def time_factor(self, p: float, exps: ScalingExponents | None = None) -> float:
        if self.mode == "61":
            return self.alpha ** (p - 1) * self.beta**p
        return self.beta**exps.e1

    def diffusion_factor(self, p: float, exps: ScalingExponents | None = None) -> float:
        if self.mode == "61":
            return self.alpha ** (p - 1) * self.beta ** (p - 2)
        return self.beta ** (exps.e1 - 2)

    def source_factor(self, p: float, exps: ScalingExponents | None = None) -> float:
        if self.mode == "61":
            return (self.alpha * self.beta) ** p
        return self.alpha * self.beta**exps.e1

    def violations(self, p: float, m: float, n: int, exps: ScalingExponents | None = None,
                   rtol: float = 1e-12) -> list[str]:
        a, b = self.alpha, self.beta
        out = []
        if self.mode == "61":
            if b > (1 / a) * (1 + rtol):
                out.append("beta <= 1/alpha fails")
            if b > a ** (-(p - 1) / (p - 2)) * (1 + rtol):
                out.append("beta <= alpha^(-(p-1)/(p-2)) fails")
            denom = p * (m - 1) - n
            if denom <= 0:
                out.append("p(m-1) - n must be positive for the third constraint")
            elif b > a ** (-(p * (m - 1) + 1) / denom) * (1 + rtol):
                out.append("beta <= alpha^(-(p(m-1)+1)/(p(m-1)-n)) fails")
        else:
            if exps is None:
                raise ValueError("mode 62 needs the scaling exponents")
            if not 0 < b <= 1:
                out.append("need 0 < beta <= 1")
            if not 1 <= a <= b**exps.e2 * (1 + rtol):
                out.append("need 1 <= alpha <= beta^e2")
        return out


def image_grid(grid: SpaceTimeGrid, beta: float, s: float, center=None) -> SpaceTimeGrid:
    """Grid whose samples map one-to-one onto those of ``grid`` under ``(t0 + s t, x0 + beta x)``."""
    t0, x0 = _center(grid, center)
    origin = tuple((o - c) / beta for o, c in zip(grid.origin, x0))
    return SpaceTimeGrid(grid.dim, grid.cells, grid.h / beta, grid.dt / s,
                         (grid.t_start - t0) / s, (grid.t_end - t0) / s, origin)


def _center(grid: SpaceTimeGrid, center) -> tuple[float, np.ndarray]:
    if center is None:
        return 0.0, np.zeros(grid.dim)
    return float(center[0]), np.atleast_1d(np.asarray(center[1], dtype=float))


def _transform(u: GridField, spec: ProblemSpec, alpha: float, beta: float, s: float, diff_factor: float,
               src_factor: float, lam0: float, center, target: SpaceTimeGrid | None):
    grid = u.grid
    t0, x0 = _center(grid, center)
    if target is None:
        new_grid = image_grid(grid, beta, s, center)
        v = GridField(new_grid, alpha * u.values)
    else:
        new_grid = target
        xr = x0.reshape((-1,) + (1,) * (grid.dim + 1))
        v = resample(u, target, lambda t, x: (t0 + s * t, xr + beta * x), scale=alpha)
    source = spec.source.transformed(src_factor, beta, x0, new_grid if target is None else None)
    new_spec = replace(
        spec, grid=new_grid, lam0=lam0,
        diffusion=spec.diffusion.transformed(diff_factor, beta, x0),
        source=source,
        initial=DataSpec("sampled", {"values": v.values[0]}),
        boundary=DataSpec("field"), boundary_field=v, drift=0.0,
    )
    return v, new_spec


def scale_61(u: GridField, spec: ProblemSpec, params: ScaleParams, center=None,
             target: SpaceTimeGrid | None = None, check: bool = True) -> tuple[GridField, ProblemSpec]:
    """``alpha u(t0 + alpha^(p-1) beta^p t, x0 + beta x)`` with transformed coefficients."""
    p = spec.p
    if params.mode != "61":
        raise ValueError("scale_61 needs mode '61'")
    if check:
        bad = params.violations(p, spec.m, spec.dim)
        if bad:
            raise HypothesisViolation("; ".join(bad))
    fac = params.diffusion_factor(p)
    return _transform(u, spec, params.alpha, params.beta, params.time_factor(p), fac,
                      params.source_factor(p), fac * spec.lam0, center, target)


def scale_62(u: GridField, spec: ProblemSpec, params: ScaleParams, exps: ScalingExponents, center=None,
             target: SpaceTimeGrid | None = None, check: bool = True) -> tuple[GridField, ProblemSpec]:
    """``alpha u(t0 + beta^e1 t, x0 + beta x)`` with transformed coefficients; ``lam0`` is kept."""
    p = spec.p
    if params.mode != "62":
        raise ValueError("scale_62 needs mode '62'")
    if check:
        bad = params.violations(p, spec.m, spec.dim, exps)
        if bad:
            raise HypothesisViolation("; ".join(bad))
    return _transform(u, spec, params.alpha, params.beta, params.time_factor(p, exps),
                      params.diffusion_factor(p, exps), params.source_factor(p, exps), spec.lam0, center, target)


def residual_factor(params: ScaleParams, p: float, n: int, exps: ScalingExponents | None = None) -> float:
    """Ratio between the weak residual of the image and that of the original on the image grid.

    The Jacobian of the map is ``s beta^n``, so the ratio is ``source_factor / (s beta^n)``.
    """
    s = params.time_factor(p, exps)
    return params.source_factor(p, exps) / (s * params.beta**n)


def hamiltonian_weight(params: ScaleParams, p: float, exps: ScalingExponents | None = None) -> float:
    """Weight on the Hamiltonian of ``u`` that makes the image exact: 1 for mode 61,
    ``alpha^(p-1) beta^(p-e1)`` for mode 62."""
    if params.mode == "61":
        return 1.0
    return params.alpha ** (p - 1) * params.beta ** (p - exps.e1)


def dg_level_transform(v: GridField, k: int) -> GridField:
    """``2^k (v - 2) + 2``; requires ``v <= 2``."""
    if v.values.max() > 2.0:
        raise HypothesisViolation(f"v reaches {float(v.values.max())!r} > 2")
    return GridField(v.grid, 2.0**k * (v.values - 2.0) + 2.0)


def normalization_params(sup_abs: float, rho: float, s: float, p: float, m: float, n: int,
                         lam0: float = 0.0, lam0_bound: float | None = None) -> ScaleParams:
    """Largest ``(alpha_w, beta_w)`` of the form used to normalize a solution onto ``Q3``.

    ``alpha_w = min(1, 2 / sup_abs)`` and ``beta_w`` the largest value with
    ``3 beta <= rho``, ``4 alpha^(p-1) beta^p <= s`` and the mode-61
    constraints; when ``lam0_bound`` is given, also
    ``alpha^(p-1) beta^(p-2) lam0 <= lam0_bound``.
    """
    alpha = min(1.0, 2.0 / sup_abs) if sup_abs > 0 else 1.0
    caps = [rho / 3.0, (s / (4 * alpha ** (p - 1))) ** (1 / p), 1 / alpha, alpha ** (-(p - 1) / (p - 2))]
    denom = p * (m - 1) - n
    if denom > 0:
        caps.append(alpha ** (-(p * (m - 1) + 1) / denom))
    if lam0_bound is not None and lam0 > 0:
        caps.append((lam0_bound / (alpha ** (p - 1) * lam0)) ** (1 / (p - 2)))
    beta = min(caps)
    if not beta > 0 or not math.isfinite(beta):
        raise HypothesisViolation("no admissible normalization")
    return ScaleParams(alpha, beta, "61")


def compose(first: ScaleParams, second: ScaleParams) -> ScaleParams:
    """Mode-61 parameters of applying ``first`` then ``second``."""
    return ScaleParams(first.alpha * second.alpha, first.beta * second.beta, "61")

