"""Explicit monotone scheme for ``u_t + |grad u|^p / lam - div(A grad u) = f``.

The Hamiltonian uses the Godunov upwind gradient, the diffusion the
face-averaged flux form, and time stepping is forward Euler on a Dirichlet
box.  Each output interval of the grid is split into equal substeps small
enough for the CFL bound of the current field.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from . import _kernels_py
from .diagnostics import m_minus_field
from .grid import GridField
from .kernels import StepKernel, face_coefficients
from .problem import ProblemSpec, SourceSpec

if TYPE_CHECKING:
    from collections.abc import Callable

_TINY = 1e-300


class SolverError(RuntimeError):
    """Non-finite values or a runaway step count."""


class CFLViolation(SolverError):
    """The requested time step exceeds the stability bound."""


@dataclass(frozen=True)
class SchemeConfig:
    cfl_safety: float = 0.4
    max_grad_clip: float | None = None
    backend: str | None = None
    max_substeps: int = 50_000_000

    def __post_init__(self):
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")


def hamiltonian_flux(forward_diffs, backward_diffs, p: float, lam: float) -> float:
    """Godunov value of ``|v|^p / lam`` from one-sided differences."""
    fwd = np.atleast_1d(np.asarray(forward_diffs, dtype=float))
    bwd = np.atleast_1d(np.asarray(backward_diffs, dtype=float))
    g2 = np.sum(np.maximum(bwd, 0.0) ** 2 + np.minimum(fwd, 0.0) ** 2)
    return float(g2 ** (0.5 * p) / lam)


def cfl_limit(h: float, dim: int, a_max: float, p: float, lam: float, grad: float) -> float:
    """Unscaled stability bound ``min(h^2 / (2 n a_max), h / (p G^(p-1) / lam))``."""
    diff = h * h / (2 * dim * a_max + _TINY)
    ham = h / (p * grad ** (p - 1) / lam + _TINY)
    return min(diff, ham)


def _kernel_for(spec: ProblemSpec, cfg: SchemeConfig) -> StepKernel:
    return StepKernel(spec.diffusion.sample(spec.grid), spec.grid.h, spec.p, 1.0 / spec.lam, cfg.backend)


def step(u: np.ndarray, spec: ProblemSpec, cfg: SchemeConfig, dt: float, t: float | None = None,
         t_index: int = 0, kernel: StepKernel | None = None) -> np.ndarray:
    """One forward-Euler step from time ``t`` (default ``grid.t_start``).

    Raises :class:`CFLViolation` if ``dt`` exceeds the bound computed from
    ``u`` and :class:`SolverError` when the update is not finite.
    """
    grid = spec.grid
    t = grid.t_start if t is None else t
    kernel = kernel or _kernel_for(spec, cfg)
    u = np.asarray(u, dtype=float)
    grad = kernel.max_gradient(u)
    limit = cfg.cfl_safety * cfl_limit(grid.h, grid.dim, spec.diffusion.max_entry(), spec.p, spec.lam, grad)
    if dt > limit * (1 + 1e-12):
        raise CFLViolation(f"dt={dt!r} exceeds the CFL bound {limit!r} (max gradient {grad!r})")
    bnd = spec.boundary_values(t + dt, _drift_free_initial(spec))
    out, g_out = kernel(u, bnd, spec.source.sample(grid, t_index), dt)
    if not math.isfinite(g_out):
        raise SolverError(f"non-finite values after the step from t={t!r}")
    return out


def _drift_free_initial(spec: ProblemSpec) -> np.ndarray:
    return replace(spec, drift=0.0).initial_values()


def solve(spec: ProblemSpec, cfg: SchemeConfig | None = None) -> GridField:
    """March ``spec`` over its grid; run metadata ends up in ``field.meta``."""
    cfg = cfg or SchemeConfig()
    grid = spec.grid
    kernel = _kernel_for(spec, cfg)
    a_max = spec.diffusion.max_entry()
    initial = _drift_free_initial(spec)
    u = np.array(spec.boundary_values(grid.t_start, initial), dtype=float)
    u[tuple(slice(1, -1) for _ in range(grid.dim))] = spec.initial_values()[tuple(slice(1, -1) for _ in range(grid.dim))]

    values = np.empty(grid.shape)
    values[0] = u
    source = None if spec.source.time_dependent else spec.source.sample(grid)
    grad = kernel.max_gradient(u)
    history: list[tuple[float, int, float, float]] = []
    cfl_ratio = 0.0
    grad_peak = grad
    total = 0
    clipped = False
    started = time.perf_counter()
    for j in range(grid.n_steps):
        t = grid.t_start + j * grid.dt
        f = source if source is not None else spec.source.sample(grid, j)
        remaining = grid.dt
        substeps = 0
        while remaining > 0:
            bound = cfl_limit(grid.h, grid.dim, a_max, spec.p, spec.lam, grad)
            allowed = cfg.cfl_safety * bound
            dt = remaining if remaining <= allowed else remaining / math.ceil(remaining / allowed)
            bnd = spec.boundary_values(t + dt, initial)
            u, grad = kernel(u, bnd, f, dt)
            if not math.isfinite(grad):
                raise SolverError(f"non-finite values near t={t + dt!r}")
            cfl_ratio = max(cfl_ratio, dt / bound)
            grad_peak = max(grad_peak, grad)
            if cfg.max_grad_clip is not None and grad > cfg.max_grad_clip:
                clipped = True
            t += dt
            remaining = grid.t_start + (j + 1) * grid.dt - t
            if remaining <= 1e-12 * grid.dt:
                remaining = 0.0
            substeps += 1
            total += 1
            if total > cfg.max_substeps:
                raise SolverError(f"more than {cfg.max_substeps} substeps; gradient {grad!r} forces tiny steps")
        values[j + 1] = u
        history.append((t, substeps, grid.dt / substeps, grad))

    meta = {
        "backend": kernel.backend,
        "wall_time": time.perf_counter() - started,
        "substeps": total,
        "max_gradient": grad_peak,
        "cfl_ratio_max": cfl_ratio,
        "cfl_margin": 1.0 - cfl_ratio,
        "non_monotone": not spec.diffusion.is_monotone(),
        "gradient_clip_exceeded": clipped,
        "grad_lp_norm": _gradient_lp_norm(values, grid.h, grid.dt, spec.p),
        "sup_abs": float(np.abs(values).max()),
        "history": history,
    }
    return GridField(grid, values, meta)


def _gradient_lp_norm(values: np.ndarray, h: float, dt: float, p: float) -> float:
    total = 0.0
    dim = values.ndim - 1
    for sl in values:
        total += float(np.sum(_kernels_py.upwind_gradient_squared(sl, h) ** (0.5 * p)))
    return (total * dt * h**dim) ** (1.0 / p)


def format_meta(meta: dict) -> str:
    """Key-value text of the run metadata; the CFL history goes one line per output step."""
    lines = [f"{k}={v!r}" for k, v in meta.items() if k != "history"]
    for t, n_sub, dt, grad in meta.get("history", []):
        lines.append(f"step t={t!r} substeps={n_sub} dt={dt!r} max_gradient={grad!r}")
    return "\n".join(lines) + "\n"


def with_time_drift(spec: ProblemSpec, rate: float) -> ProblemSpec:
    """Problem for ``u + rate * t``: source raised by ``rate``, data drifting likewise."""
    src = spec.source
    if src.kind in ("zero", "constant"):
        new_src = SourceSpec("constant", c=src.c + rate)
    else:
        vals = src.values if src.kind == "sampled" else src.sample(spec.grid)
        new_src = SourceSpec("sampled", values=vals + rate, grid=spec.grid)
    return replace(spec, source=new_src, drift=spec.drift + rate)


# ---------------------------------------------------------------------------
# residuals


def _test_values(test_fn, grid) -> np.ndarray:
    if isinstance(test_fn, GridField):
        return test_fn.values
    if callable(test_fn):
        return GridField.from_function(grid, test_fn).values
    phi = np.asarray(test_fn, dtype=float)
    if phi.shape != grid.shape:
        raise ValueError(f"test function has shape {phi.shape}, grid expects {grid.shape}")
    return phi


def residual_dist(u: GridField, spec: ProblemSpec,
                  test_fn: GridField | np.ndarray | Callable[[np.ndarray, np.ndarray], np.ndarray],
                  hamiltonian_weight: float = 1.0) -> float:
    """Discrete weak residual of the equation tested against ``test_fn``.

    Written in the summation-by-parts form
    ``sum dt h^n phi^j [(u^{j+1} - u^j)/dt + w H(u^j) - f^j - div_A u^j]``,
    which equals ``-u phi_t + (H - f) phi + A grad u . grad phi`` summed
    over the grid once ``phi`` vanishes on the first and last time slice
    and on the boundary ring.  ``w`` scales the Hamiltonian term.
    """
    grid = u.grid
    phi = _test_values(test_fn, grid)
    ring = np.ones(grid.cells, dtype=bool)
    ring[tuple(slice(1, -1) for _ in range(grid.dim))] = False
    if np.any(phi[0] != 0) or np.any(phi[-1] != 0) or np.any(phi[:, ring] != 0):
        raise ValueError("test function must vanish on the first and last time slice and on the boundary ring")
    inner = tuple(slice(1, -1) for _ in range(grid.dim))
    faces = face_coefficients(spec.diffusion.sample(grid))
    static_f = None if spec.source.time_dependent else spec.source.sample(grid)[inner]
    total = 0.0
    for j in range(grid.n_steps):
        w = phi[j][inner]
        if not np.any(w):
            continue
        uj = u.values[j]
        f = static_f if static_f is not None else spec.source.sample(grid, j)[inner]
        ham = _kernels_py.upwind_gradient_squared(uj, grid.h) ** (0.5 * spec.p) / spec.lam
        div = _kernels_py.divergence(uj, faces, grid.h)
        density = (u.values[j + 1][inner] - uj[inner]) / grid.dt + hamiltonian_weight * ham - f - div
        total += float(np.sum(w * density))
    return total * grid.dt * grid.cell_volume


def _second_differences(values: np.ndarray, h: float) -> np.ndarray:
    """Centred Hessian at interior cells, shape ``(n, n, *interior)``."""
    n = values.ndim
    inner = tuple(slice(1, -1) for _ in range(n))

    def shifted(offsets):
        return values[tuple(slice(1 + o, values.shape[k] - 1 + o) for k, o in enumerate(offsets))]

    hess = np.empty((n, n) + tuple(s - 2 for s in values.shape))
    for d in range(n):
        e_d = [0] * n
        e_d[d] = 1
        hess[d, d] = (shifted(e_d) - 2 * values[inner] + shifted([-o for o in e_d])) / h**2
        for e in range(d + 1, n):
            pp, pm, mp, mm = ([0] * n for _ in range(4))
            pp[d], pp[e] = 1, 1
            pm[d], pm[e] = 1, -1
            mp[d], mp[e] = -1, 1
            mm[d], mm[e] = -1, -1
            hess[d, e] = hess[e, d] = (shifted(pp) - shifted(pm) - shifted(mp) + shifted(mm)) / (4 * h * h)
    return hess


def residual_visc_field(u: GridField, spec: ProblemSpec) -> np.ndarray:
    """Viscosity-side residual at every interior sample, shape ``(nt - 1, *interior)``."""
    grid = u.grid
    if grid.n_steps < 2:
        raise ValueError("need at least three time samples")
    inner = tuple(slice(1, -1) for _ in range(grid.dim))
    out = np.empty((grid.n_steps - 1,) + tuple(c - 2 for c in grid.cells))
    for j in range(1, grid.n_steps):
        sl = u.values[j]
        ut = (u.values[j + 1][inner] - u.values[j - 1][inner]) / (2 * grid.dt)
        grad2 = sum(((np.roll(sl, -1, d) - np.roll(sl, 1, d))[inner] / (2 * grid.h)) ** 2 for d in range(grid.dim))
        mm = m_minus_field(np.moveaxis(_second_differences(sl, grid.h), (0, 1), (-2, -1)))
        out[j - 1] = ut + spec.lam * grad2 ** (0.5 * spec.p) - spec.lam0 * mm + spec.lam
    return out


def residual_visc(u: GridField, spec: ProblemSpec, t_index: int, index) -> float:
    """Pointwise ``u_t + lam |grad u|^p - lam0 m^-(D^2 u) + lam`` by centred differences."""
    grid = u.grid
    index = tuple(int(i) for i in np.atleast_1d(index))
    if len(index) != grid.dim:
        raise ValueError("spatial index has the wrong length")
    if not 1 <= t_index <= grid.n_steps - 1 or any(not 1 <= i <= c - 2 for i, c in zip(index, grid.cells)):
        raise IndexError("stencil reaches outside the grid")
    window = tuple(slice(i - 1, i + 2) for i in index)
    sub = u.values[(slice(t_index - 1, t_index + 2), *window)]
    ut = (sub[2] - sub[0])[(1,) * grid.dim] / (2 * grid.dt)
    mid = sub[1]
    grad2 = 0.0
    for d in range(grid.dim):
        hi = tuple(2 if k == d else 1 for k in range(grid.dim))
        lo = tuple(0 if k == d else 1 for k in range(grid.dim))
        grad2 += ((mid[hi] - mid[lo]) / (2 * grid.h)) ** 2
    hess = _second_differences(mid, grid.h)[(..., *(0,) * grid.dim)]
    mm = float(m_minus_field(hess))
    return float(ut + spec.lam * grad2 ** (0.5 * spec.p) - spec.lam0 * mm + spec.lam)
