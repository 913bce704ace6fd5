"""Problem instances: growth parameters, rough diffusion fields and sources.

A :class:`ProblemSpec` bundles everything the solver needs.  Structural
hypotheses (``p > 2``, the integrability threshold on ``m``, the bounds on
``A`` and ``f``) are *not* enforced at construction so that deliberately
violating probes can be built; :func:`validate_problem` lists what fails.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import TYPE_CHECKING, Any

import numpy as np

from .grid import GridField, ParabolicCylinder, SpaceTimeGrid, ball_mask, time_window

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from pathlib import Path


class DivergentNormError(ValueError):
    """The requested L^m norm of a singular source is infinite."""


# ---------------------------------------------------------------------------
# diffusion


@dataclass(frozen=True)
class DiffusionSpec:
    """Matrix field ``A(x)``.

    ``kind="scalar"`` is ``matrices[0]`` everywhere.  ``kind="checkerboard"``
    alternates ``matrices[0]`` / ``matrices[1]`` over cubic blocks of side
    ``block_size`` anchored at ``anchor``; the parity of the summed block
    indices picks the value.  ``sign=-1`` is the flipped field ``-A``.
    """

    kind: str
    matrices: tuple[np.ndarray, ...]
    block_size: float = 1.0
    anchor: tuple[float, ...] = ()
    sign: float = 1.0

    def __post_init__(self):
        mats = tuple(np.atleast_2d(np.asarray(m, dtype=float)) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        if self.kind not in ("scalar", "checkerboard"):
            raise ValueError(f"unknown diffusion kind {self.kind!r}")
        if self.kind == "checkerboard" and len(mats) != 2:
            raise ValueError("checkerboard needs exactly two matrices")
        if self.kind == "checkerboard" and not self.block_size > 0:
            raise ValueError("block_size must be positive")
        for mat in mats:
            if mat.shape[0] != mat.shape[1] or not np.allclose(mat, mat.T, atol=1e-12):
                raise ValueError("diffusion matrices must be square and symmetric")

    @classmethod
    def scalar(cls, epsilon: float, dim: int) -> DiffusionSpec:
        return cls("scalar", (epsilon * np.eye(dim),))

    @classmethod
    def checkerboard(cls, first: Any, second: Any, block_size: float, dim: int,
                     anchor: Sequence[float] | None = None) -> DiffusionSpec:
        mats = tuple(np.asarray(v, dtype=float) * np.eye(dim) if np.ndim(v) == 0 else np.asarray(v, dtype=float)
                     for v in (first, second))
        anchor = tuple(anchor) if anchor is not None else (0.0,) * dim
        return cls("checkerboard", mats, block_size, anchor)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    def flipped(self) -> DiffusionSpec:
        return replace(self, sign=-self.sign)

    def sample(self, grid: SpaceTimeGrid) -> np.ndarray:
        """Matrix at every cell centre, shape ``(dim, dim, *cells)``."""
        return self.sample_at(grid.coords())

    def sample_at(self, x: np.ndarray) -> np.ndarray:
        n = self.dim
        spatial = x.shape[1:]
        if self.kind == "scalar":
            out = np.broadcast_to(self.matrices[0].reshape((n, n) + (1,) * len(spatial)), (n, n, *spatial))
            return self.sign * np.array(out)
        anchor = np.asarray(self.anchor if self.anchor else (0.0,) * n).reshape((n,) + (1,) * len(spatial))
        parity = np.floor((x - anchor) / self.block_size).astype(np.int64).sum(axis=0) % 2
        first, second = (m.reshape((n, n) + (1,) * len(spatial)) for m in self.matrices)
        return self.sign * np.where(parity == 0, first, second)

    def sup_norm(self, grid: SpaceTimeGrid) -> float:
        """Largest operator norm over the distinct sampled matrices."""
        return max(float(np.linalg.norm(m, 2)) for m in self.matrices)

    def max_entry(self) -> float:
        return max(float(np.abs(m).max()) for m in self.matrices)

    def is_psd(self) -> bool:
        return all(np.linalg.eigvalsh(self.sign * m).min() >= -1e-14 for m in self.matrices)

    def is_monotone(self) -> bool:
        """True when the face-averaged stencil is monotone: PSD and diagonally dominant."""
        if not self.is_psd():
            return False
        for m in self.matrices:
            a = self.sign * m
            off = np.abs(a - np.diag(np.diag(a))).sum(axis=1)
            if np.any(off > np.diag(a) + 1e-14):
                return False
        return True

    def transformed(self, factor: float, beta: float, center: Sequence[float]) -> DiffusionSpec:
        """Field ``factor * A(center + beta * y)`` expressed in the variable ``y``."""
        mats = tuple(factor * m for m in self.matrices)
        if self.kind == "scalar":
            return replace(self, matrices=mats)
        anchor = tuple((a - c) / beta for a, c in zip(self.anchor, center))
        return replace(self, matrices=mats, block_size=self.block_size / beta, anchor=anchor)


# ---------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class SourceSpec:
    """Source term ``f``.

    ``zero``, ``constant`` (value ``c``), ``radial`` (``c |x - x0|^(-a)``) or
    ``sampled`` (an array on ``grid``, either one spatial slice or a full
    space-time block).
    """

    kind: str = "zero"
    c: float = 0.0
    a: float = 0.0
    x0: tuple[float, ...] = ()
    values: np.ndarray | None = field(default=None, compare=False)
    grid: SpaceTimeGrid | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "radial", "sampled"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "sampled":
            if self.values is None or self.grid is None:
                raise ValueError("sampled source needs values and grid")
            vals = np.asarray(self.values, dtype=float)
            if vals.shape not in (self.grid.cells, self.grid.shape):
                raise ValueError("sampled source does not match its grid")
            object.__setattr__(self, "values", vals)
        if self.kind == "radial":
            object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))
            if self.a < 0:
                raise ValueError("singularity exponent must be non-negative")

    @property
    def time_dependent(self) -> bool:
        return self.kind == "sampled" and self.values.ndim == self.grid.dim + 1

    def sample(self, grid: SpaceTimeGrid, t_index: int | None = None) -> np.ndarray:
        """Values at the cell centres of ``grid`` (one time slice)."""
        if self.kind == "zero":
            return np.zeros(grid.cells)
        if self.kind == "constant":
            return np.full(grid.cells, float(self.c))
        if self.kind == "radial":
            x = grid.coords()
            r = np.sqrt(sum((x[d] - self.x0[d]) ** 2 for d in range(grid.dim)))
            with np.errstate(divide="ignore"):
                out = self.c * r ** (-self.a)
            if not np.all(np.isfinite(out)):
                raise ValueError("radial source singular point sits on a cell centre")
            return out
        if grid.cells != self.grid.cells:
            raise ValueError("sampled source evaluated on a foreign grid")
        if self.time_dependent:
            j = 0 if t_index is None else min(t_index, self.values.shape[0] - 1)
            return self.values[j]
        return self.values

    def scaled(self, factor: float) -> SourceSpec:
        if self.kind == "zero":
            return self
        if self.kind == "sampled":
            return replace(self, values=factor * self.values)
        return replace(self, c=factor * self.c)

    def transformed(self, factor: float, beta: float, center: Sequence[float],
                    new_grid: SpaceTimeGrid | None = None) -> SourceSpec:
        """Source ``factor * f(center + beta * y)`` in the variable ``y``.

        Sampled sources are carried over unchanged onto ``new_grid``, which
        must be the exact image of the original grid.
        """
        if self.kind == "zero":
            return self
        if self.kind == "constant":
            return replace(self, c=factor * self.c)
        if self.kind == "radial":
            x0 = tuple((a - c) / beta for a, c in zip(self.x0, center))
            return replace(self, c=factor * self.c * beta ** (-self.a), x0=x0)
        if new_grid is None or new_grid.shape != self.grid.shape:
            raise ValueError("sampled sources transform only onto an image grid")
        return replace(self, values=factor * self.values, grid=new_grid)


# ---------------------------------------------------------------------------
# Hamiltonian envelope


@dataclass(frozen=True)
class HamiltonianSpec:
    """Growth envelope ``|v|^p / lam - f <= H <= lam |v|^p + lam``."""

    p: float
    lam: float

    def model(self, v: np.ndarray) -> np.ndarray:
        """The solver's Hamiltonian ``|v|^p / lam``; ``v`` has the vector on axis 0."""
        return np.linalg.norm(np.atleast_1d(v), axis=0) ** self.p / self.lam

    def envelope_violations(self, hamiltonian: Callable[[np.ndarray], np.ndarray], f: float,
                            lattice: np.ndarray) -> np.ndarray:
        """Lattice points (rows of ``lattice``) where ``hamiltonian`` leaves the envelope."""
        pts = np.atleast_2d(lattice)
        vals = np.asarray(hamiltonian(pts.T), dtype=float)
        mag = np.linalg.norm(pts, axis=1) ** self.p
        bad = (vals < mag / self.lam - f - 1e-12) | (vals > self.lam * mag + self.lam + 1e-12)
        return pts[bad]


# ---------------------------------------------------------------------------
# initial and boundary data


@dataclass(frozen=True)
class DataSpec:
    """Closed-form initial or Dirichlet data, built from a config mapping.

    Initial kinds: ``constant``, ``linear``, ``sine``, ``tanh``, ``sign``,
    ``bump``, ``sampled``.  Boundary kinds additionally include ``initial``
    (hold the initial values) and ``field`` (take values from a GridField).
    ``linear`` includes a time rate so it doubles as exact boundary data.
    """

    kind: str
    params: dict = field(default_factory=dict, compare=False)

    def evaluate(self, x: np.ndarray, t: float = 0.0) -> np.ndarray:
        p = self.params
        n = x.shape[0]
        if self.kind == "constant":
            return np.full(x.shape[1:], float(p.get("value", 0.0)))
        if self.kind == "linear":
            slope = np.broadcast_to(np.asarray(p.get("slope", 0.0), dtype=float), (n,))
            out = float(p.get("offset", 0.0)) + float(p.get("rate", 0.0)) * t
            return out + sum(slope[d] * x[d] for d in range(n))
        if self.kind == "sine":
            return float(p.get("amplitude", 1.0)) * np.sin(math.pi * float(p.get("frequency", 1.0)) * x[0])
        if self.kind == "tanh":
            return float(p.get("amplitude", 2.0)) * np.tanh((x[0] - float(p.get("center", 0.0))) / float(p["width"]))
        if self.kind == "sign":
            return float(p.get("amplitude", 2.0)) * np.sign(x[0] - float(p.get("center", 0.0)))
        if self.kind == "bump":
            center = np.broadcast_to(np.asarray(p.get("center", 0.0), dtype=float), (n,))
            r = np.sqrt(sum((x[d] - center[d]) ** 2 for d in range(n)))
            s = np.clip(r / float(p["radius"]), 0.0, 1.0)
            prof = 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s**2)
            return float(p.get("base", 0.0)) + float(p.get("height", 1.0)) * prof
        if self.kind == "sampled":
            return np.asarray(p["values"], dtype=float)
        raise ValueError(f"cannot evaluate data kind {self.kind!r}")

    def to_config(self) -> dict:
        return {"kind": self.kind, **{k: v for k, v in self.params.items() if k != "values"}}


# ---------------------------------------------------------------------------
# the problem


@dataclass(frozen=True)
class ProblemSpec:
    p: float
    lam: float
    lam0: float
    m: float
    epsilon: float
    diffusion: DiffusionSpec
    source: SourceSpec
    grid: SpaceTimeGrid
    initial: DataSpec
    boundary: DataSpec = DataSpec("initial")
    boundary_field: GridField | None = field(default=None, compare=False)
    # adds drift * t to initial and boundary data (the u + lam t substitution)
    drift: float = 0.0

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(self.p, self.lam)

    def initial_values(self) -> np.ndarray:
        t0 = self.grid.t_start
        vals = np.broadcast_to(self.initial.evaluate(self.grid.coords(), t0), self.grid.cells).copy()
        return vals + self.drift * t0 if self.drift else vals

    def boundary_values(self, t: float, initial: np.ndarray) -> np.ndarray:
        """Full spatial array whose boundary-ring entries are the Dirichlet data at ``t``.

        ``initial`` is the (drift-free) initial slice, used by ``kind="initial"``.
        """
        if self.boundary.kind == "initial":
            vals = initial
        elif self.boundary.kind == "field":
            src = self.boundary_field
            j = int(np.clip(round((t - src.grid.t_start) / src.grid.dt), 0, src.grid.n_steps))
            vals = src.values[j]
        else:
            vals = np.broadcast_to(self.boundary.evaluate(self.grid.coords(), t), self.grid.cells)
        return vals + self.drift * t if self.drift else vals

    def with_grid(self, grid: SpaceTimeGrid) -> ProblemSpec:
        return replace(self, grid=grid)


def m_conjugate(m: float) -> float:
    """Hölder conjugate ``m / (m - 1)``."""
    if not m > 1:
        raise ValueError("Hölder conjugate needs m > 1")
    return m / (m - 1.0)


def integrability_threshold(p: float, n: int) -> float:
    return 1.0 + max(n, 2) / p


# ---------------------------------------------------------------------------
# L^m norms with graded quadrature at the singular point

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def _gauss_box(lo: np.ndarray, hi: np.ndarray, q: float) -> float:
    n = len(lo)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    grids = np.meshgrid(*[mid[d] + half[d] * _GL_NODES for d in range(n)], indexing="ij")
    w = np.ones(())
    for _ in range(n):
        w = np.multiply.outer(w, _GL_WEIGHTS)
    r2 = sum(g**2 for g in grids)
    return float(np.prod(half) * np.sum(w * r2 ** (-q / 2)))


def _offcenter_box(lo: np.ndarray, hi: np.ndarray, q: float, depth: int = 0) -> float:
    """Integral of ``|y|^-q`` over a box that does not contain the origin in its interior."""
    near = np.clip(0.0, lo, hi)
    far = np.where(np.abs(lo) > np.abs(hi), lo, hi)
    rmin, rmax = float(np.linalg.norm(near)), float(np.linalg.norm(far))
    if rmin > 0 and (rmax <= 1.5 * rmin or depth >= 60):
        return _gauss_box(lo, hi, q)
    axis = int(np.argmax(hi - lo))
    cut = 0.5 * (lo[axis] + hi[axis])
    hi1, lo2 = hi.copy(), lo.copy()
    hi1[axis] = cut
    lo2[axis] = cut
    return _offcenter_box(lo, hi1, q, depth + 1) + _offcenter_box(lo2, hi, q, depth + 1)


@lru_cache(maxsize=4096)
def _corner_box(sides: tuple[float, ...], q: float) -> float:
    """Integral of ``|y|^-q`` over ``[0, sides]``, singular at the corner.

    The integrand is homogeneous of degree ``-q``, so the box is the disjoint
    union of geometric shells ``2^-j (B \\ B/2)`` whose integrals form a
    geometric series; only the outermost shell is integrated numerically.
    """
    L = np.asarray(sides)
    n = len(L)
    if np.any(L <= 0):
        return 0.0
    shell = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        if not any(bits):
            continue
        lo = np.where(bits, L / 2, 0.0)
        hi = np.where(bits, L, L / 2)
        shell += _offcenter_box(lo, hi, q)
    return shell / (1.0 - 2.0 ** (q - n))


def singular_box_integral(lo: Sequence[float], hi: Sequence[float], x0: Sequence[float], q: float) -> float:
    """``∫_box |x - x0|^(-q) dx`` with geometrically graded refinement toward ``x0``."""
    lo = np.asarray(lo, dtype=float) - np.asarray(x0, dtype=float)
    hi = np.asarray(hi, dtype=float) - np.asarray(x0, dtype=float)
    n = len(lo)
    if q >= n:
        raise DivergentNormError("singularity is not integrable")
    if np.all(lo <= 0) and np.all(hi >= 0):
        # split at the singular point into boxes having it as a corner
        total = 0.0
        for bits in itertools.product((0, 1), repeat=n):
            sides = tuple(float(hi[d]) if bits[d] else float(-lo[d]) for d in range(n))
            total += _corner_box(sides, q)
        return total
    return _offcenter_box(lo, hi, q)


def _singular_power_integral(grid: SpaceTimeGrid, source: SourceSpec, m: float, mask: np.ndarray,
                             window: int = 3) -> float:
    """``∫ |f|^m`` over the masked cells of a radial source."""
    q = source.a * m
    x0 = np.asarray(source.x0, dtype=float)
    if q >= grid.dim:
        raise DivergentNormError(f"|x|^(-{source.a}) is not in L^{m} near the singularity (a*m >= n)")
    x = grid.coords()
    r = np.sqrt(sum((x[d] - x0[d]) ** 2 for d in range(grid.dim)))
    with np.errstate(divide="ignore"):
        vals = r ** (-q)
    near = np.ones(grid.cells, dtype=bool)
    for d in range(grid.dim):
        idx = np.arange(grid.cells[d])
        k = math.floor((x0[d] - grid.origin[d]) / grid.h)
        shape = [1] * grid.dim
        shape[d] = -1
        near &= (np.abs(idx - k) <= window).reshape(shape)
    total = float(grid.cell_volume * np.sum(vals[mask & ~near]))
    origin = np.asarray(grid.origin)
    for index in zip(*np.nonzero(mask & near)):
        lo = origin + grid.h * np.asarray(index)
        total += singular_box_integral(lo, lo + grid.h, x0, q)
    return abs(source.c) ** m * total


def lm_norm(source: SourceSpec, m: float, grid: SpaceTimeGrid, region: ParabolicCylinder | None = None) -> float:
    """``(∬ |f|^m)^(1/m)`` over ``region`` (the whole grid when omitted).

    Time-independent sources are integrated exactly in time; space uses the
    midpoint rule except near a radial singularity, where cell integrals are
    computed with graded refinement.  Raises :class:`DivergentNormError`
    when ``a * m >= n``.
    """
    if m < 1:
        raise ValueError("lm_norm needs m >= 1")
    if region is None:
        mask = np.ones(grid.cells, dtype=bool)
        t_lo, t_hi = grid.t_start, grid.t_end
    else:
        mask = ball_mask(grid, region.radius, region.center)
        t_lo, t_hi = max(region.t_lo, grid.t_start), min(region.t_hi, grid.t_end)
    if source.kind == "zero" or not mask.any() or t_hi <= t_lo:
        return 0.0
    if source.time_dependent:
        idx = time_window(grid, t_lo, t_hi)
        block = np.abs(source.values[idx][:, mask]) ** m
        return float((grid.dt * grid.cell_volume * block.sum()) ** (1.0 / m))
    duration = t_hi - t_lo
    if source.kind in ("constant", "radial") and source.c not in (0.0, 1.0):
        # |c|^m under- or overflows long before |c| does
        return abs(source.c) * lm_norm(replace(source, c=1.0), m, grid, region)
    if source.kind == "radial" and source.a > 0:
        space = _singular_power_integral(grid, source, m, mask)
    else:
        space = float(grid.cell_volume * np.sum(np.abs(source.sample(grid)[mask]) ** m))
    return float((duration * space) ** (1.0 / m))


# ---------------------------------------------------------------------------
# validation


def validate_problem(spec: ProblemSpec, tol: float = 1e-12) -> list[str]:
    """Hypotheses of the regularity theorem that ``spec`` violates (empty if none)."""
    out = []
    n = spec.dim
    if not spec.p > 2:
        out.append("p must exceed 2")
    threshold = integrability_threshold(spec.p, n) if spec.p > 0 else math.inf
    if not spec.m > threshold:
        out.append(f"m must exceed 1 + max(n,2)/p = {threshold:.6g}")
    if not spec.lam > 0:
        out.append("lambda must be positive")
    if spec.lam0 < 0:
        out.append("lambda0 must be non-negative")
    if not 0 <= spec.epsilon <= spec.lam:
        out.append("epsilon must lie in [0, lambda]")
    if spec.diffusion.sup_norm(spec.grid) > spec.lam + tol:
        out.append("||A||_inf exceeds lambda")
    if spec.m >= 1:
        try:
            norm = lm_norm(spec.source, spec.m, spec.grid)
        except DivergentNormError:
            out.append("source is not in L^m (divergent)")
        else:
            if norm > spec.lam + tol:
                out.append(f"||f||_m = {norm:.6g} exceeds lambda")
    return out


# ---------------------------------------------------------------------------
# configuration files


def grid_from_config(cfg: dict, dim: int) -> SpaceTimeGrid:
    cells = cfg["cells"]
    cells = [int(cells)] * dim if np.ndim(cells) == 0 else [int(c) for c in cells]
    h = float(cfg["h"])
    if "origin" in cfg:
        origin = np.broadcast_to(np.asarray(cfg["origin"], dtype=float), (dim,))
    else:
        origin = -0.5 * h * np.asarray(cells, dtype=float)
    return SpaceTimeGrid(dim, tuple(cells), h, float(cfg["dt"]), float(cfg.get("t0", 0.0)),
                         float(cfg["t1"]), tuple(origin))


def diffusion_from_config(cfg: dict, dim: int, epsilon: float, grid: SpaceTimeGrid) -> DiffusionSpec:
    kind = cfg.get("kind", "scalar")
    if kind == "scalar":
        return DiffusionSpec.scalar(float(cfg.get("value", epsilon)), dim)
    if kind == "checkerboard":
        first, second = cfg["values"]
        if cfg.get("relative", True):
            first = np.asarray(first, dtype=float) * epsilon
            second = np.asarray(second, dtype=float) * epsilon
        block = float(cfg["block_cells"]) * grid.h if "block_cells" in cfg else float(cfg["block_size"])
        anchor = cfg.get("anchor", grid.origin)
        return DiffusionSpec.checkerboard(first, second, block, dim, np.broadcast_to(anchor, (dim,)))
    if kind == "sign_flip":
        return diffusion_from_config(cfg["base"], dim, epsilon, grid).flipped()
    raise ValueError(f"unknown diffusion kind {kind!r}")


def source_from_config(cfg: dict, dim: int, grid: SpaceTimeGrid) -> SourceSpec:
    kind = cfg.get("kind", "zero")
    if kind == "zero":
        return SourceSpec()
    if kind == "constant":
        return SourceSpec("constant", c=float(cfg["c"]))
    if kind == "radial":
        center = [0.5 * (lo + hi) for lo, hi in zip(grid.origin, grid.upper)]
        x0 = np.broadcast_to(np.asarray(cfg.get("x0", center), dtype=float), (dim,))
        return SourceSpec("radial", c=float(cfg.get("c", 1.0)), a=float(cfg["a"]), x0=tuple(x0))
    if kind == "sampled":
        return SourceSpec("sampled", values=np.asarray(cfg["values"], dtype=float), grid=grid)
    raise ValueError(f"unknown source kind {kind!r}")


def problem_from_config(cfg: dict) -> ProblemSpec:
    dim = int(cfg.get("n", 1))
    grid = grid_from_config(cfg["grid"], dim)
    eps = float(cfg.get("epsilon", 0.0))
    diffusion = diffusion_from_config(cfg.get("diffusion", {"kind": "scalar"}), dim, eps, grid)
    source = source_from_config(cfg.get("source", {"kind": "zero"}), dim, grid)
    initial = cfg.get("initial", {"kind": "constant", "value": 0.0})
    boundary = cfg.get("boundary", {"kind": "initial"})
    lam0 = float(cfg["lambda0"]) if "lambda0" in cfg else eps
    return ProblemSpec(
        p=float(cfg["p"]), lam=float(cfg.get("lambda", 1.0)), lam0=lam0, m=float(cfg["m"]), epsilon=eps,
        diffusion=diffusion, source=source, grid=grid,
        initial=DataSpec(initial["kind"], {k: v for k, v in initial.items() if k != "kind"}),
        boundary=DataSpec(boundary["kind"], {k: v for k, v in boundary.items() if k != "kind"}),
    )


def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
