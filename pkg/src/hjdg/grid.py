"""Uniform space-time grids, fields sampled on them, and cylinder geometry.

Grids are cell centred: axis ``d`` carries centres
``origin[d] + (i + 1/2) h`` for ``i = 0 .. cells[d] - 1`` and time samples
``t_start + j dt`` for ``j = 0 .. n_steps``.  Every localized quantity is
evaluated over the sample points that fall inside a region; there is no
cut-cell quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.interpolate import RegularGridInterpolator

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from pathlib import Path

CHECKPOINT_MAGIC = "HJDG1"

# relative slack used when deciding whether a time sample lies in an interval
_TIME_SLACK = 1e-9


class GridError(ValueError):
    """Raised for inconsistent grids, fields or empty regions."""


@dataclass(frozen=True)
class SpaceTimeGrid:
    dim: int
    cells: tuple[int, ...]
    h: float
    dt: float
    t_start: float
    t_end: float
    origin: tuple[float, ...] = ()

    def __post_init__(self):
        cells = tuple(int(c) for c in np.atleast_1d(self.cells))
        object.__setattr__(self, "cells", cells)
        origin = tuple(float(o) for o in np.atleast_1d(self.origin)) if len(self.origin) else (0.0,) * self.dim
        object.__setattr__(self, "origin", origin)
        if self.dim < 1:
            raise GridError("dim must be >= 1")
        if len(cells) != self.dim or len(origin) != self.dim:
            raise GridError("cells and origin must have length dim")
        if min(cells) < 4:
            raise GridError("every axis needs at least 4 cells")
        if not (self.h > 0 and self.dt > 0):
            raise GridError("h and dt must be positive")
        if not self.t_start < self.t_end:
            raise GridError("t_start must precede t_end")
        ratio = (self.t_end - self.t_start) / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)):
            raise GridError(f"time span is not an integer number of steps ({ratio!r})")

    @classmethod
    def from_bounds(cls, lower: Sequence[float], upper: Sequence[float], h: float,
                    dt: float, t_start: float, t_end: float) -> SpaceTimeGrid:
        """Grid covering the box ``[lower, upper]`` with spacing ``h``."""
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        cells = np.rint((upper - lower) / h).astype(int)
        return cls(len(lower), tuple(cells), h, dt, t_start, t_end, tuple(lower))

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of the value array of a field: ``(n_steps + 1, *cells)``."""
        return (self.n_steps + 1, *self.cells)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_steps + 1)

    @property
    def axes(self) -> list[np.ndarray]:
        return [o + self.h * (np.arange(c) + 0.5) for o, c in zip(self.origin, self.cells)]

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(o + self.h * c for o, c in zip(self.origin, self.cells))

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def coords(self) -> np.ndarray:
        """Cell centres as an array of shape ``(dim, *cells)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"))

    def time_index(self, t: float) -> int:
        j = (t - self.t_start) / self.dt
        if abs(j - round(j)) > 1e-6:
            raise GridError(f"t={t} is not a time sample")
        j = int(round(j))
        if not 0 <= j <= self.n_steps:
            raise GridError(f"t={t} outside [{self.t_start}, {self.t_end}]")
        return j

    def header(self) -> str:
        cells = ",".join(str(c) for c in self.cells)
        origin = ",".join(repr(o) for o in self.origin)
        return (f"{CHECKPOINT_MAGIC} n={self.dim} cells={cells} h={self.h!r} dt={self.dt!r} "
                f"t0={self.t_start!r} t1={self.t_end!r} origin={origin}")

    @classmethod
    def from_header(cls, line: str) -> SpaceTimeGrid:
        tokens = line.split()
        if not tokens or tokens[0] != CHECKPOINT_MAGIC:
            raise GridError("not an HJDG1 checkpoint header")
        kv = dict(tok.split("=", 1) for tok in tokens[1:])
        dim = int(kv["n"])
        cells = tuple(int(c) for c in kv["cells"].split(","))
        if "origin" in kv:
            origin = tuple(float(o) for o in kv["origin"].split(","))
        else:
            origin = (0.0,) * dim
        return cls(dim, cells, float(kv["h"]), float(kv["dt"]), float(kv["t0"]), float(kv["t1"]), origin)


@dataclass(frozen=True)
class ParabolicCylinder:
    """The set ``[t_lo, t_hi] x B_radius(center)``."""

    t_lo: float
    t_hi: float
    radius: float
    center: tuple[float, ...] = field(default=(0.0,))

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.t_lo < self.t_hi:
            raise GridError("cylinder needs t_lo < t_hi")
        if not self.radius > 0:
            raise GridError("cylinder radius must be positive")

    @classmethod
    def q1(cls, dim: int = 1) -> ParabolicCylinder:
        return cls(-1.0, 0.0, 1.0, (0.0,) * dim)

    @classmethod
    def q2bar(cls, dim: int = 1) -> ParabolicCylinder:
        return cls(-2.0, 0.0, 2.0, (0.0,) * dim)

    @classmethod
    def q2(cls, dim: int = 1) -> ParabolicCylinder:
        return cls(-4.0, 0.0, 2.0, (0.0,) * dim)

    @classmethod
    def q3(cls, dim: int = 1) -> ParabolicCylinder:
        return cls(-4.0, 0.0, 3.0, (0.0,) * dim)

    def measure(self) -> float:
        n = len(self.center)
        ball = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * self.radius**n
        return (self.t_hi - self.t_lo) * ball

    def contains(self, other: ParabolicCylinder) -> bool:
        gap = float(np.linalg.norm(np.subtract(self.center, other.center)))
        return (self.t_lo <= other.t_lo and other.t_hi <= self.t_hi
                and gap + other.radius <= self.radius)


def ball_mask(grid: SpaceTimeGrid, radius: float, center: Sequence[float]) -> np.ndarray:
    """Boolean mask of the cell centres strictly inside ``B_radius(center)``."""
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    dist2 = np.zeros(grid.cells)
    for d, ax in enumerate(grid.axes):
        shape = [1] * grid.dim
        shape[d] = -1
        dist2 = dist2 + ((ax - center[d]) ** 2).reshape(shape)
    return dist2 < radius**2


def time_window(grid: SpaceTimeGrid, t_lo: float, t_hi: float) -> np.ndarray:
    """Indices of the time samples in ``[t_lo, t_hi]``."""
    t = grid.times
    slack = _TIME_SLACK * max(1.0, abs(t_lo), abs(t_hi))
    return np.nonzero((t >= t_lo - slack) & (t <= t_hi + slack))[0]


def cylinder_samples(grid: SpaceTimeGrid, cyl: ParabolicCylinder) -> tuple[np.ndarray, np.ndarray]:
    """Time indices and spatial mask of the samples inside ``cyl``."""
    return time_window(grid, cyl.t_lo, cyl.t_hi), ball_mask(grid, cyl.radius, cyl.center)


@dataclass(frozen=True, eq=False)
class GridField:
    """Values of a scalar function on every sample of a space-time grid."""

    grid: SpaceTimeGrid
    values: np.ndarray
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridError(f"values have shape {values.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError("field contains NaN or Inf")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: SpaceTimeGrid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> GridField:
        """Sample ``fn(t, x)``; ``t`` has shape ``(nt, 1, ..)``, ``x`` shape ``(dim, 1, *cells)``."""
        t = grid.times.reshape((-1,) + (1,) * grid.dim)
        x = grid.coords()[:, None]
        return cls(grid, np.broadcast_to(fn(t, x), grid.shape).copy())

    @classmethod
    def constant(cls, grid: SpaceTimeGrid, value: float) -> GridField:
        return cls(grid, np.full(grid.shape, float(value)))

    def slice(self, t_index: int) -> np.ndarray:
        if not -len(self.values) <= t_index < len(self.values):
            raise GridError(f"time index {t_index} out of range")
        return self.values[t_index]

    def with_values(self, values: np.ndarray) -> GridField:
        return GridField(self.grid, values)

    def save(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            fh.write((self.grid.header() + "\n").encode("ascii"))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> GridField:
        with open(path, "rb") as fh:
            grid = SpaceTimeGrid.from_header(fh.readline().decode("ascii"))
            raw = np.frombuffer(fh.read(), dtype="<f8")
        if raw.size != math.prod(grid.shape):
            raise GridError(f"checkpoint holds {raw.size} values, header implies {math.prod(grid.shape)}")
        return cls(grid, raw.reshape(grid.shape).astype(float))


def gradient_centered(u: GridField, t_index: int) -> np.ndarray:
    """Gradient of one time slice, shape ``(dim, *cells)``.

    Second-order centred differences inside, first-order one-sided on the
    boundary ring.
    """
    values = u.slice(t_index)
    return np.stack([np.gradient(values, u.grid.h, axis=d, edge_order=1) for d in range(u.grid.dim)])


def integrate_space(grid: SpaceTimeGrid, g: np.ndarray, radius: float, center: Sequence[float] | None = None) -> float:
    """Midpoint rule ``h^n * sum g`` over the cell centres inside the ball."""
    center = (0.0,) * grid.dim if center is None else center
    mask = ball_mask(grid, radius, center)
    return float(grid.cell_volume * np.sum(np.asarray(g)[..., mask]))


def integrate_spacetime(g: GridField, cyl: ParabolicCylinder) -> float:
    """``dt h^n`` times the sum of ``g`` over the samples inside ``cyl``."""
    grid = g.grid
    idx, mask = cylinder_samples(grid, cyl)
    if idx.size == 0:
        return 0.0
    return float(grid.dt * grid.cell_volume * np.sum(g.values[idx][:, mask]))


def sample_count(grid: SpaceTimeGrid, cyl: ParabolicCylinder) -> int:
    idx, mask = cylinder_samples(grid, cyl)
    return int(idx.size * np.count_nonzero(mask))


def sup_inf_on(u: GridField, cyl: ParabolicCylinder) -> tuple[float, float]:
    """Exact max and min of ``u`` over the samples inside ``cyl``."""
    idx, mask = cylinder_samples(u.grid, cyl)
    if idx.size == 0 or not mask.any():
        raise GridError("cylinder contains no grid samples")
    block = u.values[idx][:, mask]
    return float(block.max()), float(block.min())


def interpolator(u: GridField) -> RegularGridInterpolator:
    """Multilinear interpolant in ``(t, x_1, ..., x_n)``, linear extrapolation in the half-cell rim."""
    grid = u.grid
    return RegularGridInterpolator((grid.times, *grid.axes), u.values, method="linear",
                                   bounds_error=False, fill_value=None)


def resample(u: GridField, target: SpaceTimeGrid,
             pullback: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]],
             scale: float = 1.0) -> GridField:
    """Field on ``target`` with values ``scale * u(pullback(t, x))``.

    ``pullback`` receives target sample times ``(nt, 1...)`` and centres
    ``(dim, 1, *cells)`` and returns the matching source coordinates.  Points
    mapped outside the source domain raise ``GridError``.
    """
    t = target.times.reshape((-1,) + (1,) * target.dim)
    x = target.coords()[:, None]
    ts, xs = pullback(t, x)
    ts = np.broadcast_to(ts, target.shape)
    xs = np.broadcast_to(xs, (target.dim, *target.shape))
    src = u.grid
    tol = 1e-9 * max(1.0, src.h)
    if ts.min() < src.t_start - 1e-9 * max(1.0, abs(src.t_start)) or ts.max() > src.t_end + 1e-9 * max(1.0, abs(src.t_end)):
        raise GridError("resampling reaches outside the source time interval")
    for d in range(src.dim):
        if xs[d].min() < src.origin[d] - tol or xs[d].max() > src.upper[d] + tol:
            raise GridError("resampling reaches outside the source domain")
    ts = np.clip(ts, src.t_start, src.t_end)
    pts = np.stack([ts, *xs], axis=-1).reshape(-1, src.dim + 1)
    vals = interpolator(u)(pts).reshape(target.shape)
    return GridField(target, scale * vals)
