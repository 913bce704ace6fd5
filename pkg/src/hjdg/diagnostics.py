"""De Giorgi style diagnostics evaluated on solved fields.

Everything here works on sample points: cylinders are the grid samples they
contain, gradients of truncations are the upwind magnitudes the solver uses,
and suprema in time are taken over the stored time slices.  Cylinders are
given in normalized coordinates, translated by an optional ``center``
``(t0, x0)`` so that ``[t_lo, t_hi] x B_r`` means
``[t0 + t_lo, t0 + t_hi] x B_r(x0)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .grid import (GridError, GridField, ParabolicCylinder, SpaceTimeGrid, ball_mask, cylinder_samples,
                   resample, sup_inf_on, time_window)
from .problem import m_conjugate

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .problem import ProblemSpec


class HypothesisViolation(ValueError):
    """A diagnostic's precondition on the field does not hold."""


# ---------------------------------------------------------------------------
# pointwise pieces


def m_minus(matrix) -> float:
    """``min(lowest eigenvalue, 0)`` of a symmetric matrix."""
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if np.abs(a - a.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(a).max(initial=0.0)):
        raise ValueError("matrix is not symmetric")
    return min(float(np.linalg.eigvalsh(a)[0]), 0.0)


def m_minus_field(stack: np.ndarray) -> np.ndarray:
    """Vectorised ``m_minus`` over a stack of shape ``(..., n, n)``; no symmetry check."""
    stack = np.asarray(stack, dtype=float)
    return np.minimum(np.linalg.eigvalsh(stack)[..., 0], 0.0)


def truncate(u: GridField, c: float) -> GridField:
    """``(u - c)_+``."""
    return GridField(u.grid, np.maximum(u.values - c, 0.0))


def upwind_gradient_magnitude(values: np.ndarray, h: float, dim: int) -> np.ndarray:
    """Godunov gradient magnitude over the last ``dim`` axes; zero on the boundary ring."""
    values = np.asarray(values, dtype=float)
    lead = values.ndim - dim
    inner = (slice(None),) * lead + (slice(1, -1),) * dim
    g2 = np.zeros(values[inner].shape)
    for d in range(dim):
        ax = lead + d
        diff = np.diff(values, axis=ax) / h
        n = values.shape[ax]
        back = [slice(1, -1)] * dim
        fwd = [slice(1, -1)] * dim
        back[d] = slice(0, n - 2)
        fwd[d] = slice(1, n - 1)
        g2 += (np.maximum(diff[(slice(None),) * lead + tuple(back)], 0.0) ** 2
               + np.minimum(diff[(slice(None),) * lead + tuple(fwd)], 0.0) ** 2)
    out = np.zeros(values.shape)
    out[inner] = np.sqrt(g2)
    return out


# ---------------------------------------------------------------------------
# cutoffs


def smoothstep(s):
    """Quintic ``6s^5 - 15s^4 + 10s^3`` clamped to ``[0, 1]``; C^2 at both ends."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (s * (6 * s - 15) + 10)


def smoothstep_slope(s):
    s = np.clip(s, 0.0, 1.0)
    return 30 * s * s * (s - 1) ** 2


SMOOTHSTEP_MAX_SLOPE = 15.0 / 8.0


@dataclass(frozen=True)
class Cutoff:
    """Radial profile equal to 1 on ``B_plateau`` and 0 outside ``B_support``."""

    support: float
    plateau: float

    @property
    def width(self) -> float:
        return self.support - self.plateau

    @property
    def max_slope(self) -> float:
        return SMOOTHSTEP_MAX_SLOPE / self.width

    def profile(self, r):
        return 1.0 - smoothstep((np.asarray(r, dtype=float) - self.plateau) / self.width)

    def slope(self, r):
        return -smoothstep_slope((np.asarray(r, dtype=float) - self.plateau) / self.width) / self.width

    def sample(self, grid: SpaceTimeGrid, center: Sequence[float] | None = None) -> np.ndarray:
        x = grid.coords()
        center = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
        r = np.sqrt(sum((x[d] - center[d]) ** 2 for d in range(grid.dim)))
        out = self.profile(r)
        out[r >= self.support] = 0.0
        return out


def cutoff(support_radius: float, plateau_radius: float, gradient_bound: float) -> Cutoff:
    """Smoothstep cutoff; raises when the profile cannot meet ``gradient_bound``."""
    if not 0 <= plateau_radius < support_radius:
        raise ValueError("need 0 <= plateau_radius < support_radius")
    phi = Cutoff(float(support_radius), float(plateau_radius))
    if phi.max_slope > gradient_bound * (1 + 1e-12):
        raise ValueError(f"gradient bound {gradient_bound} below the profile slope {phi.max_slope}")
    return phi


def _phi_gradient_sq(phi: np.ndarray, h: float) -> np.ndarray:
    if phi.ndim == 1:
        return np.gradient(phi, h) ** 2
    return sum(g**2 for g in np.gradient(phi, h))


# ---------------------------------------------------------------------------
# energies


def _window(grid: SpaceTimeGrid, t_lo: float, t_hi: float) -> np.ndarray:
    idx = time_window(grid, t_lo, t_hi)
    if idx.size == 0:
        raise GridError(f"no time samples in [{t_lo}, {t_hi}]")
    return idx


def energy_parts(u: GridField, c: float, b: float, phi: np.ndarray, T: float, p: float,
                 t_hi: float = 0.0) -> tuple[float, float]:
    """``(sup term, dissipation term)`` of the truncated energy on ``[T, t_hi]``."""
    if b < 0:
        raise ValueError("b must be non-negative")
    grid = u.grid
    idx = _window(grid, T, t_hi)
    ustar = np.maximum(u.values[idx] - c, 0.0)
    phi2 = np.asarray(phi, dtype=float) ** 2
    vol = grid.cell_volume
    sup_term = float(max(vol * np.sum(phi2 * ustar[j] ** (b + 1)) for j in range(len(idx))))
    grad = upwind_gradient_magnitude(ustar, grid.h, grid.dim)
    diss = float(grid.dt * vol * np.sum(phi2 * ustar**b * grad**p))
    return sup_term, diss


def energy(u: GridField, c: float, b: float, phi: np.ndarray, T: float, p: float = 3.0,
           t_hi: float = 0.0) -> float:
    """``sup_t int phi^2 u*^(b+1) + iint phi^2 u*^b |grad u*|^p`` with ``u* = (u - c)_+``."""
    sup_term, diss = energy_parts(u, c, b, phi, T, p, t_hi)
    return sup_term + diss


def sigma_exponent(p: float) -> float:
    """``(1 - 2/p)^(-1)``, the threshold on ``b`` for the gradient-free forms."""
    return 1.0 / (1.0 - 2.0 / p)


@dataclass(frozen=True)
class EnergySides:
    """Sides of the truncated energy inequality.

    ``rhs_grad`` keeps the ``u*^(b-1) |grad u*|^2`` term, ``rhs_power``
    replaces it by ``u*^(b-sigma)``; the ``weak_*`` entries belong to the
    time-bracket version ``<d_t u*^(b+1), phi^2> + iint phi^2 u*^b |grad u*|^p``
    against ``(iint phi^2 u*^b f, iint u*^(b+1) |grad phi|^2, iint phi^2 u*^(b-sigma))``.
    """

    lhs: float
    rhs_grad: float
    rhs_power: float | None
    weak_lhs: float | None
    weak_bracket: float | None
    weak_rhs: tuple[float, float, float] | None
    prefactor: float
    sigma: float


def energy_inequality_sides(u: GridField, spec: ProblemSpec, b: float, phi: np.ndarray, S: float, T: float,
                            c: float = 0.0, forms: Sequence[str] | None = None,
                            t_hi: float = 0.0) -> EnergySides:
    """Raw sides of the three energy-inequality forms on ``[S, t_hi]`` / ``[T, t_hi]``.

    ``forms`` selects among ``"grad"``, ``"power"`` and ``"weak"``.  The last
    two need ``b > sigma = (1 - 2/p)^(-1)``: by default they are skipped
    below that threshold, and requesting them explicitly raises ``ValueError``.
    """
    return _inequality_sides(u, spec.p, spec.m, b, phi, S, T, c, forms, t_hi, spec)


def _inequality_sides(u, p, m, b, phi, S, T, c, forms, t_hi, spec=None) -> EnergySides:
    if not S < T < t_hi + 1e-12:
        raise ValueError("need S < T < t_hi")
    sigma = sigma_exponent(p)
    wanted = set(forms) if forms is not None else {"grad", "power", "weak"}
    high_b = b > sigma
    if forms is not None and wanted & {"power", "weak"} and not high_b:
        raise ValueError(f"the power and weak forms need b > sigma = {sigma!r}")
    grid = u.grid
    phi = np.asarray(phi, dtype=float)
    phi2 = phi**2
    support = phi > 0
    vol = grid.cell_volume
    m_star = m_conjugate(m)

    lhs = energy(u, c, b, phi, T, p, t_hi)
    idx = _window(grid, S, t_hi)
    ustar = np.maximum(u.values[idx] - c, 0.0)
    grad = upwind_gradient_magnitude(ustar, grid.h, grid.dim)
    dtv = grid.dt * vol
    grad_phi2 = _phi_gradient_sq(phi, grid.h)
    prefactor = (1 + 1 / (T - S)) * (float(phi.max()) ** 2 + float(grad_phi2.max()))
    bulk = dtv * np.sum(ustar[:, support] ** (b + 1))
    lp_term = (dtv * np.sum(ustar[:, support] ** (b * m_star))) ** (1 / m_star)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = np.where(ustar > 0, ustar ** (b - 1) * grad**2, 0.0)
    rhs_grad = prefactor * (bulk + dtv * np.sum(low[:, support]) + lp_term)
    rhs_power = weak_lhs = weak_bracket = weak_rhs = None
    if high_b and "power" in wanted:
        rhs_power = prefactor * (bulk + dtv * np.sum(ustar[:, support] ** (b - sigma)) + lp_term)
    if high_b and "weak" in wanted and spec is not None:
        weak_bracket = vol * float(np.sum(phi2 * (ustar[-1] ** (b + 1) - ustar[0] ** (b + 1))))
        weak_lhs = weak_bracket + dtv * float(np.sum(phi2 * ustar**b * grad**p))
        if spec.source.time_dependent:
            f = np.stack([spec.source.sample(grid, j) for j in idx])
        else:
            f = spec.source.sample(grid)
        weak_rhs = (dtv * float(np.sum(phi2 * ustar**b * f)),
                  dtv * float(np.sum(ustar ** (b + 1) * grad_phi2)),
                  dtv * float(np.sum(phi2 * ustar ** (b - sigma))))
    return EnergySides(lhs, float(rhs_grad), None if rhs_power is None else float(rhs_power), weak_lhs, weak_bracket, weak_rhs,
                       float(prefactor), sigma)


# ---------------------------------------------------------------------------
# measures


def _shift(cyl: ParabolicCylinder, center: Sequence[float] | None) -> ParabolicCylinder:
    if center is None:
        return cyl
    t0, x0 = float(center[0]), np.atleast_1d(np.asarray(center[1], dtype=float))
    return ParabolicCylinder(cyl.t_lo + t0, cyl.t_hi + t0, cyl.radius, tuple(np.add(cyl.center, x0)))


def levelset_measure(u: GridField, threshold: float, cyl: ParabolicCylinder, center=None,
                     above: bool = True, inclusive: bool = False) -> float:
    """``dt h^n`` times the number of samples in ``cyl`` with ``u > threshold``.

    ``inclusive`` switches to ``>=``; ``above=False`` counts the other side
    (``<`` or, with ``inclusive``, ``<=``).
    """
    grid = u.grid
    idx, mask = cylinder_samples(grid, _shift(cyl, center))
    if idx.size == 0 or not mask.any():
        return 0.0
    block = u.values[idx][:, mask]
    if above:
        hits = block >= threshold if inclusive else block > threshold
    else:
        hits = block <= threshold if inclusive else block < threshold
    return float(grid.dt * grid.cell_volume * np.count_nonzero(hits))


def cylinder_sample_measure(grid: SpaceTimeGrid, cyl: ParabolicCylinder, center=None) -> float:
    idx, mask = cylinder_samples(grid, _shift(cyl, center))
    return float(grid.dt * grid.cell_volume * idx.size * np.count_nonzero(mask))


def interstitial_measure(u: GridField, center=None) -> tuple[float, float, float]:
    """``(|{u <= 0} n Q2|, |{0 < u < 1} n Q2|, |{u >= 1} n Q2bar|)``."""
    dim = u.grid.dim
    q2, q2bar = ParabolicCylinder.q2(dim), ParabolicCylinder.q2bar(dim)
    below = levelset_measure(u, 0.0, q2, center, above=False, inclusive=True)
    not_below_one = levelset_measure(u, 1.0, q2, center, above=False)
    between = not_below_one - below
    above = levelset_measure(u, 1.0, q2bar, center, above=True, inclusive=True)
    return below, between, above


def k0_levels(mu0: float, q2_measure: float) -> int:
    """Smallest integer strictly greater than ``q2_measure / mu0``."""
    if not mu0 > 0:
        raise ValueError("mu0 must be positive")
    return math.floor(q2_measure / mu0) + 1


# ---------------------------------------------------------------------------
# first De Giorgi lemma


@dataclass(frozen=True)
class TruncationLadder:
    k_max: int

    def height(self, k: int) -> float:
        return 0.5 - 2.0 ** (-k - 1)

    def radius(self, k: int) -> float:
        return 1.0 + 2.0**-k

    def time(self, k: int) -> float:
        return -1.0 - 2.0**-k

    def gradient_bound(self, k: int) -> float:
        return 4.0 * 2.0**k

    def cutoff(self, k: int) -> Cutoff:
        return cutoff(self.radius(k), self.radius(k + 1), self.gradient_bound(k))


@dataclass(frozen=True)
class DG1Config:
    """Exponents of the first-lemma iteration, kept for reporting."""

    p: float
    m: float
    n: int
    b: float = 1.0
    beta_param: float = 1.0
    p_prime: float = 0.0
    q: float = 0.0
    sigma_exp: float = 0.0
    m_star: float = 0.0
    delta0: float | None = None

    @classmethod
    def for_problem(cls, p: float, m: float, n: int, beta: float | None = None,
                    delta0: float | None = None) -> DG1Config:
        if n == 1:
            beta = 1.0
            p_prime = p
        else:
            lo, hi = max(0.0, 2 / n - 2 / p), min(1.0, 2 / n)
            beta = 0.5 * (lo + hi) if beta is None else beta
            if not 0 < 1 / n - beta / 2 < 1 / p or not 0 < beta <= 1:
                raise ValueError(f"beta={beta} outside the admissible window for n={n}, p={p}")
            p_prime = 1.0 / (beta / 2 + 1 / p - 1 / n)
        q = p + (1 - p / p_prime) * 2 / (1 + beta)
        return cls(p, m, n, 1.0, beta, p_prime, q, sigma_exponent(p), m_conjugate(m), delta0)


@dataclass(frozen=True)
class EnergyLevel:
    k: int
    height: float
    measure: float
    energy: float
    lhs: float
    rhs_grad: float
    rhs_power: float | None
    rhs_weak: float | None


# column names fixed by the report format; rhs6/7/8 are the grad, power and weak sides
ENERGY_COLUMNS = ("k", "C_k", "measure", "E_k", "lhs", "rhs6", "rhs7", "rhs8")


def _opt(x: float | None) -> str:
    return "" if x is None else repr(x)


@dataclass
class EnergyReport:
    levels: list[EnergyLevel] = field(default_factory=list)
    sup_q1: float = float("nan")
    conclusion_holds: bool = False
    measure_q2bar: float = 0.0
    measure_hypothesis: bool | None = None

    def energies(self) -> list[float]:
        return [lv.energy for lv in self.levels]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ENERGY_COLUMNS)
        for lv in self.levels:
            w.writerow([lv.k, repr(lv.height), repr(lv.measure), repr(lv.energy), repr(lv.lhs), repr(lv.rhs_grad),
                        _opt(lv.rhs_power), _opt(lv.rhs_weak)])
        return buf.getvalue()


def dg1_iterate(u: GridField, cfg: DG1Config, ladder: TruncationLadder, center=None) -> EnergyReport:
    """Energies ``E_k`` of the truncation ladder and the ``sup_{Q1} u <= 1/2`` check.

    Raises :class:`HypothesisViolation` when ``u > 1`` somewhere on ``Q2bar``.
    """
    grid = u.grid
    dim = grid.dim
    q2bar = _shift(ParabolicCylinder.q2bar(dim), center)
    top, _ = sup_inf_on(u, q2bar)
    if top > 1.0:
        raise HypothesisViolation(f"u reaches {top!r} > 1 on Q2bar")
    t0 = 0.0 if center is None else float(center[0])
    x0 = None if center is None else np.atleast_1d(np.asarray(center[1], dtype=float))
    report = EnergyReport()
    for k in range(ladder.k_max + 1):
        c = ladder.height(k)
        phi = ladder.cutoff(k).sample(grid, x0)
        sides = _inequality_sides(u, cfg.p, cfg.m, cfg.b, phi, t0 + ladder.time(k), t0 + ladder.time(k + 1),
                                  c, ("grad", "power") if cfg.b > cfg.sigma_exp else ("grad",), t0)
        cyl = ParabolicCylinder(ladder.time(k), 0.0, ladder.radius(k), (0.0,) * dim)
        meas = levelset_measure(u, c, cyl, center)
        report.levels.append(EnergyLevel(k, c, meas, sides.lhs, sides.lhs, sides.rhs_grad, sides.rhs_power, None))
    report.sup_q1 = sup_inf_on(u, _shift(ParabolicCylinder.q1(dim), center))[0]
    report.conclusion_holds = report.sup_q1 <= 0.5
    report.measure_q2bar = levelset_measure(u, 0.0, ParabolicCylinder.q2bar(dim), center)
    if cfg.delta0 is not None:
        report.measure_hypothesis = report.measure_q2bar <= cfg.delta0
    return report


# ---------------------------------------------------------------------------
# oscillation decay


@dataclass(frozen=True)
class OscillationLevel:
    k: int
    scale: float
    osc: float
    t_lo: float
    radius: float
    samples: int


OSC_COLUMNS = ("k", "scale", "osc", "log_scale", "log_osc", "t_lo", "radius", "samples")


@dataclass
class OscillationProfile:
    alpha1: float
    beta1: float
    p: float
    levels: list[OscillationLevel] = field(default_factory=list)
    gamma: float = float("nan")
    intercept: float = float("nan")
    residual: float = float("nan")
    degenerate: bool = True
    truncated: bool = False
    k_requested: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(OSC_COLUMNS)
        for lv in self.levels:
            ls = math.log(lv.scale)
            lo = math.log(lv.osc) if lv.osc > 0 else float("-inf")
            w.writerow([lv.k, repr(lv.scale), repr(lv.osc), repr(ls), repr(lo), repr(lv.t_lo), repr(lv.radius),
                        lv.samples])
        w.writerow(["fit", repr(self.gamma), repr(self.intercept), repr(self.residual),
                    int(self.degenerate), int(self.truncated), "", ""])
        return buf.getvalue()


def fit_holder_exponent(scales, oscs) -> tuple[float, float, float, bool]:
    """Least-squares slope of ``log osc`` against ``log scale``.

    Returns ``(gamma, intercept, rms log residual, degenerate)``; the fit is
    degenerate with fewer than two levels, a vanishing oscillation or a flat
    scale sequence.
    """
    scales = np.asarray(scales, dtype=float)
    oscs = np.asarray(oscs, dtype=float)
    if scales.size < 2 or np.any(oscs <= 0) or np.any(scales <= 0):
        return float("nan"), float("nan"), float("nan"), True
    x, y = np.log(scales), np.log(oscs)
    if np.ptp(x) == 0:
        return float("nan"), float("nan"), float("nan"), True
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), resid, not math.isfinite(slope)


def oscillation_profile(u: GridField, alpha1: float, beta1: float, k_max: int, p: float = 3.0,
                        center=None, min_samples: int = 8) -> OscillationProfile:
    """Oscillations over ``Q_k = [-(alpha1^(p-1) beta1^p)^k, 0] x B_(beta1^k)`` and the fitted exponent."""
    if not alpha1 > 1 or not 0 < beta1 < 1:
        raise ValueError("need alpha1 > 1 and 0 < beta1 < 1")
    grid = u.grid
    tau = alpha1 ** (p - 1) * beta1**p
    if center is None:
        center = (0.0, (0.0,) * grid.dim)
    prof = OscillationProfile(alpha1, beta1, p, k_requested=k_max)
    for k in range(k_max + 1):
        cyl = _shift(ParabolicCylinder(-(tau**k), 0.0, beta1**k, (0.0,) * grid.dim), center)
        idx, mask = cylinder_samples(grid, cyl)
        n = int(idx.size * np.count_nonzero(mask))
        if n < min_samples:
            prof.truncated = True
            break
        hi, lo = sup_inf_on(u, cyl)
        prof.levels.append(OscillationLevel(k, max(tau**k, beta1**k), hi - lo, cyl.t_lo, cyl.radius, n))
    g, c, r, degenerate = fit_holder_exponent([lv.scale for lv in prof.levels], [lv.osc for lv in prof.levels])
    prof.gamma, prof.intercept, prof.residual, prof.degenerate = g, c, r, degenerate
    return prof


def theoretical_gamma(alpha1: float, beta1: float, p: float) -> float:
    """``-log(alpha1) / log(alpha1^(p-1) beta1^p)``."""
    return -math.log(alpha1) / math.log(alpha1 ** (p - 1) * beta1**p)


# ---------------------------------------------------------------------------
# majority split


@dataclass
class MajorityResult:
    label: str
    v: GridField
    nonpositive_measure: float
    total_measure: float


def q_small(k0: int, e1: float, e2: float) -> ParabolicCylinder:
    """``[-4 * 2^(k0 e1/e2), 0] x B_(2 * 2^(k0/e2))``."""
    return ParabolicCylinder(-4.0 * 2.0 ** (k0 * e1 / e2), 0.0, 2.0 * 2.0 ** (k0 / e2))


def normalized_q3_grid(dim: int, h: float = 1 / 32, dt: float = 1 / 32) -> SpaceTimeGrid:
    """Grid on ``[-4, 0] x [-3, 3]^n``."""
    return SpaceTimeGrid.from_bounds([-3.0] * dim, [3.0] * dim, h, dt, -4.0, 0.0)


def classify_majority(u: GridField, small: ParabolicCylinder, center=None,
                      target: SpaceTimeGrid | None = None) -> MajorityResult:
    """Mostly-negative / mostly-positive split and the rescaled field ``v`` on ``Q3``.

    ``small`` is read as ``[-4 s_t, 0] x B_(2 s_x)``; the rescaling is
    ``v(t, x) = u(t0 + s_t t, x0 + s_x x)``, with ``v(t, x) = -u(t0 + s_t (-4 - t), x0 + s_x x)``
    in the mostly-positive branch.  Ties count as mostly negative.
    """
    grid = u.grid
    dim = grid.dim
    s_t = -small.t_lo / 4.0
    s_x = small.radius / 2.0
    t0 = grid.t_end if center is None else float(center[0])
    x0 = np.zeros(dim) if center is None else np.atleast_1d(np.asarray(center[1], dtype=float))
    cyl = _shift(small, (t0, x0))
    idx, mask = cylinder_samples(grid, cyl)
    total = idx.size * np.count_nonzero(mask)
    if total == 0:
        raise GridError("Q_small contains no samples")
    nonpos = int(np.count_nonzero(u.values[idx][:, mask] <= 0))
    label = "mostly-negative" if 2 * nonpos >= total else "mostly-positive"
    target = target or normalized_q3_grid(dim)
    x_shape = (dim,) + (1,) * (dim + 1)
    x0r = x0.reshape(x_shape)
    if label == "mostly-negative":
        v = resample(u, target, lambda t, x: (t0 + s_t * t, x0r + s_x * x))
    else:
        v = resample(u, target, lambda t, x: (t0 + s_t * (-4.0 - t), x0r + s_x * x), scale=-1.0)
    unit = grid.dt * grid.cell_volume
    return MajorityResult(label, v, nonpos * unit, total * unit)
