import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import special_ortho_group

from hjdg.diagnostics import (DG1Config, HypothesisViolation, TruncationLadder, classify_majority, cutoff, dg1_iterate,
                              energy, energy_inequality_sides, energy_parts, fit_holder_exponent, interstitial_measure,
                              k0_levels, levelset_measure, m_minus, oscillation_profile, sigma_exponent,
                              theoretical_gamma, truncate)
from hjdg.grid import GridField, ParabolicCylinder, SpaceTimeGrid
from hjdg.problem import DataSpec, DiffusionSpec, ProblemSpec, SourceSpec
from hjdg.solver import solve


def q3_grid(h=1 / 32, dt=1 / 32, dim=1):
    return SpaceTimeGrid.from_bounds([-3] * dim, [3] * dim, h, dt, -4, 0)


def field(grid, fn):
    return GridField.from_function(grid, fn)


def closed_form_min_eig(a):
    """Smallest eigenvalue by the quadratic formula (2x2) or the trigonometric cubic solution (3x3)."""
    if a.shape == (2, 2):
        mean = 0.5 * (a[0, 0] + a[1, 1])
        return mean - math.hypot(0.5 * (a[0, 0] - a[1, 1]), a[0, 1])
    q = np.trace(a) / 3
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    p2 = sum((a[i, i] - q) ** 2 for i in range(3)) + 2 * p1
    p = math.sqrt(p2 / 6)
    if p == 0:
        return q
    r = np.linalg.det((a - q * np.eye(3)) / p) / 2
    phi = math.acos(min(1.0, max(-1.0, r))) / 3
    return q + 2 * p * math.cos(phi + 2 * math.pi / 3)


class TestTruncate:
    def test_values(self):
        g = q3_grid()
        assert np.all(truncate(GridField.constant(g, 1.0), 0.5).values == 0.5)
        assert np.all(truncate(GridField.constant(g, -1.0), 0.3).values == 0)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, 2), st.floats(0, 2), st.integers(0, 2**31 - 1))
    def test_semigroup(self, a, b, seed):
        g = q3_grid(1 / 4, 1 / 4)
        u = GridField(g, np.random.default_rng(seed).normal(size=g.shape))
        lhs = truncate(truncate(u, a), b).values
        rhs = truncate(u, a + b).values
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=4 * np.finfo(float).eps * (1 + a + b))


class TestMMinus:
    @pytest.mark.parametrize("mat, expected", [
        (np.diag([2.0, 3.0]), 0.0), (np.diag([1.0, -2.0]), -2.0), (np.array([[0.0, 1], [1, 0]]), -1.0),
    ])
    def test_examples(self, mat, expected):
        assert m_minus(mat) == pytest.approx(expected, abs=1e-15)

    def test_asymmetric(self):
        with pytest.raises(ValueError):
            m_minus(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @pytest.mark.parametrize("n", [2, 3])
    def test_closed_form(self, n):
        rng = np.random.default_rng(n)
        for _ in range(200):
            a = rng.normal(size=(n, n))
            a = a + a.T
            assert m_minus(a) == pytest.approx(min(closed_form_min_eig(a), 0.0), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0, 5), st.sampled_from([2, 3, 4]))
    def test_properties(self, seed, shift, n):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(n, n))
        a = a + a.T
        q = special_ortho_group.rvs(n, random_state=rng)
        assert m_minus(a) <= 0
        assert m_minus(a + shift * np.eye(n)) >= m_minus(a) - 1e-12
        rotated = q.T @ a @ q
        assert m_minus(0.5 * (rotated + rotated.T)) == pytest.approx(m_minus(a), abs=1e-10)


class TestCutoff:
    def test_center_and_outside(self):
        phi = cutoff(2, 1.5, 4)
        assert phi.profile(0.0) == 1.0
        assert phi.profile(2.0) == 0.0 and phi.profile(3.0) == 0.0

    def test_slope_bounds(self):
        phi = cutoff(2, 1.5, 4)
        r = np.linspace(1.5, 2, 200_001)
        slope = np.abs(np.gradient(phi.profile(r), r)).max()
        assert 2 / 0.5 * 0.75 <= slope <= 4

    def test_infeasible(self):
        with pytest.raises(ValueError):
            cutoff(2, 1.5, 3.0)

    def test_ladder_cutoffs_feasible(self):
        ladder = TruncationLadder(10)
        for k in range(10):
            assert ladder.cutoff(k).max_slope <= ladder.gradient_bound(k)


class TestLadder:
    def test_values(self):
        lad = TruncationLadder(5)
        assert lad.height(0) == 0 and lad.time(0) == -2 and lad.radius(0) == 2
        hs = [lad.height(k) for k in range(6)]
        assert all(a < b < 0.5 for a, b in zip(hs, hs[1:]))
        ts = [lad.time(k) for k in range(6)]
        assert all(a < b < -1 for a, b in zip(ts, ts[1:]))

    def test_dg1_config(self):
        cfg = DG1Config.for_problem(3, 2, 1)
        assert cfg.beta_param == 1 and cfg.p_prime == 3
        assert (1 + cfg.beta_param) * cfg.q == pytest.approx(2 * cfg.p)
        cfg2 = DG1Config.for_problem(3, 2, 2)
        assert (1 + cfg2.beta_param) * cfg2.q == pytest.approx(cfg2.p + 2 * cfg2.p / 2)
        assert 0 < 1 / 2 - cfg2.beta_param / 2 < 1 / 3


class TestEnergy:
    def test_below_level(self):
        g = q3_grid()
        phi = cutoff(2, 1.5, 4).sample(g)
        assert energy(GridField.constant(g, -1.0), 0.0, 1.0, phi, -2) == 0

    def test_constant_field(self):
        h = 1 / 256
        g = q3_grid(h, 1 / 8)
        phi = cutoff(2, 1.5, 4)
        expected = 2 * quad(lambda r: float(phi.profile(r)) ** 2, 0, 2, points=[1.5])[0]
        assert energy(GridField.constant(g, 1.0), 0.0, 1.0, phi.sample(g), -2) == pytest.approx(expected, abs=2 * h)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0, 3), st.integers(0, 2**31 - 1))
    def test_homogeneity(self, b, seed):
        # doubling u* scales the sup term by 2^(b+1) and the dissipation term by 2^(b+p)
        g = q3_grid(1 / 16, 1 / 8)
        rng = np.random.default_rng(seed)
        ustar = 1 + rng.random(g.shape)
        phi = cutoff(2, 1.5, 4).sample(g)
        s1, d1 = energy_parts(GridField(g, ustar), 0.0, b, phi, -2, 3.0)
        s2, d2 = energy_parts(GridField(g, 2 * ustar), 0.0, b, phi, -2, 3.0)
        assert s2 == pytest.approx(2 ** (b + 1) * s1, rel=1e-12)
        assert d2 == pytest.approx(2 ** (b + 3) * d1, rel=1e-12)

    def test_monotone_in_cutoff_and_level(self):
        g = q3_grid(1 / 16, 1 / 8)
        u = field(g, lambda t, x: np.sin(3 * x[0]) + 0.1 * t)
        small, big = cutoff(1.5, 1.0, 4).sample(g), cutoff(2, 1.5, 4).sample(g)
        assert energy(u, 0.0, 1.0, small, -2) <= energy(u, 0.0, 1.0, big, -2)
        assert energy(u, 0.2, 1.0, big, -2) <= energy(u, 0.0, 1.0, big, -2)


def spec_for(grid, p=3.0, eps=0.05):
    return ProblemSpec(p, 1.0, eps, 2.0, eps, DiffusionSpec.scalar(eps, grid.dim), SourceSpec(), grid,
                       DataSpec("constant", {"value": 0.0}))


class TestInequalitySides:
    def test_below_level_all_zero(self):
        g = q3_grid()
        phi = cutoff(2, 1.5, 4).sample(g)
        sides = energy_inequality_sides(GridField.constant(g, -1.0), spec_for(g, p=6), 4.0, phi, -3, -2)
        assert sides.lhs == 0 and sides.rhs_grad == 0 and sides.rhs_power == 0
        assert sides.weak_lhs == 0 and sides.weak_rhs == (0.0, 0.0, 0.0)

    def test_sigma(self):
        assert sigma_exponent(4) == 2

    def test_low_b_only_grad(self):
        g = q3_grid()
        phi = cutoff(2, 1.5, 4).sample(g)
        u = field(g, lambda t, x: np.cos(x[0]) + 0 * t)
        sides = energy_inequality_sides(u, spec_for(g, p=4), 1.0, phi, -3, -2)
        assert sides.rhs_power is None and sides.weak_lhs is None
        with pytest.raises(ValueError):
            energy_inequality_sides(u, spec_for(g, p=4), 1.0, phi, -3, -2, forms=("power",))

    def test_time_order(self):
        g = q3_grid()
        with pytest.raises(ValueError):
            energy_inequality_sides(GridField.constant(g, 1.0), spec_for(g), 1.0, np.ones(g.cells), -1, -2)


class TestMeasures:
    def test_levelset(self):
        h = dt = 1 / 32
        g = q3_grid(h, dt)
        cyl = ParabolicCylinder.q2bar()
        assert abs(levelset_measure(GridField.constant(g, 1.0), 0, cyl) - 8) <= 4 * (h + dt)
        assert levelset_measure(GridField.constant(g, -1.0), 0, cyl) == 0
        half = levelset_measure(field(g, lambda t, x: x[0] + 0 * t), 0, cyl)
        assert abs(half - 4) <= 4 * (h + dt)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-1, 1), st.floats(0, 1), st.integers(0, 2**31 - 1))
    def test_levelset_properties(self, a, gap, seed):
        g = q3_grid(1 / 8, 1 / 8)
        u = GridField(g, np.random.default_rng(seed).normal(size=g.shape))
        cyl = ParabolicCylinder.q2bar()
        assert levelset_measure(u, a + gap, cyl) <= levelset_measure(u, a, cyl)
        left = ParabolicCylinder(-2, -1.0625, 2)
        right = ParabolicCylinder(-1, 0, 2)
        assert levelset_measure(u, a, left) + levelset_measure(u, a, right) == pytest.approx(
            levelset_measure(u, a, cyl), abs=1e-12)

    def test_interstitial(self):
        h = dt = 1 / 32
        g = q3_grid(h, dt)
        tol = 8 * (h + dt)
        below, between, above = interstitial_measure(GridField.constant(g, 0.5))
        assert below == 0 and above == 0 and abs(between - 16) <= tol
        below, between, above = interstitial_measure(GridField.constant(g, 2.0))
        assert between == 0 and abs(above - 8) <= tol
        below, _, _ = interstitial_measure(field(g, lambda t, x: 2 * x[0] + 0 * t))
        assert abs(below - 8) <= tol

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_interstitial_total(self, seed):
        g = q3_grid(1 / 8, 1 / 8)
        u = GridField(g, np.random.default_rng(seed).normal(size=g.shape))
        below, between, above = interstitial_measure(u)
        assert below + between + above <= 16 + 8 + 1e-12

    @pytest.mark.parametrize("mu0, expected", [(8, 3), (5, 4), (16, 2)])
    def test_k0_levels(self, mu0, expected):
        assert k0_levels(mu0, 16) == expected

    def test_k0_levels_invalid(self):
        with pytest.raises(ValueError):
            k0_levels(0, 16)


class TestDG1:
    def test_negative_field(self):
        g = q3_grid()
        report = dg1_iterate(GridField.constant(g, -1.0), DG1Config.for_problem(3, 2, 1), TruncationLadder(4))
        assert all(e == 0 for e in report.energies())
        assert report.conclusion_holds

    def test_unit_field(self):
        g = q3_grid()
        report = dg1_iterate(GridField.constant(g, 1.0), DG1Config.for_problem(3, 2, 1, delta0=0.1),
                             TruncationLadder(4))
        assert all(e > 0 for e in report.energies())
        assert report.measure_hypothesis is False
        assert not report.conclusion_holds

    def test_violation(self):
        g = q3_grid()
        with pytest.raises(HypothesisViolation):
            dg1_iterate(GridField.constant(g, 1.5), DG1Config.for_problem(3, 2, 1), TruncationLadder(2))

    def test_csv(self):
        g = q3_grid()
        report = dg1_iterate(GridField.constant(g, 1.0), DG1Config.for_problem(3, 2, 1), TruncationLadder(3))
        lines = report.to_csv().splitlines()
        assert lines[0] == "k,C_k,measure,E_k,lhs,rhs6,rhs7,rhs8"
        assert len(lines) == 5

    def test_small_bump_decays(self):
        grid = SpaceTimeGrid.from_bounds([-3], [3], 1 / 64, 1 / 32, -4, 0)
        spec = ProblemSpec(3.0, 1.0, 0.01, 2.0, 0.01, DiffusionSpec.scalar(0.01, 1), SourceSpec(), grid,
                           DataSpec("bump", {"radius": 0.05, "base": -1.0, "height": 1.9}))
        u = solve(spec)
        report = dg1_iterate(u, DG1Config.for_problem(3, 2, 1), TruncationLadder(5))
        energies = report.energies()
        assert all(b <= a + 1e-15 for a, b in zip(energies, energies[1:]))
        assert report.conclusion_holds


class TestOscillation:
    def test_constant_degenerate(self):
        g = q3_grid()
        prof = oscillation_profile(GridField.constant(g, 3.0), 8 / 7, 0.5, 4)
        assert prof.degenerate and all(lv.osc == 0 for lv in prof.levels)

    def test_linear_exact(self):
        g = SpaceTimeGrid(1, (96,), 1 / 32, 1 / 32, -1, 0, (-1.5,))
        prof = oscillation_profile(field(g, lambda t, x: x[0] + 0 * t), 8 / 7, 0.5, 4)
        # sample sup/inf sit h/2 inside each ball: osc_k = 2 (0.5^k - h/2)
        for lv in prof.levels:
            assert lv.osc == pytest.approx(2 * (0.5**lv.k - 1 / 64))
        assert prof.levels[0].osc > prof.levels[-1].osc

    @pytest.mark.parametrize("gamma0", [0.25, 0.5, 0.9])
    def test_synthetic(self, gamma0):
        k = np.arange(8)
        g, _, resid, degenerate = fit_holder_exponent(2.0**-k, 2.0 ** (-gamma0 * k))
        assert not degenerate and abs(g - gamma0) <= 1e-9 and resid <= 1e-12

    def test_truncation_flag(self):
        g = q3_grid()
        prof = oscillation_profile(field(g, lambda t, x: x[0] + 0 * t), 8 / 7, 0.5, 12)
        assert prof.truncated and len(prof.levels) < 13

    def test_bad_params(self):
        with pytest.raises(ValueError):
            oscillation_profile(GridField.constant(q3_grid(), 0.0), 1.0, 0.5, 3)

    @pytest.mark.parametrize("gamma0", [0.25, 0.5])
    def test_power_field(self, gamma0):
        h = 1 / 1024
        g = SpaceTimeGrid(1, (2048,), h, 1 / 8, -1, 0, (-1.0 + h / 2,))  # a sample sits on x = 0
        u = field(g, lambda t, x: np.abs(x[0]) ** gamma0 + 0 * t)
        prof = oscillation_profile(u, 8 / 7, 0.5, 6)
        assert abs(prof.gamma - gamma0) <= 0.05

    def test_theoretical_gamma(self):
        assert theoretical_gamma(8 / 7, 0.1, 3) == pytest.approx(0.0201, abs=1e-4)

    def test_csv_fit_row(self):
        g = SpaceTimeGrid(1, (96,), 1 / 32, 1 / 32, -1, 0, (-1.5,))
        prof = oscillation_profile(field(g, lambda t, x: x[0] + 0 * t), 8 / 7, 0.5, 4)
        rows = prof.to_csv().splitlines()
        assert len(rows) == 1 + len(prof.levels) + 1 and rows[-1].startswith("fit,")


class TestMajority:
    small = ParabolicCylinder(-1, 0, 1)

    def test_negative(self):
        g = q3_grid()
        res = classify_majority(GridField.constant(g, -1.0), self.small)
        assert res.label == "mostly-negative" and np.all(res.v.values == -1)

    def test_positive(self):
        g = q3_grid()
        res = classify_majority(GridField.constant(g, 1.0), self.small)
        assert res.label == "mostly-positive" and np.all(res.v.values == -1)

    def test_tie(self):
        g = q3_grid()
        res = classify_majority(field(g, lambda t, x: x[0] + 0 * t), self.small)
        assert 2 * res.nonpositive_measure == pytest.approx(res.total_measure)
        assert res.label == "mostly-negative"

    def test_time_reflection(self):
        g = q3_grid()
        res = classify_majority(field(g, lambda t, x: 1 + 0.01 * t + 0 * x[0]), ParabolicCylinder(-4, 0, 2))
        # v(t) = -u(-4 - t) = -(1 + 0.01 (-4 - t))
        t = res.v.grid.times
        np.testing.assert_allclose(res.v.values[:, 10], -(1 + 0.01 * (-4 - t)), atol=1e-12)
