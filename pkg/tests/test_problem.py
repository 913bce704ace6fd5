import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjdg.grid import ParabolicCylinder, SpaceTimeGrid
from hjdg.problem import (DataSpec, DiffusionSpec, DivergentNormError, HamiltonianSpec, ProblemSpec, SourceSpec,
                          lm_norm, m_conjugate, problem_from_config, singular_box_integral, validate_problem)


def unit_grid(h=1 / 64):
    return SpaceTimeGrid.from_bounds([0], [1], h, 0.5, 0, 1)


def make_spec(p=3.0, m=2.0, eps=0.01, lam=1.0, source=None, diffusion=None, grid=None):
    grid = grid or SpaceTimeGrid.from_bounds([-1], [1], 1 / 32, 1 / 8, 0, 1)
    return ProblemSpec(p, lam, eps, m, eps, diffusion or DiffusionSpec.scalar(eps, grid.dim),
                       source or SourceSpec(), grid, DataSpec("constant", {"value": 0.0}))


class TestLmNorm:
    def test_constant_unit_measure(self):
        assert lm_norm(SourceSpec("constant", c=-0.7), 2, unit_grid()) == pytest.approx(0.7, rel=1e-12)

    def test_zero(self):
        assert lm_norm(SourceSpec(), 2, unit_grid()) == 0.0

    @pytest.mark.parametrize("h", [1 / 16, 1 / 64, 1 / 256])
    def test_singular_quarter_power(self, h):
        g = SpaceTimeGrid.from_bounds([-1], [1], h, 0.5, 0, 1)
        f = SourceSpec("radial", c=1.0, a=0.25, x0=(0.0,))
        assert abs(lm_norm(f, 2, g) - 2.0) <= 1e-3

    def test_divergent(self):
        f = SourceSpec("radial", c=1.0, a=0.5, x0=(0.0,))
        with pytest.raises(DivergentNormError):
            lm_norm(f, 2, unit_grid())

    def test_m_below_one(self):
        with pytest.raises(ValueError):
            lm_norm(SourceSpec("constant", c=1.0), 0.5, unit_grid())

    def test_2d_singular(self):
        # ∫_{[-1,1]^2} |x|^{-1} dx = 8 asinh(1)
        g = SpaceTimeGrid.from_bounds([-1, -1], [1, 1], 1 / 32, 0.5, 0, 1)
        f = SourceSpec("radial", c=1.0, a=0.5, x0=(0.0, 0.0))
        assert lm_norm(f, 2, g) == pytest.approx(math.sqrt(8 * math.asinh(1.0)), abs=1e-3)

    def test_corner_integral(self):
        assert singular_box_integral([0], [1], [0], 0.5) == pytest.approx(2.0, rel=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-5, 5), st.sampled_from([1.5, 2.0, 3.0]))
    def test_homogeneous(self, c, m):
        g = SpaceTimeGrid.from_bounds([-1], [1], 1 / 32, 0.5, 0, 1)
        base = SourceSpec("radial", c=1.0, a=0.25, x0=(0.1,))
        scaled = SourceSpec("radial", c=c, a=0.25, x0=(0.1,))
        assert lm_norm(scaled, m, g) == pytest.approx(abs(c) * lm_norm(base, m, g), rel=1e-12, abs=1e-300)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.2, 1.9), st.floats(0.05, 1.0))
    def test_region_monotone(self, r, dt):
        g = SpaceTimeGrid.from_bounds([-2], [2], 1 / 32, 1 / 8, -2, 0)
        f = SourceSpec("radial", c=1.0, a=0.25, x0=(0.0,))
        small = lm_norm(f, 2, g, ParabolicCylinder(-dt, 0, r))
        big = lm_norm(f, 2, g, ParabolicCylinder(-2, 0, 2))
        assert small <= big * (1 + 1e-12)


class TestConjugate:
    @pytest.mark.parametrize("m, expected", [(2, 2), (3, 1.5), (1.5, 3)])
    def test_values(self, m, expected):
        assert m_conjugate(m) == pytest.approx(expected)

    def test_rejects_one(self):
        with pytest.raises(ValueError):
            m_conjugate(1)

    @given(st.floats(1.01, 100))
    def test_involution(self, m):
        assert m_conjugate(m_conjugate(m)) == pytest.approx(m, rel=1e-9)


class TestValidate:
    def test_valid(self):
        assert validate_problem(make_spec()) == []

    def test_p_two(self):
        assert any("p must exceed 2" in v for v in validate_problem(make_spec(p=2)))

    def test_m_below_threshold(self):
        assert any("m must exceed" in v for v in validate_problem(make_spec(m=1.5)))

    def test_source_too_large(self):
        assert validate_problem(make_spec(source=SourceSpec("constant", c=3.0)))

    def test_eps_out_of_range(self):
        assert validate_problem(make_spec(eps=2.0))


class TestDiffusion:
    def test_checkerboard_samples_are_exact(self):
        g = SpaceTimeGrid.from_bounds([-1, -1], [1, 1], 1 / 16, 0.5, 0, 1)
        a, b = np.array([[0.1, 0.02], [0.02, 0.05]]), np.diag([0.3, 0.2])
        d = DiffusionSpec.checkerboard(a, b, 3 / 16, 2, (-1, -1))
        mats = d.sample(g).reshape(2, 2, -1)
        first = np.all(mats == a[:, :, None], axis=(0, 1))
        second = np.all(mats == b[:, :, None], axis=(0, 1))
        assert np.all(first | second) and first.any() and second.any()

    def test_single_cell_blocks_alternate(self):
        g = SpaceTimeGrid.from_bounds([0], [1], 1 / 8, 0.5, 0, 1)
        d = DiffusionSpec.checkerboard(1.0, 2.0, 1 / 8, 1, (0.0,))
        assert d.sample(g)[0, 0].tolist() == [1, 2] * 4

    def test_flip(self):
        d = DiffusionSpec.scalar(0.1, 1)
        assert not d.flipped().is_psd()
        assert d.flipped().flipped().is_monotone()

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            DiffusionSpec("scalar", (np.array([[1.0, 0.5], [0.0, 1.0]]),))


class TestHamiltonianEnvelope:
    def test_model_within(self):
        h = HamiltonianSpec(3, 2.0)
        lattice = np.linspace(-3, 3, 41)[:, None]
        assert h.envelope_violations(h.model, 0.0, lattice).size == 0

    def test_steep_outside(self):
        h = HamiltonianSpec(3, 1.0)
        lattice = np.linspace(-3, 3, 41)[:, None]
        bad = h.envelope_violations(lambda v: 5 * np.abs(v[0]) ** 3, 0.0, lattice)
        assert bad.size > 0


class TestData:
    def test_bump_profile(self):
        d = DataSpec("bump", {"radius": 0.5, "base": -1.0, "height": 2.0})
        x = np.array([[0.0, 0.25, 0.5, 0.9]])
        np.testing.assert_allclose(d.evaluate(x), [1.0, 0.0, -1.0, -1.0])

    def test_linear_with_rate(self):
        d = DataSpec("linear", {"slope": 2.0, "rate": -8.0})
        assert d.evaluate(np.array([[0.5]]), t=0.25)[0] == pytest.approx(-1.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            DataSpec("mystery").evaluate(np.zeros((1, 3)))


def test_config_roundtrip():
    cfg = {"n": 1, "p": 3, "m": 2, "lambda": 1, "epsilon": 0.01,
           "grid": {"cells": 64, "h": 1 / 32, "dt": 0.25, "t1": 1},
           "diffusion": {"kind": "checkerboard", "values": [1, 0.25], "block_cells": 4},
           "source": {"kind": "radial", "c": 0.5, "a": 0.25},
           "initial": {"kind": "tanh", "width": 0.05}}
    spec = problem_from_config(cfg)
    assert spec.grid.origin == (-1.0,)
    assert spec.lam0 == 0.01
    assert spec.source.x0 == (0.0,)
    assert spec.diffusion.block_size == pytest.approx(1 / 8)
    np.testing.assert_allclose(spec.diffusion.matrices[1], [[0.0025]])
    assert validate_problem(spec) == []
