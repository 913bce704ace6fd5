"""Monotone finite-difference solver and De Giorgi-style diagnostics for
superquadratic viscous Hamilton-Jacobi equations."""

from .barrier import BarrierSpec, BumpProfile, barrier_residual, comparison_check, k0_search
from .diagnostics import (HypothesisViolation, classify_majority, dg1_iterate, energy, m_minus,
                          oscillation_profile, truncate)
from .experiment import ExperimentPlan, run_dg_pipeline, run_holder_experiment
from .grid import GridField, ParabolicCylinder, SpaceTimeGrid
from .kernels import BACKENDS, HAVE_COMPILED
from .problem import DataSpec, DiffusionSpec, ProblemSpec, SourceSpec, lm_norm, problem_from_config
from .scaling import ScaleParams, compute_exponents, scale_61, scale_62
from .solver import SchemeConfig, SolverError, residual_dist, residual_visc, solve

__version__ = "0.1.0"
