import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antilode.antilinear import (AntilinearProblem, solve_antilinear,
                                 solve_constant_closed_form,
                                 solve_decoupled_pair,
                                 solve_forced_decoupled_pair)
from antilode.errors import InvalidProblemError
from antilode.numerics import CoefficientFunction, Grid

GRID = Grid(1.0, 1000)
XS = GRID.refined()


def const(z):
    return CoefficientFunction.constant(z)


def solve(f, g, u0, sign=1, grid=GRID):
    return solve_antilinear(AntilinearProblem(f, g, u0, grid), sign)


class TestSolveAntilinear:
    def test_zero_right_hand_side(self):
        traj = solve(const(0.0), const(0.0), 1 + 2j)
        assert np.all(traj.values == 1 + 2j)

    def test_imaginary_constant_coefficient(self):
        # realification gives p' = q, q' = p: u = cosh x + i sinh x
        traj = solve(const(1j), None, 1.0)
        exact = np.cosh(XS) + 1j * np.sinh(XS)
        assert np.max(np.abs(traj.values - exact)) < 1e-8
        assert abs(traj.final() - (1.5430806348 + 1.1752011936j)) < 1e-8

    def test_real_data_stays_real(self):
        # f = g = 1 with real start: the equation collapses to u' = u + 1
        traj = solve(const(1.0), const(1.0), 0.0)
        assert np.max(np.abs(traj.values.imag)) == 0.0
        assert np.max(np.abs(traj.values - (np.exp(XS) - 1.0))) < 1e-8

    def test_pure_quadrature(self):
        c = 0.3 - 0.7j
        traj = solve(const(0.0), const(c), 2 - 1j)
        assert np.max(np.abs(traj.values - (2 - 1j + c * XS))) < 1e-10

    def test_invalid_sign(self):
        with pytest.raises(InvalidProblemError):
            solve(const(1.0), None, 1.0, sign=2)


class TestConstantClosedForm:
    def test_real_growing_mode(self):
        assert abs(solve_constant_closed_form(1.0, 1.0, 1.0) - np.e) < 1e-12

    def test_imaginary_coefficient(self):
        u = solve_constant_closed_form(1j, 1.0, 1.0)
        assert abs(u - (np.cosh(1.0) + 1j * np.sinh(1.0))) < 1e-12

    def test_pure_decaying_mode(self):
        assert abs(solve_constant_closed_form(1.0, 1j, 1.0) - 1j / np.e) < 1e-12

    def test_zero_coefficient_rejected(self):
        with pytest.raises(InvalidProblemError):
            solve_constant_closed_form(0.0, 1.0, 1.0)

    @pytest.mark.parametrize("f", [1j, 0.5 + 0.2j, -0.3 + 1.0j, 2.0, -1.5j])
    def test_integrator_agrees_with_closed_form(self, f):
        traj = solve(const(f), None, 0.7 - 0.4j)
        exact = solve_constant_closed_form(f, 0.7 - 0.4j, XS)
        assert np.max(np.abs(traj.values - exact)) < 1e-8


class TestProperties:
    F = CoefficientFunction(lambda x: (0.3 + x) * np.exp(1j * x))

    def test_real_linearity(self):
        # the equation is R-linear, not C-linear
        a, b = 1.7, -0.6
        u = solve(self.F, None, 1.0 - 0.5j)
        v = solve(self.F, None, -0.2 + 0.9j)
        combo = solve(self.F, None, a * (1.0 - 0.5j) + b * (-0.2 + 0.9j))
        expected = a * u.values + b * v.values
        assert np.max(np.abs(combo.values - expected)) < 1e-12 * np.max(np.abs(expected))

    def test_rotation_symmetry(self):
        # flipping the coefficient sign is a quarter-turn of the start value
        w0 = 0.8 - 0.3j
        lhs = solve(self.F, None, w0, sign=-1)
        rhs = solve(self.F, None, 1j * w0, sign=+1)
        assert np.max(np.abs(lhs.values - (-1j) * rhs.values)) < 1e-12

    def test_conjugate_coefficient_symmetry(self):
        u0 = 0.4 + 1.1j
        u = solve(self.F, None, u0)
        conj_f = CoefficientFunction(lambda x: np.conj((0.3 + x) * np.exp(1j * x)))
        w = solve(conj_f, None, np.conj(u0))
        assert np.max(np.abs(w.values - np.conj(u.values))) < 1e-12


_bounded = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
_complexes = st.builds(complex, _bounded, _bounded)
_COARSE = Grid(1.0, 100)
_COARSE_F = CoefficientFunction(lambda x: (0.3 + x) * np.exp(1j * x))


class TestRandomizedProperties:
    @settings(max_examples=25, deadline=None)
    @given(_complexes, _complexes, _bounded, _bounded)
    def test_real_linearity_random(self, u0, v0, a, b):
        u = solve_antilinear(AntilinearProblem(_COARSE_F, None, u0, _COARSE))
        v = solve_antilinear(AntilinearProblem(_COARSE_F, None, v0, _COARSE))
        combo = solve_antilinear(
            AntilinearProblem(_COARSE_F, None, a * u0 + b * v0, _COARSE))
        expected = a * u.values + b * v.values
        scale = 1.0 + np.max(np.abs(expected))
        assert np.max(np.abs(combo.values - expected)) < 1e-12 * scale

    @settings(max_examples=25, deadline=None)
    @given(_complexes)
    def test_rotation_symmetry_random(self, w0):
        lhs = solve_antilinear(AntilinearProblem(_COARSE_F, None, w0, _COARSE), sign=-1)
        rhs = solve_antilinear(AntilinearProblem(_COARSE_F, None, 1j * w0, _COARSE), sign=+1)
        assert np.max(np.abs(lhs.values - (-1j) * rhs.values)) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(_complexes)
    def test_conjugate_symmetry_random(self, u0):
        conj_f = CoefficientFunction(lambda x: np.conj((0.3 + x) * np.exp(1j * x)))
        u = solve_antilinear(AntilinearProblem(_COARSE_F, None, u0, _COARSE))
        w = solve_antilinear(AntilinearProblem(conj_f, None, np.conj(u0), _COARSE))
        assert np.max(np.abs(w.values - np.conj(u.values))) < 1e-12


class TestDecoupledPair:
    def test_zero_coefficient(self):
        pair = solve_decoupled_pair(const(0.0), GRID)
        assert np.all(pair.plus.values == 1.0)
        assert np.all(pair.minus.values == 1.0)

    def test_start_values_exact(self):
        pair = solve_decoupled_pair(CoefficientFunction(lambda x: np.sin(x) + 0.5j), GRID)
        assert pair.plus.values[0] == 1.0
        assert pair.minus.values[0] == 1.0

    def test_imaginary_coefficient(self):
        pair = solve_decoupled_pair(const(1j), GRID)
        assert np.max(np.abs(pair.plus.values - (np.cosh(XS) + 1j * np.sinh(XS)))) < 1e-8
        assert np.max(np.abs(pair.minus.values - (np.cosh(XS) - 1j * np.sinh(XS)))) < 1e-8

    def test_real_coefficient(self):
        pair = solve_decoupled_pair(const(1.0), GRID)
        assert np.max(np.abs(pair.plus.values - np.exp(XS))) < 1e-8
        assert np.max(np.abs(pair.minus.values - np.exp(-XS))) < 1e-8


class TestForcedDecoupledPair:
    def test_pure_quadrature(self):
        pair = solve_forced_decoupled_pair(const(0.0), const(1.0), 0.0, GRID)
        assert np.max(np.abs(pair.plus.values - XS)) < 1e-12
        assert np.max(np.abs(pair.minus.values - XS)) < 1e-12

    def test_real_linear_closed_forms(self):
        pair = solve_forced_decoupled_pair(const(1.0), const(1.0), 0.0, GRID)
        assert np.max(np.abs(pair.plus.values - (np.exp(XS) - 1.0))) < 1e-8
        assert np.max(np.abs(pair.minus.values - (1.0 - np.exp(-XS)))) < 1e-8

    def test_matches_independent_scalar_solves(self):
        f = CoefficientFunction(lambda x: (0.5 + 0.25j) * np.cos(x))
        g = CoefficientFunction(lambda x: np.sin(x) - 0.2j * x)
        u0 = 0.3 + 0.1j
        pair = solve_forced_decoupled_pair(f, g, u0, GRID)
        assert pair.plus.values[0] == u0
        assert pair.minus.values[0] == u0
        plus = solve(f, g, u0, sign=+1)
        minus = solve(f, g, u0, sign=-1)
        assert np.max(np.abs(pair.plus.values - plus.values)) < 1e-12
        assert np.max(np.abs(pair.minus.values - minus.values)) < 1e-12
