import numpy as np
import pytest

from antilode.antidiagonal import (AntidiagonalProblem, GeneralSystem,
                                   check_strong_condition,
                                   check_weak_condition, fundamental_pair,
                                   remove_diagonal, solve_homogeneous,
                                   solve_nonhomogeneous, solve_strong_explicit)
from antilode.errors import CompatibilityError, InvalidProblemError
from antilode.numerics import (CoefficientFunction, Grid,
                               integrate_linear_system)

GRID = Grid(1.0, 1000)
XS = GRID.refined()

SMOOTH_COEFFICIENTS = [
    lambda x: np.full(np.shape(x), 0.7 + 0.4j),
    lambda x: x**2 - 1j * x,
    lambda x: np.sin(2 * x) + 1j * np.cos(x),
    lambda x: (1 + 1j) * np.sin(x),
    lambda x: (0.3 + x) * np.exp(1j * x),
]


def const(z):
    return CoefficientFunction.constant(z)


def conjugate_system(fn):
    return lambda x: np.array([[0.0, fn(x)], [np.conj(fn(x)), 0.0]])


class TestFundamentalPair:
    def test_zero_coefficient_is_identity(self):
        pair = fundamental_pair(const(0.0), GRID)
        assert np.all(pair.direct.values == 1.0)
        assert np.all(pair.cross.values == 0.0)

    def test_imaginary_constant(self):
        pair = fundamental_pair(const(1j), GRID)
        assert np.max(np.abs(pair.direct.values - np.cosh(XS))) < 1e-8
        assert np.max(np.abs(pair.cross.values - 1j * np.sinh(XS))) < 1e-8

    def test_real_constant(self):
        pair = fundamental_pair(const(1.0), GRID)
        assert np.max(np.abs(pair.direct.values - np.cosh(XS))) < 1e-8
        assert np.max(np.abs(pair.cross.values - np.sinh(XS))) < 1e-8

    @pytest.mark.parametrize("fn", SMOOTH_COEFFICIENTS)
    def test_determinant_invariant(self, fn):
        pair = fundamental_pair(CoefficientFunction(fn), GRID)
        assert pair.determinant_drift() < 1e-7
        assert pair.metadata["warnings"] == []

    def test_start_values_exact(self):
        pair = fundamental_pair(CoefficientFunction(SMOOTH_COEFFICIENTS[4]), GRID)
        assert pair.direct.values[0] == 1.0
        assert pair.cross.values[0] == 0.0

    @pytest.mark.parametrize("fn", [SMOOTH_COEFFICIENTS[0], SMOOTH_COEFFICIENTS[3]])
    def test_series_route_agrees(self, fn):
        f = CoefficientFunction(fn)
        a = fundamental_pair(f, GRID, method="integrator")
        b = fundamental_pair(f, GRID, method="series", series_order=15)
        assert np.max(np.abs(a.direct.values - b.direct.values)) < 1e-8
        assert np.max(np.abs(a.cross.values - b.cross.values)) < 1e-8
        assert b.metadata["method"] == "series"

    def test_unknown_method(self):
        with pytest.raises(InvalidProblemError):
            fundamental_pair(const(1.0), GRID, method="magic")

    def test_large_coefficient_flags_determinant_drift(self):
        # cancellation in |direct|^2 - |cross|^2 blows up for stiff growth;
        # that is a diagnostics warning, not an error
        pair = fundamental_pair(const(20.0), GRID)
        assert pair.metadata["determinant_drift"] > 1e-5
        assert pair.metadata["warnings"]


class TestSolveHomogeneous:
    def test_zero_coefficient_keeps_start(self):
        traj = solve_homogeneous(AntidiagonalProblem(const(0.0), (1.0, 2j), GRID))
        assert np.all(traj.values == np.array([1.0, 2j]))

    def test_imaginary_constant(self):
        traj = solve_homogeneous(AntidiagonalProblem(const(1j), (1.0, 0.0), GRID))
        exact = np.stack([np.cosh(XS), -1j * np.sinh(XS)], axis=1)
        assert np.max(np.abs(traj.values - exact)) < 1e-8

    @pytest.mark.parametrize("fn", SMOOTH_COEFFICIENTS)
    def test_oracle_equivalence(self, fn):
        u0 = (0.5 - 0.25j, -0.3 + 0.8j)
        mine = solve_homogeneous(AntidiagonalProblem(CoefficientFunction(fn), u0, GRID))
        oracle = integrate_linear_system(conjugate_system(fn), None, u0, GRID)
        assert np.max(np.abs(mine.values - oracle.values)) < 1e-7

    def test_refuses_forced_problem(self):
        problem = AntidiagonalProblem(const(1.0), (0.0, 0.0), GRID,
                                      forcing=(const(1.0), const(1j)))
        with pytest.raises(InvalidProblemError):
            solve_homogeneous(problem)


class TestSolveNonhomogeneous:
    def test_pure_quadrature(self):
        # g1 = 1 pairs with g2 = i, so the second component grows as i*x
        problem = AntidiagonalProblem(const(0.0), (0.0, 0.0), GRID,
                                      forcing=(const(1.0), const(1j)))
        traj = solve_nonhomogeneous(problem)
        exact = np.stack([XS + 0j, 1j * XS], axis=1)
        assert np.max(np.abs(traj.values - exact)) < 1e-10

    def test_zero_forcing_matches_homogeneous_path(self):
        f = CoefficientFunction(SMOOTH_COEFFICIENTS[3])
        u0 = (1.0, 1j)  # pairing holds: i*conj(1) = i
        forced = solve_nonhomogeneous(
            AntidiagonalProblem(f, u0, GRID, forcing=(const(0.0), const(0.0))))
        plain = solve_homogeneous(AntidiagonalProblem(f, u0, GRID))
        assert np.max(np.abs(forced.values - plain.values)) < 1e-10

    def test_oracle_equivalence_with_forcing(self):
        fn = SMOOTH_COEFFICIENTS[4]
        g1 = lambda x: np.sin(x) + 0.3j * np.cos(x)
        u1_0 = 0.3 - 0.2j
        u0 = (u1_0, 1j * np.conj(u1_0))
        problem = AntidiagonalProblem(
            CoefficientFunction(fn), u0, GRID,
            forcing=(CoefficientFunction(g1),
                     CoefficientFunction(lambda x: 1j * np.conj(g1(x)))))
        mine = solve_nonhomogeneous(problem)
        oracle = integrate_linear_system(
            conjugate_system(fn),
            lambda x: np.array([g1(x), 1j * np.conj(g1(x))]), u0, GRID)
        assert np.max(np.abs(mine.values - oracle.values)) < 1e-8

    def test_pairing_preserved_along_the_flow(self):
        problem = AntidiagonalProblem(
            CoefficientFunction(SMOOTH_COEFFICIENTS[2]), (0.4 + 0.1j, 1j * (0.4 - 0.1j)),
            GRID, forcing=(const(0.5 - 0.2j), const(1j * (0.5 + 0.2j))))
        traj = solve_nonhomogeneous(problem)
        dev = np.max(np.abs(traj.values[:, 1] - 1j * np.conj(traj.values[:, 0])))
        assert dev < 1e-10

    def test_incompatible_forcing_refused(self):
        problem = AntidiagonalProblem(const(1.0), (0.0, 0.0), GRID,
                                      forcing=(const(1.0), const(1.0)))
        with pytest.raises(CompatibilityError, match="integrate_linear_system") as err:
            solve_nonhomogeneous(problem)
        assert err.value.deviation > 0.1

    def test_incompatible_start_refused(self):
        problem = AntidiagonalProblem(const(1.0), (1.0, 1.0), GRID,
                                      forcing=(const(1.0), const(1j)))
        with pytest.raises(CompatibilityError):
            solve_nonhomogeneous(problem)


class TestRemoveDiagonal:
    def test_identity_when_diagonal_free(self):
        sys = GeneralSystem(const(0.0), const(0.0), const(1 + 1j), const(1 - 1j),
                            (1.0, 0.0), GRID)
        transformed, mult = remove_diagonal(sys)
        assert np.all(transformed.r.sample(GRID) == 1 + 1j)
        assert np.all(transformed.s.sample(GRID) == 1 - 1j)
        assert np.all(mult.first.values == 1.0)
        assert np.all(mult.second.values == 1.0)

    def test_decoupled_exponentials_round_trip(self):
        sys = GeneralSystem(const(1.0), const(-1.0), const(0.0), const(0.0),
                            (1.0, 2.0), GRID)
        transformed, mult = remove_diagonal(sys)
        assert np.all(transformed.r.sample(GRID) == 0.0)
        # forward multipliers exp(-int p), exp(-int q)
        assert np.max(np.abs(mult.first.values - np.exp(-XS))) < 1e-12
        assert np.max(np.abs(mult.second.values - np.exp(XS))) < 1e-12
        # transformed system is constant, so its solution is the start vector
        v = solve_homogeneous(AntidiagonalProblem(transformed.r, sys.u0, GRID))
        back = mult.to_original(v)
        exact = np.stack([np.exp(XS), 2.0 * np.exp(-XS)], axis=1)
        assert np.max(np.abs(back.values - exact)) < 1e-10

    def test_constructed_conjugate_pair_detected_after_transform(self):
        rho = lambda x: (0.3 + 0.4j) * (1 + x / 2)
        sys = GeneralSystem(
            p=const(1j), q=const(-1j),
            r=CoefficientFunction(lambda x: np.exp(2j * x) * rho(x)),
            s=CoefficientFunction(lambda x: np.conj(rho(x)) * np.exp(-2j * x)),
            u0=(1.0, 0.0), grid=GRID)
        check = check_weak_condition(sys)
        assert check.holds
        expected_f = rho(XS)
        assert np.max(np.abs(check.problem.f.sample(GRID) - expected_f)) < 1e-10


class TestStrongCondition:
    def test_equal_diagonal_and_entries(self):
        r = CoefficientFunction(lambda x: np.sin(x) + 0.5j)
        sys = GeneralSystem(const(0.3), const(0.3), r, r, (1.0, 0.0), GRID)
        check = check_strong_condition(sys)
        assert check.holds
        assert np.max(np.abs(check.c1.values - r.sample(GRID))) < 1e-12

    def test_constructed_instance_holds(self):
        sys = GeneralSystem(const(1.0), const(0.0), const(1.0),
                            CoefficientFunction(lambda x: np.exp(-2.0 * x) + 0j),
                            (1.0, 1.0), GRID)
        assert check_strong_condition(sys).holds

    def test_mismatched_entries_do_not_hold(self):
        sys = GeneralSystem(const(1.0), const(0.0), const(1.0), const(1.0),
                            (1.0, 1.0), GRID)
        check = check_strong_condition(sys)
        assert not check.holds
        assert check.c1 is None
        assert check.deviation > 0.1


class TestSolveStrongExplicit:
    def test_zero_common_entry_keeps_start(self):
        sys = GeneralSystem(const(0.0), const(0.0), const(0.0), const(0.0),
                            (1.0, 2.0), GRID)
        check = check_strong_condition(sys)
        traj = solve_strong_explicit(sys, check.c1)
        assert np.max(np.abs(traj.values - np.array([1.0, 2.0]))) < 1e-12

    def test_unit_common_entry(self):
        sys = GeneralSystem(const(0.0), const(0.0), const(1.0), const(1.0),
                            (1.0, 0.0), GRID)
        traj = solve_strong_explicit(sys, check_strong_condition(sys).c1)
        exact = np.stack([np.cosh(XS), np.sinh(XS)], axis=1)
        assert np.max(np.abs(traj.values - exact)) < 1e-12

    def test_oracle_equivalence_after_back_transform(self):
        sys = GeneralSystem(const(1.0), const(0.0), const(1.0),
                            CoefficientFunction(lambda x: np.exp(-2.0 * x) + 0j),
                            (1.0, 1.0), GRID)
        traj = solve_strong_explicit(sys, check_strong_condition(sys).c1)
        M = lambda x: np.array([[1.0, 1.0], [np.exp(-2.0 * x), 0.0]])
        oracle = integrate_linear_system(M, None, (1.0, 1.0), GRID)
        assert np.max(np.abs(traj.values - oracle.values)) < 1e-7

    def test_precondition_enforced(self):
        good = GeneralSystem(const(0.0), const(0.0), const(1.0), const(1.0),
                             (1.0, 0.0), GRID)
        c1 = check_strong_condition(good).c1
        bad = GeneralSystem(const(1.0), const(0.0), const(1.0), const(1.0),
                            (1.0, 0.0), GRID)
        with pytest.raises(InvalidProblemError):
            solve_strong_explicit(bad, c1)


class TestWeakCondition:
    def test_conjugate_diagonal_with_conjugate_entries(self):
        # purely imaginary diagonal difference: condition reduces to s = conj(r)
        r = CoefficientFunction(lambda x: (1 + 1j) * np.sin(x))
        s = CoefficientFunction(lambda x: np.conj((1 + 1j) * np.sin(x)))
        sys = GeneralSystem(CoefficientFunction(lambda x: 1j * x),
                            CoefficientFunction(lambda x: -1j * x),
                            r, s, (1.0, 0.0), GRID)
        check = check_weak_condition(sys)
        assert check.holds
        expected = r.sample(GRID) * np.exp(-1j * XS**2)
        assert np.max(np.abs(check.problem.f.sample(GRID) - expected)) < 1e-10

    def test_plain_conjugate_entries(self):
        sys = GeneralSystem(const(0.0), const(0.0), const(1 + 1j), const(1 - 1j),
                            (1.0, 0.0), GRID)
        check = check_weak_condition(sys)
        assert check.holds
        assert np.all(check.problem.f.sample(GRID) == 1 + 1j)

    def test_real_diagonal_difference_breaks_it(self):
        sys = GeneralSystem(const(1.0), const(0.0), const(1.0), const(1.0),
                            (1.0, 0.0), GRID)
        check = check_weak_condition(sys)
        assert not check.holds
        assert check.problem is None

    def test_detected_problem_solves_the_original_system(self):
        rho = lambda x: (0.3 + 0.4j) * (1 + x / 2)
        r_fn = lambda x: np.exp(2j * x) * rho(x)
        s_fn = lambda x: np.conj(rho(x)) * np.exp(-2j * x)
        sys = GeneralSystem(const(1j), const(-1j),
                            CoefficientFunction(r_fn), CoefficientFunction(s_fn),
                            (1.0, -0.5j), GRID)
        check = check_weak_condition(sys)
        assert check.holds
        _, mult = remove_diagonal(sys)
        back = mult.to_original(solve_homogeneous(check.problem))
        M = lambda x: np.array([[1j, r_fn(x)], [s_fn(x), -1j]])
        oracle = integrate_linear_system(M, None, sys.u0, GRID)
        assert np.max(np.abs(back.values - oracle.values)) < 1e-7
