"""2x2 systems whose matrix couples the components through conjugation.

The homogeneous system U' = [[0, f], [conj f, 0]] U is solved through the
fundamental pair (direct, cross): the solution matrix is

    [[direct, cross], [conj(cross), conj(direct)]],

direct(0) = 1, cross(0) = 0, and |direct|^2 - |cross|^2 == 1 at every x
(the matrix is trace free).  The pair comes from two independent scalar
conjugate-coupled solves with coefficients +f and -f (their half-sum and
half-difference), or alternatively from the truncated series kernels; both
routes are exposed and cross-checked in the tests.

For a general 2x2 system U' = [[p, r], [s, q]] U the diagonal can always be
removed by an exponential multiplier substitution.  Two pointwise
conditions on the transformed off-diagonal entries are detected here: equal
entries give an explicit cosh/sinh solution, and conjugate entries reduce
the system to the conjugate-coupled form above.
"""

from dataclasses import dataclass, field

import numpy as np

from .antilinear import solve_decoupled_pair, solve_forced_decoupled_pair
from .errors import CompatibilityError, InvalidProblemError
from .numerics import (CoefficientFunction, Grid, Trajectory,
                       cumulative_samples)
from .picard import series_kernels

__all__ = [
    "AntidiagonalProblem", "FundamentalPair", "GeneralSystem",
    "DiagonalMultipliers", "StrongConditionCheck", "WeakConditionCheck",
    "fundamental_pair", "solve_homogeneous", "solve_nonhomogeneous",
    "remove_diagonal", "check_strong_condition", "solve_strong_explicit",
    "check_weak_condition", "DETERMINANT_WARN_THRESHOLD", "CONDITION_TOL",
]

# Pointwise structural conditions are exact statements; floating point gets
# this absolute tolerance, scaled by (1 + max coefficient magnitude).
CONDITION_TOL = 1e-12
DETERMINANT_WARN_THRESHOLD = 1e-5


@dataclass(frozen=True)
class AntidiagonalProblem:
    """U' = [[0, f], [conj f, 0]] U (+ (g1, g2)), U(0) = u0.

    The decoupled nonhomogeneous route additionally requires
    g2 = i*conj(g1) pointwise and u0[1] = i*conj(u0[0]).
    """

    f: CoefficientFunction
    u0: tuple
    grid: Grid
    forcing: tuple | None = None

    def __post_init__(self):
        if len(self.u0) != 2:
            raise InvalidProblemError("initial data must have two components")
        object.__setattr__(self, "u0", (complex(self.u0[0]), complex(self.u0[1])))
        if self.forcing is not None and len(self.forcing) != 2:
            raise InvalidProblemError("forcing must be a (g1, g2) pair")


@dataclass(frozen=True, eq=False)
class FundamentalPair:
    """Entries (direct, cross) of the fundamental solution matrix."""

    direct: Trajectory
    cross: Trajectory
    metadata: dict = field(default_factory=dict)

    def determinant_drift(self) -> float:
        det = np.abs(self.direct.values) ** 2 - np.abs(self.cross.values) ** 2
        return float(np.max(np.abs(det - 1.0)))

    def apply(self, u0) -> np.ndarray:
        """Node-wise product of the fundamental matrix with a start vector."""
        u1, u2 = complex(u0[0]), complex(u0[1])
        d, c = self.direct.values, self.cross.values
        return np.stack([d * u1 + c * u2,
                         np.conj(c) * u1 + np.conj(d) * u2], axis=1)


@dataclass(frozen=True)
class GeneralSystem:
    """U' = [[p, r], [s, q]] U, U(0) = u0."""

    p: CoefficientFunction
    q: CoefficientFunction
    r: CoefficientFunction
    s: CoefficientFunction
    u0: tuple
    grid: Grid

    def __post_init__(self):
        if len(self.u0) != 2:
            raise InvalidProblemError("initial data must have two components")
        object.__setattr__(self, "u0", (complex(self.u0[0]), complex(self.u0[1])))


@dataclass(frozen=True, eq=False)
class DiagonalMultipliers:
    """Forward multipliers exp(-int p), exp(-int q) of the diagonal removal.

    The substituted unknown is V = (first*U1, second*U2); dividing by them
    maps a solution of the transformed system back to original variables.
    """

    first: Trajectory
    second: Trajectory

    def to_original(self, v: Trajectory) -> Trajectory:
        if v.components != 2:
            raise InvalidProblemError("expected a 2-component trajectory")
        vals = np.stack([v.values[:, 0] / self.first.values,
                         v.values[:, 1] / self.second.values], axis=1)
        return Trajectory(v.grid, vals)


@dataclass(frozen=True, eq=False)
class StrongConditionCheck:
    holds: bool
    c1: Trajectory | None
    deviation: float


@dataclass(frozen=True, eq=False)
class WeakConditionCheck:
    holds: bool
    problem: AntidiagonalProblem | None
    deviation: float


def fundamental_pair(f: CoefficientFunction, grid: Grid, method: str = "integrator",
                     series_order: int = 15, series_tol: float = 1e-14) -> FundamentalPair:
    """Fundamental pair of U' = [[0, f], [conj f, 0]] U.

    ``integrator`` recombines the two decoupled scalar solves (half-sum and
    half-difference); ``series`` truncates the nested-integral kernels.
    Determinant drift beyond the warning threshold is recorded in the
    metadata, not raised.
    """
    metadata = {"method": method, "warnings": []}
    if method == "integrator":
        pair = solve_decoupled_pair(f, grid)
        direct = 0.5 * (pair.plus.values + pair.minus.values)
        cross = 0.5 * (pair.plus.values - pair.minus.values)
    elif method == "series":
        kernels = series_kernels(f, grid, max_order=series_order, tol=series_tol)
        direct = kernels.direct.values
        cross = kernels.cross.values
        metadata["series"] = dict(kernels.metadata, order=kernels.order,
                                  last_term_norm=kernels.last_term_norm)
    else:
        raise InvalidProblemError(f"unknown method {method!r}; use 'integrator' or 'series'")
    result = FundamentalPair(direct=Trajectory(grid, direct),
                             cross=Trajectory(grid, cross),
                             metadata=metadata)
    drift = result.determinant_drift()
    metadata["determinant_drift"] = drift
    if drift > DETERMINANT_WARN_THRESHOLD:
        metadata["warnings"].append(
            f"determinant drift {drift:.3e} exceeds {DETERMINANT_WARN_THRESHOLD:.0e}")
    return result


def solve_homogeneous(problem: AntidiagonalProblem, method: str = "integrator") -> Trajectory:
    """Apply the fundamental pair to the initial data at every node."""
    if problem.forcing is not None:
        raise InvalidProblemError("problem has forcing; use solve_nonhomogeneous")
    pair = fundamental_pair(problem.f, problem.grid, method=method)
    return Trajectory(problem.grid, pair.apply(problem.u0))


def compatibility_deviation(problem: AntidiagonalProblem) -> float:
    """Scaled deviation from g2 = i*conj(g1) and u0[1] = i*conj(u0[0])."""
    if problem.forcing is None:
        raise InvalidProblemError("problem has no forcing")
    g1v = problem.forcing[0].sample(problem.grid)
    g2v = problem.forcing[1].sample(problem.grid)
    scale_g = 1.0 + max(float(np.max(np.abs(g1v))), float(np.max(np.abs(g2v))))
    dev_g = float(np.max(np.abs(g2v - 1j * np.conj(g1v)))) / scale_g
    u1_0, u2_0 = problem.u0
    dev_u = abs(u2_0 - 1j * np.conj(u1_0)) / (1.0 + abs(u1_0))
    return max(dev_g, dev_u)


def solve_nonhomogeneous(problem: AntidiagonalProblem, tol: float = CONDITION_TOL) -> Trajectory:
    """Solve the forced system through the two decoupled scalar problems.

    Requires the structural pairing g2 = i*conj(g1), u0[1] = i*conj(u0[0]);
    anything else is refused (the decoupled reconstruction is only valid
    under it), with the direct integrator named as the alternative.
    """
    if problem.forcing is None:
        return solve_homogeneous(problem)
    deviation = compatibility_deviation(problem)
    if deviation > tol:
        raise CompatibilityError(
            "forcing/initial data violate g2 = i*conj(g1), u2(0) = i*conj(u1(0)) "
            f"(max scaled deviation {deviation:.3e}); this route would be wrong -- "
            "integrate the full 2x2 system with integrate_linear_system instead",
            deviation=deviation)
    pair = solve_forced_decoupled_pair(problem.f, problem.forcing[0],
                                       problem.u0[0], problem.grid)
    direct = 0.5 * (pair.plus.values + pair.minus.values)
    cross = 0.5 * (pair.plus.values - pair.minus.values)
    u1 = direct + 1j * cross
    u2 = 1j * np.conj(u1)
    return Trajectory(problem.grid, np.stack([u1, u2], axis=1))


def remove_diagonal(sys: GeneralSystem) -> tuple[GeneralSystem, DiagonalMultipliers]:
    """Exponential multiplier substitution that zeroes the diagonal.

    Returns the transformed system (same initial data, off-diagonals
    r*exp(-int(p-q)) and s*exp(+int(p-q))) together with the forward
    multipliers exp(-int p), exp(-int q) defining the substitution.
    """
    grid = sys.grid
    pv, qv = sys.p.sample(grid), sys.q.sample(grid)
    rv, sv = sys.r.sample(grid), sys.s.sample(grid)
    int_p = cumulative_samples(pv, grid)
    int_q = cumulative_samples(qv, grid)
    diff = int_p - int_q
    transformed = GeneralSystem(
        p=CoefficientFunction.constant(0.0),
        q=CoefficientFunction.constant(0.0),
        r=CoefficientFunction.from_samples(grid, rv * np.exp(-diff)),
        s=CoefficientFunction.from_samples(grid, sv * np.exp(diff)),
        u0=sys.u0,
        grid=grid,
    )
    multipliers = DiagonalMultipliers(first=Trajectory(grid, np.exp(-int_p)),
                                      second=Trajectory(grid, np.exp(-int_q)))
    return transformed, multipliers


def _transformed_entries(sys: GeneralSystem):
    grid = sys.grid
    pv, qv = sys.p.sample(grid), sys.q.sample(grid)
    diff = cumulative_samples(pv - qv, grid)
    r_t = sys.r.sample(grid) * np.exp(-diff)
    s_t = sys.s.sample(grid) * np.exp(diff)
    return r_t, s_t, diff


def check_strong_condition(sys: GeneralSystem, tol: float = CONDITION_TOL) -> StrongConditionCheck:
    """Do the transformed off-diagonal entries agree pointwise?

    When they do, their common value c1 drives an explicit cosh/sinh
    solution (see :func:`solve_strong_explicit`).
    """
    r_t, s_t, _ = _transformed_entries(sys)
    deviation = float(np.max(np.abs(r_t - s_t)))
    scale = 1.0 + max(float(np.max(np.abs(r_t))), float(np.max(np.abs(s_t))))
    if deviation < tol * scale:
        return StrongConditionCheck(True, Trajectory(sys.grid, r_t), deviation)
    return StrongConditionCheck(False, None, deviation)


def solve_strong_explicit(sys: GeneralSystem, c1: Trajectory) -> Trajectory:
    """Explicit solution when both transformed off-diagonals equal c1.

    The transformed solution is
    [cosh(int c1) * I + sinh(int c1) * swap] U0, mapped back to original
    variables through the diagonal multipliers.
    """
    check = check_strong_condition(sys)
    if not check.holds:
        raise InvalidProblemError(
            f"transformed off-diagonal entries differ (max deviation {check.deviation:.3e}); "
            "the explicit solution does not apply")
    grid = sys.grid
    running = cumulative_samples(c1.values, grid)
    ch, sh = np.cosh(running), np.sinh(running)
    u1_0, u2_0 = sys.u0
    v1 = ch * u1_0 + sh * u2_0
    v2 = sh * u1_0 + ch * u2_0
    int_p = cumulative_samples(sys.p.sample(grid), grid)
    int_q = cumulative_samples(sys.q.sample(grid), grid)
    vals = np.stack([np.exp(int_p) * v1, np.exp(int_q) * v2], axis=1)
    return Trajectory(grid, vals)


def check_weak_condition(sys: GeneralSystem, tol: float = CONDITION_TOL) -> WeakConditionCheck:
    """Is the transformed lower-left entry the conjugate of the upper-right?

    Pointwise this reads s = conj(r)*exp(-2*Re int(p-q)).  When it holds the
    transformed system is exactly the conjugate-coupled form, returned as an
    AntidiagonalProblem with coefficient f = r*exp(-int(p-q)) and the
    original initial data.
    """
    r_t, s_t, _ = _transformed_entries(sys)
    deviation = float(np.max(np.abs(s_t - np.conj(r_t))))
    scale = 1.0 + max(float(np.max(np.abs(r_t))), float(np.max(np.abs(s_t))))
    if deviation < tol * scale:
        problem = AntidiagonalProblem(
            f=CoefficientFunction.from_samples(sys.grid, r_t),
            u0=sys.u0, grid=sys.grid)
        return WeakConditionCheck(True, problem, deviation)
    return WeakConditionCheck(False, None, deviation)
