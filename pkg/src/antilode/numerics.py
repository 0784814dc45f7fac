"""Grids, cumulative quadrature and the reference RK4 integrator.

Everything downstream shares one discretisation: a uniform grid of n steps
of size h on [0, x0] plus its half-step refinement (2n+1 nodes at spacing
h/2).  Classical RK4 advances full node to full node, so its stage
abscissae land exactly on refined nodes; coefficient tables and cumulative
phase integrals are tabulated once on that node set and looked up, never
re-evaluated off-grid.  The integrator here is deliberately plain (fixed
step, no adaptivity): it is the brute-force oracle every other solve path
in the package is checked against.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EvaluationError, InvalidProblemError, SolverFailure

__all__ = [
    "Grid", "CoefficientFunction", "Trajectory",
    "cumulative_samples", "cumulative_integral", "finite_difference_derivative",
    "integrate_linear_system", "ConvergenceStudy", "convergence_order",
]


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [0, x0] with n steps and a half-step refinement."""

    x0: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.x0) and self.x0 > 0):
            raise InvalidProblemError(f"interval end must be positive and finite, got {self.x0}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise InvalidProblemError(f"step count must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return self.x0 / self.n

    def nodes(self) -> np.ndarray:
        """Full-step nodes, n+1 values."""
        return np.linspace(0.0, self.x0, self.n + 1)

    def refined(self) -> np.ndarray:
        """Half-step nodes, 2n+1 values; RK4 stage points live here."""
        return np.linspace(0.0, self.x0, 2 * self.n + 1)

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.x0, self.n * factor)


class CoefficientFunction:
    """A complex-valued coefficient on [0, x0], optionally with a derivative.

    Wraps either a vectorised callable or a table of refined-node samples
    bound to one grid.  ``sample`` is the only way solvers read
    coefficients, which keeps every method evaluating them at exactly the
    same points.  Values must be finite at all refined nodes; this is
    checked up front, before any solve starts.
    """

    def __init__(self, value: Callable, derivative: Callable | None = None):
        self._fn = value
        self._dfn = derivative
        self._grid = None
        self._vals = None
        self._dvals = None

    @classmethod
    def constant(cls, z: complex) -> "CoefficientFunction":
        zc = complex(z)
        return cls(lambda x: np.full(np.shape(x), zc, dtype=complex),
                   lambda x: np.zeros(np.shape(x), dtype=complex))

    @classmethod
    def from_samples(cls, grid: Grid, values, derivative_values=None) -> "CoefficientFunction":
        obj = cls.__new__(cls)
        obj._fn = None
        obj._dfn = None
        obj._grid = grid
        obj._vals = _as_samples(values, grid, "coefficient table")
        obj._dvals = None
        if derivative_values is not None:
            obj._dvals = _as_samples(derivative_values, grid, "derivative table")
        return obj

    @property
    def has_derivative(self) -> bool:
        return self._dfn is not None or self._dvals is not None

    def sample(self, grid: Grid) -> np.ndarray:
        """Values at all refined nodes of ``grid`` (validated finite)."""
        if self._vals is not None:
            if grid != self._grid:
                raise InvalidProblemError(
                    "tabulated coefficient is bound to a different grid")
            return self._vals
        return _evaluate_on(self._fn, grid, "coefficient")

    def sample_derivative(self, grid: Grid) -> np.ndarray:
        if self._dvals is not None:
            if grid != self._grid:
                raise InvalidProblemError(
                    "tabulated coefficient is bound to a different grid")
            return self._dvals
        if self._dfn is None:
            raise InvalidProblemError(
                "coefficient has no derivative; supply one or enable the "
                "finite-difference fallback")
        return _evaluate_on(self._dfn, grid, "coefficient derivative")


def _as_samples(values, grid: Grid, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    m = 2 * grid.n + 1
    if arr.shape != (m,):
        raise InvalidProblemError(f"{what} must have {m} refined-node samples, got shape {arr.shape}")
    _check_finite(arr, grid, what)
    return arr


def _evaluate_on(fn: Callable, grid: Grid, what: str) -> np.ndarray:
    xs = grid.refined()
    try:
        with np.errstate(all="ignore"):
            raw = fn(xs)
    except EvaluationError as exc:
        raise InvalidProblemError(f"{what} is not finite on the grid: {exc}") from exc
    vals = np.asarray(raw, dtype=complex)
    if vals.shape != xs.shape:
        vals = np.broadcast_to(vals, xs.shape)
    vals = np.array(vals)
    _check_finite(vals, grid, what)
    return vals


def _check_finite(vals: np.ndarray, grid: Grid, what: str):
    finite = np.isfinite(vals)
    if not np.all(finite):
        bad = int(np.argmax(~np.ravel(finite)))
        x_bad = grid.refined()[bad % (2 * grid.n + 1)]
        raise InvalidProblemError(f"{what} is not finite at x = {x_bad}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of a 1- or 2-component complex solution at every refined node."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        m = 2 * self.grid.n + 1
        if vals.shape != (m,) and vals.shape != (m, 2):
            raise InvalidProblemError(
                f"trajectory needs shape ({m},) or ({m}, 2), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidProblemError("trajectory contains non-finite samples")
        object.__setattr__(self, "values", vals)

    @property
    def components(self) -> int:
        return 1 if self.values.ndim == 1 else 2

    def component(self, k: int) -> "Trajectory":
        if self.components == 1:
            if k != 0:
                raise IndexError(k)
            return self
        return Trajectory(self.grid, self.values[:, k])

    def at_full_nodes(self) -> np.ndarray:
        """Values at the n+1 full-step nodes only."""
        return self.values[::2]

    def final(self):
        """Value at x0 (complex, or length-2 array for two components)."""
        v = self.values[-1]
        return complex(v) if self.components == 1 else np.array(v)


def cumulative_samples(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Cumulative integral from 0 of refined-node samples.

    Even nodes chain exact composite-Simpson panels over consecutive
    refined triples; odd nodes add the integral of the panel's
    interpolating parabola over its leading half.  The result is exact for
    polynomials of degree <= 2 everywhere and degree <= 3 at full nodes,
    and starts at exactly zero.
    """
    v = np.asarray(values, dtype=complex)
    m = 2 * grid.n + 1
    if v.shape != (m,):
        raise InvalidProblemError(f"expected {m} samples, got shape {v.shape}")
    d = 0.5 * grid.h
    left, mid, right = v[:-2:2], v[1::2], v[2::2]
    panel = (d / 3.0) * (left + 4.0 * mid + right)
    out = np.empty(m, dtype=complex)
    out[0] = 0.0
    out[2::2] = np.cumsum(panel)
    out[1::2] = out[:-2:2] + (d / 12.0) * (5.0 * left + 8.0 * mid - right)
    return out


def cumulative_integral(f: CoefficientFunction, grid: Grid) -> Trajectory:
    """Running integral of ``f`` from 0, tabulated at every refined node."""
    return Trajectory(grid, cumulative_samples(f.sample(grid), grid))


def finite_difference_derivative(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Derivative estimate from refined-node samples (spacing h/2).

    Fourth-order centered stencils in the interior with matching one-sided
    stencils at the edges, so differentiation noise stays at the level of
    the integrators' own truncation error.  Falls back to second order on
    grids too short for the five-point stencil.
    """
    v = np.asarray(values, dtype=complex)
    d = 0.5 * grid.h
    out = np.empty_like(v)
    if v.shape[0] < 5:
        out[1:-1] = (v[2:] - v[:-2]) / (2.0 * d)
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * d)
        out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * d)
        return out
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * d)
    out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * d)
    out[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * d)
    out[-2] = (3.0 * v[-1] + 10.0 * v[-2] - 18.0 * v[-3] + 6.0 * v[-4] - v[-5]) / (12.0 * d)
    out[-1] = (25.0 * v[-1] - 48.0 * v[-2] + 36.0 * v[-3] - 16.0 * v[-4] + 3.0 * v[-5]) / (12.0 * d)
    return out


def rk4_tabulated(rhs: Callable, y0, grid: Grid) -> np.ndarray:
    """Classical RK4 with step h; ``rhs(j, y)`` is the right-hand side at
    refined-node index j.

    Stage abscissae are the refined nodes, so tabulated coefficients are
    never interpolated.  Half-step samples of the returned array are filled
    by the cubic-Hermite midpoint formula, which is locally O(h^4) and uses
    only the already-tabulated node derivatives, keeping the whole
    trajectory fourth order without off-grid evaluations.
    """
    n, h = grid.n, grid.h
    y = np.asarray(y0, dtype=complex)
    ys = np.empty((2 * n + 1,) + y.shape, dtype=complex)
    slopes = np.empty((n + 1,) + y.shape, dtype=complex)
    ys[0] = y
    # overflow is detected via the finiteness check, not numpy warnings
    with np.errstate(all="ignore"):
        for k in range(n):
            j = 2 * k
            k1 = rhs(j, y)
            k2 = rhs(j + 1, y + (0.5 * h) * k1)
            k3 = rhs(j + 1, y + (0.5 * h) * k2)
            k4 = rhs(j + 2, y + h * k3)
            slopes[k] = k1
            y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            if not np.all(np.isfinite(y)):
                x_bad = grid.nodes()[k + 1]
                raise SolverFailure(f"non-finite state at x = {x_bad} (step {k + 1})",
                                    x=float(x_bad))
            ys[j + 2] = y
        slopes[n] = rhs(2 * n, y)
    ys[1::2] = 0.5 * (ys[:-2:2] + ys[2::2]) + (h / 8.0) * (slopes[:-1] - slopes[1:])
    return ys


def integrate_linear_system(M: Callable, F: Callable | None, U0, grid: Grid) -> Trajectory:
    """Reference RK4 solve of U' = M(x) U + F(x), U(0) = U0.

    ``M`` maps x to a 2x2 complex matrix and ``F`` (optional) to a length-2
    complex vector; both are tabulated on the refined grid before stepping.
    This is the package's independent oracle: it never goes through the
    conjugate-pair machinery.
    """
    xs = grid.refined()
    with np.errstate(all="ignore"):
        Ms = np.asarray([M(x) for x in xs], dtype=complex)
    if Ms.shape != (xs.size, 2, 2):
        raise InvalidProblemError(f"matrix map must yield 2x2 matrices, got {Ms.shape[1:]}")
    if not np.all(np.isfinite(Ms)):
        bad = np.argmax(~np.isfinite(Ms).all(axis=(1, 2)))
        raise InvalidProblemError(f"system matrix is not finite at x = {xs[bad]}")
    U0 = np.asarray(U0, dtype=complex).reshape(2)
    if F is None:
        rhs = lambda j, y: Ms[j] @ y
    else:
        with np.errstate(all="ignore"):
            Fs = np.asarray([F(x) for x in xs], dtype=complex)
        if Fs.shape != (xs.size, 2):
            raise InvalidProblemError(f"forcing map must yield length-2 vectors, got {Fs.shape[1:]}")
        if not np.all(np.isfinite(Fs)):
            bad = np.argmax(~np.isfinite(Fs).all(axis=1))
            raise InvalidProblemError(f"forcing is not finite at x = {xs[bad]}")
        rhs = lambda j, y: Ms[j] @ y + Fs[j]
    return Trajectory(grid, rk4_tabulated(rhs, U0, grid))


@dataclass
class ConvergenceStudy:
    """Sup-norm errors on a grid sequence and the observed log2 orders.

    ``exact`` flags studies whose errors sit at the roundoff floor on every
    level; no meaningful order can be measured there (the method already
    reproduces the reference to machine precision).
    """

    errors: list = field(default_factory=list)
    orders: list = field(default_factory=list)
    exact: bool = False


def convergence_order(solve: Callable, reference: Callable,
                      grids: Sequence[Grid], exact_floor: float = 1e-13) -> ConvergenceStudy:
    """Refinement study: run ``solve`` on each grid and compare at full nodes.

    ``solve(grid)`` must return a Trajectory and ``reference(x)`` the exact
    (or finest-level) solution values at the given abscissae.  Orders are
    log2 ratios of successive sup-norm errors.
    """
    errors = []
    scale = 1.0
    for g in grids:
        traj = solve(g)
        xs = g.nodes()
        ref = np.asarray(reference(xs), dtype=complex)
        vals = traj.at_full_nodes()
        if ref.shape != vals.shape:
            ref = ref.reshape(vals.shape)
        errors.append(float(np.max(np.abs(vals - ref))))
        scale = max(scale, float(np.max(np.abs(ref))))
    if max(errors) <= exact_floor * scale:
        return ConvergenceStudy(errors=errors, orders=[], exact=True)
    with np.errstate(divide="ignore"):
        orders = [float(np.log2(errors[i] / errors[i + 1])) for i in range(len(errors) - 1)]
    return ConvergenceStudy(errors=errors, orders=orders, exact=False)
