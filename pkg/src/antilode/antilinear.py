"""Solvers for the scalar conjugate-coupled ODE u' = sign*f(x)*conj(u) + g(x).

The conjugation makes the right-hand side additive and real-homogeneous but
not complex-linear, so the equation is integrated as the realified system
for (Re u, Im u); writing it with ``conj`` inside complex arithmetic is the
same two real ODEs in compact form.  RK4 stage points stay on the refined
grid (see :mod:`antilode.numerics`).
"""

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import InvalidProblemError
from .numerics import CoefficientFunction, Grid, Trajectory, rk4_tabulated

__all__ = [
    "AntilinearProblem", "DecoupledPair",
    "solve_antilinear", "solve_constant_closed_form",
    "solve_decoupled_pair", "solve_forced_decoupled_pair",
]


@dataclass(frozen=True)
class AntilinearProblem:
    """Data for u' = f(x)*conj(u) + g(x), u(0) = u0 on a grid."""

    f: CoefficientFunction
    g: CoefficientFunction | None
    u0: complex
    grid: Grid


@dataclass(frozen=True, eq=False)
class DecoupledPair:
    """Solutions of the two independent problems with coefficients +f and -f."""

    plus: Trajectory
    minus: Trajectory


def solve_antilinear(problem: AntilinearProblem, sign: int = 1) -> Trajectory:
    """RK4 solve of u' = sign*f*conj(u) + g, u(0) = u0.

    With u = p + i*q, f = fr + i*fi and g = gr + i*gi this is the real
    system p' = sign*(fr*p + fi*q) + gr, q' = sign*(fi*p - fr*q) + gi.
    """
    if sign not in (1, -1):
        raise InvalidProblemError(f"sign must be +1 or -1, got {sign}")
    grid = problem.grid
    fv = sign * problem.f.sample(grid)
    u0 = np.complex128(problem.u0)
    if problem.g is None:
        rhs = lambda j, y: fv[j] * np.conj(y)
    else:
        gv = problem.g.sample(grid)
        rhs = lambda j, y: fv[j] * np.conj(y) + gv[j]
    return Trajectory(grid, rk4_tabulated(rhs, u0, grid))


def solve_constant_closed_form(f: complex, u0: complex, x):
    """Exact solution of u' = f*conj(u), u(0) = u0 for constant f != 0.

    Writing f = |f|*e^{i*t}, the rotation u = e^{i*t/2}*w splits w into a
    growing real part and a decaying imaginary part: with
    e^{-i*t/2}*u0 = a + i*b the solution is
    e^{i*t/2} * (a*e^{|f|x} + i*b*e^{-|f|x}).
    Accepts a scalar or an array of abscissae.
    """
    fc = complex(f)
    if fc == 0:
        raise InvalidProblemError("constant coefficient must be nonzero")
    t = cmath.phase(fc)
    r = abs(fc)
    w0 = cmath.exp(-0.5j * t) * complex(u0)
    xs = np.asarray(x, dtype=float)
    out = cmath.exp(0.5j * t) * (w0.real * np.exp(r * xs) + 1j * w0.imag * np.exp(-r * xs))
    return complex(out[()]) if xs.ndim == 0 else out


def solve_decoupled_pair(f: CoefficientFunction, grid: Grid) -> DecoupledPair:
    """Solve u' = +f*conj(u) and u' = -f*conj(u), both from u(0) = 1."""
    problem = AntilinearProblem(f, None, 1.0 + 0.0j, grid)
    return DecoupledPair(plus=solve_antilinear(problem, +1),
                         minus=solve_antilinear(problem, -1))


def solve_forced_decoupled_pair(f: CoefficientFunction, g1: CoefficientFunction,
                                u1_0: complex, grid: Grid) -> DecoupledPair:
    """Solve u' = +-f*conj(u) + g1 with the shared start value u1_0."""
    problem = AntilinearProblem(f, g1, u1_0, grid)
    return DecoupledPair(plus=solve_antilinear(problem, +1),
                         minus=solve_antilinear(problem, -1))
