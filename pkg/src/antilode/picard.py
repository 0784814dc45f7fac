"""Truncated nested-integral kernels: a second, integrator-free route.

The kernel pair (direct, cross) generalises (cosh, sinh) of the running
integral of f.  Both are sums of alternating nested integrals in which the
integrand factors alternate between f and conj(f) from the outside in, the
outermost factor always being f and the innermost integrand carrying the
weight h (h == 1 in the unforced case):

    cross(x)  = I[f*h] + I[f * I[conj(f) * I[f*h]]] + ...   (odd depths)
    direct(x) = h(x)   + I[f * I[conj(f)*h]] + ...          (even depths)

with I[.] the indefinite integral from 0.  Differentiating swaps in the
conjugate coefficient: direct' = h' + f * cross(conj f, h) and
cross' = f * direct(conj f, h); with unit weight these collapse to
direct' = f*conj(cross), cross' = f*conj(direct), so (direct, cross)
reproduces the fundamental solution of the conjugate antidiagonal system
without running an ODE integrator.  Every term is an iterated indefinite
integral, so the whole truncation costs O(order * n) cumulative-Simpson
sweeps over the shared refined grid.

Terms come from the alternating chain

    T_0 = h,   T_{k+1} = I[m_k * T_k],   m_0 = f, m_1 = conj(f), m_2 = f, ...

Run on (f, h), its odd-depth terms are exactly the cross terms; the direct
terms are the conjugates of the even-depth terms of the chain run on
(f, conj(h)).  (Building direct terms as plain conjugates of the same chain
would also conjugate the weight, hence the second chain for complex h.)
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidProblemError
from .numerics import CoefficientFunction, Grid, Trajectory, cumulative_samples

__all__ = ["SeriesKernels", "series_kernels", "forced_series_kernels",
           "scalar_identity_residuals", "SLOW_CONVERGENCE_THRESHOLD"]

# Above this value of the integral of |f|, factorial decay of the terms sets
# in too late for short truncations; results are still computed but flagged.
SLOW_CONVERGENCE_THRESHOLD = 3.0


@dataclass(frozen=True, eq=False)
class SeriesKernels:
    """Truncated kernel pair with truncation diagnostics.

    ``order`` is the highest nesting depth included and ``last_term_norm``
    the sup-norm of the final included term.  ``metadata`` records which
    stopping criterion fired ("order" or "tol"), the per-term sup-norms,
    the integral of |f| and a slow-convergence flag.
    """

    direct: Trajectory
    cross: Trajectory
    order: int
    last_term_norm: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 1:
            raise InvalidProblemError("kernel truncation needs order >= 1")


def _alternating_chain(fv: np.ndarray, hv: np.ndarray, grid: Grid):
    """Yield the nested terms T_1, T_2, ... of the alternating chain on (f, h).

    T_k carries multipliers f, conj(f), f, ... from the inside out with the
    innermost integrand weighted by h.
    """
    cur = hv
    k = 0
    while True:
        mult = fv if k % 2 == 0 else np.conj(fv)
        cur = cumulative_samples(mult * cur, grid)
        k += 1
        yield cur


def _weight_values(h, grid: Grid) -> np.ndarray:
    if isinstance(h, Trajectory):
        if h.components != 1:
            raise InvalidProblemError("weight must be a 1-component trajectory")
        if h.grid != grid:
            raise InvalidProblemError("weight trajectory is bound to a different grid")
        return h.values
    if isinstance(h, CoefficientFunction):
        return h.sample(grid)
    vals = np.asarray(h, dtype=complex)
    if vals.shape != (2 * grid.n + 1,):
        raise InvalidProblemError(
            f"weight must have {2 * grid.n + 1} refined-node samples, got {vals.shape}")
    if not np.all(np.isfinite(vals)):
        raise InvalidProblemError("weight contains non-finite samples")
    return vals


def forced_series_kernels(f: CoefficientFunction, h, grid: Grid,
                          max_order: int = 15, tol: float = 1e-14) -> SeriesKernels:
    """Truncated weighted kernels for coefficient ``f`` and weight ``h``.

    ``h`` may be a CoefficientFunction, a 1-component Trajectory or a plain
    array of refined-node samples.  Truncation stops at ``max_order`` nested
    integrals or once the last included term's sup-norm drops below ``tol``,
    whichever happens first.  Start values are direct(0) = h(0) and
    cross(0) = 0 by construction.
    """
    if max_order < 1:
        raise InvalidProblemError("max_order must be >= 1")
    if not tol > 0:
        raise InvalidProblemError("tol must be positive")
    fv = f.sample(grid)
    hv = _weight_values(h, grid)
    odd_chain = _alternating_chain(fv, hv, grid)
    even_chain = _alternating_chain(fv, np.conj(hv), grid)

    direct = hv.astype(complex).copy()
    cross = np.zeros_like(direct)
    term_norms = []
    stopped_by = "order"
    order_used = max_order
    for k in range(1, max_order + 1):
        odd_term = next(odd_chain)
        even_term = next(even_chain)
        if k % 2 == 1:
            term = odd_term
            cross += term
        else:
            term = np.conj(even_term)
            direct += term
        if not np.all(np.isfinite(term)):
            raise InvalidProblemError(f"series term of depth {k} is not finite")
        term_norms.append(float(np.max(np.abs(term))))
        if term_norms[-1] < tol:
            stopped_by = "tol"
            order_used = k
            break

    f_l1 = float(np.real(cumulative_samples(np.abs(fv) + 0j, grid)[-1]))
    metadata = {
        "stopped_by": stopped_by,
        "term_sup_norms": term_norms,
        "f_l1": f_l1,
        "slow_convergence": f_l1 > SLOW_CONVERGENCE_THRESHOLD,
    }
    return SeriesKernels(direct=Trajectory(grid, direct),
                         cross=Trajectory(grid, cross),
                         order=order_used,
                         last_term_norm=term_norms[-1],
                         metadata=metadata)


def series_kernels(f: CoefficientFunction, grid: Grid,
                   max_order: int = 15, tol: float = 1e-14) -> SeriesKernels:
    """Truncated kernels with unit weight: direct(0) = 1, cross(0) = 0."""
    ones = np.ones(2 * grid.n + 1, dtype=complex)
    return forced_series_kernels(f, ones, grid, max_order=max_order, tol=tol)


def scalar_identity_residuals(f: CoefficientFunction, grid: Grid,
                              order: int = 12) -> tuple[float, float]:
    """Sup-norm residuals of the plain (conjugation-free) nested sums.

    Splitting the iterated integrals of f by parity must reproduce sinh and
    cosh of the running integral of f; the return value is
    (sinh residual, cosh residual) of the depth-``order`` truncation.
    """
    fv = f.sample(grid)
    running = cumulative_samples(fv, grid)
    odd_sum = np.zeros_like(fv)
    even_sum = np.zeros_like(fv)
    cur = np.ones_like(fv)
    for k in range(1, order + 1):
        cur = cumulative_samples(fv * cur, grid)
        if k % 2 == 1:
            odd_sum += cur
        else:
            even_sum += cur
    res_sinh = float(np.max(np.abs(odd_sum - np.sinh(running))))
    res_cosh = float(np.max(np.abs(1.0 + even_sum - np.cosh(running))))
    return res_sinh, res_cosh
