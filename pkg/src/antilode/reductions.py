"""Reduction pipelines from four physical problems to the conjugate-coupled form.

Each ``reduce_*`` function builds the reduced problem (coupling coefficient,
start data, optional forcing) together with the exact inverse recipe back to
the original physical variables; :func:`solve_reduced` runs the reduced
solve and applies that recipe node by node.

Three of the pipelines share one skeleton.  The original first-order system
is split into a skew part and a remainder; the constant rotation

    R = (1/sqrt 2) [[i, 1], [1, i]]

diagonalises the skew part, and an exponential substitution with the
resulting diagonal entry removes the diagonal completely.  What is left is
a 2x2 system whose matrix has zero diagonal and complex-conjugate
off-diagonal entries -- exactly the form solved in
:mod:`antilode.antidiagonal`.  The spectral-scattering system is already in
that shape up to diagonal phases, so its reduction is the phase absorption
alone.  The inverse recipe is the composition of the inverse substitution
(node-wise multipliers), the inverse rotation (when one was applied) and a
final component map to the physical unknowns.

Coefficient derivatives enter the reduced coupling as d(a)/(4a)-type terms,
so analytic derivatives are required by default; a centered half-step
finite-difference fallback exists behind an explicit flag and its use is
recorded in the result metadata (finite-difference noise would otherwise
contaminate fourth-order refinement studies).
"""

from dataclasses import dataclass, field

import numpy as np

from .antidiagonal import (AntidiagonalProblem, compatibility_deviation,
                           fundamental_pair, solve_nonhomogeneous)
from .errors import InvalidProblemError
from .numerics import (CoefficientFunction, Grid, Trajectory,
                       cumulative_samples, finite_difference_derivative)

__all__ = [
    "SchrodingerInput", "HelmholtzInput", "ZakharovShabatInput", "KubelkaMunkInput",
    "InverseRecipe", "ReducedProblem", "PipelineResult",
    "reduce_schrodinger", "reduce_helmholtz", "reduce_zakharov_shabat",
    "reduce_kubelka_munk", "solve_reduced", "ROTATION", "ROTATION_INV",
]

_SQRT2 = float(np.sqrt(2.0))
ROTATION = np.array([[1j, 1.0], [1.0, 1j]], dtype=complex) / _SQRT2
ROTATION_INV = np.array([[-1j, 1.0], [1.0, -1j]], dtype=complex) / _SQRT2

_REAL_TOL = 1e-12
CONSISTENCY_WARN_THRESHOLD = 1e-6


@dataclass(frozen=True)
class SchrodingerInput:
    """u'' + a(x) u = 0 with u(0) = u0, u'(0) = u1; a real, positive, C^1."""

    potential: CoefficientFunction
    u0: complex
    u1: complex
    grid: Grid


@dataclass(frozen=True)
class HelmholtzInput:
    """(alpha u')' + beta u = source with real data.

    alpha, beta must be real and positive with derivatives; source, u0, u1
    must be real (complex data splits into two real problems).
    """

    alpha: CoefficientFunction
    beta: CoefficientFunction
    source: CoefficientFunction
    u0: float
    u1: float
    grid: Grid


@dataclass(frozen=True)
class ZakharovShabatInput:
    """v' = [[-i xi, q], [conj q, i xi]] v with spectral parameter xi."""

    potential: CoefficientFunction
    xi: float
    v0: tuple
    grid: Grid


@dataclass(frozen=True)
class KubelkaMunkInput:
    """Two-flux model F' = [[-K-S, S], [-S, K+S]] F with real K, S."""

    absorption: CoefficientFunction
    scattering: CoefficientFunction
    flux0: tuple
    grid: Grid


@dataclass(frozen=True, eq=False)
class InverseRecipe:
    """Node-wise undo of the reduction.

    ``rephase`` are the multipliers that restore the exponential
    substitution, ``rotation_inverse`` the constant matrix undoing the
    component rotation (None when no rotation was applied), and
    ``description`` names the final map to the physical unknowns.
    """

    rephase: tuple
    rotation_inverse: np.ndarray | None
    description: str


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    reduced: AntidiagonalProblem
    inverse: InverseRecipe
    context_tag: str
    extras: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


@dataclass(eq=False)
class PipelineResult:
    """Physical-variable trajectory plus solve diagnostics.

    ``metadata`` carries determinant drift (homogeneous solves),
    compatibility residual (forced solves), the consistency-check residual
    where the pipeline defines one, and any warnings.  ``intermediates``
    holds the reduced/rephased/assembled stages when requested.
    """

    physical: Trajectory
    metadata: dict
    intermediates: dict | None = None


def _require_real(vals: np.ndarray, what: str, grid: Grid, positive: bool = False) -> np.ndarray:
    scale = 1.0 + float(np.max(np.abs(vals)))
    worst = float(np.max(np.abs(vals.imag)))
    if worst > _REAL_TOL * scale:
        raise InvalidProblemError(f"{what} must be real-valued (max |Im| = {worst:.3e})")
    re = np.real(np.asarray(vals))
    if positive and np.min(re) <= 0.0:
        bad = int(np.argmin(re))
        raise InvalidProblemError(
            f"{what} must be positive; value {re[bad]} at x = {grid.refined()[bad]}")
    return re


def _require_real_scalar(z, what: str) -> float:
    zc = complex(z)
    if abs(zc.imag) > _REAL_TOL * (1.0 + abs(zc)):
        raise InvalidProblemError(
            f"{what} must be real; the problem is linear with real coefficients, "
            "so solve the real and imaginary parts separately")
    return zc.real


def _derivative_samples(cf: CoefficientFunction, vals: np.ndarray, grid: Grid,
                        use_fd: bool, what: str) -> tuple[np.ndarray, str]:
    if cf.has_derivative:
        return cf.sample_derivative(grid), "analytic"
    if use_fd:
        return finite_difference_derivative(vals, grid), "finite-difference"
    raise InvalidProblemError(
        f"{what} has no analytic derivative; supply one or pass use_fd_derivative=True")


def reduce_schrodinger(inp: SchrodingerInput, use_fd_derivative: bool = False) -> ReducedProblem:
    """Reduce u'' + a u = 0 to the conjugate-coupled form.

    The reduced coupling is (i a'/(4a)) * exp(-2i int sqrt(a)); the inverse
    recipe restores the exponential substitution with diagonal entry
    i*sqrt(a) - a'/(4a), rotates back, and reads u off the first component.
    The second component equals u'/sqrt(a) and is kept as a consistency
    check.
    """
    grid = inp.grid
    raw = inp.potential.sample(grid)
    a = _require_real(raw, "potential", grid, positive=True)
    da_raw, source_tag = _derivative_samples(inp.potential, raw, grid,
                                             use_fd_derivative, "potential")
    da = _require_real(da_raw, "potential derivative", grid)
    root = np.sqrt(a)
    amp = da / (4.0 * a)
    phase = cumulative_samples(root.astype(complex), grid)
    coupling = 1j * amp * np.exp(-2j * phase)

    u0, u1 = complex(inp.u0), complex(inp.u1)
    w0 = ((1j * u0 + u1 / root[0]) / _SQRT2,
          (u0 + 1j * u1 / root[0]) / _SQRT2)

    diag_entry = 1j * root - amp
    running = cumulative_samples(diag_entry.astype(complex), grid)
    recipe = InverseRecipe(
        rephase=(np.exp(running), np.exp(np.conj(running))),
        rotation_inverse=ROTATION_INV,
        description="u = first component; second component is u'/sqrt(a) (consistency check)",
    )
    reduced = AntidiagonalProblem(
        f=CoefficientFunction.from_samples(grid, coupling), u0=w0, grid=grid)
    return ReducedProblem(reduced=reduced, inverse=recipe, context_tag="schrodinger",
                          extras={"sqrt_potential": root},
                          metadata={"derivative_source": {"potential": source_tag}})


def reduce_helmholtz(inp: HelmholtzInput, use_fd_derivative: bool = False) -> ReducedProblem:
    """Reduce (alpha u')' + beta u = source to the forced conjugate-coupled form.

    The constructed forcing satisfies g2 = i*conj(g1) exactly (it is built
    from that formula) and the start data obeys the matching pairing, so the
    decoupled nonhomogeneous route applies by construction.
    """
    grid = inp.grid
    raw_a = inp.alpha.sample(grid)
    raw_b = inp.beta.sample(grid)
    alpha = _require_real(raw_a, "alpha", grid, positive=True)
    beta = _require_real(raw_b, "beta", grid, positive=True)
    src = _require_real(inp.source.sample(grid), "source", grid)
    u0 = _require_real_scalar(inp.u0, "u0")
    u1 = _require_real_scalar(inp.u1, "u1")

    da_raw, tag_a = _derivative_samples(inp.alpha, raw_a, grid, use_fd_derivative, "alpha")
    db_raw, tag_b = _derivative_samples(inp.beta, raw_b, grid, use_fd_derivative, "beta")
    dalpha = _require_real(da_raw, "alpha derivative", grid)
    dbeta = _require_real(db_raw, "beta derivative", grid)

    product = alpha * beta
    dproduct = dalpha * beta + alpha * dbeta
    ratio = np.sqrt(beta / alpha)
    amp = dproduct / (4.0 * product)
    phase = cumulative_samples(ratio.astype(complex), grid)
    coupling = 1j * amp * np.exp(-2j * phase)

    diag_entry = 1j * ratio + amp
    running = cumulative_samples(diag_entry.astype(complex), grid)
    g1 = (src / _SQRT2) * np.exp(-running)
    g2 = 1j * np.conj(g1)

    amplitude = np.sqrt(product)
    w1_0 = (1j * amplitude[0] * u0 + alpha[0] * u1) / _SQRT2
    w0 = (w1_0, 1j * np.conj(w1_0))

    recipe = InverseRecipe(
        rephase=(np.exp(running), np.exp(np.conj(running))),
        rotation_inverse=ROTATION_INV,
        description=("u = first component / sqrt(alpha*beta); "
                     "second component is alpha*u' (consistency check)"),
    )
    reduced = AntidiagonalProblem(
        f=CoefficientFunction.from_samples(grid, coupling),
        u0=w0, grid=grid,
        forcing=(CoefficientFunction.from_samples(grid, g1),
                 CoefficientFunction.from_samples(grid, g2)))
    return ReducedProblem(reduced=reduced, inverse=recipe, context_tag="helmholtz",
                          extras={"amplitude": amplitude, "alpha": alpha},
                          metadata={"derivative_source": {"alpha": tag_a, "beta": tag_b}})


def reduce_zakharov_shabat(inp: ZakharovShabatInput) -> ReducedProblem:
    """Absorb the spectral phases: the reduced coupling is q(x) e^{2i xi x}.

    No rotation is involved; the inverse recipe is the pair of phase
    multipliers e^{-i xi x}, e^{+i xi x} applied componentwise.
    """
    grid = inp.grid
    qv = inp.potential.sample(grid)
    xs = grid.refined()
    xi = float(inp.xi)
    coupling = qv * np.exp(2j * xi * xs)
    recipe = InverseRecipe(
        rephase=(np.exp(-1j * xi * xs), np.exp(1j * xi * xs)),
        rotation_inverse=None,
        description="both components are physical after the phase restore",
    )
    reduced = AntidiagonalProblem(
        f=CoefficientFunction.from_samples(grid, coupling),
        u0=tuple(inp.v0), grid=grid)
    return ReducedProblem(reduced=reduced, inverse=recipe,
                          context_tag="zakharov_shabat", extras={}, metadata={})


def reduce_kubelka_munk(inp: KubelkaMunkInput) -> ReducedProblem:
    """Reduce the two-flux model to the conjugate-coupled form.

    The reduced coupling is -i (K + S) exp(-2i int S); the start data is the
    rotated flux vector, and the inverse recipe restores the scattering
    phases and rotates back to the flux components.
    """
    grid = inp.grid
    absorption = _require_real(inp.absorption.sample(grid), "absorption", grid)
    scattering = _require_real(inp.scattering.sample(grid), "scattering", grid)
    f_plus = _require_real_scalar(inp.flux0[0], "forward flux start value")
    f_minus = _require_real_scalar(inp.flux0[1], "backward flux start value")

    phase = cumulative_samples(scattering.astype(complex), grid)
    coupling = -1j * (absorption + scattering) * np.exp(-2j * phase)
    w0_vec = ROTATION @ np.array([f_plus, f_minus], dtype=complex)
    recipe = InverseRecipe(
        rephase=(np.exp(1j * phase), np.exp(-1j * phase)),
        rotation_inverse=ROTATION_INV,
        description="both components are physical fluxes after the rotation",
    )
    reduced = AntidiagonalProblem(
        f=CoefficientFunction.from_samples(grid, coupling),
        u0=(w0_vec[0], w0_vec[1]), grid=grid)
    return ReducedProblem(reduced=reduced, inverse=recipe,
                          context_tag="kubelka_munk", extras={}, metadata={})


def solve_reduced(rp: ReducedProblem, method: str = "integrator",
                  emit_intermediates: bool = False) -> PipelineResult:
    """Solve the reduced problem and map back to physical variables.

    Returns the physical trajectory plus metadata: determinant drift for
    homogeneous solves, the compatibility residual for forced ones, and the
    pipeline's consistency-check residual where one is defined.
    """
    prob = rp.reduced
    grid = prob.grid
    metadata = dict(rp.metadata)
    metadata.setdefault("warnings", [])
    if prob.forcing is None:
        pair = fundamental_pair(prob.f, grid, method=method)
        reduced_vals = pair.apply(prob.u0)
        metadata["determinant_drift"] = pair.metadata["determinant_drift"]
        metadata["warnings"].extend(pair.metadata["warnings"])
    else:
        if method != "integrator":
            raise InvalidProblemError(
                "forced solves go through the decoupled integrator route; "
                "series kernels for forced problems live in antilode.picard")
        metadata["compatibility_residual"] = compatibility_deviation(prob)
        reduced_vals = solve_nonhomogeneous(prob).values

    m1, m2 = rp.inverse.rephase
    rephased = np.stack([reduced_vals[:, 0] * m1, reduced_vals[:, 1] * m2], axis=1)
    if rp.inverse.rotation_inverse is not None:
        assembled = rephased @ rp.inverse.rotation_inverse.T
    else:
        assembled = rephased

    if rp.context_tag == "schrodinger":
        u = assembled[:, 0]
        physical = Trajectory(grid, u)
        slope = finite_difference_derivative(u, grid)
        residual = float(np.max(np.abs(
            assembled[:, 1] - slope / rp.extras["sqrt_potential"])))
        metadata["consistency_residual"] = residual
    elif rp.context_tag == "helmholtz":
        u = assembled[:, 0] / rp.extras["amplitude"]
        physical = Trajectory(grid, u)
        slope = finite_difference_derivative(u, grid)
        residual = float(np.max(np.abs(
            assembled[:, 1] - rp.extras["alpha"] * slope)))
        metadata["consistency_residual"] = residual
    else:
        physical = Trajectory(grid, assembled)
    if metadata.get("consistency_residual", 0.0) > CONSISTENCY_WARN_THRESHOLD:
        metadata["warnings"].append(
            f"consistency-check residual {metadata['consistency_residual']:.3e} "
            f"exceeds {CONSISTENCY_WARN_THRESHOLD:.0e}")

    intermediates = None
    if emit_intermediates:
        intermediates = {
            "reduced": Trajectory(grid, reduced_vals),
            "rephased": Trajectory(grid, rephased),
            "assembled": Trajectory(grid, assembled),
        }
    return PipelineResult(physical=physical, metadata=metadata,
                          intermediates=intermediates)
