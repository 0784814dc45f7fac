"""Command-line interface.

Subcommands: solve-antilinear, solve-system, reduce, series, sweep-xi,
verify.  Options may come from flags or from a JSON config file
(``--config``) whose keys are the kebab-case flag names; flags override
file values.  Results are written as CSV (full grid nodes only); ``--plot``
renders a figure next to the CSV and ``--plot-script`` emits a gnuplot
script that references it.

Exit codes: 0 success, 1 input/parse error (nothing is written), 2 solver
failure (non-finite state or a structural-compatibility refusal).
"""

import argparse
import json
import re as _re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import expr
from .antidiagonal import (GeneralSystem, check_strong_condition,
                           check_weak_condition, remove_diagonal,
                           solve_homogeneous, solve_strong_explicit)
from .antilinear import AntilinearProblem, solve_antilinear
from .errors import (CompatibilityError, EvaluationError, InvalidProblemError,
                     ParseError, SolverFailure)
from .numerics import CoefficientFunction, Grid, Trajectory, integrate_linear_system
from .picard import series_kernels
from .reductions import (HelmholtzInput, KubelkaMunkInput, SchrodingerInput,
                         ZakharovShabatInput, reduce_helmholtz,
                         reduce_kubelka_munk, reduce_schrodinger,
                         reduce_zakharov_shabat, solve_reduced)
from .report import (emit_csv, emit_plot_script, emit_sweep_csv,
                     render_figure, render_sweep_figure)
from .verify import available_suites, run_suite

__all__ = ["main", "RunConfig"]

_CONTEXTS = ("schrodinger", "helmholtz", "zakharov-shabat", "kubelka-munk")


@dataclass(frozen=True)
class RunConfig:
    """Merged, validated run options shared by the solve commands."""

    command: str
    context: str | None
    expressions: dict
    x0: float
    steps: int
    method: str
    order: int
    tol: float
    output: str
    emit_intermediates: bool = False
    parsed: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.x0 > 0:
            raise InvalidProblemError(f"--x0 must be positive, got {self.x0}")
        if self.steps < 2:
            raise InvalidProblemError(f"--steps must be at least 2, got {self.steps}")
        if self.method not in ("integrator", "series"):
            raise InvalidProblemError(f"--method must be 'integrator' or 'series', got {self.method!r}")
        for name, text in self.expressions.items():
            self.parsed[name] = expr.parse(text)

    def grid(self) -> Grid:
        return Grid(self.x0, self.steps)

    def coefficient(self, name: str, derivative_name: str | None = None) -> CoefficientFunction:
        tree = self.parsed[name]
        dfn = None
        if derivative_name is not None and derivative_name in self.parsed:
            dtree = self.parsed[derivative_name]
            dfn = lambda x: expr.evaluate(dtree, x)
        elif derivative_name is not None and not expr.depends_on_x(tree):
            dfn = lambda x: np.zeros(np.shape(x), dtype=complex)
        return CoefficientFunction(lambda x: expr.evaluate(tree, x), dfn)


class _Options:
    """Flag values merged over a JSON config file (flags win)."""

    def __init__(self, args: argparse.Namespace):
        ns = vars(args)
        known = {k.replace("_", "-") for k in ns if k not in ("command", "config")}
        file_cfg = {}
        if ns.get("config"):
            with open(ns["config"]) as fh:
                file_cfg = json.load(fh)
            if not isinstance(file_cfg, dict):
                raise InvalidProblemError("config file must hold a JSON object")
            unknown = set(file_cfg) - known
            if unknown:
                raise InvalidProblemError(
                    f"unknown config keys: {', '.join(sorted(unknown))}")
        self.values = dict(file_cfg)
        for key, val in ns.items():
            if key in ("command", "config") or val is None:
                continue
            self.values[key.replace("_", "-")] = val

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise InvalidProblemError(f"missing required option '--{key}'")
        return self.values[key]

    def require_text(self, key) -> str:
        self.require(key)
        return self.text(key)

    def text(self, key, default=None) -> str | None:
        val = self.values.get(key, default)
        if val is None:
            return None
        if isinstance(val, (int, float)) and not isinstance(val, bool):
            return repr(val)
        return str(val)

    def const(self, key, default=None) -> complex | None:
        """A constant scalar given as an expression, e.g. '1+2*i'."""
        text = self.text(key, default)
        if text is None:
            return None
        return expr.evaluate(expr.parse(text), 0.0)

    def const_pair(self, key, default=None) -> tuple | None:
        text = self.text(key, default)
        if text is None:
            return None
        parts = text.split(",")
        if len(parts) != 2:
            raise InvalidProblemError(f"--{key} needs two comma-separated values, got {text!r}")
        return (expr.evaluate(expr.parse(parts[0]), 0.0),
                expr.evaluate(expr.parse(parts[1]), 0.0))


def _common_flags(sub):
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--x0", type=float, help="interval end (default 1.0)")
    sub.add_argument("--steps", type=int, help="number of grid steps (default 1000)")
    sub.add_argument("--output", help="CSV output path (default out.csv)")
    sub.add_argument("--plot", action="store_const", const=True,
                     help="render a figure next to the CSV")
    sub.add_argument("--plot-script", help="also write a gnuplot script to this path")


def _method_flags(sub):
    sub.add_argument("--method", choices=("integrator", "series"),
                     help="solve route (default integrator)")
    sub.add_argument("--order", type=int, help="series truncation depth (default 15)")
    sub.add_argument("--tol", type=float, help="series last-term tolerance (default 1e-14)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antilode",
        description="Solvers built around the conjugate-coupled ODE u' = f(x)*conj(u) + g(x)")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("solve-antilinear", help="solve u' = sign*f(x)*conj(u) + g(x)")
    p.add_argument("--f", help="coefficient expression")
    p.add_argument("--g", help="forcing expression (optional)")
    p.add_argument("--u0", help="start value (constant expression, default 1)")
    p.add_argument("--sign", type=int, choices=(1, -1), help="coefficient sign (default 1)")
    _common_flags(p)

    p = subs.add_parser("solve-system", help="solve U' = [[p, r], [s, q]] U")
    for name in ("p", "q", "r", "s"):
        p.add_argument(f"--{name}", help="matrix entry expression (default 0)")
    p.add_argument("--u0", help="start vector 'a,b' (constant expressions)")
    _method_flags(p)
    _common_flags(p)

    p = subs.add_parser("series", help="tabulate the truncated nested-integral kernels")
    p.add_argument("--f", help="coefficient expression")
    _method_flags(p)
    _common_flags(p)

    p = subs.add_parser("reduce", help="solve a physical problem through its reduction")
    p.add_argument("--context", choices=_CONTEXTS, help="which reduction to run")
    p.add_argument("--a", help="[schrodinger] coefficient expression")
    p.add_argument("--da", help="[schrodinger] analytic derivative of --a")
    p.add_argument("--alpha", help="[helmholtz] coefficient expression")
    p.add_argument("--dalpha", help="[helmholtz] analytic derivative of --alpha")
    p.add_argument("--beta", help="[helmholtz] coefficient expression")
    p.add_argument("--dbeta", help="[helmholtz] analytic derivative of --beta")
    p.add_argument("--f-src", help="[helmholtz] source expression (default 0)")
    p.add_argument("--u0", help="[schrodinger/helmholtz] start value (default 1)")
    p.add_argument("--u1", help="[schrodinger/helmholtz] start slope (default 0)")
    p.add_argument("--q", help="[zakharov-shabat] potential expression")
    p.add_argument("--xi", type=float, help="[zakharov-shabat] spectral parameter (default 0)")
    p.add_argument("--v0", help="[zakharov-shabat] start vector 'a,b' (default '1,0')")
    p.add_argument("--K", help="[kubelka-munk] absorption expression")
    p.add_argument("--S", help="[kubelka-munk] scattering expression")
    p.add_argument("--Fp0", help="[kubelka-munk] forward flux at 0 (default 1)")
    p.add_argument("--Fm0", help="[kubelka-munk] backward flux at 0 (default 0)")
    p.add_argument("--fd-derivatives", action="store_const", const=True,
                   help="allow finite-difference fallback for missing derivatives")
    p.add_argument("--emit-intermediates", action="store_const", const=True,
                   help="also write the reduced/rephased/assembled stages as CSVs")
    _method_flags(p)
    _common_flags(p)

    p = subs.add_parser("sweep-xi", help="sweep the spectral parameter of the scattering reduction")
    p.add_argument("--q", help="potential expression; any 'xi' in it is substituted per value")
    p.add_argument("--v0", help="start vector 'a,b' (default '1,0')")
    p.add_argument("--xi-from", type=float, help="first parameter value")
    p.add_argument("--xi-to", type=float, help="last parameter value")
    p.add_argument("--xi-count", type=int, help="number of values (default 41)")
    p.add_argument("--xi-values", help="explicit comma-separated values (overrides the range)")
    _common_flags(p)

    p = subs.add_parser("verify", help="run the built-in verification suites")
    p.add_argument("--suite", default="all", choices=available_suites(),
                   help="which suite to run (default all)")
    return parser


def _runconfig(opts: _Options, command: str, expressions: dict,
               context: str | None = None) -> RunConfig:
    return RunConfig(
        command=command,
        context=context,
        expressions=expressions,
        x0=float(opts.get("x0", 1.0)),
        steps=int(opts.get("steps", 1000)),
        method=str(opts.get("method", "integrator")),
        order=int(opts.get("order", 15)),
        tol=float(opts.get("tol", 1e-14)),
        output=str(opts.get("output", "out.csv")),
        emit_intermediates=bool(opts.get("emit-intermediates", False)),
    )


def _write_outputs(traj: Trajectory, cfg: RunConfig, opts: _Options):
    emit_csv(traj, cfg.output)
    script = opts.text("plot-script")
    if script:
        emit_plot_script(cfg.output, script)
    if opts.get("plot"):
        render_figure(cfg.output, str(Path(cfg.output).with_suffix(".png")),
                      title=cfg.command)


def _note(msg: str):
    print(msg, file=sys.stderr)


def _cmd_solve_antilinear(opts: _Options) -> int:
    expressions = {"f": opts.require_text("f")}
    if opts.text("g") is not None:
        expressions["g"] = opts.text("g")
    cfg = _runconfig(opts, "solve-antilinear", expressions)
    grid = cfg.grid()
    problem = AntilinearProblem(
        f=cfg.coefficient("f"),
        g=cfg.coefficient("g") if "g" in cfg.parsed else None,
        u0=opts.const("u0", "1"),
        grid=grid)
    traj = solve_antilinear(problem, sign=int(opts.get("sign", 1)))
    _write_outputs(traj, cfg, opts)
    return 0


def _cmd_solve_system(opts: _Options) -> int:
    expressions = {name: opts.text(name, "0") for name in ("p", "q", "r", "s")}
    cfg = _runconfig(opts, "solve-system", expressions)
    grid = cfg.grid()
    system = GeneralSystem(
        p=cfg.coefficient("p"), q=cfg.coefficient("q"),
        r=cfg.coefficient("r"), s=cfg.coefficient("s"),
        u0=opts.const_pair("u0", "1,0"), grid=grid)

    strong = check_strong_condition(system)
    if strong.holds:
        _note("route: equal transformed entries; explicit cosh/sinh solution")
        traj = solve_strong_explicit(system, strong.c1)
    else:
        weak = check_weak_condition(system)
        if weak.holds:
            _note("route: conjugate transformed entries; decoupled conjugate-pair solve")
            _, multipliers = remove_diagonal(system)
            transformed = solve_homogeneous(weak.problem, method=cfg.method)
            traj = multipliers.to_original(transformed)
        else:
            _note("route: no structural condition holds; direct RK4 integration")
            trees = {k: cfg.parsed[k] for k in ("p", "q", "r", "s")}
            M = lambda x: np.array([
                [expr.evaluate(trees["p"], x), expr.evaluate(trees["r"], x)],
                [expr.evaluate(trees["s"], x), expr.evaluate(trees["q"], x)]])
            traj = integrate_linear_system(M, None, system.u0, grid)
    _write_outputs(traj, cfg, opts)
    return 0


def _cmd_series(opts: _Options) -> int:
    cfg = _runconfig(opts, "series", {"f": opts.require_text("f")})
    grid = cfg.grid()
    kernels = series_kernels(cfg.coefficient("f"), grid,
                             max_order=cfg.order, tol=cfg.tol)
    _note(f"series: order {kernels.order} ({kernels.metadata['stopped_by']} criterion), "
          f"last term {kernels.last_term_norm:.3e}")
    if kernels.metadata["slow_convergence"]:
        _note(f"series: slow convergence flagged (integral of |f| = "
              f"{kernels.metadata['f_l1']:.3f} > 3); the integrator route is recommended")
    vals = np.stack([kernels.direct.values, kernels.cross.values], axis=1)
    _write_outputs(Trajectory(grid, vals), cfg, opts)
    return 0


def _reduce_problem(cfg: RunConfig, opts: _Options, grid: Grid):
    context = cfg.context
    use_fd = bool(opts.get("fd-derivatives", False))
    if context == "schrodinger":
        inp = SchrodingerInput(potential=cfg.coefficient("a", "da"),
                               u0=opts.const("u0", "1"), u1=opts.const("u1", "0"),
                               grid=grid)
        return reduce_schrodinger(inp, use_fd_derivative=use_fd)
    if context == "helmholtz":
        inp = HelmholtzInput(alpha=cfg.coefficient("alpha", "dalpha"),
                             beta=cfg.coefficient("beta", "dbeta"),
                             source=cfg.coefficient("f-src"),
                             u0=opts.const("u0", "0"), u1=opts.const("u1", "0"),
                             grid=grid)
        return reduce_helmholtz(inp, use_fd_derivative=use_fd)
    if context == "zakharov-shabat":
        inp = ZakharovShabatInput(potential=cfg.coefficient("q"),
                                  xi=float(opts.get("xi", 0.0)),
                                  v0=opts.const_pair("v0", "1,0"), grid=grid)
        return reduce_zakharov_shabat(inp)
    inp = KubelkaMunkInput(absorption=cfg.coefficient("K"),
                           scattering=cfg.coefficient("S"),
                           flux0=(opts.const("Fp0", "1"), opts.const("Fm0", "0")),
                           grid=grid)
    return reduce_kubelka_munk(inp)


def _cmd_reduce(opts: _Options) -> int:
    context = str(opts.require("context"))
    if context not in _CONTEXTS:
        raise InvalidProblemError(f"unknown context {context!r}; choose from {', '.join(_CONTEXTS)}")
    required = {
        "schrodinger": ("a",),
        "helmholtz": ("alpha", "beta"),
        "zakharov-shabat": ("q",),
        "kubelka-munk": ("K", "S"),
    }[context]
    expressions = {}
    for name in required:
        expressions[name] = opts.require_text(name)
    for name in ("da", "dalpha", "dbeta"):
        if opts.text(name) is not None:
            expressions[name] = opts.text(name)
    if context == "helmholtz":
        expressions["f-src"] = opts.text("f-src", "0")
    cfg = _runconfig(opts, "reduce", expressions, context=context)
    grid = cfg.grid()
    rp = _reduce_problem(cfg, opts, grid)
    result = solve_reduced(rp, method=cfg.method,
                           emit_intermediates=cfg.emit_intermediates)
    for key in ("determinant_drift", "compatibility_residual", "consistency_residual"):
        if key in result.metadata:
            _note(f"reduce: {key.replace('_', ' ')} = {result.metadata[key]:.3e}")
    for warning in result.metadata.get("warnings", []):
        _note(f"warning: {warning}")
    _write_outputs(result.physical, cfg, opts)
    if result.intermediates:
        out = Path(cfg.output)
        for key, traj in result.intermediates.items():
            emit_csv(traj, out.with_name(f"{out.stem}.{key}{out.suffix}"))
    return 0


def _cmd_sweep_xi(opts: _Options) -> int:
    qtext = opts.require_text("q")
    cfg = _runconfig(opts, "sweep-xi", {})
    grid = cfg.grid()
    v0 = opts.const_pair("v0", "1,0")
    if opts.text("xi-values") is not None:
        xis = [float(s) for s in opts.text("xi-values").split(",")]
    else:
        lo = float(opts.require("xi-from"))
        hi = float(opts.require("xi-to"))
        count = int(opts.get("xi-count", 41))
        if count < 1:
            raise InvalidProblemError(f"--xi-count must be positive, got {count}")
        xis = list(np.linspace(lo, hi, count))
    slices = []
    for xi in xis:
        # the evaluator is single-variable: substitute the parameter textually
        text = _re.sub(r"\bxi\b", f"({xi!r})", qtext)
        tree = expr.parse(text)
        potential = CoefficientFunction(lambda x, tree=tree: expr.evaluate(tree, x))
        rp = reduce_zakharov_shabat(ZakharovShabatInput(potential, xi, v0, grid))
        slices.append((xi, solve_reduced(rp).physical))
    emit_sweep_csv(slices, cfg.output)
    script = opts.text("plot-script")
    if script:
        emit_plot_script(cfg.output, script)
    if opts.get("plot"):
        render_sweep_figure(slices, str(Path(cfg.output).with_suffix(".png")))
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    results = run_suite(args.suite)
    width = max(len(r.criterion) for r in results)
    print(f"{'criterion':<{width}}  status  detail")
    all_pass = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.criterion:<{width}}  {status:<6}  {r.detail}")
        all_pass &= r.passed
    print(f"{'-' * width}")
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return 0 if all_pass else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 1
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        opts = _Options(args)
        handler = {
            "solve-antilinear": _cmd_solve_antilinear,
            "solve-system": _cmd_solve_system,
            "series": _cmd_series,
            "reduce": _cmd_reduce,
            "sweep-xi": _cmd_sweep_xi,
        }[args.command]
        return handler(opts)
    except (SolverFailure, CompatibilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, EvaluationError, InvalidProblemError,
            OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
