"""Command-line front end.

Subcommands::

    psifrac eval     Caputo derivative on a grid: x,exact,quadrature
    psifrac approx   decomposition approximations: x,exact,approx_N...
    psifrac solve    FDE trajectory: x,f,V1..VN
    psifrac fit      least-squares fit report
    psifrac project  projection of a fitted (or given) model

Exit status is 0 on success, 2 for usage errors and 3 for numerical
failures. Output is CSV on stdout unless ``--out`` is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .decomposition import approx_derivative
from .fde import CauchyProblem, FDEError, solve
from .fitting import ModelSpec, fit, load_csv, predict, projection_error, report_csv
from .kernels import Interval, Kernel, KernelError, ensure_valid, parse_kernel_spec
from .operators import DerivativeSpec, SmoothFn, caputo_derivative, ml_psi_derivative, power_rule
from .quadrature import QuadratureError
from .special import MittagLefflerError, gamma

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def fmt(v: float) -> str:
    """Shortest round-trip representation of a double."""
    return repr(float(v))


# ------------------------------------------------------------------ test functions


@dataclass(frozen=True)
class Scenario:
    """A function of the registry, bound to a kernel, order and base point."""

    fn: SmoothFn
    exact: Callable[[np.ndarray], np.ndarray] | None


def _pow2(kernel: Kernel, alpha: float, a: float) -> Scenario:
    pa = float(kernel.psi(a))
    fn = SmoothFn(
        lambda x: (kernel.psi(x) - pa) ** 2,
        psi_derivs=(lambda x: 2 * (kernel.psi(x) - pa), lambda x: np.full_like(np.asarray(x, float), 2.0),
                    lambda x: np.zeros_like(np.asarray(x, float))),
    )
    return Scenario(fn, lambda x: power_rule(kernel, alpha, 3.0, x, a))


def _mlexp(kernel: Kernel, alpha: float, a: float) -> Scenario:
    pa = float(kernel.psi(a))

    def level(m):
        return lambda x: ml_psi_derivative(alpha, 1.0, np.asarray(kernel.psi(x)) - pa, m)

    fn = SmoothFn(level(0), psi_derivs=tuple(level(m) for m in range(1, 4)))
    return Scenario(fn, level(0))


def _ln2p1(kernel: Kernel, alpha: float, a: float) -> Scenario:
    L = np.log1p
    fn = SmoothFn(
        lambda x: L(x) ** 2,
        derivs=(
            lambda x: 2 * L(x) / (1 + x),
            lambda x: (2 - 2 * L(x)) / (1 + x) ** 2,
            lambda x: (4 * L(x) - 6) / (1 + x) ** 3,
        ),
    )
    exact = None
    if kernel.name == "log1p":
        # ln(x+1) = s + c with s = psi(x) - psi(a)
        c = math.log1p(a)
        exact = lambda x: power_rule(kernel, alpha, 3.0, x, a) + 2 * c * power_rule(kernel, alpha, 2.0, x, a)
    return Scenario(fn, exact)


def _parab(kernel: Kernel, alpha: float, a: float) -> Scenario:
    fn = SmoothFn(
        lambda x: 2 * x - x**2,
        derivs=(lambda x: 2 - 2 * x, lambda x: np.full_like(np.asarray(x, float), -2.0),
                lambda x: np.zeros_like(np.asarray(x, float))),
    )
    exact = None
    if kernel.name == "linear":
        # 2x - x^2 = const + (2 - 2a) s - s^2 with s = x - a
        exact = lambda x: (2 - 2 * a) * power_rule(kernel, alpha, 2.0, x, a) - power_rule(kernel, alpha, 3.0, x, a)
    return Scenario(fn, exact)


FUNCTIONS: dict[str, Callable[[Kernel, float, float], Scenario]] = {
    "pow2": _pow2,
    "mlexp": _mlexp,
    "ln2p1": _ln2p1,
    "parab": _parab,
}


def _fde_rhs(name: str, lam: float) -> Callable[[float, float], float]:
    if name == "fdeproblem":
        c = 2.0 / gamma(2.5)
        return lambda x, f: c * math.log1p(x) ** 1.5 + math.log1p(x) ** 2 - f
    if name == "linear":
        return lambda x, f: lam * f
    raise UsageError(f"unknown right-hand side {name!r}; choose fdeproblem or linear")


# ------------------------------------------------------------------ helpers


def _kernel(text: str) -> Kernel:
    try:
        return parse_kernel_spec(text)
    except KernelError as exc:
        raise UsageError(str(exc)) from None


def _grid(a: float, b: float, n: int) -> np.ndarray:
    if not a < b:
        raise UsageError(f"need --a < --b, got {a} and {b}")
    if n < 2:
        raise UsageError("--grid must be at least 2")
    return np.linspace(a, b, n)


def _emit(text: str, out: str | None, stdout) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _table(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (v if isinstance(v, str) else fmt(v)) for v in r])
    return buf.getvalue()


def _n_list(text: str) -> list[int]:
    try:
        ns = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--N expects integers, got {text!r}") from None
    if not ns or any(n < 1 for n in ns):
        raise UsageError("--N values must be positive integers")
    return ns


# ------------------------------------------------------------------ commands


def cmd_eval(args, stdout) -> int:
    kernel = _kernel(args.kernel)
    xs = _grid(args.a, args.b, args.grid)
    ensure_valid(kernel, args.a, args.b)
    sc = FUNCTIONS[args.fn](kernel, args.alpha, args.a)
    spec = DerivativeSpec(args.alpha, "left", args.a)
    quad = caputo_derivative(kernel, spec, sc.fn, xs)
    exact = sc.exact(xs) if sc.exact is not None else [None] * xs.size
    _emit(_table(["x", "exact", "quadrature"], zip(xs, exact, quad)), args.out, stdout)
    return EXIT_OK


def cmd_approx(args, stdout) -> int:
    kernel = _kernel(args.kernel)
    xs = _grid(args.a, args.b, args.grid)
    ns = _n_list(args.N)
    ensure_valid(kernel, args.a, args.b)
    sc = FUNCTIONS[args.fn](kernel, args.alpha, args.a)
    spec = DerivativeSpec(args.alpha, "left", args.a)
    exact = sc.exact(xs) if sc.exact is not None else caputo_derivative(kernel, spec, sc.fn, xs)
    cols = [approx_derivative(kernel, sc.fn, spec, xs, n) for n in ns]
    header = ["x", "exact"] + [f"approx_N{n}" for n in ns]
    _emit(_table(header, zip(xs, exact, *cols)), args.out, stdout)
    return EXIT_OK


def cmd_solve(args, stdout) -> int:
    kernel = _kernel(args.kernel)
    if len(_n_list(args.N)) != 1:
        raise UsageError("solve takes a single --N")
    N = _n_list(args.N)[0]
    if args.steps < 10:
        raise UsageError("--steps must be at least 10")
    if not args.a < args.b:
        raise UsageError(f"need --a < --b, got {args.a} and {args.b}")
    problem = CauchyProblem(kernel, args.alpha, Interval(args.a, args.b), _fde_rhs(args.fn, args.lam), args.f0)
    traj = solve(problem, N, args.steps)
    _emit(traj.to_csv(), args.out, stdout)
    return EXIT_OK


def _auto_unit(path: str) -> float:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)][1:3]
    try:
        return float(int(rows[1][0]) - int(rows[0][0]))
    except (IndexError, ValueError):
        raise UsageError(f"{path}: cannot infer the time unit; pass --time-unit") from None


def _model(args) -> ModelSpec:
    if args.family == "classical":
        free = ("lambda",)
        kernel = None
        if args.kernel not in (None, "linear"):
            raise UsageError("the classical family uses the linear kernel")
    else:
        kernel = _kernel(args.kernel or "linear")
        free = tuple(t.strip() for t in (args.free or "lambda,alpha").split(",") if t.strip())
    try:
        return ModelSpec(args.family, kernel, free)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dataset(args):
    unit = args.time_unit if args.time_unit is not None else _auto_unit(args.data)
    try:
        return load_csv(args.data, unit)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_fit(args, stdout) -> int:
    model = _model(args)
    data = _dataset(args)
    res = fit(model, data)
    _emit(report_csv([(model, res)]), args.out, stdout)
    return EXIT_OK


def cmd_project(args, stdout) -> int:
    model = _model(args)
    data = _dataset(args)
    if args.lam is not None:
        params = {"lambda": args.lam}
        if model.family == "fractional":
            if args.alpha is None:
                raise UsageError("--alpha is required with --lambda for the fractional family")
            params["alpha"] = args.alpha
    else:
        params = fit(model, data).params
    params = model.full_params(params, data)
    projected = predict(model, params, args.t)
    err = projection_error(model, params, args.t, args.observed)
    label = model.kernel_for(params).label
    rows = [(model.family, label, args.t, projected, args.observed, err)]
    _emit(_table(["family", "kernel", "t", "projected", "observed", "error_percent"], rows), args.out, stdout)
    return EXIT_OK


# ------------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="psifrac", description="psi-Caputo fractional calculus toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, kernel, alpha, a, b):
        sp.add_argument("--kernel", default=kernel, help="name or name:param=value (default %(default)s)")
        sp.add_argument("--alpha", type=float, default=alpha)
        sp.add_argument("--a", type=float, default=a)
        sp.add_argument("--b", type=float, default=b)
        sp.add_argument("--out", help="write CSV here instead of stdout")

    e = sub.add_parser("eval", help="Caputo derivative of a registry function on a grid")
    common(e, "linear", 0.5, 0.0, 5.0)
    e.add_argument("--fn", choices=sorted(FUNCTIONS), default="pow2")
    e.add_argument("--grid", type=int, default=101)
    e.set_defaults(func=cmd_eval)

    ap = sub.add_parser("approx", help="decomposition approximations for several N")
    common(ap, "log1p", 0.5, 0.0, 5.0)
    ap.add_argument("--fn", choices=sorted(FUNCTIONS), default="ln2p1")
    ap.add_argument("--grid", type=int, default=101)
    ap.add_argument("--N", default="1,3,5", help="comma-separated truncation orders")
    ap.set_defaults(func=cmd_approx)

    s = sub.add_parser("solve", help="solve an FDE by the decomposition method")
    common(s, "log1p", 0.5, 0.0, 5.0)
    s.add_argument("--fn", choices=["fdeproblem", "linear"], default="fdeproblem",
                   help="right-hand side g(x, f)")
    s.add_argument("--lam", type=float, default=1.0, help="rate for --fn linear")
    s.add_argument("--f0", type=float, required=True, help="initial value f(a)")
    s.add_argument("--N", default="6")
    s.add_argument("--steps", type=int, default=5000)
    s.set_defaults(func=cmd_solve)

    for name, func, helptext in (("fit", cmd_fit, "fit a population model"),
                                 ("project", cmd_project, "project a population model")):
        f = sub.add_parser(name, help=helptext)
        f.add_argument("--data", required=True)
        f.add_argument("--family", choices=["classical", "fractional"], default="fractional")
        f.add_argument("--kernel")
        f.add_argument("--free", help="comma-separated free parameters (lambda,alpha[,b])")
        f.add_argument("--time-unit", type=float, dest="time_unit",
                       help="years per model time unit (default: spacing of the first two years)")
        f.add_argument("--out")
        f.set_defaults(func=func)
        if name == "project":
            f.add_argument("--t", type=float, required=True, help="model time of the projection")
            f.add_argument("--observed", type=float, required=True)
            f.add_argument("--lambda", type=float, dest="lam", help="use these parameters instead of fitting")
            f.add_argument("--alpha", type=float)
    return p


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        with np.errstate(all="ignore"):
            return args.func(args, stdout)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except (QuadratureError, FDEError, MittagLefflerError, OverflowError, ZeroDivisionError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (KernelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
