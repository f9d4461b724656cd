r"""Population-growth fits with classical and fractional Malthusian models.

Classical: :math:`N(t) = N_0 e^{\lambda t}`. Fractional:
:math:`N(t) = N_0 E_\alpha(\lambda(\psi(t) - \psi(0))^\alpha)`, the solution of
:math:`{}^C D^{\alpha,\psi}_{0+} N = \lambda N`. Parameters are estimated by
Levenberg-Marquardt least squares with a small multistart lattice.

Time is measured in ``time_unit_years`` from the first year of the data and
``N_0`` is the first datum unless it is declared free.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .kernels import Kernel, builtin_kernel, ensure_valid
from .special import DEFAULT_ML, MLConfig, MittagLefflerError, mittag_leffler

__all__ = [
    "BOUNDS",
    "Dataset",
    "FitOptions",
    "FitResult",
    "ModelSpec",
    "fit",
    "load_csv",
    "predict",
    "projection_error",
    "report_csv",
    "sse",
]

# admissible parameter boxes (lower ends are open)
BOUNDS: dict[str, tuple[float, float]] = {
    "lambda": (0.0, 100.0),
    "alpha": (0.0, 10.0),
    "b": (0.0, 5.0),
    "N0": (0.0, math.inf),
}

LAMBDA_STARTS = (0.05, 0.1, 0.5, 1.0, 3.0, 5.0)
ALPHA_STARTS = (0.8, 1.4, 2.0, 4.0)


@dataclass(frozen=True)
class Dataset:
    times: np.ndarray
    values: np.ndarray
    base_year: int
    time_unit_years: float

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or t.size < 2:
            raise ValueError("times and values must be 1-d with the same length >= 2")
        if t[0] != 0.0:
            raise ValueError("times must start at 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly ascending")
        if np.any(v <= 0):
            raise ValueError("values must be positive")
        if not self.time_unit_years > 0:
            raise ValueError("time_unit_years must be positive")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def years(self) -> np.ndarray:
        return self.base_year + self.times * self.time_unit_years

    def time_of(self, year: float) -> float:
        return (year - self.base_year) / self.time_unit_years


def load_csv(path, time_unit_years: float = 10.0) -> Dataset:
    """Read a ``year,population`` file; time origin is the first year."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header != ["year", "population"]:
            raise ValueError(f"{path}: expected header 'year,population', got {header}")
        years, pops = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                year, pop = int(row[0]), float(row[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed row {row}") from None
            if pop <= 0:
                raise ValueError(f"{path}:{lineno}: population must be positive")
            if years and year <= years[-1]:
                raise ValueError(f"{path}:{lineno}: years must be ascending")
            years.append(year)
            pops.append(pop)
    if len(years) < 2:
        raise ValueError(f"{path}: need at least two rows")
    base = years[0]
    times = (np.array(years, dtype=float) - base) / time_unit_years
    return Dataset(times, np.array(pops), base, float(time_unit_years))


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Model family, kernel and which parameters the fit may move.

    ``family`` is ``"classical"`` (``alpha = 1``, linear kernel) or
    ``"fractional"``. ``b`` can only be free for the ``pow1p`` kernel.
    ``free_params`` defaults to ``lambda`` (classical) or ``lambda, alpha``.
    """

    family: str = "fractional"
    kernel: Kernel | None = None
    free_params: tuple[str, ...] | None = None
    fixed: Mapping[str, float] = field(default_factory=dict)
    n0_policy: str = "first-datum"

    def __post_init__(self) -> None:
        if self.free_params is None:
            free = ("lambda",) if self.family == "classical" else ("lambda", "alpha")
        else:
            free = tuple(self.free_params)
        if self.family not in ("classical", "fractional"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.n0_policy not in ("first-datum", "free"):
            raise ValueError(f"unknown N0 policy {self.n0_policy!r}")
        if self.family == "classical":
            if self.kernel is not None and self.kernel.name != "linear":
                raise ValueError("the classical model uses the linear kernel")
            if set(free) - {"lambda", "N0"}:
                raise ValueError("the classical model only has lambda (and N0) free")
            object.__setattr__(self, "kernel", builtin_kernel("linear"))
        else:
            if self.kernel is None:
                raise ValueError("the fractional model needs a kernel")
            allowed = {"lambda", "alpha", "N0"} | ({"b"} if self.kernel.name == "pow1p" else set())
            bad = set(free) - allowed
            if bad:
                raise ValueError(f"parameters {sorted(bad)} cannot be free for kernel {self.kernel.label}")
        if self.n0_policy == "free" and "N0" not in free:
            free = free + ("N0",)
        object.__setattr__(self, "free_params", free)
        object.__setattr__(self, "fixed", dict(self.fixed))

    def kernel_for(self, params: Mapping[str, float]) -> Kernel:
        if self.family == "fractional" and "b" in params and self.kernel.name == "pow1p":
            return builtin_kernel("pow1p", b=params["b"])
        return self.kernel

    def full_params(self, params: Mapping[str, float], data: Dataset | None = None) -> dict:
        out = dict(self.fixed)
        out.update(params)
        if self.family == "classical":
            out["alpha"] = 1.0
        if "N0" not in out:
            if data is None:
                raise ValueError("N0 is required (no dataset to take the first datum from)")
            out["N0"] = float(data.values[0])
        if self.kernel.name == "pow1p" and "b" not in out:
            out["b"] = self.kernel.param("b")
        return out


def predict(model: ModelSpec, params: Mapping[str, float], t, cfg: MLConfig = DEFAULT_ML):
    """Model population at time(s) ``t``; ``params`` must include ``N0``."""
    p = model.full_params(params)
    ts = np.asarray(t, dtype=float)
    lam, n0 = p["lambda"], p["N0"]
    if model.family == "classical":
        out = n0 * np.exp(lam * ts)
    else:
        kern = model.kernel_for(p)
        s = np.asarray(kern.psi(ts), dtype=float) - float(kern.psi(0.0))
        out = n0 * np.asarray(mittag_leffler(p["alpha"], lam * s ** p["alpha"], cfg))
    return float(out) if out.ndim == 0 else out


def _residuals(model: ModelSpec, params: Mapping[str, float], data: Dataset) -> np.ndarray:
    return predict(model, model.full_params(params, data), data.times) - data.values


def sse(model: ModelSpec, params: Mapping[str, float], data: Dataset) -> float:
    """Sum of squared residuals over ``data``."""
    r = _residuals(model, params, data)
    return float(r @ r)


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = 500
    mu0: float = 1e-3
    mu_factor: float = 10.0
    rel_step: float = 1e-6
    ftol: float = 1e-10
    xtol: float = 1e-10


@dataclass(frozen=True)
class FitResult:
    params: dict
    sse: float
    iterations: int
    converged: bool
    residuals: np.ndarray
    start: dict = field(default_factory=dict)


def _safe_residuals(model, names, x, data):
    try:
        with np.errstate(all="ignore"):
            r = _residuals(model, dict(zip(names, x)), data)
    except (OverflowError, MittagLefflerError, ValueError, ZeroDivisionError):
        return None
    return r if np.all(np.isfinite(r)) else None


def _levenberg_marquardt(model, names, x0, data, opts: FitOptions):
    lo = np.array([BOUNDS[n][0] for n in names])
    hi = np.array([BOUNDS[n][1] for n in names])
    floor = np.where(lo == 0.0, 1e-12, lo)
    x = np.clip(np.array(x0, dtype=float), floor, hi)
    r = _safe_residuals(model, names, x, data)
    if r is None:
        return None
    f = float(r @ r)
    mu = opts.mu0
    for it in range(1, opts.max_iter + 1):
        J = np.empty((r.size, x.size))
        for j in range(x.size):
            h = opts.rel_step * max(abs(x[j]), 1e-8)
            xp = x.copy()
            xp[j] = x[j] + h if x[j] + h <= hi[j] else x[j] - h
            rp = _safe_residuals(model, names, xp, data)
            if rp is None:
                return x, r, f, it, False
            J[:, j] = (rp - r) / (xp[j] - x[j])
        A = J.T @ J
        g = J.T @ r
        while True:
            lhs = A + mu * np.diag(np.maximum(np.diag(A), 1e-30))
            try:
                step = np.linalg.solve(lhs, -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                xn = np.clip(x + step, floor, hi)
                rn = _safe_residuals(model, names, xn, data)
                if rn is not None and float(rn @ rn) < f:
                    break
            mu *= opts.mu_factor
            if mu > 1e20:
                # no descent possible along any damped direction: stationary point
                return x, r, f, it, True
        fn = float(rn @ rn)
        dx = np.linalg.norm(xn - x)
        decrease = (f - fn) / f if f > 0 else 0.0
        x, r, f = xn, rn, fn
        mu = max(mu / opts.mu_factor, 1e-15)
        if decrease < opts.ftol or dx < opts.xtol * (1.0 + np.linalg.norm(x)) or f == 0.0:
            return x, r, f, it, True
    return x, r, f, opts.max_iter, False


def default_starts(model: ModelSpec) -> list[dict]:
    """The multistart lattice over the model's free parameters.

    ``lambda`` and ``alpha`` run over fixed grids; a free ``b`` starts from
    the kernel's own parameter.
    """
    b0 = (model.kernel.param("b"),) if model.kernel.name == "pow1p" else ()
    axes = {"lambda": LAMBDA_STARTS, "alpha": ALPHA_STARTS, "b": b0}
    names = [n for n in model.free_params if n != "N0"]
    grids = [axes[n] for n in names]
    return [dict(zip(names, combo)) for combo in itertools.product(*grids)]


def fit(
    model: ModelSpec,
    data: Dataset,
    init: Mapping[str, float] | Sequence[Mapping[str, float]] | None = None,
    opts: FitOptions = FitOptions(),
) -> FitResult:
    """Least-squares fit of the free parameters.

    ``init`` is one start or a list of starts; by default the multistart
    lattice is used. The best result wins (lower SSE, then earlier start);
    converged runs are preferred over non-converged ones.
    """
    ensure_valid(model.kernel_for(model.full_params({}, data)), 0.0, float(data.times[-1]))
    names = list(model.free_params)
    if init is None:
        starts = default_starts(model)
    elif isinstance(init, Mapping):
        starts = [dict(init)]
    else:
        starts = [dict(s) for s in init]
    best = None
    for start in starts:
        start = dict(start)
        if "N0" in names and "N0" not in start:
            start["N0"] = float(data.values[0])
        for n in names:
            lo, hi = BOUNDS[n]
            if n not in start:
                raise ValueError(f"initial value for {n!r} missing")
            if not lo < start[n] <= hi:
                raise ValueError(f"initial {n}={start[n]} outside ({lo}, {hi}]")
        out = _levenberg_marquardt(model, names, [start[n] for n in names], data, opts)
        if out is None:
            continue
        x, r, f, it, conv = out
        cand = FitResult(dict(zip(names, map(float, x))), f, it, conv, r, start)
        if best is None or (cand.converged, -cand.sse) > (best.converged, -best.sse):
            best = cand
    if best is None:
        raise ArithmeticError("no start produced finite residuals")
    return best


def projection_error(
    model: ModelSpec, params: Mapping[str, float], t_star: float, observed: float
) -> float:
    """``|P(t_star) - observed| / observed * 100``; ``params`` must include ``N0``."""
    if not observed > 0:
        raise ValueError("observed must be positive")
    return abs(predict(model, params, t_star) - observed) / observed * 100.0


def report_csv(rows: Sequence[tuple[ModelSpec, FitResult]], dest=None) -> str:
    """Fit report with columns ``family,kernel,lambda,alpha,b,sse,converged``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "kernel", "lambda", "alpha", "b", "sse", "converged"])
    for model, res in rows:
        p = {**model.fixed, **res.params}
        alpha = 1.0 if model.family == "classical" else p["alpha"]
        b = p.get("b", model.kernel.param("b") if model.kernel.name == "pow1p" else None)
        w.writerow(
            [
                model.family,
                model.kernel.name,
                repr(float(p["lambda"])),
                repr(float(alpha)),
                "" if b is None else repr(float(b)),
                repr(float(res.sse)),
                "true" if res.converged else "false",
            ]
        )
    text = buf.getvalue()
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    elif dest is not None:
        dest.write(text)
    return text
