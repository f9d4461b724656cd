r"""Initial-value problems :math:`{}^C D^{\alpha,\psi}_{a+} f = g(x, f)` for ``0 < alpha < 1``.

Replacing the derivative by its truncated decomposition and solving for
``f'`` gives the ordinary system

.. math::

    f' = \psi'\,\frac{g(x, f) + \sum_k B_k s^{1-\alpha-k} V_k}{A_N s^{1-\alpha}},
    \qquad V_k' = k \psi' s^{k-1} f' / \psi',

with ``s = psi(x) - psi(a)`` and ``V_k(a) = 0``. It is integrated with the
classical Runge-Kutta scheme on a uniform output grid.

Near ``x = a`` the moment equations are stiff: in the scaled variables
``V_k / s^k`` their eigenvalues grow like ``rho_N psi' / s``. Each output cell
is therefore split into RK4 sub-steps that keep ``h_sub * rho_N psi' / s``
bounded; the first cell uses geometrically growing sub-steps starting a
tiny distance from ``a``. The stage evaluated at ``a`` itself is shifted
by 1/100 of its step.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .decomposition import DecompositionCoefficients, coefficients
from .kernels import Interval, Kernel, ensure_valid
from .special import DEFAULT_ML, MLConfig, mittag_leffler

__all__ = [
    "CauchyProblem",
    "FDEError",
    "OdeSystem",
    "Trajectory",
    "analytic_linear",
    "assemble",
    "solve",
]

Rhs = Callable[[float, float], float]

# sub-step stability target: h_sub * rho * psi' / s <= STABILITY
STABILITY = 0.5
# the first cell's sub-steps start this many decades below the output step
START_DECADES = 12


class FDEError(ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, x: float, message: str = "non-finite state"):
        super().__init__(f"{message} at x={x!r}")
        self.x = x


@dataclass(frozen=True, eq=False)
class CauchyProblem:
    """``D^alpha f = rhs(x, f)`` on ``interval`` with ``f(a) = f0``."""

    kernel: Kernel
    alpha: float
    interval: Interval
    rhs: Rhs
    f0: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError(f"the solver handles 0 < alpha < 1, got {self.alpha}")
        if not math.isfinite(self.f0):
            raise ValueError("f0 must be finite")
        ensure_valid(self.kernel, self.interval.a, self.interval.b)


@dataclass(frozen=True, eq=False)
class OdeSystem:
    """First-order system in the state ``(f, V_1, ..., V_N)``."""

    problem: CauchyProblem
    coeffs: DecompositionCoefficients
    rho: float

    @property
    def N(self) -> int:
        return self.coeffs.N

    @property
    def dim(self) -> int:
        return self.coeffs.N + 1

    @property
    def y0(self) -> np.ndarray:
        y = np.zeros(self.dim)
        y[0] = self.problem.f0
        return y

    def __call__(self, x: float, y: np.ndarray) -> np.ndarray:
        pr = self.problem
        c = self.coeffs
        k = np.arange(1, c.N + 1)
        s = float(pr.kernel.psi(x)) - float(pr.kernel.psi(pr.interval.a))
        if not s > 0:
            raise FDEError(x, "right-hand side evaluated at the base point")
        ls = math.log(s)
        V = y[1:]
        with np.errstate(divide="ignore"):
            # s^(1-alpha-k) V_k without forming the huge power
            scaled = np.where(V == 0.0, 0.0, np.sign(V) * np.exp(np.log(np.abs(V)) - k * ls))
        f_psi = (float(pr.rhs(x, y[0])) * math.exp(-c.p * ls) + np.dot(c.B, scaled)) / c.A
        d = float(pr.kernel.dpsi(x))
        out = np.empty_like(y)
        out[0] = f_psi * d
        out[1:] = k * d * np.exp((k - 1) * ls) * f_psi
        return out


def _stiffness(c: DecompositionCoefficients) -> float:
    # moment block of the Jacobian in the variables V_k / s^k, times s / psi'
    k = np.arange(1, c.N + 1)
    M = k[:, None] * (np.array(c.B)[None, :] / c.A - np.eye(c.N))
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def assemble(problem: CauchyProblem, N: int) -> OdeSystem:
    """Build the ``(1 + N)``-dimensional ordinary system for ``problem``."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    c = coefficients(problem.alpha, N)
    if N <= 64:
        assert c.A != 0.0, "A_N vanished"
    elif c.A == 0.0:
        raise ZeroDivisionError("A_N vanished; choose a smaller N")
    return OdeSystem(problem, c, _stiffness(c))


@dataclass(frozen=True)
class Trajectory:
    """Solution on the uniform grid ``x``; ``V`` has one column per moment."""

    x: np.ndarray
    f: np.ndarray
    V: np.ndarray
    N: int
    step: float

    def to_csv(self, dest=None) -> str:
        """Write ``x,f,V1..VN`` rows with shortest round-trip floats.

        ``dest`` may be a path, an open text file or ``None`` (return only).
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "f"] + [f"V{k}" for k in range(1, self.N + 1)])
        for xi, fi, row in zip(self.x, self.f, self.V):
            w.writerow([repr(float(xi)), repr(float(fi))] + [repr(float(v)) for v in row])
        text = buf.getvalue()
        if isinstance(dest, (str, os.PathLike)):
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        elif dest is not None:
            dest.write(text)
        return text


def _rk4(system: OdeSystem, x: float, y: np.ndarray, h: float, x_first: float | None = None):
    xa = x if x_first is None else x_first
    k1 = system(xa, y)
    k2 = system(x + h / 2, y + h / 2 * k1)
    k3 = system(x + h / 2, y + h / 2 * k2)
    k4 = system(x + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _finite_or_raise(y: np.ndarray, x: float) -> np.ndarray:
    if not np.all(np.isfinite(y)):
        raise FDEError(x)
    return y


def solve(problem: CauchyProblem, N: int = 6, steps: int = 5000) -> Trajectory:
    """Integrate the decomposed system with RK4 on ``steps`` uniform cells."""
    if steps < 10:
        raise ValueError(f"steps must be >= 10, got {steps}")
    system = assemble(problem, N)
    kern = problem.kernel
    a, b = problem.interval.a, problem.interval.b
    h = (b - a) / steps
    pa = float(kern.psi(a))
    xs = a + h * np.arange(steps + 1)
    xs[-1] = b
    Y = np.empty((steps + 1, system.dim))
    y = system.y0
    Y[0] = y
    q = 1.0 + STABILITY / system.rho

    # first cell: geometric sub-steps from a + eps up to a + h
    eps = max(h * 10.0**-START_DECADES, 1e-8 * abs(pa) / float(kern.dpsi(a)))
    J = max(1, math.ceil(math.log(h / eps) / math.log(q)))
    pts = a + h * q ** (-np.arange(J, -1, -1.0))
    pts[-1] = xs[1]
    y = _rk4(system, a, y, pts[0] - a, x_first=a + (pts[0] - a) / 100)
    for u, v in zip(pts[:-1], pts[1:]):
        y = _finite_or_raise(_rk4(system, u, y, v - u), v)
    Y[1] = y

    for i in range(1, steps):
        x0, x1 = xs[i], xs[i + 1]
        s0 = float(kern.psi(x0)) - pa
        growth = float(kern.psi(x1)) - float(kern.psi(x0))
        m = max(1, math.ceil(system.rho * growth / (STABILITY * s0)))
        hs = (x1 - x0) / m
        for j in range(m):
            y = _rk4(system, x0 + j * hs, y, hs)
        Y[i + 1] = _finite_or_raise(y, x1)

    return Trajectory(xs, Y[:, 0].copy(), Y[:, 1:].copy(), N, h)


def analytic_linear(
    kernel: Kernel,
    alpha: float,
    lam: float,
    N0: float,
    t,
    base: float = 0.0,
    cfg: MLConfig = DEFAULT_ML,
):
    """Solution ``N0 * E_alpha(lam * (psi(t) - psi(base))^alpha)`` of ``D^alpha N = lam N``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    ts = np.asarray(t, dtype=float)
    lo, hi = float(min(base, ts.min())), float(max(base, ts.max()))
    ensure_valid(kernel, lo, hi)
    s = np.asarray(kernel.psi(ts), dtype=float) - float(kernel.psi(base))
    if np.any(s < 0):
        raise ValueError("t must not precede the base point")
    out = N0 * np.asarray(mittag_leffler(alpha, lam * s**alpha, cfg))
    return float(out) if out.ndim == 0 else out
