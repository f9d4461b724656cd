r"""Series decomposition of the psi-Caputo derivative.

Expanding :math:`(1 - u)^{n-\alpha}` binomially in the integration-by-parts
form of the derivative gives

.. math::

    {}^C D^{\alpha,\psi}_{a+} f(x) \approx A_N s^{n-\alpha} f^{[n]}_\psi(x)
        - \sum_{k=1}^N B_k s^{n-\alpha-k} V_k(x),
    \qquad s = \psi(x) - \psi(a),

where the moments :math:`V_k` are ordinary (non-singular) integrals of
:math:`f^{[n]}_\psi`. Only integer-order data enters, which is what turns a
fractional initial-value problem into an ordinary system.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .kernels import Kernel, ensure_valid
from .operators import DerivativeSpec, Side, _psi_derivative_fn, _values, order_of
from .special import gamma, gen_binomial

__all__ = [
    "DecompositionCoefficients",
    "MomentState",
    "approx_derivative",
    "coefficients",
    "error_bound",
    "moments",
]

# below this psi-distance from the base point the expansion is set to its limit 0
S_FLOOR = 1e-12


@dataclass(frozen=True)
class DecompositionCoefficients:
    """``A_N`` and ``B_1..B_N`` for order ``alpha`` (``n`` derived from it)."""

    alpha: float
    n: int
    N: int
    A: float
    B: tuple[float, ...]

    @property
    def p(self) -> float:
        return self.n - self.alpha


@dataclass(frozen=True)
class MomentState:
    """Moment values ``V_1..V_N`` (or ``W_1..W_N`` on the right) at ``x``."""

    x: float
    V: tuple[float, ...]


def coefficients(alpha: float, N: int) -> DecompositionCoefficients:
    """Expansion coefficients, both normalised by ``Gamma(n - alpha + 1)``.

    Examples
    --------
    >>> c = coefficients(0.5, 1)
    >>> round(c.A, 4), round(c.B[0], 4)
    (0.5642, -0.5642)
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if float(alpha).is_integer():
        raise ValueError("the decomposition needs a non-integer order")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    n = order_of(alpha)
    p = n - alpha
    g = gamma(p + 1.0)
    terms = [(-1) ** k * gen_binomial(p, k) for k in range(1, N + 1)]
    A = (1.0 + math.fsum(terms)) / g
    return DecompositionCoefficients(alpha, n, N, A, tuple(t / g for t in terms))


@functools.lru_cache(maxsize=8)
def _gl(n: int):
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _distance(kernel: Kernel, base: float, x, side: Side):
    pb = float(kernel.psi(base))
    px = np.asarray(kernel.psi(np.asarray(x, dtype=float)), dtype=float)
    return px - pb if side is Side.LEFT else pb - px


def moments(
    kernel: Kernel,
    fn,
    base: float,
    x_grid,
    N: int,
    n: int = 1,
    side: Side | str = Side.LEFT,
    nodes: int = 8,
) -> list[MomentState]:
    r"""Cumulative moments along ``x_grid``.

    Left: :math:`V_k(x) = \int_a^x k\psi'(t)(\psi(t)-\psi(a))^{k-1} f^{[n]}_\psi(t)\,dt`.
    Right: :math:`W_k(x) = (-1)^n \int_x^b k\psi'(t)(\psi(b)-\psi(t))^{k-1} f^{[n]}_\psi(t)\,dt`.

    ``x_grid`` starts at the base point and moves monotonically away from it
    (ascending on the left, descending on the right). Each cell is
    integrated with an ``nodes``-point Gauss-Legendre rule.
    """
    side = Side(side)
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    xs = np.asarray(x_grid, dtype=float)
    if xs.ndim != 1 or xs.size == 0 or xs[0] != base:
        raise ValueError("x_grid must be a 1-d grid starting at the base point")
    steps = np.diff(xs)
    if side is Side.LEFT and np.any(steps <= 0) or side is Side.RIGHT and np.any(steps >= 0):
        raise ValueError("x_grid must move strictly away from the base point")
    ensure_valid(kernel, float(xs.min()), float(xs.max()))

    dn = _psi_derivative_fn(kernel, fn, n)
    X, W = _gl(nodes)
    ks = np.arange(1, N + 1)
    sign = 1.0 if side is Side.LEFT else float((-1) ** n)

    lo, hi = xs[:-1], xs[1:]
    t = lo[:, None] + (hi - lo)[:, None] * X[None, :]
    s = _distance(kernel, base, t, side)
    dens = _values(kernel.dpsi, t) * _values(dn, t) * (hi - lo)[:, None] * W[None, :]
    # cell integrals for every k: sum_j k s_j^(k-1) dens_j
    powers = s[..., None] ** (ks - 1)
    cells = np.einsum("cj,cjk->ck", dens, powers) * ks
    if side is Side.RIGHT:
        cells = -cells  # integrating from x toward b reverses orientation
    cum = np.vstack([np.zeros(N), np.cumsum(cells, axis=0)]) * sign
    return [MomentState(float(x), tuple(map(float, row))) for x, row in zip(xs, cum)]


def approx_derivative(
    kernel: Kernel, fn, spec: DerivativeSpec, x_grid, N: int
) -> np.ndarray:
    """Truncated decomposition of the Caputo derivative on ``x_grid``.

    Terms are formed as ``exp((n - alpha - k) ln s) * V_k`` and the value is
    set to 0 where ``s < 1e-12``.
    """
    c = coefficients(spec.alpha, N)
    states = moments(kernel, fn, spec.base, x_grid, N, c.n, spec.side)
    xs = np.asarray(x_grid, dtype=float)
    V = np.array([st.V for st in states])
    s = _distance(kernel, spec.base, xs, spec.side)
    dn = _values(_psi_derivative_fn(kernel, fn, c.n), xs)
    out = np.zeros_like(xs)
    ok = s >= S_FLOOR
    ls = np.log(s[ok])
    ks = np.arange(1, N + 1)
    lead = c.A * np.exp(c.p * ls) * dn[ok]
    if spec.side is Side.RIGHT:
        lead *= (-1) ** c.n
    tail = (np.exp((c.p - ks)[None, :] * ls[:, None]) * V[ok] * np.array(c.B)[None, :]).sum(axis=1)
    out[ok] = lead - tail
    return out


def error_bound(
    M: float, kernel: Kernel, alpha: float, n: int, base: float, x: float, N: int
) -> float:
    """Truncation bound ``M s^p |x-a| e^(p^2+p) / (p Gamma(p+1) N^p)``, ``p = n - alpha``.

    ``M`` bounds ``|d/dt f^[n]_psi|`` between the base point and ``x``.
    """
    if M < 0:
        raise ValueError("M must be nonnegative")
    if N < 1:
        raise ValueError("N must be >= 1")
    p = n - alpha
    if not p > 0:
        raise ValueError("need n > alpha")
    s = abs(float(kernel.psi(x)) - float(kernel.psi(base)))
    return M * s**p * abs(x - base) * math.exp(p * p + p) / (p * gamma(p + 1.0) * N**p)
