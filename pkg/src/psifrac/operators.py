r"""psi-fractional integrals and psi-Caputo derivatives.

Quadrature paths substitute :math:`u = (\psi(t) - \psi(a)) / (\psi(x) - \psi(a))`
(mirrored for right-sided operators) so that every integral reduces to a
Jacobi-weighted integral over the unit interval, see
:mod:`psifrac.quadrature`. Closed forms (power rule, Mittag-Leffler
eigenfunctions) are provided alongside as oracles.

Functions are passed as :class:`SmoothFn`, which carries the ordinary
derivatives (or psi-derivatives) that the Caputo integrand needs. Plain
callables are accepted where only values are required.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .kernels import Interval, Kernel, ensure_valid
from .quadrature import DEFAULT_QUAD, QuadConfig, QuadratureError, jacobi_integral, log_integral
from .special import DEFAULT_ML, MLConfig, euler_gamma, gamma, mittag_leffler

__all__ = [
    "DerivativeSpec",
    "InsufficientDerivativeError",
    "QuadConfig",
    "QuadratureError",
    "Side",
    "SmoothFn",
    "bound_constant",
    "caputo_derivative",
    "caputo_derivative_ibp",
    "frac_integral",
    "low_fractionality",
    "ml_eigen",
    "ml_psi_derivative",
    "order_of",
    "power_rule",
    "product_rule_psi",
    "psi_weighted_derivative",
    "rl_derivative",
]

RealFn = Callable[[np.ndarray], np.ndarray]


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class InsufficientDerivativeError(ValueError):
    """The function does not carry enough derivative data for the request."""


def order_of(alpha: float) -> int:
    """``n = floor(alpha) + 1`` for non-integer ``alpha`` and ``alpha`` otherwise."""
    if float(alpha).is_integer():
        return int(alpha)
    return math.floor(alpha) + 1


@dataclass(frozen=True)
class DerivativeSpec:
    """Order, side and base point of a fractional operator.

    ``base`` is the lower terminal ``a`` for left operators and the upper
    terminal ``b`` for right ones.
    """

    alpha: float
    side: Side = Side.LEFT
    base: float = 0.0

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if not math.isfinite(self.base):
            raise ValueError("base must be finite")
        object.__setattr__(self, "side", Side(self.side))

    @property
    def n(self) -> int:
        return order_of(self.alpha)

    @property
    def is_integer(self) -> bool:
        return float(self.alpha).is_integer()

    @property
    def sign(self) -> int:
        """``(-1)^n`` on the right side, ``+1`` on the left."""
        return (-1) ** self.n if self.side is Side.RIGHT else 1


@dataclass(frozen=True, eq=False)
class SmoothFn:
    """A function with the derivative data the Caputo integrand needs.

    Parameters
    ----------
    f : callable
        The function, vectorised over NumPy arrays.
    derivs : sequence of callables
        Ordinary derivatives ``f', f'', ...``.
    psi_derivs : sequence of callables
        Alternatively (or additionally) ``f^[1], f^[2], ...`` directly with
        respect to the kernel the function will be used with.
    finite_difference : bool
        Permit nested central differences for missing derivative levels.
    step : float, optional
        Fixed difference step; default ``1e-4 * (1 + |x|)``.
    domain : (float, float), optional
        Where ``f`` may be evaluated. Difference stencils switch to one-sided
        formulas near its ends.
    """

    f: RealFn
    derivs: Sequence[RealFn] = ()
    psi_derivs: Sequence[RealFn] = ()
    finite_difference: bool = False
    step: float | None = None
    domain: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "derivs", tuple(self.derivs))
        object.__setattr__(self, "psi_derivs", tuple(self.psi_derivs))

    @classmethod
    def differenced(
        cls, f: RealFn, step: float | None = None, domain: tuple[float, float] | None = None
    ) -> "SmoothFn":
        """Function whose derivatives are all obtained by central differences."""
        return cls(f, finite_difference=True, step=step, domain=domain)

    @classmethod
    def constant(cls, c: float) -> "SmoothFn":
        zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return cls(lambda x: np.full_like(np.asarray(x, dtype=float), c), derivs=(zero,) * 4)

    def __call__(self, x):
        return _values(self.f, x)

    def check(self, xs, rtol: float = 1e-5) -> None:
        """Cross-check supplied ordinary derivatives against central differences."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        chain = (self.f,) + self.derivs
        for k in range(1, len(chain)):
            h = 1e-5 * (1.0 + np.abs(xs))
            fd = (_values(chain[k - 1], xs + h) - _values(chain[k - 1], xs - h)) / (2 * h)
            exact = _values(chain[k], xs)
            bad = np.abs(fd - exact) > rtol * np.maximum(1.0, np.abs(exact))
            if np.any(bad):
                x0 = float(xs[np.argmax(bad)])
                raise ValueError(f"derivative {k} disagrees with differenced values at x={x0:.6g}")


def _values(fn, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape).copy()


def _as_smooth(fn) -> SmoothFn:
    return fn if isinstance(fn, SmoothFn) else SmoothFn(fn)


def _fd_step(fn: SmoothFn, x: np.ndarray) -> np.ndarray:
    if fn.step is not None:
        return np.full_like(x, fn.step)
    return 1e-4 * (1.0 + np.abs(x))


def _differenced(kernel: Kernel, fn: SmoothFn, inner: RealFn) -> RealFn:
    """``(1/psi') d/dx`` applied to ``inner`` by (possibly one-sided) differences."""

    def out(x):
        shape = np.shape(x)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h = _fd_step(fn, x)
        if fn.domain is None:
            d = (_values(inner, x + h) - _values(inner, x - h)) / (2 * h)
        else:
            lo, hi = fn.domain
            fwd = x - h < lo
            bwd = (x + h > hi) & ~fwd
            d = np.empty_like(x)
            mid = ~(fwd | bwd)
            if np.any(mid):
                xm, hm = x[mid], h[mid]
                d[mid] = (_values(inner, xm + hm) - _values(inner, xm - hm)) / (2 * hm)
            if np.any(fwd):
                xf, hf = x[fwd], h[fwd]
                d[fwd] = (
                    -3 * _values(inner, xf) + 4 * _values(inner, xf + hf) - _values(inner, xf + 2 * hf)
                ) / (2 * hf)
            if np.any(bwd):
                xb, hb = x[bwd], h[bwd]
                d[bwd] = (
                    3 * _values(inner, xb) - 4 * _values(inner, xb - hb) + _values(inner, xb - 2 * hb)
                ) / (2 * hb)
        return (d / _values(kernel.dpsi, x)).reshape(shape)

    return out


def _psi_derivative_fn(kernel: Kernel, fn, order: int) -> RealFn:
    """Callable for ``f^[order]_psi``."""
    fn = _as_smooth(fn)
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order == 0:
        return fn.f
    if len(fn.psi_derivs) >= order:
        return fn.psi_derivs[order - 1]
    if len(fn.derivs) >= order and order <= 3:
        return _quotient_rule(kernel, fn.derivs, order)

    exact = max(len(fn.psi_derivs), min(len(fn.derivs), 3))
    if not fn.finite_difference and len(fn.derivs) < order:
        raise InsufficientDerivativeError(
            f"order {order} psi-derivative needs {order} derivatives or finite differencing; "
            f"got {len(fn.derivs)} ordinary and {len(fn.psi_derivs)} psi-derivatives"
        )
    out = _psi_derivative_fn(kernel, fn, exact)
    for _ in range(order - exact):
        out = _differenced(kernel, fn, out)
    return out


def _quotient_rule(kernel: Kernel, derivs: Sequence[RealFn], order: int) -> RealFn:
    # nested (1/psi') d/dx written out through third order
    def f1(x):
        return _values(derivs[0], x) / _values(kernel.dpsi, x)

    def f2(x):
        d1, d2 = _values(kernel.dpsi, x), kernel.second_derivative(x)
        g1, g2 = _values(derivs[0], x), _values(derivs[1], x)
        return (g2 * d1 - g1 * d2) / d1**3

    def f3(x):
        d1, d2, d3 = _values(kernel.dpsi, x), kernel.second_derivative(x), kernel.third_derivative(x)
        g1, g2, g3 = _values(derivs[0], x), _values(derivs[1], x), _values(derivs[2], x)
        return (g3 * d1 - g1 * d3) / d1**4 - 3 * (g2 * d1 - g1 * d2) * d2 / d1**5

    return (f1, f2, f3)[order - 1]


def psi_weighted_derivative(kernel: Kernel, fn, order: int, x):
    """``f^[order]_psi(x) = ((1/psi'(x)) d/dx)^order f(x)``.

    Examples
    --------
    >>> from psifrac.kernels import builtin_kernel
    >>> sq = SmoothFn(lambda x: x**2, derivs=(lambda x: 2 * x,))
    >>> float(psi_weighted_derivative(builtin_kernel("linear"), sq, 1, 3.0))
    6.0
    """
    out = _values(_psi_derivative_fn(kernel, fn, order), x)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- quadrature core


@functools.lru_cache(maxsize=1024)
def _checked_fn(fn: SmoothFn, lo: float, hi: float) -> None:
    if fn.derivs:
        fn.check(lo + (hi - lo) * np.array([0.25, 0.5, 0.75]))


def _prepare(kernel: Kernel, fn, lo: float, hi: float) -> SmoothFn:
    ensure_valid(kernel, lo, hi)
    fn = _as_smooth(fn)
    _checked_fn(fn, float(min(lo, hi)), float(max(lo, hi)))
    return fn


def _umin(psi_base: float, delta: float) -> float:
    # below this u the node psi-values are indistinguishable from the base
    return 1e4 * np.finfo(float).eps * abs(psi_base) / delta


def _weighted_integral(
    kernel: Kernel, side: Side, base: float, x: float, p: float, F: RealFn, quad: QuadConfig
) -> float:
    """``int psi'(t) |psi(x) - psi(t)|^(p-1) F(t) dt`` between ``base`` and ``x``."""
    pb, px = float(kernel.psi(base)), float(kernel.psi(x))
    delta = abs(px - pb)
    if delta == 0.0:
        return 0.0
    lo, hi = min(base, x), max(base, x)
    sgn = 1.0 if side is Side.LEFT else -1.0

    def g(u):
        t = kernel.inverse(pb + sgn * u * delta, lo, hi)
        return _values(F, t)

    return delta**p * jacobi_integral(g, p, quad, _umin(pb, delta))


def _check_side(side: Side, base: float, x: float) -> None:
    if side is Side.LEFT and x < base:
        raise ValueError(f"left operator needs x >= a, got x={x} < a={base}")
    if side is Side.RIGHT and x > base:
        raise ValueError(f"right operator needs x <= b, got x={x} > b={base}")


def _map_x(func, x):
    xs = np.asarray(x, dtype=float)
    if xs.ndim == 0:
        return func(float(xs))
    return np.array([func(float(v)) for v in xs.ravel()]).reshape(xs.shape)


def frac_integral(
    kernel: Kernel,
    alpha: float,
    fn,
    x,
    base: float = 0.0,
    side: Side | str = Side.LEFT,
    quad: QuadConfig = DEFAULT_QUAD,
):
    r"""Left or right psi-fractional integral :math:`I^{\alpha,\psi}` of ``fn`` at ``x``.

    ``x`` may be an array. ``fn`` may be a plain vectorised callable.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    side = Side(side)

    def one(xv):
        _check_side(side, base, xv)
        f = _prepare(kernel, fn, base, xv)
        return _weighted_integral(kernel, side, base, xv, alpha, f.f, quad) / gamma(alpha)

    return _map_x(one, x)


def caputo_derivative(kernel: Kernel, spec: DerivativeSpec, fn, x, quad: QuadConfig = DEFAULT_QUAD):
    r"""psi-Caputo derivative :math:`{}^C D^{\alpha,\psi}` of ``fn`` at ``x``.

    For non-integer order the weakly singular integral over ``f^[n]_psi`` is
    evaluated by quadrature; for integer order the result is ``f^[n]_psi(x)``
    (times ``(-1)^n`` on the right). The value at the base point is 0.

    Examples
    --------
    >>> from psifrac.kernels import builtin_kernel
    >>> parab = SmoothFn(lambda x: 2 * x - x**2, derivs=(lambda x: 2 - 2 * x,))
    >>> round(float(caputo_derivative(builtin_kernel("linear"), DerivativeSpec(0.5), parab, 1.0)), 9)
    0.752252778
    """
    n = spec.n
    fn = _as_smooth(fn)
    dn = _psi_derivative_fn(kernel, fn, n)

    def one(xv):
        _check_side(spec.side, spec.base, xv)
        if spec.is_integer:
            ensure_valid(kernel, min(spec.base, xv), max(spec.base, xv) + (xv == spec.base))
            return spec.sign * float(_values(dn, xv))
        if xv == spec.base:
            return 0.0
        _prepare(kernel, fn, spec.base, xv)
        p = n - spec.alpha
        val = _weighted_integral(kernel, spec.side, spec.base, xv, p, dn, quad)
        return spec.sign * val / gamma(p)

    return _map_x(one, x)


def caputo_derivative_ibp(
    kernel: Kernel, spec: DerivativeSpec, fn, x, quad: QuadConfig = DEFAULT_QUAD
):
    """Caputo derivative through its integration-by-parts form.

    Needs ``f^[n+1]_psi``; the remaining integral has a bounded integrand,
    which makes this an independent evaluation path.
    """
    if spec.is_integer:
        return caputo_derivative(kernel, spec, fn, x, quad)
    n = spec.n
    p = n - spec.alpha
    fn = _as_smooth(fn)
    dn = _psi_derivative_fn(kernel, fn, n)
    dn1 = _psi_derivative_fn(kernel, fn, n + 1)

    def one(xv):
        _check_side(spec.side, spec.base, xv)
        if xv == spec.base:
            return 0.0
        _prepare(kernel, fn, spec.base, xv)
        delta = abs(float(kernel.psi(xv)) - float(kernel.psi(spec.base)))
        boundary = delta**p * float(_values(dn, spec.base))
        integral = _weighted_integral(kernel, spec.side, spec.base, xv, p + 1.0, dn1, quad)
        if spec.side is Side.RIGHT:
            integral = -integral
        return spec.sign * (boundary + integral) / gamma(p + 1.0)

    return _map_x(one, x)


def rl_derivative(
    kernel: Kernel,
    spec: DerivativeSpec,
    fn,
    x,
    quad: QuadConfig = DEFAULT_QUAD,
    interval: Interval | None = None,
):
    r"""Riemann-Liouville psi-derivative :math:`D^{\alpha,\psi}` at interior ``x``.

    :math:`I^{n-\alpha,\psi} f` is sampled on a ``n + 1`` point stencil in
    psi-space and differenced ``n`` times. The psi-space step is
    ``1e-4 * (psi(b) - psi(a))`` over ``interval`` (default: the span from the
    base point to ``x``).
    """
    n = spec.n
    if spec.is_integer:
        return caputo_derivative(kernel, spec, fn, x, quad)
    fn = _as_smooth(fn)
    p = n - spec.alpha
    pb = float(kernel.psi(spec.base))
    coeffs = np.array([(-1) ** (n - j) * math.comb(n, j) for j in range(n + 1)], dtype=float)
    offsets = np.arange(n + 1) - 0.5 * n

    def one(xv):
        _check_side(spec.side, spec.base, xv)
        px = float(kernel.psi(xv))
        if interval is not None:
            h = 1e-4 * (float(kernel.psi(interval.b)) - float(kernel.psi(interval.a)))
            lo, hi = interval.a, interval.b
        else:
            h = 1e-4 * abs(px - pb)
            pad = 1e-2 * abs(xv - spec.base)
            lo, hi = (spec.base, xv + pad) if spec.side is Side.LEFT else (xv - pad, spec.base)
        s = px + offsets * h
        if spec.side is Side.LEFT:
            inside = s[0] > pb and (interval is None or s[-1] <= float(kernel.psi(hi)))
        else:
            inside = s[-1] < pb and (interval is None or s[0] >= float(kernel.psi(lo)))
        if h == 0.0 or not inside:
            raise ValueError(f"difference stencil at x={xv} leaves the interval")
        ts = np.atleast_1d(kernel.inverse(s, lo, hi))
        vals = np.array(
            [_weighted_integral(kernel, spec.side, spec.base, float(t), p, fn.f, quad) for t in ts]
        ) / gamma(p)
        d = float(coeffs @ vals) / h**n
        return d if spec.side is Side.LEFT else (-1) ** n * d

    return _map_x(one, x)


# ---------------------------------------------------------------- closed forms


def power_rule(
    kernel: Kernel,
    alpha: float,
    beta: float,
    x,
    base: float = 0.0,
    side: Side | str = Side.LEFT,
):
    r"""Caputo derivative of :math:`(\psi(x) - \psi(a))^{\beta - 1}` in closed form.

    Returns :math:`\Gamma(\beta)/\Gamma(\beta-\alpha)\,(\psi(x)-\psi(a))^{\beta-\alpha-1}`,
    mirrored with :math:`\psi(b) - \psi(x)` on the right. Pseudo-polynomials
    :math:`(\psi(x)-\psi(a))^k` with integer ``k < n`` are annihilated.
    """
    side = Side(side)
    n = order_of(alpha)
    k = beta - 1.0
    annihilated = float(k).is_integer() and 0 <= k < n
    if not (beta > n or annihilated):
        raise ValueError(f"power rule needs beta > n = {n} (or integer beta-1 < n), got {beta}")
    xs = np.asarray(x, dtype=float)
    pb = kernel.psi(base)
    s = kernel.psi(xs) - pb if side is Side.LEFT else pb - kernel.psi(xs)
    if np.any(np.asarray(s) < 0):
        raise ValueError("x lies on the wrong side of the base point")
    if annihilated:
        out = np.zeros_like(xs)
    else:
        e = beta - alpha - 1.0
        with np.errstate(divide="ignore"):
            out = gamma(beta) / gamma(beta - alpha) * np.where(s > 0, np.abs(s) ** e, 0.0 if e > 0 else np.inf)
    return float(out) if np.ndim(out) == 0 else out


def ml_psi_derivative(alpha: float, lam: float, s, order: int, tol: float = 1e-16):
    r"""``order``-th psi-derivative of :math:`E_\alpha(\lambda s^\alpha)` in ``s``.

    Uses the term-wise differentiated series
    :math:`\sum_k \lambda^k s^{\alpha k - m} / \Gamma(\alpha k - m + 1)`;
    terms whose Gamma argument is a nonpositive integer vanish.
    """
    if order == 0:
        return mittag_leffler(alpha, lam * np.asarray(s, dtype=float) ** alpha)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    if lam == 0.0:
        return out if out.size > 1 else float(out[0])
    pos = s > 0
    ls = np.log(np.where(pos, s, 1.0))
    ll = math.log(abs(lam))
    k = 1
    small = 0
    while k < 5000:
        arg = alpha * k - order + 1.0
        if not (arg <= 0 and float(arg).is_integer()):
            sign = 1.0 if (lam > 0 or k % 2 == 0) else -1.0
            sign *= math.copysign(1.0, math.gamma(arg)) if arg < 0 else 1.0
            logt = k * ll + (alpha * k - order) * ls - math.lgamma(arg)
            term = np.where(pos, sign * np.exp(logt), 0.0)
            out += term
            if np.all(np.abs(term) <= tol * np.maximum(1.0, np.abs(out))):
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
        k += 1
    return out if out.size > 1 else float(out[0])


def ml_eigen(
    kernel: Kernel,
    alpha: float,
    lam: float,
    x,
    base: float = 0.0,
    side: Side | str = Side.LEFT,
    cfg: MLConfig = DEFAULT_ML,
):
    r"""Eigenfunction :math:`f = E_\alpha(\lambda(\psi(x)-\psi(a))^\alpha)` and its derivative.

    Returns ``(f(x), lam * f(x))``. On the right side ``psi(b) - psi(x)``
    replaces ``psi(x) - psi(a)``.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    side = Side(side)
    pb = kernel.psi(base)
    px = kernel.psi(np.asarray(x, dtype=float))
    s = px - pb if side is Side.LEFT else pb - px
    if np.any(np.asarray(s) < 0):
        raise ValueError("x lies on the wrong side of the base point")
    f = mittag_leffler(alpha, lam * np.asarray(s, dtype=float) ** alpha, cfg)
    return f, lam * f


def eigen_smooth_fn(kernel: Kernel, alpha: float, lam: float, base: float = 0.0, orders: int = 3) -> SmoothFn:
    """:class:`SmoothFn` of the Mittag-Leffler eigenfunction with exact psi-derivatives."""
    pb = float(kernel.psi(base))

    def level(m):
        return lambda x: ml_psi_derivative(alpha, lam, np.asarray(kernel.psi(x)) - pb, m)

    return SmoothFn(level(0), psi_derivs=tuple(level(m) for m in range(1, orders + 1)))


def product_rule_psi(
    kernel: Kernel,
    alpha: float,
    fn,
    x,
    base: float = 0.0,
    side: Side | str = Side.LEFT,
    quad: QuadConfig = DEFAULT_QUAD,
):
    r"""Caputo derivative of :math:`\psi \cdot f` for :math:`\alpha \in (0, 1)` via the product rule.

    Left: :math:`\psi\,{}^C D f + I^{1-\alpha} f - (1-\alpha) I^{2-\alpha} f^{[1]}`.
    Right: :math:`\psi\,{}^C D f - I^{1-\alpha} f - (1-\alpha) I^{2-\alpha} f^{[1]}`.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"product rule needs alpha in (0, 1), got {alpha}")
    side = Side(side)
    fn = _as_smooth(fn)
    d1 = SmoothFn(_psi_derivative_fn(kernel, fn, 1))
    spec = DerivativeSpec(alpha, side, base)

    def one(xv):
        if xv == base:
            return 0.0
        cap = caputo_derivative(kernel, spec, fn, xv, quad)
        i1 = frac_integral(kernel, 1.0 - alpha, fn, xv, base, side, quad)
        i2 = frac_integral(kernel, 2.0 - alpha, d1, xv, base, side, quad)
        sgn = 1.0 if side is Side.LEFT else -1.0
        return float(kernel.psi(xv)) * cap + sgn * i1 - (1.0 - alpha) * i2

    return _map_x(one, x)


def low_fractionality(
    kernel: Kernel,
    fn,
    epsilon: float,
    x,
    base: float = 0.0,
    quad: QuadConfig = DEFAULT_QUAD,
):
    r"""First-order expansion of the left derivative of order ``1 - epsilon``.

    .. math::

        f^{[1]}(x) + \varepsilon\Big[\gamma f^{[1]}(x) + f^{[1]}(a)\ln(\psi(x)-\psi(a))
        + \int_a^x \tfrac{d}{dt} f^{[1]}(t)\,\ln(\psi(x)-\psi(t))\,dt\Big]

    The logarithmic integral is mapped to the unit interval as
    ``delta * int_0^1 f^[2](t(u)) (ln delta + ln(1-u)) du``.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    fn = _as_smooth(fn)
    d1 = _psi_derivative_fn(kernel, fn, 1)
    d2 = _psi_derivative_fn(kernel, fn, 2)

    def one(xv):
        if not xv > base:
            raise ValueError(f"low_fractionality needs x > a, got x={xv}")
        _prepare(kernel, fn, base, xv)
        pb, px = float(kernel.psi(base)), float(kernel.psi(xv))
        delta = px - pb

        def g(u):
            return _values(d2, kernel.inverse(pb + u * delta, base, xv))

        plain = jacobi_integral(g, 1.0, quad, _umin(pb, delta))
        logw = log_integral(g, quad, _umin(pb, delta))
        integral = delta * (math.log(delta) * plain + logw)
        f1x = float(_values(d1, xv))
        f1a = float(_values(d1, base))
        return f1x + epsilon * (euler_gamma() * f1x + f1a * math.log(delta) + integral)

    return _map_x(one, x)


def bound_constant(kernel: Kernel, alpha: float, interval: Interval) -> float:
    """Operator-norm constant ``(psi(b) - psi(a))^(n-alpha) / Gamma(n+1-alpha)``."""
    ensure_valid(kernel, interval.a, interval.b)
    n = order_of(alpha)
    delta = float(kernel.psi(interval.b)) - float(kernel.psi(interval.a))
    return delta ** (n - alpha) / gamma(n + 1 - alpha)
