"""Scalar special functions used throughout the package.

Gamma and Beta are thin wrappers over the C library routines exposed by
:mod:`math`; the Mittag-Leffler function is summed directly from its power
series with compensated (Neumaier) summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MLConfig",
    "MittagLefflerError",
    "beta",
    "euler_gamma",
    "gamma",
    "gen_binomial",
    "mittag_leffler",
]

EULER_GAMMA = 0.57721566490153286061


class MittagLefflerError(ArithmeticError):
    """Raised when the Mittag-Leffler series does not settle within budget."""


@dataclass(frozen=True)
class MLConfig:
    """Truncation control for the Mittag-Leffler series.

    Summation stops once two consecutive terms are below ``tol`` in absolute
    value; reaching ``max_terms`` before that raises
    :class:`MittagLefflerError`.
    """

    tol: float = 1e-14
    max_terms: int = 2000

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_ML = MLConfig()


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma(x: float) -> float:
    """Gamma function; raises ``ValueError`` at the poles 0, -1, -2, ..."""
    x = float(x)
    if _is_pole(x):
        raise ValueError(f"gamma has a pole at {x}")
    return math.gamma(x)


def beta(x: float, y: float) -> float:
    """Beta function ``B(x, y) = G(x) G(y) / G(x + y)`` for ``x, y > 0``."""
    if not (x > 0 and y > 0):
        raise ValueError(f"beta requires positive arguments, got ({x}, {y})")
    if x + y < 170.0:
        return math.gamma(x) * math.gamma(y) / math.gamma(x + y)
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


def gen_binomial(p: float, k: int) -> float:
    """Generalised binomial coefficient ``p (p-1) ... (p-k+1) / k!``."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    out = 1.0
    for j in range(k):
        out *= (p - j) / (j + 1)
    return out


def euler_gamma() -> float:
    """The Euler-Mascheroni constant."""
    return EULER_GAMMA


def mittag_leffler(alpha: float, z, cfg: MLConfig = DEFAULT_ML):
    r"""One-parameter Mittag-Leffler function :math:`E_\alpha(z)` for real ``z``.

    Accepts a scalar or an array for ``z`` and returns the same shape.
    Terms are formed as ``exp(k log|z| - lgamma(alpha k + 1))`` so that large
    powers of ``z`` never overflow on their own; an ``OverflowError`` is
    raised when the sum itself leaves the double range.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")

    zarr = np.asarray(z, dtype=float)
    scalar = zarr.ndim == 0
    zs = np.atleast_1d(zarr).ravel()
    if not np.all(np.isfinite(zs)):
        raise ValueError("mittag_leffler requires finite arguments")

    nonzero = zs != 0.0
    with np.errstate(divide="ignore"):
        logz = np.where(nonzero, np.log(np.abs(zs)), 0.0)
    negative = zs < 0.0

    total = np.ones_like(zs)
    comp = np.zeros_like(zs)
    below = np.zeros(zs.shape, dtype=int)
    active = nonzero.copy()

    for k in range(1, cfg.max_terms):
        if not active.any():
            break
        logt = k * logz[active] - math.lgamma(alpha * k + 1.0)
        if np.any(logt > 709.0):
            raise OverflowError(f"E_{alpha}(z) overflows for z = {zs[active].max()}")
        term = np.exp(logt)
        if k % 2:
            term = np.where(negative[active], -term, term)

        # Neumaier compensated accumulation
        s = total[active]
        t = s + term
        big = np.abs(s) >= np.abs(term)
        comp[active] += np.where(big, (s - t) + term, (term - t) + s)
        total[active] = t

        small = np.abs(term) < cfg.tol
        cnt = np.where(small, below[active] + 1, 0)
        below[active] = cnt
        idx = np.flatnonzero(active)
        active[idx[cnt >= 2]] = False
    else:
        if active.any():
            raise MittagLefflerError(
                f"E_{alpha}(z) did not converge in {cfg.max_terms} terms"
            )

    out = total + comp
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"E_{alpha}(z) is not finite")
    if scalar:
        return float(out[0])
    return out.reshape(zarr.shape)
