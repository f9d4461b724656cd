"""Quadrature rules for weakly singular integrals on the unit interval.

After the change of variables ``u = (psi(t) - psi(a)) / (psi(x) - psi(a))``
every fractional integral becomes

    int_0^1 (1 - u)^(p - 1) g(u) du

with ``g`` smooth away from ``u = 0`` (where it may itself carry a power
singularity, e.g. for power-law data). The interval is split at 1/2:

* on [1/2, 1] a Gauss-Jacobi rule absorbs the weight exactly;
* on [0, 1/2] geometrically graded Gauss-Legendre panels resolve any
  behaviour at ``u = 0``; the innermost sliver is replaced by a power-law
  tail estimate.

The number of graded levels is doubled until two successive levels agree.
Nodes come from :mod:`scipy.special`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi, roots_laguerre, roots_legendre

__all__ = ["QuadConfig", "QuadratureError", "jacobi_integral", "log_integral"]

UFn = Callable[[np.ndarray], np.ndarray]


class QuadratureError(ArithmeticError):
    """Refinement levels kept disagreeing or the integrand was not finite."""


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature controls.

    Parameters
    ----------
    nodes : int
        Gauss rule size on every panel.
    refinement : int
        Number of graded panels at the coarsest level.
    tol : float
        Relative agreement required between successive levels.
    max_panels : int
        Give up (``QuadratureError``) past this many graded panels.
    ratio : float
        Geometric grading ratio of the panels toward the singular end.
    """

    nodes: int = 40
    refinement: int = 4
    tol: float = 1e-9
    max_panels: int = 256
    ratio: float = 0.1

    def __post_init__(self) -> None:
        if self.nodes < 2:
            raise ValueError(f"nodes must be >= 2, got {self.nodes}")
        if self.refinement < 1:
            raise ValueError(f"refinement must be >= 1, got {self.refinement}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")


DEFAULT_QUAD = QuadConfig()


@functools.lru_cache(maxsize=64)
def _legendre01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


@functools.lru_cache(maxsize=512)
def _jacobi_upper(n: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    # int_{1/2}^1 (1-u)^(p-1) g(u) du with u = 3/4 + v/4
    v, w = roots_jacobi(n, p - 1.0, 0.0)
    return 0.75 + 0.25 * v, w * 0.25**p


@functools.lru_cache(maxsize=64)
def _laguerre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return roots_laguerre(n)


def _finite(vals: np.ndarray) -> np.ndarray:
    vals = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand is not finite at a quadrature node")
    return vals


def _tail(h0: float, h1: float, w: float, ratio: float) -> float | None:
    """Integral of ``C u^gamma`` over [0, w] fitted through (w, h0), (ratio*w, h1)."""
    if h0 == 0.0 and h1 == 0.0:
        return 0.0
    if h0 * h1 <= 0.0:
        return None
    gam = math.log(h0 / h1) / math.log(1.0 / ratio)
    if gam <= -0.999:
        return None
    return h0 * w / (gam + 1.0)


def _graded(h: UFn, panels: int, umin: float, cfg: QuadConfig) -> tuple[float, int]:
    """Integrate ``h`` over [0, 1/2] on panels graded geometrically toward 0."""
    X, W = _legendre01(cfg.nodes)
    edges = [0.5]
    while len(edges) <= panels and edges[-1] * cfg.ratio >= umin:
        edges.append(edges[-1] * cfg.ratio)
    hi = np.array(edges[:-1])
    lo = np.array(edges[1:])
    w = edges[-1]
    probe = np.array([w, 0.5 * w])
    nodes = (lo[:, None] + (hi - lo)[:, None] * X[None, :]).ravel()
    tail_nodes = w * X
    vals = _finite(h(np.concatenate([nodes, probe, tail_nodes])))
    m = nodes.size
    body = float(np.sum(((hi - lo)[:, None] * W[None, :]).ravel() * vals[:m]))
    tail = _tail(vals[m], vals[m + 1], w, 0.5)
    if tail is None:
        tail = w * float(W @ vals[m + 2 :])
    return body + tail, len(edges) - 1


def jacobi_integral(
    g: UFn, p: float, cfg: QuadConfig = DEFAULT_QUAD, umin: float = 0.0
) -> float:
    """Approximate ``int_0^1 (1-u)^(p-1) g(u) du`` for ``p > 0``.

    ``umin`` bounds how close to ``u = 0`` the graded panels may go; below it
    the integrand is represented by the tail estimate only.
    """
    if not p > 0:
        raise ValueError(f"weight exponent p - 1 needs p > 0, got {p}")
    un, uw = _jacobi_upper(cfg.nodes, float(p))
    upper = float(uw @ _finite(g(un)))

    def h(u):
        return (1.0 - u) ** (p - 1.0) * np.asarray(g(u), dtype=float)

    umin = max(umin, 1e-300)
    panels = cfg.refinement
    prev, used = _graded(h, panels, umin, cfg)
    while True:
        panels *= 2
        if panels > cfg.max_panels:
            raise QuadratureError(
                f"graded panels disagree beyond {cfg.max_panels} panels"
            )
        cur, used_now = _graded(h, panels, umin, cfg)
        total = cur + upper
        if abs(cur - prev) <= cfg.tol * max(1.0, abs(total)) or used_now == used:
            return total
        prev, used = cur, used_now


def log_integral(g: UFn, cfg: QuadConfig = DEFAULT_QUAD, umin: float = 0.0) -> float:
    """Approximate ``int_0^1 ln(1-u) g(u) du``.

    On [1/2, 1] the substitution ``1 - u = exp(-y)/2`` turns the logarithmic
    end point into an exponentially decaying integrand handled by
    Gauss-Laguerre.
    """
    y, wy = _laguerre(cfg.nodes)
    u = 1.0 - 0.5 * np.exp(-y)
    upper = 0.5 * float(wy @ (-(math.log(2.0) + y) * _finite(g(u))))

    def h(u):
        return np.log1p(-u) * np.asarray(g(u), dtype=float)

    umin = max(umin, 1e-300)
    panels = cfg.refinement
    prev, used = _graded(h, panels, umin, cfg)
    while True:
        panels *= 2
        if panels > cfg.max_panels:
            raise QuadratureError(
                f"graded panels disagree beyond {cfg.max_panels} panels"
            )
        cur, used_now = _graded(h, panels, umin, cfg)
        total = cur + upper
        if abs(cur - prev) <= cfg.tol * max(1.0, abs(total)) or used_now == used:
            return total
        prev, used = cur, used_now
