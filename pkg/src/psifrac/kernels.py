"""The "other function" psi and its admissibility checks.

A :class:`Kernel` bundles an increasing map ``psi`` with an analytically
coded first derivative. Builtin families cover the kernels used for the
population experiments and the figure data; any other ``(psi, dpsi)`` pair
can be wrapped directly or registered under a name for the CLI.

All callables must accept NumPy arrays.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "Interval",
    "Kernel",
    "KernelError",
    "KernelValidation",
    "builtin_kernel",
    "ensure_valid",
    "kernel_names",
    "parse_kernel_spec",
    "register_kernel",
    "validate",
]

RealFn = Callable[[np.ndarray], np.ndarray]


class KernelError(ValueError):
    """Unknown kernel, bad parameters, or a kernel that fails validation."""


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"interval endpoints must be finite: [{self.a}, {self.b}]")
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True, eq=False)
class Kernel:
    """An increasing C^1 function psi with its derivative.

    ``d2psi``/``d3psi`` are optional; when missing they are obtained by
    central differences of ``dpsi``. ``inverse`` is optional as well; without
    it, :meth:`inverse` runs a safeguarded Newton iteration.
    """

    name: str
    psi: RealFn
    dpsi: RealFn
    params: tuple[tuple[str, float], ...] = ()
    d2psi: RealFn | None = None
    d3psi: RealFn | None = None
    inv: RealFn | None = field(default=None, repr=False)

    def __call__(self, x):
        return self.psi(x)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.name}:{args}"

    def param(self, key: str) -> float:
        return dict(self.params)[key]

    def second_derivative(self, x):
        if self.d2psi is not None:
            return _broadcast(self.d2psi(x), x)
        x = np.asarray(x, dtype=float)
        h = 1e-5 * (1.0 + np.abs(x))
        return (self.dpsi(x + h) - self.dpsi(x - h)) / (2 * h)

    def third_derivative(self, x):
        if self.d3psi is not None:
            return _broadcast(self.d3psi(x), x)
        x = np.asarray(x, dtype=float)
        h = 1e-4 * (1.0 + np.abs(x))
        return (self.dpsi(x + h) - 2 * self.dpsi(x) + self.dpsi(x - h)) / h**2

    def inverse(self, s, lo: float, hi: float):
        """Solve ``psi(t) = s`` for ``t`` in ``[lo, hi]`` (vectorised)."""
        s = np.asarray(s, dtype=float)
        if self.inv is not None:
            return np.clip(self.inv(s), lo, hi)
        return _newton_bisect(self.psi, self.dpsi, s, lo, hi)


def _broadcast(val, like):
    return np.broadcast_to(np.asarray(val, dtype=float), np.shape(like)).copy()


def _newton_bisect(psi, dpsi, s, lo, hi, tol=1e-13, maxiter=100):
    s = np.atleast_1d(s)
    a = np.full_like(s, lo)
    b = np.full_like(s, hi)
    fa = psi(a) - s
    fb = psi(b) - s
    if np.any(fa > tol * (1 + np.abs(s))) or np.any(fb < -tol * (1 + np.abs(s))):
        raise KernelError("inverse target outside psi([lo, hi])")
    t = a + (b - a) * np.clip(-fa / np.where(fb - fa > 0, fb - fa, 1.0), 0.0, 1.0)
    for _ in range(maxiter):
        r = psi(t) - s
        done = np.abs(r) <= tol * (1.0 + np.abs(s))
        if np.all(done):
            return t
        a = np.where(r < 0, t, a)
        b = np.where(r > 0, t, b)
        d = dpsi(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = t - r / d
        inside = np.isfinite(step) & (step > a) & (step < b)
        t = np.where(done, t, np.where(inside, step, 0.5 * (a + b)))
    raise KernelError("inverse solve did not converge")


_FACTORIES: dict[str, tuple[Callable[..., Kernel], tuple[str, ...]]] = {}


def register_kernel(name: str, factory: Callable[..., Kernel], params: tuple[str, ...] = ()) -> None:
    """Make ``factory(**params)`` available under ``name`` (e.g. for the CLI)."""
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise KernelError(f"invalid kernel name {name!r}")
    _FACTORIES[name] = (factory, tuple(params))


def kernel_names() -> list[str]:
    return sorted(_FACTORIES)


def builtin_kernel(name: str, **params: float) -> Kernel:
    """Construct a registered kernel.

    >>> float(builtin_kernel("pow1p", b=0.8).dpsi(0.0))
    0.8
    """
    try:
        factory, required = _FACTORIES[name]
    except KeyError:
        raise KernelError(f"unknown kernel {name!r}; known: {', '.join(kernel_names())}") from None
    missing = [p for p in required if p not in params]
    extra = [p for p in params if p not in required]
    if missing or extra:
        raise KernelError(
            f"kernel {name!r} takes parameters {list(required)}, got {sorted(params)}"
        )
    return factory(**{k: float(v) for k, v in params.items()})


def parse_kernel_spec(text: str) -> Kernel:
    """Parse ``name`` or ``name:key=value[,key=value]``."""
    name, _, rest = text.strip().partition(":")
    params: dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise KernelError(f"malformed kernel parameter {item!r} in {text!r}")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise KernelError(f"non-numeric value in {item!r}") from None
    return builtin_kernel(name, **params)


def _linear() -> Kernel:
    return Kernel(
        "linear",
        psi=lambda x: np.asarray(x, dtype=float) * 1.0,
        dpsi=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        d2psi=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        d3psi=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        inv=lambda s: s * 1.0,
    )


def _log1p() -> Kernel:
    return Kernel(
        "log1p",
        psi=np.log1p,
        dpsi=lambda x: 1.0 / (1.0 + np.asarray(x, dtype=float)),
        d2psi=lambda x: -1.0 / (1.0 + np.asarray(x, dtype=float)) ** 2,
        d3psi=lambda x: 2.0 / (1.0 + np.asarray(x, dtype=float)) ** 3,
        inv=np.expm1,
    )


def _sqrt1p() -> Kernel:
    return Kernel(
        "sqrt1p",
        psi=lambda x: np.sqrt(1.0 + np.asarray(x, dtype=float)),
        dpsi=lambda x: 0.5 / np.sqrt(1.0 + np.asarray(x, dtype=float)),
        d2psi=lambda x: -0.25 * (1.0 + np.asarray(x, dtype=float)) ** -1.5,
        d3psi=lambda x: 0.375 * (1.0 + np.asarray(x, dtype=float)) ** -2.5,
        inv=lambda s: np.asarray(s, dtype=float) ** 2 - 1.0,
    )


def _pow1p(b: float) -> Kernel:
    if not (b > 0 and math.isfinite(b)):
        raise KernelError(f"pow1p needs b > 0, got {b}")
    return Kernel(
        "pow1p",
        psi=lambda x: (1.0 + np.asarray(x, dtype=float)) ** b,
        dpsi=lambda x: b * (1.0 + np.asarray(x, dtype=float)) ** (b - 1),
        d2psi=lambda x: b * (b - 1) * (1.0 + np.asarray(x, dtype=float)) ** (b - 2),
        d3psi=lambda x: b * (b - 1) * (b - 2) * (1.0 + np.asarray(x, dtype=float)) ** (b - 3),
        params=(("b", b),),
        inv=lambda s: np.asarray(s, dtype=float) ** (1.0 / b) - 1.0,
    )


def _hadamard_log() -> Kernel:
    return Kernel(
        "hadamard_log",
        psi=np.log,
        dpsi=lambda x: 1.0 / np.asarray(x, dtype=float),
        d2psi=lambda x: -1.0 / np.asarray(x, dtype=float) ** 2,
        d3psi=lambda x: 2.0 / np.asarray(x, dtype=float) ** 3,
        inv=np.exp,
    )


def _sine10() -> Kernel:
    # inverse is only valid on the increasing branch |x| <= 5 pi
    return Kernel(
        "sine10",
        psi=lambda x: np.sin(np.asarray(x, dtype=float) / 10.0),
        dpsi=lambda x: np.cos(np.asarray(x, dtype=float) / 10.0) / 10.0,
        d2psi=lambda x: -np.sin(np.asarray(x, dtype=float) / 10.0) / 100.0,
        d3psi=lambda x: -np.cos(np.asarray(x, dtype=float) / 10.0) / 1000.0,
        inv=lambda s: 10.0 * np.arcsin(np.clip(s, -1.0, 1.0)),
    )


register_kernel("linear", _linear)
register_kernel("log1p", _log1p)
register_kernel("sqrt1p", _sqrt1p)
register_kernel("pow1p", _pow1p, ("b",))
register_kernel("hadamard_log", _hadamard_log)
register_kernel("sine10", _sine10)


@dataclass(frozen=True)
class KernelValidation:
    ok: bool
    x: float | None = None
    value: float | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _chebyshev_points(iv: Interval, m: int) -> np.ndarray:
    j = np.arange(m)
    pts = 0.5 * (iv.a + iv.b) + 0.5 * iv.length * np.cos(np.pi * (2 * j + 1) / (2 * m))
    return np.sort(pts)


def validate(kernel: Kernel, iv: Interval, samples: int = 64) -> KernelValidation:
    """Check ``dpsi > 0`` and agreement of ``dpsi`` with differenced ``psi``.

    Points are Chebyshev-distributed over ``iv``; the first failing point
    (in ascending order) is reported.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    xs = _chebyshev_points(iv, samples)
    with np.errstate(all="ignore"):
        d = _broadcast(kernel.dpsi(xs), xs)
        h = 1e-6 * (1.0 + np.abs(xs))
        fd = (kernel.psi(xs + h) - kernel.psi(xs - h)) / (2 * h)
    for x, dv, fv in zip(xs, d, fd):
        if not (np.isfinite(dv) and dv > 0):
            return KernelValidation(False, float(x), float(dv), "dpsi is not positive")
        if not (np.isfinite(fv) and abs(fv - dv) <= 1e-6 * (1.0 + abs(dv))):
            return KernelValidation(
                False, float(x), float(dv), f"dpsi disagrees with differenced psi ({fv:.6g})"
            )
    return KernelValidation(True)


@functools.lru_cache(maxsize=4096)
def _checked(kernel: Kernel, lo: float, hi: float) -> KernelValidation:
    return validate(kernel, Interval(lo, hi))


def ensure_valid(kernel: Kernel, lo: float, hi: float) -> None:
    """Raise :class:`KernelError` unless ``kernel`` validates on ``[lo, hi]``."""
    if lo == hi:
        return
    lo, hi = min(lo, hi), max(lo, hi)
    report = _checked(kernel, float(lo), float(hi))
    if not report:
        raise KernelError(
            f"kernel {kernel.label} invalid on [{lo}, {hi}]: {report.reason} at x={report.x:.6g}"
        )


def kernel_from_mapping(name: str, params: Mapping[str, float] | None = None) -> Kernel:
    return builtin_kernel(name, **dict(params or {}))
