"""Fractional calculus with respect to another function.

Modules
-------
special        Gamma, Beta, binomials, Mittag-Leffler
kernels        the function psi and its admissibility checks
operators      fractional integrals, Caputo and Riemann-Liouville derivatives
decomposition  integer-order series decomposition of the Caputo derivative
fde            initial-value problems solved through the decomposition
fitting        population-growth least-squares fits
cli            command-line front end
"""

__version__ = "0.1.0"

from .kernels import Interval, Kernel, KernelError, builtin_kernel, parse_kernel_spec, validate
from .operators import (
    DerivativeSpec,
    Side,
    SmoothFn,
    caputo_derivative,
    caputo_derivative_ibp,
    frac_integral,
    power_rule,
    rl_derivative,
)
from .quadrature import QuadConfig, QuadratureError
from .special import MLConfig, beta, gamma, gen_binomial, mittag_leffler

__all__ = [
    "DerivativeSpec",
    "Interval",
    "Kernel",
    "KernelError",
    "MLConfig",
    "QuadConfig",
    "QuadratureError",
    "Side",
    "SmoothFn",
    "beta",
    "builtin_kernel",
    "caputo_derivative",
    "caputo_derivative_ibp",
    "frac_integral",
    "gamma",
    "gen_binomial",
    "mittag_leffler",
    "parse_kernel_spec",
    "power_rule",
    "rl_derivative",
    "validate",
]
