import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psifrac.kernels import (
    Interval,
    Kernel,
    KernelError,
    builtin_kernel,
    ensure_valid,
    kernel_names,
    parse_kernel_spec,
    register_kernel,
    validate,
)

BUILTINS = ["linear", "log1p", "sqrt1p", "pow1p", "sine10"]


def make(name):
    return builtin_kernel(name, b=0.8) if name == "pow1p" else builtin_kernel(name)


@pytest.mark.parametrize(
    "name, x, attr, expected",
    [
        ("linear", 3.0, "psi", 3.0),
        ("log1p", math.e - 1, "psi", 1.0),
        ("pow1p", 0.0, "dpsi", 0.8),
        ("sqrt1p", 3.0, "psi", 2.0),
        ("sqrt1p", 3.0, "dpsi", 0.25),
        ("hadamard_log", math.e, "psi", 1.0),
        ("sine10", 0.0, "dpsi", 0.1),
    ],
)
def test_builtin_values(name, x, attr, expected):
    assert getattr(make(name), attr)(x) == pytest.approx(expected, rel=1e-14)


def test_unknown_kernel():
    with pytest.raises(KernelError):
        builtin_kernel("nope")


@pytest.mark.parametrize("params", [{}, {"b": 0.0}, {"b": -1.0}])
def test_pow1p_needs_positive_b(params):
    with pytest.raises(KernelError):
        builtin_kernel("pow1p", **params)


def test_parse_kernel_spec():
    k = parse_kernel_spec("pow1p:b=0.66734")
    assert k.name == "pow1p" and k.param("b") == 0.66734
    assert parse_kernel_spec("log1p").name == "log1p"
    for bad in ("pow1p:b", "pow1p:b=x", "linear:c=1", ""):
        with pytest.raises(KernelError):
            parse_kernel_spec(bad)


def test_kernel_names():
    assert {"linear", "log1p", "sqrt1p", "pow1p", "hadamard_log", "sine10"} <= set(kernel_names())


@pytest.mark.parametrize("name", BUILTINS)
@pytest.mark.parametrize("iv", [Interval(0, 5), Interval(0, 11)])
def test_builtins_valid(name, iv):
    assert validate(make(name), iv, 64)


def test_hadamard_valid_away_from_zero():
    assert validate(builtin_kernel("hadamard_log"), Interval(1, 5))


def test_sine10_violation():
    rep = validate(builtin_kernel("sine10"), Interval(0, 20), 64)
    assert not rep
    assert abs(rep.x - 5 * math.pi) < 0.5
    assert rep.value <= 0


def test_wrong_derivative_detected():
    k = Kernel("bad", np.exp, lambda x: 2 * np.exp(x))
    rep = validate(k, Interval(0, 1))
    assert not rep and "differenced" in rep.reason


def test_ensure_valid_raises():
    with pytest.raises(KernelError):
        ensure_valid(builtin_kernel("sine10"), 0.0, 20.0)


@pytest.mark.parametrize("a, b", [(1, 1), (2, 1), (0, math.inf), (math.nan, 1)])
def test_interval_invariants(a, b):
    with pytest.raises(ValueError):
        Interval(a, b)


def test_validate_needs_two_samples():
    with pytest.raises(ValueError):
        validate(builtin_kernel("linear"), Interval(0, 1), 1)


@pytest.mark.parametrize("name", BUILTINS)
@given(x1=st.floats(0, 5), x2=st.floats(0, 5))
def test_monotone(name, x1, x2):
    k = make(name)
    if x1 < x2:
        assert k.psi(x1) <= k.psi(x2)


@pytest.mark.parametrize("name", BUILTINS + ["hadamard_log"])
def test_inverse_roundtrip(name):
    k = make(name)
    xs = np.linspace(1.0, 5.0, 9)
    np.testing.assert_allclose(k.inverse(k.psi(xs), 0.5, 5.5), xs, rtol=1e-11)


def test_inverse_by_newton_for_custom_kernel():
    k = Kernel("cubic", lambda x: x + x**3, lambda x: 1 + 3 * x**2)
    xs = np.linspace(0, 2, 7)
    np.testing.assert_allclose(k.inverse(k.psi(xs), 0.0, 2.0), xs, atol=1e-12)


def test_higher_derivatives():
    k = make("log1p")
    assert k.second_derivative(1.0) == pytest.approx(-0.25, rel=1e-12)
    assert k.third_derivative(1.0) == pytest.approx(0.25, rel=1e-12)
    cubic = Kernel("cubic", lambda x: x + x**3, lambda x: 1 + 3 * x**2)
    assert cubic.second_derivative(1.0) == pytest.approx(6.0, rel=1e-6)


def test_register_custom_kernel():
    register_kernel("shifted_test", lambda c: Kernel("shifted_test", lambda x: x + c, lambda x: np.ones_like(np.asarray(x, float)), (("c", c),)), ("c",))
    k = parse_kernel_spec("shifted_test:c=2")
    assert k.psi(1.0) == 3.0
    assert validate(k, Interval(0, 1))
