import csv
import io
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from psifrac import __version__
from psifrac.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from psifrac.special import gamma

TABLE1 = str(Path(__file__).resolve().parent.parent / "data" / "world_1910_2010.csv")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [[float(v) if v else None for v in r] for r in reader]


def test_eval_row_count():
    code, out, _ = run("eval", "--kernel", "linear", "--alpha", "0.5", "--fn", "pow2", "--a", "0", "--b", "5", "--grid", "101")
    header, body = rows(out)
    assert code == EXIT_OK
    assert header == ["x", "exact", "quadrature"]
    assert len(body) == 101
    ex = np.array([r[1] for r in body])
    q = np.array([r[2] for r in body])
    np.testing.assert_allclose(q, ex, rtol=1e-9, atol=1e-12)


def test_eval_integer_order_is_2x():
    _, out, _ = run("eval", "--kernel", "linear", "--alpha", "1", "--fn", "pow2", "--grid", "11")
    _, body = rows(out)
    for x, exact, quad in body:
        assert exact == pytest.approx(2 * x) and quad == pytest.approx(2 * x)


def test_eval_mittag_leffler_exact_is_f():
    _, out, _ = run("eval", "--kernel", "log1p", "--alpha", "0.7", "--fn", "mlexp", "--grid", "6")
    _, body = rows(out)
    from psifrac.special import mittag_leffler

    for x, exact, quad in body[1:]:
        f = mittag_leffler(0.7, math.log1p(x) ** 0.7)
        assert exact == pytest.approx(f, rel=1e-13)
        assert quad == pytest.approx(f, rel=1e-6)


@pytest.mark.parametrize("fn, kernel", [("ln2p1", "log1p"), ("parab", "linear")])
def test_eval_other_functions(fn, kernel):
    _, out, _ = run("eval", "--kernel", kernel, "--fn", fn, "--grid", "5", "--a", "0.5")
    _, body = rows(out)
    for _, exact, quad in body:
        assert quad == pytest.approx(exact, rel=1e-8, abs=1e-12)


def test_eval_exact_missing_when_unknown():
    _, out, _ = run("eval", "--kernel", "sqrt1p", "--fn", "parab", "--grid", "3")
    _, body = rows(out)
    assert all(r[1] is None for r in body)


def test_approx_default_scenario():
    code, out, _ = run("approx", "--grid", "21")
    header, body = rows(out)
    assert code == EXIT_OK
    assert header == ["x", "exact", "approx_N1", "approx_N3", "approx_N5"]
    x, exact, *approx = body[-1]
    assert x == 5.0
    assert exact == pytest.approx(2 / gamma(2.5) * math.log(6) ** 1.5)
    errs = [abs(a - exact) for a in approx]
    assert errs[0] >= errs[1] >= errs[2]


@pytest.mark.parametrize("N", ["0", "1,-2", "a,b"])
def test_approx_rejects_bad_N(N):
    code, _, err = run("approx", "--N", N)
    assert code == EXIT_USAGE and err.startswith("error:")


def test_solve_default_problem():
    code, out, _ = run("solve", "--f0", "0")
    header, body = rows(out)
    assert code == EXIT_OK
    assert header == ["x", "f"] + [f"V{k}" for k in range(1, 7)]
    assert len(body) == 5001
    x = np.array([r[0] for r in body])
    f = np.array([r[1] for r in body])
    assert np.max(np.abs(f - np.log1p(x) ** 2)) <= 0.05


def test_solve_N_comparison():
    ends = {}
    for N in ("2", "6"):
        _, out, _ = run("solve", "--f0", "0", "--N", N, "--steps", "1000")
        _, body = rows(out)
        ends[N] = abs(body[-1][1] - math.log1p(5.0) ** 2)
    assert ends["6"] < ends["2"]


def test_solve_requires_f0():
    code, _, err = run("solve")
    assert code == EXIT_USAGE and "--f0" in err


def test_solve_numeric_failure():
    code, _, err = run("solve", "--kernel", "linear", "--fn", "linear", "--lam", "1e8", "--f0", "1", "--steps", "10", "--N", "2")
    assert code == EXIT_NUMERIC and "numerical failure" in err


def test_fit_classical(table1_path):
    code, out, _ = run("fit", "--data", str(table1_path), "--family", "classical")
    header, body = rows(out.replace("classical", "0").replace("linear", "0").replace("true", "1"))
    assert code == EXIT_OK
    assert header == ["family", "kernel", "lambda", "alpha", "b", "sse", "converged"]
    assert body[0][2] == pytest.approx(0.13425, rel=1e-4)


def test_fit_pow1p_fixed_b(table1_path):
    _, out, _ = run("fit", "--data", str(table1_path), "--kernel", "pow1p:b=0.8")
    line = out.splitlines()[1].split(",")
    assert line[:2] == ["fractional", "pow1p"]
    assert float(line[4]) == 0.8
    assert float(line[5]) == pytest.approx(1.48784e5, rel=1e-3)


def test_project_after_sine_fit(table1_path):
    _, out, _ = run("project", "--data", str(table1_path), "--kernel", "sine10", "--t", "10.5", "--observed", "7350")
    line = out.splitlines()[1].split(",")
    assert out.splitlines()[0] == "family,kernel,t,projected,observed,error_percent"
    assert float(line[3]) == pytest.approx(7294, abs=3)
    assert float(line[5]) == pytest.approx(0.75694, abs=0.02)


def test_project_with_given_parameters(table1_path):
    _, out, _ = run(
        "project", "--data", str(table1_path), "--family", "classical", "--lambda", "0.13425",
        "--t", "10.5", "--observed", "7350",
    )
    line = out.splitlines()[1].split(",")
    assert float(line[5]) == pytest.approx(2.51382, abs=0.02)
    code, _, _ = run("project", "--data", str(table1_path), "--lambda", "0.1", "--t", "10.5", "--observed", "7350")
    assert code == EXIT_USAGE


def test_time_unit_inferred(table4_path):
    _, auto, _ = run("fit", "--data", str(table4_path), "--family", "classical")
    _, explicit, _ = run("fit", "--data", str(table4_path), "--family", "classical", "--time-unit", "1")
    assert auto == explicit


@pytest.mark.parametrize(
    "argv",
    [
        ("eval", "--kernel", "bogus"),
        ("eval", "--kernel", "pow1p"),
        ("eval", "--kernel", "sine10", "--b", "20"),
        ("eval", "--a", "3", "--b", "1"),
        ("eval", "--grid", "1"),
        ("eval", "--fn", "nope"),
        ("frobnicate",),
        ("fit", "--data", "/nonexistent.csv"),
        ("fit", "--data", TABLE1, "--family", "classical", "--kernel", "log1p"),
        ("fit", "--data", TABLE1, "--kernel", "log1p", "--free", "lambda,b"),
        ("solve", "--f0", "0", "--alpha", "1.5"),
    ],
)
def test_usage_errors(argv):
    code, out, err = run(*argv)
    assert code == EXIT_USAGE
    assert out == "" and err


def test_out_file_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for dest in (a, b):
        code, out, _ = run("approx", "--grid", "11", "--out", str(dest))
        assert code == EXIT_OK and out == ""
    assert a.read_bytes() == b.read_bytes()


def test_shortest_round_trip_format():
    _, out, _ = run("eval", "--grid", "4", "--b", "3")
    x = out.splitlines()[2].split(",")[0]
    assert x == "1.0"
    for line in out.splitlines()[1:]:
        for cell in line.split(","):
            assert repr(float(cell)) == cell


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "psifrac", "eval", "--grid", "3"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and proc.stdout.startswith("x,exact,quadrature")
    proc = subprocess.run([sys.executable, "-m", "psifrac", "--version"], capture_output=True, text=True)
    assert __version__ in proc.stdout
