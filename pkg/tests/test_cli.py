import csv
import io
import json
import math
import subprocess
import sys

import pytest

from greentail import cli
from greentail.errors import ParameterError


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_tail_example(capsys):
    code, out, _ = run_cli(capsys, "tail", "--family", "hermite", "--x", "0", "--y", "0",
                           "--N", "2048", "--gamma", "0.5")
    assert code == 0
    assert out.startswith("# greentail ")
    assert "# argv=tail --family hermite" in out
    (row,) = csv_rows(out)
    value, bound = float(row["value"]), float(row["remainder_bound"])
    assert abs(value - 0.225) <= 0.005 + bound * math.sqrt(2048)
    assert row["method"] == "direct" and row["status"] in ("converged", "accelerated")


def test_limit_example(capsys):
    code, out, _ = run_cli(capsys, "limit", "--family", "chebyshev-t", "--x", "0.73")
    assert code == 0
    (row,) = csv_rows(out)
    assert float(row["limit"]) == 0.5


def test_kl_sim_is_byte_identical(capsys):
    argv = ("kl-sim", "--N", "256", "--M", "4096", "--paths", "1000", "--seed", "42")
    a = run_cli(capsys, *argv)
    b = run_cli(capsys, *argv)
    assert a[0] == 0 and a[1] == b[1]
    rows = csv_rows(a[1])
    assert len(rows) == 10
    assert {"s", "t", "empirical_cov", "cov_se", "exact_cov"} <= set(rows[0])


def test_json_output_is_valid(capsys):
    code, out, _ = run_cli(capsys, "moments", "--family", "hermite", "--k-max", "3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["verb"] == "moments" and doc["meta"]["schema"] == cli.SCHEMA_VERSION
    assert len(doc["rows"]) == 4
    assert doc["rows"][0]["weighted_moment"] == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_render_maps_non_finite_to_null_and_round_trips_floats():
    table = cli.Table(["a", "b", "ok"], [[math.inf, 0.1 + 0.2, True]], {"run": 1})
    doc = json.loads(cli.render(table, "json"))
    assert doc["rows"] == [{"a": None, "b": 0.30000000000000004, "ok": True}]
    text = cli.render(table, "csv")
    assert "# run=1" in text
    assert text.splitlines()[-1] == "inf,0.30000000000000004,true"


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run_cli(capsys, "limit", "--family", "hermite", "--x", "0,1", "-o", str(target))
    assert code == 0 and out == ""
    rows = csv_rows(target.read_text())
    assert [float(r["x"]) for r in rows] == [0.0, 1.0]


@pytest.mark.parametrize("argv", [
    ("bogus",),
    ("tail", "--family", "hermite", "--x", "0", "--N", "-3"),
    ("tail", "--family", "nope", "--x", "0", "--N", "3"),
    ("slp-eig", "--p", "exp(3*x", "--n-max", "2"),
    ("limit", "--family", "legendre", "--x", "1.0"),
    ("kl-sim", "--N", "16", "--M", "20"),
    ("slp-green", "--p", "1", "--q", "0", "--w", "1", "--bc", "1,0", "--x", "0.5"),
])
def test_parameter_errors_exit_2(capsys, argv):
    code, _, _ = run_cli(capsys, *argv)
    assert code == 2


def test_non_convergence_exits_3(capsys):
    code, out, _ = run_cli(capsys, "tail", "--family", "legendre", "--x", "0.3", "--y", "-0.2",
                           "--N", "5", "--rtol", "1e-13")
    assert code == 3
    (row,) = csv_rows(out)
    assert row["status"] == "unconverged"


def test_singular_greens_function_exits_3(capsys):
    code, _, err = run_cli(capsys, "slp-green", "--p", "1", "--q", "0", "--w", "1", "--bc", "0,1,0,1",
                           "--x", "0.5")
    assert code == 3 and "not converged" in err


def test_help_problems(capsys):
    for argv in (("--help", "problems"), ("help", "problems")):
        code, out, _ = run_cli(capsys, *argv)
        assert code == 0 and "exp, log, sin, cos, sqrt" in out


def test_help_and_version_exit_0(capsys):
    assert run_cli(capsys, "--help")[0] == 0
    assert run_cli(capsys, "--version")[0] == 0


def test_thread_count_does_not_change_output(capsys, monkeypatch):
    argv = ("tail", "--family", "legendre", "--x", "0.1,0.4,-0.3,0.8", "--y", "0.2", "--N", "50",
            "--rtol", "1e-4")
    monkeypatch.setenv(cli.THREADS_ENV, "1")
    one = run_cli(capsys, *argv)
    monkeypatch.setenv(cli.THREADS_ENV, "4")
    four = run_cli(capsys, *argv)
    assert one[0] == four[0] == 0
    assert one[1] == four[1]
    assert [float(r["x"]) for r in csv_rows(one[1])] == [0.1, 0.4, -0.3, 0.8]


def test_bad_thread_env_is_a_parameter_error(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "zero")
    with pytest.raises(ParameterError):
        cli.thread_count()
    monkeypatch.setenv(cli.THREADS_ENV, "0")
    with pytest.raises(ParameterError):
        cli.thread_count()


def test_converge_verb_reports_fit(capsys):
    code, out, _ = run_cli(capsys, "converge", "--family", "chebyshev-t", "--x", "0.3",
                           "--N", "64,128,256", "--rtol", "1e-4")
    assert code == 0
    assert "# limit=0.5" in out
    assert len(csv_rows(out)) == 3


def test_cd_check_and_slp_verbs(capsys):
    code, out, _ = run_cli(capsys, "cd-check", "--family", "legendre", "--x", "0.3", "--y", "-0.2")
    assert code == 0 and float(csv_rows(out)[0]["relative_residual"]) <= 1e-11
    code, out, _ = run_cli(capsys, "slp-eig", "--n-max", "3")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 4
    assert float(rows[0]["lambda"]) == pytest.approx((1 + 4 * math.pi ** 2) / 4, rel=1e-10)
    code, out, _ = run_cli(capsys, "slp-green", "--p", "1", "--q", "0", "--w", "1", "--bc", "1,0,0,1",
                           "--x", "0.3", "--y", "0.6")
    assert code == 0 and float(csv_rows(out)[0]["green"]) == pytest.approx(0.3, abs=1e-10)


def test_kl_cov_and_slp_fluct(capsys):
    code, out, _ = run_cli(capsys, "kl-cov", "--s", "0.5", "--N", "1024")
    row = csv_rows(out)[0]
    assert code == 0 and float(row["covariance"]) == pytest.approx(1 / math.pi ** 2, rel=0.01)
    code, out, _ = run_cli(capsys, "slp-fluct", "--x", "0.5", "--N", "30")
    row = csv_rows(out)[0]
    assert code == 0 and float(row["rescaled_error"]) == pytest.approx(float(row["limit"]), rel=0.1)


def test_figure1_columns_and_grid(capsys):
    code, out, _ = run_cli(capsys, "figure1", "--N", "20", "--points", "16")
    assert code == 0
    rows = csv_rows(out)
    assert list(rows[0]) == ["x", "rescaled_error_N20", "limit_curve"]
    xs = [float(r["x"]) for r in rows]
    assert len(xs) == 16 and all(0 < x < 1 for x in xs)
    assert xs == sorted(xs)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "greentail", "limit", "--family", "hermite", "--x", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert csv_rows(proc.stdout)[0]["limit"] == repr(1 / (math.sqrt(2) * math.pi))
