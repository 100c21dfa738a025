import json
import pathlib
import subprocess
import sys

import pytest

from golden_manifest import GOLDEN_RUNS

HERE = pathlib.Path(__file__).parent
GOLDEN = HERE / "golden"


def run_cli(*argv, **kwargs):
    return subprocess.run([sys.executable, "-m", "choqint", *argv],
                          capture_output=True, text=True, **kwargs)


@pytest.mark.parametrize("name,argv,expected_exit", GOLDEN_RUNS,
                         ids=[row[0] for row in GOLDEN_RUNS])
def test_golden_outputs_are_byte_identical(name, argv, expected_exit):
    proc = run_cli(*argv)
    assert proc.returncode == expected_exit, proc.stderr
    assert proc.stdout == (GOLDEN / name).read_text(encoding="utf-8")


def test_committed_goldens_match_closed_forms():
    # byte comparison alone could freeze a wrong number; re-derive the values
    def rows_of(name):
        lines = (GOLDEN / name).read_text().splitlines()[1:]
        return [tuple(float(c) for c in line.split(",")[:2]) for line in lines]

    for t, value in rows_of("integrate_sqrt.csv"):
        assert value == pytest.approx(4.0 / 15.0 * (t - 1.0) ** 2.5, rel=1e-7, abs=1e-9)
    for t, value in rows_of("derive_power35.csv"):
        assert value == pytest.approx(35.0 / 4.0 * (t - 1.0) ** 1.5, rel=1e-3)
    for u, value in rows_of("identify_power55.csv"):
        assert value == pytest.approx(693.0 / 256.0 * u ** 5, rel=1e-3)


def test_repeated_runs_are_deterministic():
    argv = ["derive", "--f", "pow(t-1,3.5)", "--m", "t^2/2", "--a", "1",
            "--t", "1.1:3:10", "--format", "json"]
    first = run_cli(*argv)
    second = run_cli(*argv)
    assert first.stdout == second.stdout


class TestExitCodes:
    def test_expression_error_is_2(self):
        proc = run_cli("integrate", "--g", "sqrt(t-", "--m", "t", "--a", "0",
                       "--t", "0:1:3")
        assert proc.returncode == 2
        assert "expression error" in proc.stderr

    def test_negative_integrand_is_3(self):
        proc = run_cli("integrate", "--g", "t", "--m", "t", "--a", "-1",
                       "--t", "-1:1:5")
        assert proc.returncode == 3
        assert "inadmissible" in proc.stderr

    def test_bad_distortion_is_3(self):
        proc = run_cli("integrate", "--g", "t", "--m", "t+1", "--a", "0",
                       "--t", "0:1:3")
        assert proc.returncode == 3

    def test_f_not_zero_at_origin_is_3(self):
        proc = run_cli("derive", "--f", "t", "--m", "t^2/2", "--a", "1",
                       "--t", "1.1:2:4")
        assert proc.returncode == 3

    def test_numerical_failure_is_4(self):
        proc = run_cli("derive", "--f", "exp(2*t)-1", "--m", "t^2/2", "--a", "0",
                       "--t", "0.5:5:6")
        assert proc.returncode == 4
        assert "numerical failure" in proc.stderr

    def test_no_derivative_is_5(self):
        proc = run_cli("derive", "--f", "sqrt(t-1)", "--m", "t^2/2", "--a", "1",
                       "--t", "1.1:3:10")
        assert proc.returncode == 5

    def test_verify_gap_breach_is_6(self):
        proc = run_cli("verify", "--g", "sqrt(t-1)", "--m", "t^2/2", "--a", "1",
                       "--t", "1:3:5", "--route-tol", "1e-18")
        assert proc.returncode == 6

    def test_usage_error_is_2(self):
        proc = run_cli("integrate", "--g", "t", "--m", "t", "--a", "0",
                       "--t", "0:1:1")
        assert proc.returncode == 2

    def test_grid_before_origin_is_2(self):
        proc = run_cli("integrate", "--g", "sqrt(t-1)", "--m", "t", "--a", "1",
                       "--t", "0:2:4")
        assert proc.returncode == 2
        assert "usage error" in proc.stderr


class TestOutputs:
    def test_output_file(self, tmp_path):
        target = tmp_path / "out.csv"
        proc = run_cli("integrate", "--g", "0", "--m", "t", "--a", "0",
                       "--t", "0:1:3", "--output", str(target))
        assert proc.returncode == 0
        assert proc.stdout == ""
        lines = target.read_text().splitlines()
        assert lines[0] == "t,value"
        assert lines[1:] == ["0,0", "0.5,0", "1,0"]

    def test_integrate_with_verify_columns(self):
        proc = run_cli("integrate", "--g", "sqrt(t-1)", "--m", "t^2/2",
                       "--a", "1", "--t", "1:3:5", "--verify")
        header = proc.stdout.splitlines()[0]
        assert header == "t,value,oracle_value,gap"

    def test_json_report_shape(self):
        proc = run_cli("derive", "--f", "pow(t-1,3.5)", "--m", "t^2/2",
                       "--a", "1", "--t", "1.1:3:10", "--format", "json")
        data = json.loads(proc.stdout)
        assert list(data.keys()) == ["command", "inputs", "columns", "results",
                                     "certificate", "residual", "verdict"]
        assert data["verdict"] == "Exists"
        assert data["certificate"]["monotone"] is True
        assert data["inputs"]["stehfest_terms"] == 16
        assert len(data["results"]) == 10

    def test_verify_reports_property_gaps(self):
        proc = run_cli("verify", "--g", "sqrt(t-1)", "--m", "t^2/2", "--a", "1",
                       "--t", "1:3:5", "--format", "json")
        data = json.loads(proc.stdout)
        props = data["properties"]
        assert props["max_level_set_gap"] <= 1e-5
        assert props["max_general_gap"] <= 1e-5
        assert props["hereditary_gap"] <= 1e-6
        assert props["max_shift_gap"] <= 1e-10
        assert data["verdict"] == "Pass"

    def test_integrate_example_row(self):
        # the t = 2 row of the worked square-root example
        proc = run_cli("integrate", "--g", "sqrt(t-1)", "--m", "t^2/2",
                       "--a", "1", "--t", "1:3:5")
        rows = dict(line.split(",", 1) for line in proc.stdout.splitlines()[1:])
        assert float(rows["2"]) == pytest.approx(4.0 / 15.0, rel=1e-8)

    def test_derive_example_value(self):
        proc = run_cli("derive", "--f", "pow(t-1,3.5)", "--m", "t^2/2",
                       "--a", "1", "--t", "1.1:3:10", "--format", "json")
        data = json.loads(proc.stdout)
        row = min(data["results"], key=lambda r: abs(r["t"] - 2.0))
        want = 35.0 / 4.0 * (row["t"] - 1.0) ** 1.5
        assert row["value"] == pytest.approx(want, rel=1e-3)

    def test_derive_zero_function_exists(self):
        proc = run_cli("derive", "--f", "0", "--m", "t", "--a", "0",
                       "--t", "0.2:2:6", "--format", "json")
        assert proc.returncode == 0
        data = json.loads(proc.stdout)
        assert data["verdict"] == "Exists"
        assert all(row["value"] == 0 for row in data["results"])

    def test_identify_zero_function_inconclusive(self):
        proc = run_cli("identify", "--f", "0", "--g", "t", "--a", "0",
                       "--t", "0.2:2:6", "--format", "json")
        assert proc.returncode == 0
        data = json.loads(proc.stdout)
        assert data["verdict"] == "Inconclusive"

    def test_verify_at_origin_shift_gap_is_zero(self):
        proc = run_cli("verify", "--g", "sqrt(t)", "--m", "t^2/2", "--a", "0",
                       "--t", "0:2:5", "--format", "json")
        assert proc.returncode == 0
        data = json.loads(proc.stdout)
        assert data["properties"]["max_shift_gap"] == 0

    def test_identify_outputs_measure_domain_grid(self):
        proc = run_cli("identify", "--f", "pow(t-2,5.5)", "--g", "sqrt(t-2)",
                       "--a", "2", "--t", "2.1:5:10", "--format", "json")
        data = json.loads(proc.stdout)
        ts = [row["t"] for row in data["results"]]
        assert ts[0] == pytest.approx(0.1)
        assert ts[-1] == pytest.approx(3.0)
        row = min(data["results"], key=lambda r: abs(r["t"] - 1.0))
        assert row["value"] == pytest.approx(693.0 / 256.0 * row["t"] ** 5, rel=1e-3)
