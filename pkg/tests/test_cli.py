import csv
import io
import json
import math
import subprocess
import sys

import mpmath
import pytest

from besselzeta.cli import Check, Report, main, run, to_csv, to_json, to_text, verify_suite

SCHEMA = {"inputs", "route", "value", "err_estimate", "checks"}


def call(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def call_json(capsys, *argv):
    status, out, _ = call(capsys, *argv)
    return status, json.loads(out)


def test_zeros_half_integer(capsys):
    status, report = call_json(capsys, "zeros", "--nu", "0.5", "--count", "3")
    assert status == 0
    assert report["value"] == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], rel=1e-15)
    assert set(report) == SCHEMA


def test_det_example(capsys):
    status, report = call_json(capsys, "det", "--nu", "0.5", "--l", "1", "--q", "1")
    assert status == 0
    assert report["value"]["det"] == pytest.approx(2.3504023872876028, rel=1e-15)
    assert report["value"]["overflow"] is False


def test_det_overflow_is_reported(capsys):
    status, report = call_json(capsys, "det", "--nu", "0", "--l", "5", "--q", "1000")
    assert status == 0
    assert report["value"]["det"] is None and report["value"]["overflow"] is True
    assert report["value"]["log_det"] > 4000


def test_rb_poles_example(capsys):
    status, report = call_json(capsys, "poles", "--rb", "--nu", "1", "--a", "1", "--kmax", "1")
    assert status == 0
    assert report["value"]["locations"] == [1.0, -1.0]
    expected = -(1 - 0.25 - math.pi**2) / (2 * math.pi**2)
    assert report["value"]["residues"] == pytest.approx([1.0, expected], rel=1e-14)
    assert report["inputs"]["mode"] == "rb"


def test_rb_poles_with_numeric_checks(capsys):
    status, report = call_json(capsys, "poles", "--a", "0.3", "--nu", "1", "--kmax", "1",
                               "--route", "mellin")
    assert status == 0
    assert len(report["checks"]) == 2 and all(c["pass"] for c in report["checks"])


def test_invariants_all_routes(capsys):
    status, report = call_json(capsys, "invariants", "--nu", "1", "--q", "2", "--l", "1",
                               "--route", "all")
    assert status == 0
    names = {c["name"] for c in report["checks"]}
    assert names == {"deriv0_comparison_vs_closed_form", "deriv0_mellin_vs_closed_form",
                     "value0_mellin_vs_closed_form"}
    assert report["value"]["value0"] == -0.75


def test_zeta_command(capsys):
    status, report = call_json(capsys, "zeta", "--nu", "0.5", "--l", str(math.pi), "--q", "1",
                               "--s", "1", "--route", "all")
    assert status == 0
    ref = (math.pi / math.tanh(math.pi) - 1) / 2
    assert report["value"] == pytest.approx(ref, abs=1e-8)
    assert report["checks"][0]["pass"]


def test_heat_command(capsys):
    status, report = call_json(capsys, "heat", "--nu", "0.5", "--l", str(math.pi), "--q", "1",
                               "--route", "all")
    assert status == 0
    assert len(report["checks"]) == 3
    status, report = call_json(capsys, "heat", "--nu", "0.5", "--l", str(math.pi), "--q", "0",
                               "--t", "1")
    # sum_n exp(-n^2) = (theta_3(0, 1/e) - 1)/2
    ref = float((mpmath.jtheta(3, 0, mpmath.exp(-1)) - 1) / 2)
    assert report["value"] == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("argv", [
    ["det", "--nu", "-1"],
    ["det", "--l", "0"],
    ["zeros", "--count", "0"],
    ["zeta", "--nu", "1"],
    ["zeta", "--s", "0.5", "--nu", "1"],
    ["det", "--accuracy", "-1"],
])
def test_usage_errors_exit_2(capsys, argv):
    status, out, err = call(capsys, *argv)
    assert status == 2 and out == "" and "error" in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["det", "--output", "xml"], ["det", "--nu", "abc"]])
def test_parser_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_numeric_failure_exit_1(capsys, monkeypatch):
    from besselzeta import cli
    from besselzeta.errors import NumericError

    def boom(cfg):
        raise NumericError("did not converge")

    monkeypatch.setattr(cli, "_cmd_det", boom)
    status, out, err = call(capsys, "det")
    assert status == 1 and "numeric failure" in err


def test_failed_check_gives_exit_1(capsys, monkeypatch):
    from besselzeta import cli

    report = Report({}, "all", None, None, [Check("x", 1.0, 2.0, 0.5)])
    assert not report.ok
    monkeypatch.setattr(cli, "verify_suite", lambda: report)
    status, out, _ = call(capsys, "verify")
    assert status == 1 and json.loads(out)["checks"][0]["pass"] is False


@pytest.mark.parametrize("argv", [["det"], ["zeros"], ["poles", "--kmax", "2"], ["invariants"],
                                  ["heat"], ["zeta", "--s", "2"]])
def test_json_schema(capsys, argv):
    status, report = call_json(capsys, *argv)
    assert status == 0 and set(report) == SCHEMA
    for c in report["checks"]:
        assert set(c) == {"name", "inputs", "value", "reference", "delta", "tol", "pass"}


def test_seventeen_digits():
    text = to_json({"x": 0.1, "y": [1.0 / 3.0], "z": None, "w": True})
    assert "0.10000000000000001" in text and "0.33333333333333331" in text
    assert json.loads(text) == {"x": 0.1, "y": [1.0 / 3.0], "z": None, "w": True}


@pytest.fixture(scope="module")
def verify_report():
    return verify_suite()


def test_verify_passes(verify_report):
    assert verify_report.ok
    assert verify_report.value == {"passed": 189, "total": 189}


def test_verify_csv_rows(verify_report):
    rows = list(csv.reader(io.StringIO(to_csv(verify_report))))
    assert rows[0] == ["check", "inputs", "value", "reference", "delta", "tol", "pass"]
    assert len(rows) == 190
    assert all(r[-1] == "True" for r in rows[1:])


def test_verify_text(verify_report):
    text = to_text(verify_report)
    assert text.rstrip().endswith("189/189 checks passed")
    assert "FAIL" not in text


def test_verify_is_byte_identical():
    cmd = [sys.executable, "-m", "besselzeta", "verify"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and len(a) > 1000


@pytest.mark.parametrize("output", ["csv", "text"])
def test_other_outputs(output):
    from besselzeta.cli import RunConfig
    from besselzeta.heat_trace import OperatorParams

    status, text = run(RunConfig("det", OperatorParams(0.5, 1.0, 1.0), output=output))
    assert status == 0
    assert "2.3504023872876" in text
