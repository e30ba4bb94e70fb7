"""End-to-end command-line behavior: outputs, exit codes, determinism."""

import json
import os
import subprocess
import sys

import pytest

from omegasg.cli import main

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def op_path(name):
    return os.path.join(DATA, "operators", f"{name}.json")


def vec_path(name):
    return os.path.join(DATA, "vectors", f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCheck:
    def test_backward_shift_fails_with_witness(self, capsys):
        code, out, _ = run(capsys, "check", op_path("backward_shift"), "--json")
        assert code == 1
        payload = json.loads(out)
        assert payload["verdict"] == "fails"
        assert payload["witness"]["weight"] == 1

    def test_b_generates_with_m_table(self, capsys):
        code, out, _ = run(capsys, "check", op_path("nilpotent_B"), "--rows", "1,2,3", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["m_table"] == {"1": 2, "2": 2, "3": 4}

    def test_human_output_not_json(self, capsys):
        code, out, _ = run(capsys, "check", op_path("zero"))
        assert code == 0
        assert "generates" in out
        with pytest.raises(json.JSONDecodeError):
            json.loads(out)

    def test_missing_file_is_usage_error(self, capsys):
        code, _, err = run(capsys, "check", "/nonexistent/op.json")
        assert code == 2
        assert "error" in err


class TestExp:
    def test_spec_example_values(self, capsys):
        code, out, _ = run(
            capsys, "exp", op_path("nilpotent_B"), vec_path("ones"),
            "--t", "2", "--n", "2", "--eps", "1e-12", "--json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["values"] == ["3", "1"]
        assert payload["certified_error"] == "0"

    def test_zero_operator_fixes_vector(self, capsys):
        code, out, _ = run(
            capsys, "exp", op_path("zero"), vec_path("ones"),
            "--t", "5", "--n", "3", "--eps", "1e-9", "--json",
        )
        assert code == 0
        assert json.loads(out)["values"] == ["1", "1", "1"]

    def test_structural_failure_exit_one(self, capsys):
        code, out, _ = run(
            capsys, "exp", op_path("backward_shift"), vec_path("ones"),
            "--t", "1", "--n", "1", "--json",
        )
        assert code == 1
        assert json.loads(out)["verdict"] == "fails"

    def test_negative_t_needs_flag(self, capsys):
        code, _, err = run(
            capsys, "exp", op_path("nilpotent_B"), vec_path("ones"), "--t", "-1",
        )
        assert code == 2 and "allow_negative_t" in err
        code, out, _ = run(
            capsys, "exp", op_path("nilpotent_B"), vec_path("ones"),
            "--t", "-1", "--allow-negative-t", "--json",
        )
        assert code == 0
        assert json.loads(out)["values"][0] == "0"

    def test_float_view(self, capsys):
        code, out, _ = run(
            capsys, "exp", op_path("identity"), vec_path("e1"),
            "--t", "1", "--n", "1", "--eps", "1e-6", "--float", "--json",
        )
        assert code == 0
        shown = json.loads(out)["values"][0]
        assert shown.startswith("2.71828")

    def test_bad_epsilon_usage_error(self, capsys):
        code, _, err = run(
            capsys, "exp", op_path("zero"), vec_path("ones"), "--t", "1", "--eps", "0",
        )
        assert code == 2


class TestCesaro:
    def test_b_closed_form(self, capsys):
        code, out, _ = run(
            capsys, "cesaro", op_path("nilpotent_B"), vec_path("ones"),
            "--t", "2", "--n", "1", "--json",
        )
        assert code == 0
        assert json.loads(out)["values"] == ["2"]

    def test_rejects_zero_t(self, capsys):
        code, _, err = run(
            capsys, "cesaro", op_path("nilpotent_B"), vec_path("ones"), "--t", "0",
        )
        assert code == 2


class TestVerify:
    def test_passes_and_writes_junit(self, capsys, tmp_path):
        junit = str(tmp_path / "report.xml")
        code, out, _ = run(
            capsys, "verify", op_path("A_minus_B"), "--trials", "5",
            "--junit", junit, "--json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"] and payload["failures"] == []
        text = open(junit, encoding="utf-8").read()
        assert "<testsuite" in text and 'failures="0"' in text

    def test_failing_operator_short_circuits(self, capsys):
        code, out, _ = run(capsys, "verify", op_path("backward_shift"), "--json")
        assert code == 1
        assert json.loads(out)["verdict"] == "fails"

    def test_byte_identical_reruns(self, capsys):
        args = ["verify", op_path("nilpotent_B"), "--trials", "3", "--seed", "7", "--json"]
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        assert out1 == out2


class TestCorpus:
    def test_all_entries_pass(self, capsys):
        code, out, _ = run(capsys, "corpus", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"]
        assert {r["id"] for r in payload["entries"]} >= {"backward_shift", "nilpotent_B"}

    def test_single_entry(self, capsys):
        code, out, _ = run(capsys, "corpus", "--id", "smooth_flat_shift")
        assert code == 0
        assert "0.367879441171" in out


class TestProbe:
    def test_witness_exit_one(self, capsys):
        code, out, _ = run(
            capsys, "probe", op_path("backward_shift"),
            "--row", "1", "--m", "5", "--kmax", "10", "--json",
        )
        assert code == 1
        w = json.loads(out)["witness"]
        assert (w["k"], w["column"], w["value"]) == (5, 6, "1")

    def test_absent_exit_zero(self, capsys):
        code, out, _ = run(
            capsys, "probe", op_path("nilpotent_B"),
            "--row", "1", "--m", "2", "--kmax", "30", "--json",
        )
        assert code == 0
        assert json.loads(out)["witness"] is None


class TestErrorsAndCaps:
    def test_malformed_json_line_diagnostics(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"n0": 1,\n  "period": ???}')
        code, _, err = run(capsys, "check", str(bad))
        assert code == 2
        assert "line 2" in err

    def test_schema_error_names_field(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"n0": 1, "period": 1}))
        code, _, err = run(capsys, "check", str(bad))
        assert code == 2
        assert "pattern" in err

    def test_resource_cap_env(self, capsys, monkeypatch):
        monkeypatch.setenv("OMEGA_SG_CAP", "10")
        code, _, err = run(capsys, "check", op_path("forward_shift"), "--rows", "500")
        assert code == 3
        assert "cap" in err.lower()

    def test_bad_cap_env(self, capsys, monkeypatch):
        monkeypatch.setenv("OMEGA_SG_CAP", "lots")
        code, _, err = run(capsys, "check", op_path("zero"))
        assert code == 2

    def test_usage_error(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_console_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "omegasg", "corpus", "--id", "zero"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "PASS" in proc.stdout
