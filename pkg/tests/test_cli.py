import json
import subprocess
import sys
from pathlib import Path

import pytest

from infpset.cli import main

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestRun:
    def test_golden_passes(self, capsys):
        code, out, _ = run(capsys, "run", "--scenario", ROOT / "scenarios/case3b.txt", "--seed", 7)
        assert code == 0
        assert "PASS" in out

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "run", "--scenario", ROOT / "scenarios/missing.txt")
        assert code == 2 and "cannot read" in err

    def test_wrong_assertion(self, capsys):
        code, out, err = run(capsys, "run", "--scenario", FIXTURES / "wrong_assertion.txt")
        assert code == 1
        assert "line 6: assert r1 lacks e" in err
        assert "line 7" not in err

    def test_parse_error_names_line(self, capsys):
        code, _, err = run(capsys, "run", "--scenario", FIXTURES / "malformed.txt")
        assert code == 2 and "line 3" in err

    def test_impossible_event(self, capsys):
        code, _, err = run(capsys, "run", "--scenario", FIXTURES / "impossible.txt")
        assert code == 2 and "line 3" in err

    def test_json_output(self, capsys):
        code, out, _ = run(capsys, "run", "--scenario", ROOT / "scenarios/case1.txt", "--format", "json")
        report = json.loads(out)
        assert code == 0 and report["passed"] and report["scenario"] == "case1"

    def test_bad_fault_policy(self, capsys):
        code, _, err = run(capsys, "run", "--scenario", ROOT / "scenarios/case1.txt", "--p-drop", "1.0")
        assert code == 2 and "p_drop" in err


class TestFuzz:
    def test_example(self, capsys):
        code, out, _ = run(capsys, "fuzz", "--replicas", 5, "--ops", 200, "--seed", 42)
        assert code == 0 and "1/1 runs converged" in out

    @pytest.mark.parametrize(
        "args",
        [("--replicas", 1), ("--ops", -1), ("--universe", 0), ("--p-drop", 1), ("--runs", 0), ("--seed", -3), ("--replicas", "x")],
    )
    def test_validation(self, capsys, args):
        code, _, _ = run(capsys, "fuzz", *args)
        assert code == 2

    def test_same_seed_same_bytes(self, capsys):
        first = run(capsys, "fuzz", "--seed", 9, "--format", "json", "--runs", 2)
        second = run(capsys, "fuzz", "--seed", 9, "--format", "json", "--runs", 2)
        assert first == second
        assert json.loads(first[1])["converged"] == 2

    def test_random_seed_is_reported(self, capsys):
        code, out, _ = run(capsys, "fuzz", "--random-seed", "--ops", 10, "--format", "json")
        assert code == 0
        assert isinstance(json.loads(out)["runs"][0]["params"]["seed"], int)


class TestLaws:
    def test_default_window(self, capsys):
        code, out, _ = run(capsys, "laws", "--elements", 2, "--max-counter", 3)
        assert code == 0
        for name in ("partial-order", "least-upper-bound", "monotonicity", "phase-equivalence"):
            assert f"PASS {name}" in out

    def test_oversized_refused(self, capsys):
        code, _, err = run(capsys, "laws", "--elements", 4, "--max-counter", 6)
        assert code == 2 and "2401" in err

    def test_phase_depth_flag(self, capsys):
        _, out, _ = run(capsys, "laws", "--phase-depth", 2)
        assert "phase-equivalence(depth=2)" in out
        _, out, _ = run(capsys, "laws", "--phase-depth", 0)
        assert "phase-equivalence" not in out
        code, _, _ = run(capsys, "laws", "--phase-depth", 4)
        assert code == 2

    def test_json_and_self_test(self, capsys):
        code, out, _ = run(capsys, "laws", "--self-test", "--format", "json")
        report = json.loads(out)
        assert code == 0
        assert all(r["counterexamples"] == [] for r in report["reports"])
        assert all(r["counterexamples"] for r in report["selfTests"])


class TestMemory:
    def test_example_k10(self, capsys):
        code, out, _ = run(capsys, "memory", "--elements", 1, "--alternations", 10, "--concurrent-adds", 1, "--format", "json")
        assert code == 0
        assert json.loads(out)["rows"][0]["tokens"]["inf-p-set"] == 2

    def test_example_n8(self, capsys):
        _, out, _ = run(capsys, "memory", "--alternations", 1, "--concurrent-adds", 8, "--format", "json")
        tokens = json.loads(out)["rows"][0]["tokens"]
        assert tokens["or-set"] >= 32 and tokens["inf-p-set"] == 2

    def test_zero_elements(self, capsys):
        _, out, _ = run(capsys, "memory", "--elements", 0, "--format", "json")
        assert all(v == 0 for row in json.loads(out)["rows"] for v in row["tokens"].values())

    @pytest.mark.parametrize("args", [("--elements", -1), ("--alternations", "x"), ("--concurrent-adds", "-2"), ("--alternations", "")])
    def test_invalid_spec(self, capsys, args):
        code, _, _ = run(capsys, "memory", *args)
        assert code == 2

    def test_text_table(self, capsys):
        _, out, _ = run(capsys, "memory")
        assert out.count("\n") == 2 + 16


def test_no_subcommand(capsys):
    code, _, _ = run(capsys)
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "infpset", "run", "--scenario", str(ROOT / "scenarios/case1.txt")],
        capture_output=True,
        text=True,
        cwd=ROOT,
    )
    assert proc.returncode == 0, proc.stderr
