"""Acceptance gate: every battery criterion gets its own pass/fail test.

Run with -v to see one line per criterion.  The battery itself is
executed once per session; the final test replays the whole suite twice
through the command line and byte-compares the written artifacts.
"""

import subprocess
import sys
from pathlib import Path

import pytest

from postlab.acceptance import run_battery

BATTERY = run_battery(seed=0)
BY_INDEX = {res.index: res for res in BATTERY.results}


def _check(index):
    res = BY_INDEX[index]
    assert res.passed, f"criterion {index:02d} {res.name}: {res.summary}"


def test_criterion_01_spectral_oracle():
    _check(1)


def test_criterion_02_scale_shift_law():
    _check(2)


def test_criterion_03_acceptance_affine_law():
    _check(3)


def test_criterion_04_decision_thresholds():
    _check(4)


def test_criterion_05_fidelity_propagation():
    _check(5)


def test_criterion_06_verdict_chains():
    _check(6)


def test_criterion_07_envelope_optimizer():
    _check(7)


def test_criterion_08_postselection_merge():
    _check(8)


def test_criterion_09_negative_controls():
    _check(9)


def test_criterion_10_determinism():
    _check(10)


def test_battery_report_rows_match_results():
    report = BATTERY.report()
    criterion_rows = [r for r in report.rows if r.name.startswith("criterion")]
    assert len(criterion_rows) == 10
    assert all(r.passed for r in criterion_rows) == BATTERY.passed


def test_suite_cli_twice_is_byte_identical(tmp_path):
    outs = []
    for tag in ("one", "two"):
        out = tmp_path / tag
        res = subprocess.run(
            [sys.executable, "-m", "postlab", "suite", "--seed", "7",
             "--out", str(out)],
            capture_output=True, text=True, timeout=600)
        assert res.returncode == 0, res.stdout + res.stderr
        assert res.stdout.count("[PASS]") == 10
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
