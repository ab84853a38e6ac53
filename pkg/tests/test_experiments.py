from pathlib import Path

import numpy as np
import pytest

from postlab.experiments import (
    ExperimentConfig,
    apply_overrides,
    builtin_instance_names,
    end_to_end,
    fidelity_grid,
    load_config,
    load_instance,
    parse_experiment_config,
)


def test_builtin_instances_present():
    names = builtin_instance_names()
    for expected in ("I1", "I2", "I3", "app_no_b18", "app_no_b14", "app_no_b12"):
        assert expected in names


def test_config_parsing_and_overrides():
    cfg = parse_experiment_config(
        "% sweep setup\ninstance = I2\nm_prime = 1\nk = 2\ndelta = 0.05\n")
    assert cfg.instance == "I2"
    assert cfg.k == 2
    assert cfg.delta == 0.05
    bumped = apply_overrides(cfg, ["k=3", "c=1.2"])
    assert bumped.k == 3
    assert bumped.c == 1.2
    assert cfg.k == 2  # originals are not mutated


def test_config_validation():
    with pytest.raises(ValueError):
        parse_experiment_config("instance = I1\nwibble = 3\n")
    with pytest.raises(ValueError):
        parse_experiment_config("instance = I1\nk = 2\nk = 3\n")
    with pytest.raises(ValueError):
        ExperimentConfig(instance="I1", s=10)  # must be a multiple of 4
    with pytest.raises(ValueError):
        ExperimentConfig(instance="I1", delta=0.5)
    with pytest.raises(ValueError):
        ExperimentConfig(instance="I1", c=0.99)
    with pytest.raises(ValueError):
        ExperimentConfig(instance="I1", inject="sabotage")
    with pytest.raises(ValueError):
        apply_overrides(ExperimentConfig(instance="I1"), ["k"])


def test_fidelity_grid_deduplicates_schedule():
    cfg = ExperimentConfig(instance="I1", k=1, s=12)
    grid = fidelity_grid(cfg)
    names = [name for name, _ in grid]
    values = dict(grid)
    assert names == ["1", "1-2^-4", "1-2^-8", "1-2^-12"]
    assert values["1-2^-4"] == pytest.approx(1.0 - 2.0**-4, abs=1e-15)
    # k=1 schedule lands exactly on the 2^-4 point, so no extra entry
    cfg = ExperimentConfig(instance="I1", k=3, s=8)
    names = [name for name, _ in fidelity_grid(cfg)]
    assert names == ["1", "1-2^-4", "1-2^-8", "schedule"]


def test_load_instance_requires_promise(tmp_path):
    bare = tmp_path / "bare.ham"
    bare.write_text("#qubits 1\n-1.0 Z@0\n")
    with pytest.raises(ValueError):
        load_instance(str(bare))
    with_promise = tmp_path / "ok.ham"
    with_promise.write_text("#qubits 1\n#promise 0 1.0\n-1.0 Z@0\n")
    inst = load_instance(str(with_promise))
    assert inst.name == "ok"
    assert inst.b == 1.0
    with pytest.raises(ValueError):
        load_instance("definitely_not_there")


def test_shipped_configs_load():
    for name in ("I1", "I2", "I3"):
        cfg = load_config(name)
        assert cfg.instance == name
        assert cfg.directions >= 20
        assert cfg.s == 12


def test_end_to_end_shapes_and_meta():
    report = end_to_end(load_config("I1"))
    assert report.passed
    assert len(report.sweep) == 20 * 2 * 4
    meta = report.meta
    assert meta["instance"] == "I1"
    assert meta["label"] == "YES"
    assert meta["n_qubits"] == 2
    assert meta["term_count"] == 3
    assert meta["ground_energy"] == pytest.approx(-1.368033988749895, abs=1e-12)
    assert meta["b_prime"] == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert 0.0 < meta["thm2"]["min_value"] < meta["thm2"]["max_value"] <= 1.0
    names = {r.name.split("[")[0] for r in report.rows}
    assert {"verifier/diluted>=yes_floor", "thm1/propagation", "thm1/yes_lower",
            "thm1/success_floor", "thm2/sandwich_lower", "thm2/subset_envelope",
            "merge/p_success", "merge/conditional"} <= names


def test_end_to_end_no_instance_reports_vacuous_cells():
    report = end_to_end(load_config("I2"))
    assert report.passed
    assert report.meta["label"] == "NO"
    vacuous_rows = [r for r in report.rows
                    if r.name.startswith("thm1/no_upper") and "vacuous" in r.note]
    assert vacuous_rows  # eps = 2^-4 swamps the 2^-2 floor at k = 2
    assert all(r.passed for r in vacuous_rows)


def test_injected_envelope_fails_exactly_one_row():
    cfg = apply_overrides(load_config("I1"), ["inject=envelope"])
    report = end_to_end(cfg)
    assert not report.passed
    failing = [r for r in report.rows if not r.passed]
    assert [r.name for r in failing] == ["thm2/subset_envelope"]


def test_end_to_end_is_deterministic():
    a = end_to_end(load_config("I3"))
    b = end_to_end(load_config("I3"))
    assert [(r.name, r.lhs, r.rhs) for r in a.rows] == \
        [(r.name, r.lhs, r.rhs) for r in b.rows]
    assert [(r.grid, r.direction, r.cond_approx) for r in a.sweep] == \
        [(r.grid, r.direction, r.cond_approx) for r in b.sweep]
