import numpy as np
import pytest

from postlab.theorem2 import (
    envelope_optimize,
    subset_check,
    theorem2_verdict,
    vertex_optimize,
)

WORKED_P = {"11": 0.3, "01": 0.3, "00": 0.4}


def _random_problem(rng):
    support = int(rng.integers(2, 9))
    length = int(rng.integers(3, 7))
    picks = rng.choice(1 << length, size=support, replace=False)
    keys = [format(int(x), f"0{length}b") for x in sorted(picks)]
    weights = rng.random(support) + 1e-3
    p = {z: float(w / weights.sum()) for z, w in zip(keys, weights)}
    c = float(1.0 + rng.uniform(0.0, 0.4))
    den_mask = rng.random(support) < 0.7
    if not den_mask.any():
        den_mask[0] = True
    den = {z for z, m in zip(keys, den_mask) if m}
    num = {z for z in den if rng.random() < 0.5}
    return p, c, num, den


def test_worked_minimum():
    sol = envelope_optimize(WORKED_P, 1.1, {"11"}, {"11", "01"}, "min")
    assert sol.value == pytest.approx(100.0 / 221.0, abs=1e-12)
    # the optimum squeezes the numerator and inflates the rest of the
    # conditioning event
    assert sol.q["11"] == pytest.approx(0.3 / 1.1, abs=1e-12)
    assert sol.q["01"] == pytest.approx(0.3 * 1.1, abs=1e-12)
    assert sol.q["00"] == pytest.approx(1.0 - 0.3 / 1.1 - 0.33, abs=1e-12)
    assert sum(sol.q.values()) == pytest.approx(1.0, abs=1e-12)


def test_worked_maximum_mirrors():
    sol = envelope_optimize(WORKED_P, 1.1, {"11"}, {"11", "01"}, "max")
    base = 0.5
    assert sol.value > base
    assert sol.value <= base * 1.1**2 + 1e-12


def test_identity_objectives():
    # numerator equal to denominator pins the ratio at one
    sol = envelope_optimize(WORKED_P, 1.3, {"11", "01"}, {"11", "01"}, "min")
    assert sol.value == pytest.approx(1.0, abs=1e-12)
    # empty numerator pins it at zero
    sol = envelope_optimize(WORKED_P, 1.3, set(), {"11", "01"}, "max")
    assert sol.value == pytest.approx(0.0, abs=1e-12)


def test_c_equal_one_freezes_the_distribution():
    sol = envelope_optimize(WORKED_P, 1.0, {"11"}, {"11", "01"}, "min")
    assert sol.value == pytest.approx(0.5, abs=1e-12)
    for z, w in WORKED_P.items():
        assert sol.q[z] == pytest.approx(w, abs=1e-12)


def test_parametric_agrees_with_vertex_enumeration():
    rng = np.random.default_rng(55)
    worst = 0.0
    for _ in range(10):
        p, c, num, den = _random_problem(rng)
        for sense in ("min", "max"):
            a = envelope_optimize(p, c, num, den, sense)
            b = vertex_optimize(p, c, num, den, sense)
            worst = max(worst, abs(a.value - b.value))
    assert worst <= 1e-9


def test_sandwich_inequality():
    rng = np.random.default_rng(56)
    for _ in range(10):
        p, c, num, den = _random_problem(rng)
        base = sum(p[z] for z in num) / sum(p[z] for z in den)
        lo = envelope_optimize(p, c, num, den, "min").value
        hi = envelope_optimize(p, c, num, den, "max").value
        assert lo >= base / c**2 - 1e-12
        assert hi <= base * c**2 + 1e-12
        assert lo <= base + 1e-12 <= hi + 2e-12


def test_subset_check_accepts_optimizer_output():
    rng = np.random.default_rng(57)
    p, c, num, den = _random_problem(rng)
    sol = envelope_optimize(p, c, num, den, "min")
    res = subset_check(p, sol.q, c, num_subsets=100, seed=1)
    assert res.passed
    assert res.checked >= 100


def test_subset_check_catches_broken_envelope():
    q = dict(WORKED_P)
    z_star = "00"
    q[z_star] = 1.5 * 1.1 * WORKED_P[z_star]
    total = sum(q.values())
    q = {z: w / total for z, w in q.items()}
    res = subset_check(WORKED_P, q, 1.1, num_subsets=100, seed=2)
    assert not res.passed
    assert res.failures


def test_input_validation():
    with pytest.raises(ValueError):
        envelope_optimize(WORKED_P, 0.9, {"11"}, {"11", "01"}, "min")
    with pytest.raises(ValueError):
        envelope_optimize(WORKED_P, 1.1, {"10"}, {"11", "01"}, "min")
    with pytest.raises(ValueError):
        envelope_optimize(WORKED_P, 1.1, {"11"}, {"11", "10"}, "min")
    with pytest.raises(ValueError):
        envelope_optimize({"0": 0.4, "1": 0.4}, 1.1, {"0"}, {"0", "1"}, "min")
    with pytest.raises(ValueError):
        envelope_optimize(WORKED_P, 1.1, {"11"}, {"11", "01"}, "argmin")


def test_verdict_closed_forms():
    yes = theorem2_verdict("YES", 1.2, 0.3, 1, 0.8, 0.56)
    assert yes.in_regime
    assert yes.closed_form == pytest.approx(5.0 / 9.0, abs=1e-12)
    assert yes.target == 0.5
    assert yes.bound_ok and yes.precondition_ok and yes.sandwich_ok
    no = theorem2_verdict("NO", 1.2, 0.3, 1, 0.2, 0.30)
    assert no.closed_form == pytest.approx(0.288, abs=1e-12)
    assert no.target == pytest.approx(0.32, abs=1e-12)
    assert no.bound_ok


def test_verdict_regime_boundary_and_escape():
    boundary = theorem2_verdict("YES", np.sqrt(1.2), 0.1, 1, 0.6, 0.55)
    assert boundary.boundary
    out = theorem2_verdict("YES", 1.3, 0.3, 1, 0.8, 0.56)
    assert not out.in_regime
    assert out.bound_ok  # outside the regime the bound is not judged
    assert out.suggested_copies == 3
    hopeless = theorem2_verdict("YES", 1.5, 0.05, 1, 0.56, 0.5)
    assert hopeless.suggested_copies is None


def test_verdict_flags_gap_violation():
    bad = theorem2_verdict("YES", 1.05, 0.3, 1, 0.6, 0.58)
    assert not bad.precondition_ok
