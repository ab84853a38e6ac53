import numpy as np
import pytest

from postlab.experiments import SweepRunner
from postlab.hamiltonians import parse_hamiltonian, ground
from postlab.states import QuantumState, fidelity, tensor_power
from postlab.theorem1 import (
    approx_state,
    build_synthetic_verifier,
    check_propagation,
    fidelity_schedule,
    no_upper_bound,
    perturbation_directions,
    run_pair,
    theorem1_verdict,
    yes_lower_bound,
)

TINY = "#qubits 1\n-1.0 Z@0\n"
I1_TEXT = "#qubits 2\n-1.0 Z@0 Z@1\n-0.5 X@0\n0.25 Z@1\n"


def test_fidelity_schedule_values():
    assert fidelity_schedule(1, 1) == pytest.approx(0.9375, abs=1e-15)
    assert fidelity_schedule(2, 2) == pytest.approx(np.sqrt(255.0 / 256.0), abs=1e-15)
    assert fidelity_schedule(1, 1, kappa=0.5) == pytest.approx(0.96875, abs=1e-15)


def test_bound_formulas_frozen():
    assert yes_lower_bound(0.2, 2, 2.0**-8) == pytest.approx(2.0 / 15.0, abs=1e-12)
    assert yes_lower_bound(0.2, 1, 2.0**-4) == pytest.approx(-0.15, abs=1e-12)
    assert no_upper_bound(0.2, 2, 2.0**-8) == pytest.approx(1.6, abs=1e-12)
    assert no_upper_bound(0.2, 1, 2.0**-4) is None
    assert yes_lower_bound(0.2, 2, 0.0) == pytest.approx(0.7, abs=1e-15)


def test_approx_state_hits_requested_fidelity():
    h = parse_hamiltonian(I1_TEXT)
    spectral = ground(h)
    g = spectral.ground_state
    directions = perturbation_directions(spectral, 5, seed=0)
    for f in (1.0, 0.9, 0.5, 0.0):
        for _, d in directions:
            for mode in ("pure", "mixed"):
                state = approx_state(g, f, d, mode)
                assert fidelity(state, g) == pytest.approx(f, abs=1e-12)


def test_approx_state_rejects_non_orthogonal_direction():
    h = parse_hamiltonian(I1_TEXT)
    g = ground(h).ground_state
    with pytest.raises(ValueError):
        approx_state(g, 0.9, g, "pure")


def test_perturbation_directions_orthogonal_and_seeded():
    h = parse_hamiltonian(I1_TEXT)
    spectral = ground(h)
    dirs = perturbation_directions(spectral, 8, seed=3)
    assert len(dirs) == 8
    names = [name for name, _ in dirs]
    assert names[:3] == ["eig1", "eig2", "eig3"]
    assert all(name.startswith("rnd") for name in names[3:])
    g = spectral.ground_state.vector
    for _, d in dirs:
        assert abs(np.vdot(g, d.vector)) <= 1e-10
    again = perturbation_directions(spectral, 8, seed=3)
    for (_, a), (_, b) in zip(dirs, again):
        np.testing.assert_allclose(a.vector, b.vector, atol=0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_success_probability_is_exactly_two_to_minus_k(k):
    h = parse_hamiltonian(TINY)
    sv = build_synthetic_verifier(h, 1.0, 1, k)
    rng = np.random.default_rng(40 + k)
    for _ in range(4):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        witness = QuantumState.pure(v / np.linalg.norm(v))
        dist = sv.run(witness)
        conditions = sv.postselect_conditions(merged=True)
        mass = sum(w for z, w in dist.items()
                   if all(z[q] == str(bit) for q, bit in conditions))
        assert mass == pytest.approx(2.0**-k, abs=1e-12)


def test_merged_and_two_register_runs_agree():
    h = parse_hamiltonian(TINY)
    sv = build_synthetic_verifier(h, 1.0, 1, 2)
    g = ground(h).ground_state
    merged = sv.run(g, merged=True)
    two = sv.run(g, merged=False)
    for dist, merged_flag in ((merged, True), (two, False)):
        conditions = sv.postselect_conditions(merged=merged_flag)
        mass = sum(w for z, w in dist.items()
                   if all(z[q] == str(bit) for q, bit in conditions))
        assert mass == pytest.approx(0.25, abs=1e-12)


def test_run_pair_joint_fidelity_is_power():
    h = parse_hamiltonian(TINY)
    spectral = ground(h)
    sv = build_synthetic_verifier(h, 1.0, 2, 1)
    direction = perturbation_directions(spectral, 1, seed=0)[0][1]
    pair = run_pair(sv, spectral.ground_state, 0.9, direction, "pure")
    assert pair.joint_fidelity == pytest.approx(0.81, abs=1e-12)
    pair = run_pair(sv, spectral.ground_state, 0.9, direction, "mixed")
    assert pair.joint_fidelity == pytest.approx(0.81, abs=1e-12)


def test_propagation_bound_and_witness_independence():
    h = parse_hamiltonian(I1_TEXT)
    spectral = ground(h)
    sv = build_synthetic_verifier(h, 1.0, 1, 1)
    direction = perturbation_directions(spectral, 1, seed=1)[0][1]
    for f in (1.0, 0.9375, 0.75):
        for mode in ("pure", "mixed"):
            pair = run_pair(sv, spectral.ground_state, f, direction, mode)
            prop = check_propagation(pair)
            assert prop.joint_ok and prop.marginal_ok
            assert prop.d_joint <= prop.bound + 1e-12
            assert prop.tighter_bound == pytest.approx(np.sqrt(prop.eps), abs=1e-15)
            # the postselection marginal never reacts to the witness
            assert prop.d_marginal <= 1e-12


def test_theorem1_verdict_yes_and_vacuous_no():
    h = parse_hamiltonian(I1_TEXT)
    spectral = ground(h)
    sv = build_synthetic_verifier(h, 1.0, 1, 1)
    direction = perturbation_directions(spectral, 1, seed=1)[0][1]
    pair = run_pair(sv, spectral.ground_state, 1.0 - 2.0**-8, direction, "pure")
    verdict = theorem1_verdict(pair, 0.25, 1, 0.5, "YES")
    assert verdict.bound_ok
    assert verdict.precondition_ok
    assert verdict.floor_ok
    assert verdict.yes_lower == pytest.approx(
        yes_lower_bound(0.25, 1, 1.0 - pair.joint_fidelity), abs=1e-12)
    # a NO reading of the same run at eps = 2^-4 has no usable upper bound
    pair = run_pair(sv, spectral.ground_state, 0.9375, direction, "pure")
    verdict = theorem1_verdict(pair, 0.25, 1, 0.5, "NO")
    assert verdict.vacuous
    assert verdict.no_upper is None
    assert verdict.bound_ok  # vacuous cells report, never fail


def test_branch_mixing_matches_density_pipeline():
    h = parse_hamiltonian(TINY)
    spectral = ground(h)
    sv = build_synthetic_verifier(h, 1.0, 2, 1)
    g = spectral.ground_state
    direction = perturbation_directions(spectral, 1, seed=2)[0][1]
    runner = SweepRunner(sv, g)
    for f in (1.0, 0.9375, 0.5):
        fast = runner.pair(f, direction, "mixed", "d")
        slow = run_pair(sv, g, f, direction, "mixed")
        assert fast.approx.p_success == pytest.approx(slow.approx.p_success,
                                                      abs=1e-12)
        assert fast.approx.conditional == pytest.approx(slow.approx.conditional,
                                                        abs=1e-12)
        assert fast.joint_fidelity == pytest.approx(slow.joint_fidelity, abs=1e-12)


def test_verdict_input_validation():
    h = parse_hamiltonian(TINY)
    spectral = ground(h)
    sv = build_synthetic_verifier(h, 1.0, 1, 1)
    direction = perturbation_directions(spectral, 1, seed=0)[0][1]
    pair = run_pair(sv, spectral.ground_state, 1.0, direction, "pure")
    with pytest.raises(ValueError):
        theorem1_verdict(pair, 0.6, 1, 0.5, "YES")
    with pytest.raises(ValueError):
        theorem1_verdict(pair, 0.25, 1, 1.5, "YES")
    with pytest.raises(ValueError):
        theorem1_verdict(pair, 0.25, 1, 0.5, "MAYBE")
