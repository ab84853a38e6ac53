import numpy as np
import pytest

from postlab.circuits import apply_unitary, distribution_of
from postlab.hamiltonians import (
    LocalHamiltonian,
    LocalTerm,
    PromiseInstance,
    assemble_scaled,
    ground,
    parse_hamiltonian,
    scale_shift,
)
from postlab.states import QuantumState, tensor
from postlab.verifier import (
    GapParameters,
    TermSamplingMeasurement,
    accept_probability,
    amplify_majority,
    decision_thresholds,
    dilation_unitary,
    dilute,
    diluted_observable,
    verify_instance,
)

I1_TEXT = "#qubits 2\n-1.0 Z@0 Z@1\n-0.5 X@0\n0.25 Z@1\n"


def _random_scaled(rng, n_max=3):
    n = int(rng.integers(1, n_max + 1))
    terms = []
    for _ in range(int(rng.integers(1, 6))):
        k = int(rng.integers(1, min(3, n) + 1))
        qubits = rng.choice(n, size=k, replace=False)
        letters = rng.choice(("X", "Y", "Z"), size=k)
        terms.append(LocalTerm(
            float(rng.uniform(-1.0, 1.0)),
            tuple((str(p), int(q)) for p, q in zip(letters, qubits)),
        ))
    return scale_shift(LocalHamiltonian(n, terms))


def test_gap_parameters():
    gp = GapParameters(term_count=3, b=1.0)
    assert gp.b_prime == pytest.approx(1.0 / 6.0, abs=1e-15)
    with pytest.raises(ValueError):
        GapParameters(term_count=3, b=0.0)
    with pytest.raises(ValueError):
        GapParameters(term_count=3, b=6.5)  # above 2t


def test_threshold_eps_values():
    # b'/(6(1+b')) at the two extremes used in the writeups
    assert GapParameters(term_count=1, b=2.0).threshold_eps == pytest.approx(
        1.0 / 12.0, abs=1e-15)
    assert GapParameters(term_count=1, b=1.0).threshold_eps == pytest.approx(
        1.0 / 18.0, abs=1e-15)


def test_accept_probability_affine_in_energy():
    h = parse_hamiltonian(I1_TEXT)
    scaled = scale_shift(h)
    g = ground(h).ground_state
    expected = 1.0 - (ground(h).ground_energy + 3.0) / 2.0 / 3.0
    assert accept_probability(scaled, g) == pytest.approx(expected, abs=1e-12)
    assert accept_probability(scaled, g) == pytest.approx(0.7280056647916492,
                                                          abs=1e-12)


def test_dilute_worked_values():
    assert dilute(0.75, 0.5) == pytest.approx(5.0 / 6.0, abs=1e-15)
    assert dilute(0.0, 0.5) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert dilute(1.0, 0.25) == pytest.approx(1.0, abs=1e-15)


def test_decision_thresholds_at_unit_b_prime():
    gp = GapParameters(term_count=1, b=2.0)
    yes_floor, no_ceiling = decision_thresholds(gp)
    assert yes_floor == pytest.approx(7.0 / 12.0, abs=1e-15)
    assert no_ceiling == pytest.approx(5.0 / 12.0, abs=1e-15)


def test_amplify_majority():
    assert amplify_majority(0.6, 1) == pytest.approx(0.6, abs=1e-15)
    assert amplify_majority(0.6, 3) == pytest.approx(0.648, abs=1e-12)
    previous = 0.5
    for copies in (1, 3, 5, 7):
        boosted = amplify_majority(0.6, copies)
        assert boosted >= previous - 1e-15
        previous = boosted
    with pytest.raises(ValueError):
        amplify_majority(0.6, 2)


def test_sampling_channel_matches_direct():
    rng = np.random.default_rng(31)
    worst = 0.0
    for i in range(25):
        scaled = _random_scaled(rng)
        n = scaled.n_qubits
        if i % 2 == 0:
            v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
            state = QuantumState.pure(v / np.linalg.norm(v))
        else:
            a = rng.standard_normal((1 << n, 2)) + 1j * rng.standard_normal((1 << n, 2))
            rho = a @ a.conj().T
            state = QuantumState.mixed(rho / np.trace(rho).real)
        direct = accept_probability(scaled, state)
        channel = TermSamplingMeasurement(scaled).accept_prob(state)
        worst = max(worst, abs(direct - channel))
    assert worst <= 1e-10


def test_diluted_observable_formula():
    h = parse_hamiltonian(I1_TEXT)
    scaled = scale_shift(h)
    b_prime = 0.25
    a = diluted_observable(scaled, b_prime)
    t = 3.0
    dense = (b_prime * np.eye(4) + (np.eye(4) - assemble_scaled(scaled) / t)) / (
        1.0 + b_prime)
    np.testing.assert_allclose(a, dense, atol=1e-12)
    evals = np.linalg.eigvalsh(a)
    assert evals[0] >= -1e-12
    assert evals[-1] <= 1.0 + 1e-12


def test_dilation_realizes_the_observable():
    rng = np.random.default_rng(33)
    h = parse_hamiltonian(I1_TEXT)
    a = diluted_observable(scale_shift(h), 1.0 / 6.0)
    u = dilation_unitary(a)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
    for _ in range(5):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi = QuantumState.pure(v / np.linalg.norm(v))
        expected = float(np.real(np.vdot(psi.vector, a @ psi.vector)))
        # fresh flag qubit appended least significant
        full = apply_unitary(tensor(psi, QuantumState.zero(1)), u, (0, 1, 2))
        got = sum(w for z, w in distribution_of(full).items() if z[2] == "1")
        assert got == pytest.approx(expected, abs=1e-12)


def test_verify_yes_and_no_instances():
    h = parse_hamiltonian(I1_TEXT)
    inst = PromiseInstance(h, 0.0, 1.0)
    ver = verify_instance(inst, ground(h).ground_state)
    assert ver.label == "YES"
    assert ver.verdict == "YES"
    assert ver.witness_diluted == pytest.approx(0.7668619983928422, abs=1e-12)
    b_prime = ver.gap.b_prime
    assert ver.margin >= b_prime / (3.0 * (1.0 + b_prime)) - 1e-10

    no_h = parse_hamiltonian("#qubits 1\n1.0 I\n1.0 I\n")  # spectrum pinned at 2
    no_inst = PromiseInstance(no_h, 0.0, 2.0)
    ver = verify_instance(no_inst, ground(no_h).ground_state)
    assert ver.label == "NO"
    assert ver.verdict == "NO"
    assert ver.margin == pytest.approx(1.0 / 9.0, abs=1e-12)


def test_verify_rejects_unusable_promises():
    h = parse_hamiltonian(I1_TEXT)
    with pytest.raises(ValueError):
        verify_instance(PromiseInstance(h, -0.1, 1.0), ground(h).ground_state)
    outside = parse_hamiltonian("#qubits 1\n1.0 I\n0.5 Z@0\n")  # ground 0.5
    with pytest.raises(ValueError):
        verify_instance(PromiseInstance(outside, 0.0, 1.0),
                        ground(outside).ground_state)
