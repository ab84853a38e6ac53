import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from postlab.states import (
    QuantumState,
    bit_at,
    bitstring,
    fidelity,
    tensor,
    tensor_power,
)


def test_bitstring_most_significant_first():
    assert bitstring(5, 4) == "0101"
    assert bitstring(0, 3) == "000"
    assert bitstring(7, 3) == "111"
    # qubit 0 owns the leftmost character
    assert bit_at(0b100, 0, 3) == 1
    assert bit_at(0b100, 1, 3) == 0
    assert bit_at(0b001, 2, 3) == 1


def test_bitstring_matches_bit_at():
    for i in range(16):
        s = bitstring(i, 4)
        for q in range(4):
            assert int(s[q]) == bit_at(i, q, 4)


def test_basis_and_zero_constructors():
    z = QuantumState.zero(2)
    assert z.n_qubits == 2
    assert np.allclose(z.vector, [1, 0, 0, 0])
    b = QuantumState.basis(2, "10")
    assert np.allclose(b.vector, [0, 0, 1, 0])


def test_pure_norm_validation():
    with pytest.raises(ValueError):
        QuantumState.pure(np.array([1.0, 1.0]))


def test_mixed_validation_rejects_bad_matrices():
    not_hermitian = np.array([[0.5, 0.3], [0.1, 0.5]], dtype=complex)
    with pytest.raises(ValueError):
        QuantumState.mixed(not_hermitian)
    not_unit_trace = np.eye(2, dtype=complex)
    with pytest.raises(ValueError):
        QuantumState.mixed(not_unit_trace)
    negative = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(ValueError):
        QuantumState.mixed(negative)


def test_fidelity_handcomputed():
    zero = QuantumState.zero(1)
    plus = QuantumState.pure(np.array([1.0, 1.0]) / np.sqrt(2))
    assert fidelity(zero, plus) == pytest.approx(0.5, abs=1e-12)
    rho = QuantumState.mixed(np.diag([0.7, 0.3]).astype(complex))
    assert fidelity(rho, zero) == pytest.approx(0.7, abs=1e-12)


def test_tensor_puts_first_factor_most_significant():
    one = QuantumState.basis(1, "1")
    zero = QuantumState.zero(1)
    assert np.allclose(tensor(one, zero).vector, QuantumState.basis(2, "10").vector)
    assert np.allclose(tensor(zero, one).vector, QuantumState.basis(2, "01").vector)


def test_tensor_power_counts_and_cap():
    plus = QuantumState.pure(np.array([1.0, 1.0]) / np.sqrt(2))
    p3 = tensor_power(plus, 3)
    assert p3.n_qubits == 3
    assert np.allclose(p3.probabilities(), np.full(8, 1.0 / 8.0))
    with pytest.raises(ValueError):
        tensor_power(plus, 25)


def test_density_promotion_keeps_probabilities():
    rng = np.random.default_rng(11)
    for _ in range(5):
        v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        state = QuantumState.pure(v / np.linalg.norm(v))
        np.testing.assert_allclose(
            state.to_density().probabilities(), state.probabilities(), atol=1e-12
        )


@settings(max_examples=25, deadline=None, derandomize=True)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_fidelity_stays_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    a = QuantumState.pure(v / np.linalg.norm(v))
    b = QuantumState.pure(w / np.linalg.norm(w))
    f = fidelity(a, b)
    assert -1e-12 <= f <= 1.0 + 1e-12
    # squared-overlap convention is symmetric for pure inputs
    assert fidelity(b, a) == pytest.approx(f, abs=1e-12)
