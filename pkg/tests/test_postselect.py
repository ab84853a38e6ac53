import numpy as np
import pytest

from postlab.circuits import Gate, PostselectedCircuit, apply_circuit, distribution_of
from postlab.postselect import (
    ConditionalResult,
    UndefinedConditionalError,
    drop_bits,
    event_mass,
    merge_postselections,
    postselect,
)
from postlab.states import QuantumState


def test_uniform_conditional():
    dist = {"00": 0.25, "01": 0.25, "10": 0.25, "11": 0.25}
    res = postselect(dist, [(0, 1)])
    assert isinstance(res, ConditionalResult)
    assert res.success_prob == pytest.approx(0.5, abs=1e-12)
    # the conditioned position disappears from the keys
    assert res.conditional == pytest.approx({"0": 0.5, "1": 0.5})


def test_two_bit_conditioning():
    dist = {"000": 0.1, "011": 0.2, "110": 0.3, "111": 0.4}
    res = postselect(dist, [(0, 1), (2, 1)])
    assert res.success_prob == pytest.approx(0.4, abs=1e-12)
    assert res.conditional == pytest.approx({"1": 1.0})


def test_zero_mass_event_is_undefined():
    with pytest.raises(UndefinedConditionalError):
        postselect({"00": 0.5, "01": 0.5}, [(0, 1)])


def test_empty_conditions_rejected():
    with pytest.raises(ValueError):
        postselect({"0": 1.0}, [])


def test_distribution_must_be_normalized():
    with pytest.raises(ValueError):
        postselect({"0": 0.4, "1": 0.4}, [(0, 1)])


def test_event_mass_matches_direct_sum():
    rng = np.random.default_rng(21)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        weights = rng.random(1 << n)
        weights /= weights.sum()
        dist = {format(i, f"0{n}b"): float(w) for i, w in enumerate(weights)}
        q = int(rng.integers(0, n))
        bit = int(rng.integers(0, 2))
        direct = sum(w for z, w in dist.items() if z[q] == str(bit))
        assert event_mass(dist, [(q, bit)]) == pytest.approx(direct, abs=1e-12)


def test_conditional_renormalizes():
    rng = np.random.default_rng(22)
    for _ in range(10):
        weights = rng.random(8)
        weights /= weights.sum()
        dist = {format(i, "03b"): float(w) for i, w in enumerate(weights)}
        res = postselect(dist, [(1, 0)])
        assert sum(res.conditional.values()) == pytest.approx(1.0, abs=1e-12)


def test_drop_bits_aggregates():
    dist = {"00": 0.1, "01": 0.2, "10": 0.3, "11": 0.4}
    assert drop_bits(dist, [1]) == pytest.approx({"0": 0.3, "1": 0.7})
    assert drop_bits(dist, [0, 1]) == pytest.approx({"": 1.0})


def test_merge_structure():
    circuit = PostselectedCircuit(
        2, [Gate("H", (0,)), Gate("H", (1,))], postselect=[(0, 1), (1, 1)]
    )
    merged = merge_postselections(circuit)
    assert merged.n_qubits == 3
    assert merged.postselect == [(2, 1)]
    assert merged.gates[-1] == Gate("TOFFOLI", (0, 1, 2))
    assert merged.gates[:-1] == circuit.gates


def test_merge_preserves_conditionals():
    circuit = PostselectedCircuit(
        3,
        [Gate("H", (0,)), Gate("CNOT", (0, 2)), Gate("H", (1,))],
        output=2,
        postselect=[(0, 1), (1, 1)],
    )
    dist = distribution_of(apply_circuit(circuit, QuantumState.zero(3)))
    two = postselect(dist, circuit.postselect)
    merged = merge_postselections(circuit)
    mdist = distribution_of(apply_circuit(merged, QuantumState.zero(4)))
    one = postselect(mdist, merged.postselect)
    assert one.success_prob == pytest.approx(two.success_prob, abs=1e-12)
    # the retained register bits are pinned to 1 after the AND
    reduced = drop_bits(one.conditional, [0, 1])
    assert reduced == pytest.approx(two.conditional, abs=1e-12)


def test_merge_requires_two_one_valued_registers():
    with pytest.raises(ValueError):
        merge_postselections(PostselectedCircuit(2, [Gate("H", (0,))],
                                                 postselect=[(0, 1)]))
    with pytest.raises(ValueError):
        merge_postselections(PostselectedCircuit(
            2, [Gate("H", (0,))], postselect=[(0, 1), (1, 0)]))
