"""Postselection as exact conditional probability over outcome tables."""

from __future__ import annotations

from dataclasses import dataclass

from .circuits import Gate, PostselectedCircuit

DIST_SUM_ATOL = 1e-10


class UndefinedConditionalError(ValueError):
    """Conditioning on an event of probability zero.

    Signals a violated postselection floor: the conditional distribution
    does not exist and no renormalization is possible.
    """


@dataclass
class ConditionalResult:
    success_prob: float
    conditional: dict[str, float]


def _check_conditions(conditions, width: int):
    if not conditions:
        raise ValueError("need at least one (qubit, bit) condition")
    seen = set()
    for pos, bit in conditions:
        if not 0 <= pos < width:
            raise ValueError(f"condition position {pos} out of range for width {width}")
        if bit not in (0, 1):
            raise ValueError(f"condition bit must be 0 or 1, got {bit}")
        if pos in seen:
            raise ValueError(f"position {pos} conditioned twice")
        seen.add(pos)


def postselect(distribution: dict[str, float], conditions) -> ConditionalResult:
    """Filter a normalized outcome table on bit conditions and renormalize.

    `conditions` is an iterable of (bit position, required bit).  The
    conditioned positions are removed from the keys of the returned
    table.  Raises UndefinedConditionalError when no probability mass
    survives the filter.
    """
    conditions = list(conditions)
    if not distribution:
        raise ValueError("empty distribution")
    width = len(next(iter(distribution)))
    _check_conditions(conditions, width)
    total = sum(distribution.values())
    if abs(total - 1.0) > DIST_SUM_ATOL:
        raise ValueError(f"distribution sums to {total!r}, expected 1")
    positions = {pos for pos, _ in conditions}
    success = 0.0
    kept: dict[str, float] = {}
    for key, prob in distribution.items():
        if len(key) != width:
            raise ValueError(f"ragged outcome key {key!r}")
        if all(key[pos] == str(bit) for pos, bit in conditions):
            success += prob
            short = "".join(ch for i, ch in enumerate(key) if i not in positions)
            kept[short] = kept.get(short, 0.0) + prob
    if success <= 0.0:
        raise UndefinedConditionalError(
            f"conditions {conditions} have zero probability mass"
        )
    conditional = {key: prob / success for key, prob in kept.items()}
    return ConditionalResult(success_prob=success, conditional=conditional)


def event_mass(distribution: dict[str, float], conditions) -> float:
    """Total probability of the outcomes matching all bit conditions."""
    conditions = list(conditions)
    if not distribution:
        return 0.0
    width = len(next(iter(distribution)))
    _check_conditions(conditions, width)
    return sum(
        prob for key, prob in distribution.items()
        if all(key[pos] == str(bit) for pos, bit in conditions)
    )


def drop_bits(distribution: dict[str, float], positions) -> dict[str, float]:
    """Marginalize out the given bit positions of an outcome table."""
    positions = set(positions)
    out: dict[str, float] = {}
    for key, prob in distribution.items():
        short = "".join(ch for i, ch in enumerate(key) if i not in positions)
        out[short] = out.get(short, 0.0) + prob
    return out


def merge_postselections(circuit: PostselectedCircuit) -> PostselectedCircuit:
    """Fold two postselection registers into one fresh ancilla via TOFFOLI.

    The circuit must carry exactly two postselection conditions, both
    requiring bit 1.  The returned circuit has one extra qubit (the new
    ancilla, appended last, to be fed |0>), a trailing TOFFOLI from the
    two old registers onto it, and a single postselection on the ancilla.
    Conditioning the new circuit on ancilla=1 reproduces the doubly
    conditioned original exactly.
    """
    if len(circuit.postselect) != 2:
        raise ValueError(
            f"merge needs exactly two postselection registers, got {len(circuit.postselect)}"
        )
    (q1, b1), (q2, b2) = circuit.postselect
    if b1 != 1 or b2 != 1:
        raise ValueError("merge requires both postselection bits to be 1; "
                         "conjugate a 0-condition with X gates first")
    ancilla = circuit.n_qubits
    gates = list(circuit.gates) + [Gate("TOFFOLI", (q1, q2, ancilla))]
    return PostselectedCircuit(
        n_qubits=circuit.n_qubits + 1,
        gates=gates,
        output=circuit.output,
        postselect=[(ancilla, 1)],
    )
