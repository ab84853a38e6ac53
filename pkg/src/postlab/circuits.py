"""Gate-level circuits with designated output and postselection registers.

The gate set is fixed: H, S, T, X, CNOT, TOFFOLI.  Multi-qubit gate
matrices list the control qubit(s) first, and qubit 0 is the most
significant bit of a basis index (see states.py).

Text format, one gate per line, ``%`` starts a comment line:

    #qubits 4
    #output 2
    #postselect 3=1
    H 0
    CNOT 0 1
    TOFFOLI 0 1 3
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import QuantumState

_S2 = 1.0 / np.sqrt(2.0)

GATE_MATRICES: dict[str, np.ndarray] = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0],
         [0, 1, 0, 0],
         [0, 0, 0, 1],
         [0, 0, 1, 0]], dtype=complex),
    "TOFFOLI": np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 5, 7, 6]],
}

GATE_ARITY = {name: mat.shape[0].bit_length() - 1 for name, mat in GATE_MATRICES.items()}


class CircuitFormatError(ValueError):
    """Raised on malformed circuit text; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_MATRICES:
            raise ValueError(f"unsupported gate {self.kind!r}")
        if len(self.qubits) != GATE_ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} takes {GATE_ARITY[self.kind]} qubits, got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} qubits must be distinct, got {self.qubits}")
        if min(self.qubits) < 0:
            raise ValueError(f"negative qubit index in {self.qubits}")

    @property
    def matrix(self) -> np.ndarray:
        return GATE_MATRICES[self.kind]


@dataclass
class PostselectedCircuit:
    """A gate list plus an optional output qubit and postselection register(s).

    `postselect` is an ordered list of (qubit, required bit) pairs.  The
    output qubit may not appear among the postselected qubits.
    """

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    output: int | None = None
    postselect: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise ValueError(f"gate {g} exceeds qubit count {self.n_qubits}")
        seen = set()
        for q, bit in self.postselect:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"postselect qubit {q} out of range")
            if bit not in (0, 1):
                raise ValueError(f"postselect bit must be 0 or 1, got {bit}")
            if q in seen:
                raise ValueError(f"qubit {q} postselected twice")
            seen.add(q)
        if self.output is not None:
            if not 0 <= self.output < self.n_qubits:
                raise ValueError(f"output qubit {self.output} out of range")
            if self.output in seen:
                raise ValueError("output qubit may not be postselected")


# ----------------------------------------------------------------------
# unitary application engine


def apply_unitary(state: QuantumState, matrix: np.ndarray, targets: tuple[int, ...]) -> QuantumState:
    """Apply a 2^k x 2^k unitary to the given target qubits, exactly.

    Works for pure and mixed states; the first target is the most
    significant qubit of the operator's index space.
    """
    k = len(targets)
    if matrix.shape != (1 << k, 1 << k):
        raise ValueError(f"operator shape {matrix.shape} does not match {k} targets")
    if len(set(targets)) != k:
        raise ValueError(f"duplicate targets {targets}")
    if not all(0 <= t < state.n_qubits for t in targets):
        raise ValueError(f"targets {targets} out of range for {state.n_qubits} qubits")
    n = state.n_qubits
    op = matrix.reshape((2,) * (2 * k))
    if state.is_pure:
        psi = state.vector.reshape((2,) * n)
        out = np.tensordot(op, psi, axes=(range(k, 2 * k), targets))
        out = np.moveaxis(out, range(k), targets)
        return QuantumState(n, vector=out.reshape(-1), validate=False)
    rho = state.rho.reshape((2,) * (2 * n))
    out = np.tensordot(op, rho, axes=(range(k, 2 * k), targets))
    out = np.moveaxis(out, range(k), targets)
    bra = tuple(n + t for t in targets)
    out = np.tensordot(op.conj(), out, axes=(range(k, 2 * k), bra))
    out = np.moveaxis(out, range(k), bra)
    return QuantumState(n, rho=out.reshape(state.dim, state.dim), validate=False)


def apply_circuit(circuit: PostselectedCircuit, state: QuantumState) -> QuantumState:
    """Run the gate list on a state; pure input stays pure."""
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, circuit needs {circuit.n_qubits}"
        )
    out = state
    for gate in circuit.gates:
        out = apply_unitary(out, gate.matrix, gate.qubits)
    return out


def output_distribution(circuit: PostselectedCircuit, state: QuantumState) -> dict[str, float]:
    """Exact measurement distribution over all qubits after the circuit.

    Returns a bitstring -> probability table; outcomes whose probability
    is exactly zero are omitted.
    """
    final = apply_circuit(circuit, state)
    return distribution_of(final)


def distribution_of(state: QuantumState) -> dict[str, float]:
    probs = state.probabilities()
    n = state.n_qubits
    return {
        format(i, f"0{n}b"): float(p) for i, p in enumerate(probs) if p > 0.0
    }


# ----------------------------------------------------------------------
# text format


def parse_circuit(text: str) -> PostselectedCircuit:
    n_qubits = None
    output = None
    postselect: list[tuple[int, int]] = []
    gates: list[Gate] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("#"):
            parts = line.split()
            if parts[0] == "#qubits":
                if n_qubits is not None:
                    raise CircuitFormatError(line_no, "duplicate #qubits directive")
                try:
                    n_qubits = int(parts[1])
                except (IndexError, ValueError):
                    raise CircuitFormatError(line_no, f"bad #qubits directive {line!r}")
            elif parts[0] == "#output":
                try:
                    output = int(parts[1])
                except (IndexError, ValueError):
                    raise CircuitFormatError(line_no, f"bad #output directive {line!r}")
            elif parts[0] == "#postselect":
                try:
                    q, bit = parts[1].split("=")
                    postselect.append((int(q), int(bit)))
                except (IndexError, ValueError):
                    raise CircuitFormatError(line_no, f"bad #postselect directive {line!r}")
            else:
                raise CircuitFormatError(line_no, f"unknown directive {parts[0]!r}")
            continue
        parts = line.split()
        kind = parts[0].upper()
        if kind not in GATE_MATRICES:
            raise CircuitFormatError(line_no, f"unsupported gate {parts[0]!r}")
        if n_qubits is None:
            raise CircuitFormatError(line_no, "#qubits must come before the first gate")
        try:
            qubits = tuple(int(tok) for tok in parts[1:])
        except ValueError:
            raise CircuitFormatError(line_no, f"bad qubit indices in {line!r}")
        try:
            gates.append(Gate(kind, qubits))
        except ValueError as exc:
            raise CircuitFormatError(line_no, str(exc))
    if n_qubits is None:
        raise CircuitFormatError(0, "missing #qubits directive")
    try:
        return PostselectedCircuit(n_qubits, gates, output, postselect)
    except ValueError as exc:
        raise CircuitFormatError(0, str(exc))


def format_circuit(circuit: PostselectedCircuit) -> str:
    lines = [f"#qubits {circuit.n_qubits}"]
    if circuit.output is not None:
        lines.append(f"#output {circuit.output}")
    for q, bit in circuit.postselect:
        lines.append(f"#postselect {q}={bit}")
    for g in circuit.gates:
        lines.append(" ".join([g.kind, *map(str, g.qubits)]))
    return "\n".join(lines) + "\n"
