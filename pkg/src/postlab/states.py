"""Pure and mixed quantum states with strict normalization invariants.

Convention used throughout the package: qubit 0 is the most significant
bit of the computational-basis index, so the basis label read left to
right is ``q0 q1 ... q_{n-1}`` and basis state ``|bits>`` lives at index
``int(bits, 2)``.
"""

from __future__ import annotations

import numpy as np

NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

DEFAULT_QUBIT_CAP = 20
MIXED_QUBIT_CAP = 10


def bitstring(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def bit_at(index: int, qubit: int, n_qubits: int) -> int:
    """Bit value of `qubit` inside a basis index (qubit 0 most significant)."""
    return (index >> (n_qubits - 1 - qubit)) & 1


class QuantumState:
    """An n-qubit state held either as an amplitude vector or a density matrix.

    Instances are treated as immutable values; every operation in this
    package allocates a fresh state rather than mutating in place.
    """

    __slots__ = ("n_qubits", "vector", "rho")

    def __init__(self, n_qubits: int, vector=None, rho=None, validate: bool = True):
        if (vector is None) == (rho is None):
            raise ValueError("state needs exactly one of vector or rho")
        if n_qubits < 1:
            raise ValueError("state needs at least one qubit")
        dim = 1 << n_qubits
        self.n_qubits = n_qubits
        if vector is not None:
            vector = np.asarray(vector, dtype=complex).reshape(-1)
            if vector.shape != (dim,):
                raise ValueError(f"expected {dim} amplitudes, got {vector.shape}")
            self.vector = vector
            self.rho = None
        else:
            rho = np.asarray(rho, dtype=complex)
            if rho.shape != (dim, dim):
                raise ValueError(f"expected {dim}x{dim} density matrix, got {rho.shape}")
            if n_qubits > MIXED_QUBIT_CAP:
                raise ValueError(
                    f"density matrices capped at {MIXED_QUBIT_CAP} qubits, got {n_qubits}"
                )
            self.vector = None
            self.rho = rho
        if validate:
            self.validate()

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def pure(cls, vector, validate: bool = True) -> "QuantumState":
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        n = int(vector.shape[0]).bit_length() - 1
        if 1 << n != vector.shape[0]:
            raise ValueError(f"amplitude count {vector.shape[0]} is not a power of two")
        return cls(n, vector=vector, validate=validate)

    @classmethod
    def mixed(cls, rho, validate: bool = True) -> "QuantumState":
        rho = np.asarray(rho, dtype=complex)
        n = int(rho.shape[0]).bit_length() - 1
        if rho.ndim != 2 or 1 << n != rho.shape[0]:
            raise ValueError(f"density matrix shape {rho.shape} is not a power of two square")
        return cls(n, rho=rho, validate=validate)

    @classmethod
    def zero(cls, n_qubits: int) -> "QuantumState":
        vec = np.zeros(1 << n_qubits, dtype=complex)
        vec[0] = 1.0
        return cls(n_qubits, vector=vec, validate=False)

    @classmethod
    def basis(cls, n_qubits: int, bits: str) -> "QuantumState":
        if len(bits) != n_qubits or set(bits) - {"0", "1"}:
            raise ValueError(f"bad basis label {bits!r} for {n_qubits} qubits")
        vec = np.zeros(1 << n_qubits, dtype=complex)
        vec[int(bits, 2)] = 1.0
        return cls(n_qubits, vector=vec, validate=False)

    # ------------------------------------------------------------------

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def validate(self) -> None:
        """Check the normalization invariants; raise ValueError on violation."""
        if self.is_pure:
            norm = float(np.vdot(self.vector, self.vector).real)
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"state norm^2 = {norm!r} is not 1")
        else:
            herm = np.max(np.abs(self.rho - self.rho.conj().T))
            if herm > HERMITIAN_ATOL:
                raise ValueError(f"density matrix not Hermitian (deviation {herm:.3e})")
            tr = complex(np.trace(self.rho))
            if abs(tr - 1.0) > 1e-10:
                raise ValueError(f"density matrix trace {tr!r} is not 1")
            evals = np.linalg.eigvalsh(self.rho)
            if evals[0] < EIGENVALUE_FLOOR:
                raise ValueError(f"density matrix has eigenvalue {evals[0]:.3e} < 0")

    def to_density(self) -> "QuantumState":
        """Promote to a density-matrix representation (outer product if pure)."""
        if not self.is_pure:
            return self
        rho = np.outer(self.vector, self.vector.conj())
        return QuantumState(self.n_qubits, rho=rho, validate=False)

    def probabilities(self) -> np.ndarray:
        if self.is_pure:
            return np.abs(self.vector) ** 2
        return np.real(np.diag(self.rho)).copy()

    def __repr__(self):
        kind = "pure" if self.is_pure else "mixed"
        return f"QuantumState({self.n_qubits} qubits, {kind})"


def fidelity(state: QuantumState, target: QuantumState) -> float:
    """Squared overlap <g|rho|g> of `state` against a pure `target`.

    For a pure state this is |<g|psi>|^2.  The target must be pure; both
    arguments must be normalized.
    """
    if not target.is_pure:
        raise ValueError("fidelity target must be a pure state")
    if state.n_qubits != target.n_qubits:
        raise ValueError("fidelity arguments have mismatched qubit counts")
    state.validate()
    target.validate()
    g = target.vector
    if state.is_pure:
        return float(abs(np.vdot(g, state.vector)) ** 2)
    return float(np.real(np.vdot(g, state.rho @ g)))


def tensor(a: QuantumState, b: QuantumState) -> QuantumState:
    """Tensor product; qubits of `a` come first (most significant)."""
    n = a.n_qubits + b.n_qubits
    if a.is_pure and b.is_pure:
        return QuantumState(n, vector=np.kron(a.vector, b.vector), validate=False)
    ra, rb = a.to_density().rho, b.to_density().rho
    return QuantumState(n, rho=np.kron(ra, rb), validate=False)


def tensor_power(state: QuantumState, copies: int, qubit_cap: int = DEFAULT_QUBIT_CAP) -> QuantumState:
    """`copies`-fold tensor power of a state.

    Raises ValueError when the result would exceed `qubit_cap` qubits
    (or the density-matrix cap for mixed input).
    """
    if copies < 1:
        raise ValueError("copies must be >= 1")
    total = state.n_qubits * copies
    if total > qubit_cap:
        raise ValueError(f"tensor power needs {total} qubits, cap is {qubit_cap}")
    if not state.is_pure and total > MIXED_QUBIT_CAP:
        raise ValueError(f"mixed tensor power needs {total} qubits, cap is {MIXED_QUBIT_CAP}")
    out = state
    for _ in range(copies - 1):
        out = tensor(out, state)
    return out
