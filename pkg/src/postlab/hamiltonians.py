"""3-local Hamiltonians as sums of weighted Pauli strings.

Text format, one term per line, ``%`` starts a comment:

    #qubits 3
    #promise 0 1.0
    -0.5 Z@0 Z@1
    0.25 X@0 Y@2
    1.0 I

Each factor is ``<letter>@<qubit>`` with letter in {X, Y, Z}; a bare
``I`` denotes an identity term (a constant-offset contribution, needed
to express instances whose entire spectrum is positive).  Coefficients
are real with |coeff| <= 1, so every term has operator norm at most 1.
The optional ``#promise a b`` line attaches ground-energy thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import QuantumState

ASSEMBLE_QUBIT_CAP = 12
DEGENERACY_ATOL = 1e-10
PROMISE_ATOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class HamiltonianFormatError(ValueError):
    """Malformed Hamiltonian text; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class LocalTerm:
    """One weighted Pauli string acting on at most three qubits.

    An empty factor tuple is the identity term (a constant offset).
    """

    coefficient: float
    factors: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise ValueError(f"non-finite coefficient {self.coefficient!r}")
        if abs(self.coefficient) > 1.0 + 1e-15:
            raise ValueError(
                f"|coefficient| must be <= 1 so each term has norm <= 1, got {self.coefficient!r}"
            )
        if len(self.factors) > 3:
            raise ValueError(
                f"term acts on {len(self.factors)} qubits, locality bound is 3"
            )
        qubits = [q for _, q in self.factors]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit in term factors {self.factors}")
        for letter, q in self.factors:
            if letter not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli letter {letter!r}")
            if q < 0:
                raise ValueError(f"negative qubit index {q}")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for _, q in self.factors)

    def small_matrix(self) -> np.ndarray:
        """Dense matrix of the term on its own support (2^k x 2^k)."""
        out = np.array([[self.coefficient]], dtype=complex)
        for letter, _ in sorted(self.factors, key=lambda f: f[1]):
            out = np.kron(out, PAULI[letter])
        return out


@dataclass
class LocalHamiltonian:
    n_qubits: int
    terms: list[LocalTerm] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("Hamiltonian needs at least one qubit")
        if not self.terms:
            raise ValueError("Hamiltonian needs at least one term")
        for term in self.terms:
            for _, q in term.factors:
                if q >= self.n_qubits:
                    raise ValueError(
                        f"term qubit {q} out of range for {self.n_qubits} qubits"
                    )

    @property
    def term_count(self) -> int:
        return len(self.terms)


@dataclass
class SpectralData:
    ground_energy: float
    ground_state: QuantumState
    spectral_gap: float
    degenerate: bool
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass
class ScaledHamiltonian:
    """Result of the [0, t] spectrum rescaling (H + t*I)/2.

    `base` holds the halved Pauli terms and `offset` the symbolic t/2
    identity shift; `term_count` is t, the term count of the original
    Hamiltonian.  The spectrum of base + offset*I lies in [0, t] and the
    eigenvectors are those of the original H.
    """

    base: LocalHamiltonian
    offset: float
    term_count: int

    @property
    def n_qubits(self) -> int:
        return self.base.n_qubits


@dataclass
class PromiseInstance:
    """A Hamiltonian with ground-energy thresholds a < b."""

    hamiltonian: LocalHamiltonian
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"need b > a, got a={self.a!r} b={self.b!r}")


# ----------------------------------------------------------------------
# parsing and serialization


def _parse_term(line_no: int, line: str) -> LocalTerm:
    parts = line.split()
    try:
        coeff = float(parts[0])
    except ValueError:
        raise HamiltonianFormatError(line_no, f"bad coefficient {parts[0]!r}")
    factors = []
    if parts[1:] == ["I"]:
        pass
    else:
        for token in parts[1:]:
            if "@" not in token:
                raise HamiltonianFormatError(
                    line_no, f"bad factor {token!r}, expected <letter>@<qubit>"
                )
            letter, _, idx = token.partition("@")
            try:
                factors.append((letter, int(idx)))
            except ValueError:
                raise HamiltonianFormatError(line_no, f"bad qubit index in {token!r}")
    try:
        return LocalTerm(coeff, tuple(factors))
    except ValueError as exc:
        raise HamiltonianFormatError(line_no, str(exc))


def parse_hamiltonian(text: str) -> LocalHamiltonian:
    h, _ = parse_hamiltonian_with_promise(text)
    return h


def parse_hamiltonian_with_promise(text: str):
    """Parse Hamiltonian text; returns (hamiltonian, (a, b) or None)."""
    n_qubits = None
    promise = None
    terms: list[LocalTerm] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("#"):
            parts = line.split()
            if parts[0] == "#qubits":
                try:
                    n_qubits = int(parts[1])
                except (IndexError, ValueError):
                    raise HamiltonianFormatError(line_no, f"bad #qubits directive {line!r}")
            elif parts[0] == "#promise":
                try:
                    promise = (float(parts[1]), float(parts[2]))
                except (IndexError, ValueError):
                    raise HamiltonianFormatError(line_no, f"bad #promise directive {line!r}")
            else:
                raise HamiltonianFormatError(line_no, f"unknown directive {parts[0]!r}")
            continue
        if n_qubits is None:
            raise HamiltonianFormatError(line_no, "#qubits must come before the first term")
        terms.append(_parse_term(line_no, line))
    if n_qubits is None:
        raise HamiltonianFormatError(0, "missing #qubits directive")
    try:
        return LocalHamiltonian(n_qubits, terms), promise
    except ValueError as exc:
        raise HamiltonianFormatError(0, str(exc))


def format_hamiltonian(h: LocalHamiltonian, promise: tuple[float, float] | None = None) -> str:
    lines = [f"#qubits {h.n_qubits}"]
    if promise is not None:
        lines.append(f"#promise {promise[0]!r} {promise[1]!r}")
    for term in h.terms:
        if term.factors:
            factors = " ".join(
                f"{letter}@{q}" for letter, q in sorted(term.factors, key=lambda f: f[1])
            )
            lines.append(f"{term.coefficient!r} {factors}")
        else:
            lines.append(f"{term.coefficient!r} I")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# dense assembly and exact diagonalization


def assemble(h: LocalHamiltonian, qubit_cap: int = ASSEMBLE_QUBIT_CAP) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the Hamiltonian via Kronecker products."""
    if h.n_qubits > qubit_cap:
        raise ValueError(f"assemble capped at {qubit_cap} qubits, got {h.n_qubits}")
    dim = 1 << h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        letters = {q: letter for letter, q in term.factors}
        mat = np.array([[term.coefficient]], dtype=complex)
        for q in range(h.n_qubits):
            mat = np.kron(mat, PAULI[letters.get(q, "I")])
        out += mat
    return out


def assemble_scaled(scaled: ScaledHamiltonian, qubit_cap: int = ASSEMBLE_QUBIT_CAP) -> np.ndarray:
    mat = assemble(scaled.base, qubit_cap)
    return mat + scaled.offset * np.eye(mat.shape[0])


def ground(h: LocalHamiltonian) -> SpectralData:
    """Exact ground energy and state via dense Hermitian eigendecomposition.

    Deterministic tie-break: take the eigensolver's lowest-index
    eigenvector and fix the global phase so the first nonvanishing
    amplitude is real and positive.
    """
    mat = assemble(h)
    evals, evecs = np.linalg.eigh(mat)
    vec = evecs[:, 0].copy()
    for amp in vec:
        if abs(amp) > 1e-12:
            vec = vec * (amp.conjugate() / abs(amp))
            break
    gap = float(evals[1] - evals[0]) if evals.shape[0] > 1 else 0.0
    return SpectralData(
        ground_energy=float(evals[0]),
        ground_state=QuantumState.pure(vec, validate=False),
        spectral_gap=gap,
        degenerate=gap < DEGENERACY_ATOL,
        eigenvalues=evals,
        eigenvectors=evecs,
    )


def scale_shift(h: LocalHamiltonian) -> ScaledHamiltonian:
    """Map H to (H + t*I)/2 with t = term count, keeping the offset symbolic.

    Halves every coefficient and records offset t/2; the scaled spectrum
    sits in [0, t] because ||H|| <= t, and eigenvectors are unchanged.
    """
    t = h.term_count
    halved = [LocalTerm(term.coefficient / 2.0, term.factors) for term in h.terms]
    return ScaledHamiltonian(
        base=LocalHamiltonian(h.n_qubits, halved),
        offset=t / 2.0,
        term_count=t,
    )


def expectation(h: LocalHamiltonian, state: QuantumState) -> float:
    """<H> evaluated term by term on the local supports (no dense assembly)."""
    if state.n_qubits != h.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, Hamiltonian needs {h.n_qubits}"
        )
    n = state.n_qubits
    total = 0.0
    for term in h.terms:
        if not term.factors:
            total += term.coefficient
            continue
        targets = tuple(sorted(term.support))
        k = len(targets)
        op = term.small_matrix().reshape((2,) * (2 * k))
        if state.is_pure:
            psi = state.vector.reshape((2,) * n)
            moved = np.tensordot(op, psi, axes=(range(k, 2 * k), targets))
            moved = np.moveaxis(moved, range(k), targets)
            total += float(np.vdot(state.vector, moved.reshape(-1)).real)
        else:
            rho = state.rho.reshape((2,) * (2 * n))
            moved = np.tensordot(op, rho, axes=(range(k, 2 * k), targets))
            moved = np.moveaxis(moved, range(k), targets)
            mat = moved.reshape(state.dim, state.dim)
            total += float(np.trace(mat).real)
    return total


def scaled_expectation(scaled: ScaledHamiltonian, state: QuantumState) -> float:
    return expectation(scaled.base, state) + scaled.offset


def promise_label(instance: PromiseInstance, atol: float = PROMISE_ATOL) -> str:
    """YES if the ground energy is at most a, NO if at least b, else OUTSIDE_PROMISE."""
    e_min = ground(instance.hamiltonian).ground_energy
    if e_min <= instance.a + atol:
        return "YES"
    if e_min >= instance.b - atol:
        return "NO"
    return "OUTSIDE_PROMISE"
