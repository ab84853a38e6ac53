"""Fidelity-perturbation experiments on a synthetic postselected verifier.

The synthetic verifier family behind these experiments has two stages:

* an energy-measurement stage that writes the diluted acceptance
  amplitude of the rescaled Hamiltonian onto an output qubit o (a
  unitary dilation of the acceptance observable acting on all witness
  copies), and
* a tunable postselection block, a ladder of k Hadamard qubits ANDed
  together by TOFFOLIs, whose register p succeeds with probability
  2^-k exactly and independently of the witness.

Replacing the exact ground-state witness by a fidelity-F approximation
moves every outcome probability by at most 2*sqrt(1 - F^m') (trace
distance contraction), and the resulting conditional acceptance obeys
explicit lower/upper bound chains checked here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Gate, PostselectedCircuit, apply_circuit, apply_unitary, distribution_of
from .hamiltonians import LocalHamiltonian, SpectralData, assemble_scaled, ground, scale_shift
from .postselect import event_mass, merge_postselections
from .states import QuantumState, fidelity, tensor, tensor_power
from .verifier import GapParameters, dilation_unitary, diluted_observable

BOUND_SLACK = 1e-12
ORTHO_ATOL = 1e-10


def fidelity_schedule(k: int, m_prime: int, kappa: float = 1.0) -> float:
    """Per-copy fidelity F = (1 - kappa * 2^-4k)^(1/m').

    The joint fidelity of m' copies is then 1 - kappa * 2^-4k, the
    scaling needed to keep the perturbed conditional bounds meaningful
    against the 2^-k postselection floor.
    """
    if k < 1 or m_prime < 1:
        raise ValueError("need k >= 1 and m_prime >= 1")
    base = 1.0 - kappa * 2.0 ** (-4 * k)
    if base < 0.0:
        raise ValueError(f"kappa {kappa!r} too large for k={k}: joint fidelity < 0")
    return float(base ** (1.0 / m_prime))


def approx_state(g: QuantumState, f: float, direction: QuantumState, mode: str) -> QuantumState:
    """A fidelity-f approximation of pure g, perturbed along an orthogonal direction.

    mode "pure" returns sqrt(f) g + sqrt(1-f) d; mode "mixed" returns
    f |g><g| + (1-f) |d><d|.  Either way the fidelity against g is
    exactly f.
    """
    if mode not in ("pure", "mixed"):
        raise ValueError(f"mode must be pure or mixed, got {mode!r}")
    if not (g.is_pure and direction.is_pure):
        raise ValueError("g and direction must be pure states")
    if g.n_qubits != direction.n_qubits:
        raise ValueError("g and direction have mismatched qubit counts")
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fidelity {f!r} outside [0, 1]")
    overlap = abs(np.vdot(g.vector, direction.vector))
    if overlap > ORTHO_ATOL:
        raise ValueError(f"direction is not orthogonal to g (|<g|d>| = {overlap:.3e})")
    if mode == "pure":
        vec = np.sqrt(f) * g.vector + np.sqrt(1.0 - f) * direction.vector
        return QuantumState.pure(vec, validate=False)
    rho = f * np.outer(g.vector, g.vector.conj()) + (1.0 - f) * np.outer(
        direction.vector, direction.vector.conj()
    )
    return QuantumState.mixed(rho, validate=False)


def perturbation_directions(
    spectral: SpectralData, count: int, seed: int
) -> list[tuple[str, QuantumState]]:
    """Orthogonal perturbation directions: the excited eigenbasis, then
    seeded random states projected out of the ground state."""
    g = spectral.ground_state.vector
    dim = g.shape[0]
    out: list[tuple[str, QuantumState]] = []
    for i in range(1, dim):
        if len(out) >= count:
            break
        out.append(("eig%d" % i, QuantumState.pure(spectral.eigenvectors[:, i], validate=False)))
    rng = np.random.default_rng(seed)
    j = 0
    while len(out) < count:
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v = v - np.vdot(g, v) * g
        norm = np.linalg.norm(v)
        if norm < 1e-8:
            continue
        out.append(("rnd%d" % j, QuantumState.pure(v / norm, validate=False)))
        j += 1
    return out


# ----------------------------------------------------------------------
# synthetic verifier construction


@dataclass
class SyntheticVerifier:
    """The two-stage verifier: acceptance dilation then postselection block.

    `circuit` is the production form with a single merged postselection
    register; `circuit_two` is the same block with its final AND left as
    two separate registers (one qubit fewer), used to check that
    merging is observationally invisible.
    """

    n: int
    m_prime: int
    k: int
    gap: GapParameters
    observable: np.ndarray
    dilation: np.ndarray
    circuit: PostselectedCircuit
    circuit_two: PostselectedCircuit
    o_index: int

    @property
    def witness_qubits(self) -> int:
        return self.n * self.m_prime

    @property
    def m(self) -> int:
        """Ancilla count of the production circuit (everything but the witness)."""
        return self.circuit.n_qubits - self.witness_qubits

    def run(self, witness_block: QuantumState, merged: bool = True) -> dict[str, float]:
        """Exact outcome distribution over all qubits for a witness block."""
        if witness_block.n_qubits != self.witness_qubits:
            raise ValueError(
                f"witness block has {witness_block.n_qubits} qubits, "
                f"expected {self.witness_qubits}"
            )
        circuit = self.circuit if merged else self.circuit_two
        ancillas = QuantumState.zero(circuit.n_qubits - self.witness_qubits)
        full = tensor(witness_block, ancillas)
        targets = tuple(range(self.witness_qubits + 1))
        full = apply_unitary(full, self.dilation, targets)
        final = apply_circuit(circuit, full)
        return distribution_of(final)

    def postselect_conditions(self, merged: bool = True) -> list[tuple[int, int]]:
        return list((self.circuit if merged else self.circuit_two).postselect)


def _postselect_block(prefix: int, k: int) -> tuple[list[Gate], list[tuple[int, int]], int]:
    """Gates and registers of the 2^-k block, final AND left unmerged.

    Returns (gates, two postselect registers, qubit count of the block).
    For k = 1 the second register is an X-prepared qubit that is
    deterministically 1, so the block still exposes two registers.
    """
    gates: list[Gate] = []
    if k == 1:
        gates.append(Gate("H", (prefix,)))
        gates.append(Gate("X", (prefix + 1,)))
        return gates, [(prefix, 1), (prefix + 1, 1)], 2
    hadamards = [prefix + i for i in range(k)]
    for q in hadamards:
        gates.append(Gate("H", (q,)))
    if k == 2:
        return gates, [(hadamards[0], 1), (hadamards[1], 1)], 2
    ladder = [prefix + k + j for j in range(k - 2)]
    gates.append(Gate("TOFFOLI", (hadamards[0], hadamards[1], ladder[0])))
    for j in range(1, k - 2):
        gates.append(Gate("TOFFOLI", (ladder[j - 1], hadamards[j + 1], ladder[j])))
    return gates, [(ladder[-1], 1), (hadamards[-1], 1)], 2 * k - 2


def build_synthetic_verifier(
    h: LocalHamiltonian, b: float, m_prime: int, k: int
) -> SyntheticVerifier:
    """Assemble the verifier for a Hamiltonian instance with gap threshold b.

    The acceptance observable averages the per-copy diluted energy
    measurement over all m' witness copies, so every copy contributes.
    """
    if m_prime < 1 or k < 1:
        raise ValueError("need m_prime >= 1 and k >= 1")
    gp = GapParameters(term_count=h.term_count, b=b)
    scaled = scale_shift(h)
    per_copy = diluted_observable(scaled, gp.b_prime)
    dim = per_copy.shape[0]
    n = h.n_qubits
    total_dim = dim**m_prime
    acc = np.zeros((total_dim, total_dim), dtype=complex)
    for copy in range(m_prime):
        left = np.eye(dim**copy)
        right = np.eye(dim ** (m_prime - copy - 1))
        acc += np.kron(np.kron(left, per_copy), right)
    acc /= m_prime
    dilation = dilation_unitary(acc)
    o_index = n * m_prime
    gates, registers, block_qubits = _postselect_block(o_index + 1, k)
    circuit_two = PostselectedCircuit(
        n_qubits=o_index + 1 + block_qubits,
        gates=gates,
        output=o_index,
        postselect=registers,
    )
    return SyntheticVerifier(
        n=n,
        m_prime=m_prime,
        k=k,
        gap=gp,
        observable=acc,
        dilation=dilation,
        circuit=merge_postselections(circuit_two),
        circuit_two=circuit_two,
        o_index=o_index,
    )


# ----------------------------------------------------------------------
# paired runs and bound checks


@dataclass
class BranchStats:
    p_success: float
    joint: float
    conditional: float
    distribution: dict[str, float]


@dataclass
class PairResult:
    exact: BranchStats
    approx: BranchStats
    fidelity_per_copy: float
    joint_fidelity: float
    m_prime: int
    mode: str
    direction_name: str


def branch_stats(sv: SyntheticVerifier, dist: dict[str, float], merged: bool = True) -> BranchStats:
    conditions = sv.postselect_conditions(merged)
    p_success = event_mass(dist, conditions)
    joint = event_mass(dist, conditions + [(sv.o_index, 1)])
    if p_success <= 0.0:
        raise ValueError("postselection register has zero success probability")
    return BranchStats(
        p_success=p_success,
        joint=joint,
        conditional=joint / p_success,
        distribution=dist,
    )


def run_pair(
    sv: SyntheticVerifier,
    g: QuantumState,
    f: float,
    direction: QuantumState,
    mode: str,
    direction_name: str = "",
) -> PairResult:
    """Simulate the verifier on the exact witness and its F-approximation."""
    exact_block = tensor_power(g, sv.m_prime)
    approx_copy = approx_state(g, f, direction, mode)
    approx_block = tensor_power(approx_copy, sv.m_prime)
    joint_f = fidelity(approx_block, exact_block)
    exact = branch_stats(sv, sv.run(exact_block))
    approx = branch_stats(sv, sv.run(approx_block))
    return PairResult(
        exact=exact,
        approx=approx,
        fidelity_per_copy=f,
        joint_fidelity=joint_f,
        m_prime=sv.m_prime,
        mode=mode,
        direction_name=direction_name,
    )


@dataclass
class PropagationCheck:
    eps: float
    bound: float
    tighter_bound: float
    d_joint: float
    d_marginal: float
    joint_ok: bool
    marginal_ok: bool


def check_propagation(pair: PairResult) -> PropagationCheck:
    """Both probability shifts must respect 2*sqrt(1 - F^m').

    The factor-2 bound is the asserted one; the sharper sqrt(1 - F^m')
    implied by trace-distance contraction under the squared-overlap
    fidelity convention is recorded alongside, not asserted.
    """
    eps = 1.0 - pair.joint_fidelity
    eps = max(eps, 0.0)
    bound = 2.0 * np.sqrt(eps)
    d_joint = abs(pair.exact.joint - pair.approx.joint)
    d_marginal = abs(pair.exact.p_success - pair.approx.p_success)
    return PropagationCheck(
        eps=eps,
        bound=float(bound),
        tighter_bound=float(np.sqrt(eps)),
        d_joint=d_joint,
        d_marginal=d_marginal,
        joint_ok=d_joint <= bound + BOUND_SLACK,
        marginal_ok=d_marginal <= bound + BOUND_SLACK,
    )


def yes_lower_bound(delta: float, k: int, eps: float) -> float:
    """1/2 + delta - (3+2*delta)*sqrt(eps) / (2^-k + 2*sqrt(eps))."""
    se = float(np.sqrt(max(eps, 0.0)))
    return 0.5 + delta - (3.0 + 2.0 * delta) * se / (2.0**-k + 2.0 * se)


def no_upper_bound(delta: float, k: int, eps: float) -> float | None:
    """1/2 - delta + (3-2*delta)*sqrt(eps) / (2^-k - 2*sqrt(eps)).

    Returns None when the denominator is nonpositive (vacuous regime:
    the propagation slack can swallow the whole postselection floor).
    """
    se = float(np.sqrt(max(eps, 0.0)))
    denom = 2.0**-k - 2.0 * se
    if denom <= 0.0:
        return None
    return 0.5 - delta + (3.0 - 2.0 * delta) * se / denom


@dataclass
class Theorem1Verdict:
    label: str
    delta: float
    k: int
    r: float
    eps: float
    yes_lower: float | None
    no_upper: float | None
    deviation: float | None
    vacuous: bool
    informative: bool
    bound_ok: bool
    precondition_ok: bool
    floor_value: float
    floor_from_exact: float
    floor_from_2k: float
    floor_ok: bool


def theorem1_verdict(pair: PairResult, delta: float, k: int, r: float, label: str) -> Theorem1Verdict:
    """Check the conditional-acceptance bound chain for a YES or NO instance.

    YES: cond' >= 1/2 + delta - (3+2delta) sqrt(eps) / (2^-k + 2 sqrt(eps)).
    NO:  cond' <= 1/2 - delta + (3-2delta) sqrt(eps) / (2^-k - 2 sqrt(eps)),
    vacuous (reported, never failed) when the denominator is <= 0.

    Also checks the success floor r^m' * Pr[p'=1] >= r^m' * (Pr[p=1] -
    2 sqrt(eps)) and its 2^-k form; r is the synthetic per-copy success
    probability of the approximate-state generator.
    """
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta!r}")
    if not 0.0 < r <= 1.0:
        raise ValueError(f"r must lie in (0, 1], got {r!r}")
    if label not in ("YES", "NO"):
        raise ValueError(f"label must be YES or NO, got {label!r}")
    eps = max(0.0, 1.0 - pair.joint_fidelity)
    se = float(np.sqrt(eps))
    floor2k = 2.0**-k
    cond_exact = pair.exact.conditional
    cond_approx = pair.approx.conditional
    precondition_ok = pair.exact.p_success >= floor2k - BOUND_SLACK
    yes_lower = None
    no_upper = None
    deviation = None
    vacuous = False
    informative = True
    if label == "YES":
        precondition_ok = precondition_ok and cond_exact >= 0.5 + delta - BOUND_SLACK
        yes_lower = yes_lower_bound(delta, k, eps)
        deviation = 0.5 + delta - yes_lower
        bound_ok = cond_approx >= yes_lower - BOUND_SLACK
        informative = yes_lower > 0.5
    else:
        precondition_ok = precondition_ok and cond_exact <= 0.5 - delta + BOUND_SLACK
        no_upper = no_upper_bound(delta, k, eps)
        if no_upper is None:
            vacuous = True
            informative = False
            bound_ok = True
        else:
            deviation = no_upper - (0.5 - delta)
            bound_ok = cond_approx <= no_upper + BOUND_SLACK
            informative = no_upper < 0.5
    r_pow = r**pair.m_prime
    floor_value = r_pow * pair.approx.p_success
    floor_from_exact = r_pow * (pair.exact.p_success - 2.0 * se)
    floor_from_2k = r_pow * (floor2k - 2.0 * se)
    floor_ok = (
        floor_value >= floor_from_exact - BOUND_SLACK
        and floor_value >= floor_from_2k - BOUND_SLACK
    )
    return Theorem1Verdict(
        label=label,
        delta=delta,
        k=k,
        r=r,
        eps=eps,
        yes_lower=yes_lower,
        no_upper=no_upper,
        deviation=deviation,
        vacuous=vacuous,
        informative=informative,
        bound_ok=bound_ok,
        precondition_ok=precondition_ok,
        floor_value=floor_value,
        floor_from_exact=floor_from_exact,
        floor_from_2k=floor_from_2k,
        floor_ok=floor_ok,
    )
