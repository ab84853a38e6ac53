"""Energy-measurement verification of ground-state promise instances.

The verifier measures the rescaled Hamiltonian H' = (H + t*I)/2 and
accepts with probability 1 - E'/t, which is affine in the energy.  A
classical dilution step (accept outright with probability b'/(1+b'),
else defer to the measurement) centers the YES/NO acceptance gap on
1/2, giving decision thresholds 1/2 +- b'/(6(1+b')) with b' = b/(2t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonians import (
    LocalHamiltonian,
    PromiseInstance,
    ScaledHamiltonian,
    assemble_scaled,
    ground,
    promise_label,
    scale_shift,
    scaled_expectation,
)
from .states import QuantumState

POVM_AGREEMENT_ATOL = 1e-10


@dataclass(frozen=True)
class GapParameters:
    """Gap bookkeeping for an instance with thresholds a = 0 < b.

    t is the Hamiltonian's term count; b' = b/(2t) is the rescaled gap
    and eps = b'/(6(1+b')) the half-width of the decision window.
    """

    term_count: int
    b: float
    a: float = 0.0

    def __post_init__(self):
        if self.term_count < 1:
            raise ValueError("term count must be >= 1")
        if self.a != 0.0:
            raise ValueError("gap parameters assume a = 0")
        if not 0.0 < self.b <= 2.0 * self.term_count:
            raise ValueError(
                f"need 0 < b <= 2t so b' lies in (0, 1], got b={self.b!r} t={self.term_count}"
            )

    @property
    def b_prime(self) -> float:
        return self.b / (2.0 * self.term_count)

    @property
    def threshold_eps(self) -> float:
        bp = self.b_prime
        return bp / (6.0 * (1.0 + bp))


def _check_scaled(scaled: ScaledHamiltonian):
    # structural guarantee that the spectrum sits in [0, t]
    if abs(scaled.offset - scaled.term_count / 2.0) > 1e-12:
        raise ValueError("scaled Hamiltonian offset is not t/2; use scale_shift")
    for term in scaled.base.terms:
        if abs(term.coefficient) > 0.5 + 1e-12:
            raise ValueError("scaled Hamiltonian has |coefficient| > 1/2; use scale_shift")


def accept_probability(scaled: ScaledHamiltonian, state: QuantumState) -> float:
    """Acceptance 1 - E'/t of the energy measurement, exactly affine in E'."""
    _check_scaled(scaled)
    energy = scaled_expectation(scaled, state)
    t = scaled.term_count
    if energy < -1e-9 or energy > t + 1e-9:
        raise ValueError(f"scaled energy {energy!r} outside [0, {t}]")
    return float(min(1.0, max(0.0, 1.0 - energy / t)))


class TermSamplingMeasurement:
    """Circuit-level realization of the energy measurement as a channel.

    Uniformly sample a term index i, rotate the term's support into the
    eigenbasis of the scaled term (c_i P_i + I)/2, rotate an ancilla by
    the acceptance amplitude sqrt(1 - lambda) for the observed
    eigenvalue, and measure the ancilla.  The induced acceptance
    probability equals 1 - E'/t for every input state.
    """

    def __init__(self, scaled: ScaledHamiltonian):
        _check_scaled(scaled)
        self.scaled = scaled
        self.n_qubits = scaled.n_qubits
        self._per_term = []
        for term in scaled.base.terms:
            constant = scaled.offset / scaled.term_count  # 1/2 spread over terms
            if term.factors:
                small = term.small_matrix()
                block = small + constant * np.eye(small.shape[0])
                evals, evecs = np.linalg.eigh(block)
                targets = tuple(sorted(term.support))
            else:
                evals = np.array([term.coefficient + constant])
                evecs = np.array([[1.0 + 0.0j]])
                targets = ()
            if evals[0] < -1e-12 or evals[-1] > 1.0 + 1e-12:
                raise ValueError(f"scaled term eigenvalues {evals} outside [0, 1]")
            self._per_term.append((targets, evals, evecs))

    def accept_prob(self, state: QuantumState) -> float:
        """Pr[ancilla = 1], accumulated over terms and eigenbranches."""
        if state.n_qubits != self.n_qubits:
            raise ValueError("state dimension mismatch")
        n = state.n_qubits
        total = 0.0
        for targets, evals, evecs in self._per_term:
            if not targets:
                total += float(1.0 - evals[0])
                continue
            k = len(targets)
            for j in range(evals.shape[0]):
                v = evecs[:, j].reshape((2,) * k)
                if state.is_pure:
                    psi = state.vector.reshape((2,) * n)
                    amp = np.tensordot(v.conj(), psi, axes=(range(k), targets))
                    weight = float(np.sum(np.abs(amp) ** 2))
                else:
                    rho = state.rho.reshape((2,) * (2 * n))
                    half = np.tensordot(v.conj(), rho, axes=(range(k), targets))
                    # bra-side target axes sit at (n - k) + target offset after the
                    # first contraction removed k ket axes
                    bra_axes = tuple(n - k + t for t in targets)
                    red = np.tensordot(half, v, axes=(bra_axes, range(k)))
                    d = 1 << (n - k)
                    weight = float(np.trace(red.reshape(d, d)).real)
                total += (1.0 - float(evals[j])) * weight
        return total / self.scaled.term_count


def povm_circuit(scaled: ScaledHamiltonian) -> TermSamplingMeasurement:
    return TermSamplingMeasurement(scaled)


def dilute(p_meas: float, b_prime: float) -> float:
    """Accept outright with probability b'/(1+b'), else defer to p_meas."""
    if not 0.0 <= p_meas <= 1.0:
        raise ValueError(f"probability {p_meas!r} outside [0, 1]")
    if b_prime <= 0.0:
        raise ValueError(f"b' must be positive, got {b_prime!r}")
    return (b_prime + p_meas) / (1.0 + b_prime)


def decision_thresholds(gp: GapParameters) -> tuple[float, float]:
    """(YES floor, NO ceiling) = 1/2 +- b'/(6(1+b'))."""
    eps = gp.threshold_eps
    return 0.5 + eps, 0.5 - eps


def amplify_majority(p: float, copies: int) -> float:
    """Probability that an odd number of independent p-coins shows a 1-majority."""
    if copies < 1 or copies % 2 == 0:
        raise ValueError(f"copies must be odd and positive, got {copies}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p!r} outside [0, 1]")
    total = 0.0
    for j in range(copies // 2 + 1, copies + 1):
        total += math.comb(copies, j) * p**j * (1.0 - p) ** (copies - j)
    return total


def diluted_observable(scaled: ScaledHamiltonian, b_prime: float) -> np.ndarray:
    """Dense acceptance observable of the diluted energy measurement.

    A = (b' I + (I - H'/t)) / (1 + b'); satisfies 0 <= A <= I and
    <A> = dilute(1 - E'/t, b') for every state.
    """
    _check_scaled(scaled)
    t = scaled.term_count
    hmat = assemble_scaled(scaled)
    eye = np.eye(hmat.shape[0])
    return (b_prime * eye + (eye - hmat / t)) / (1.0 + b_prime)


def dilation_unitary(observable: np.ndarray) -> np.ndarray:
    """Unitary writing an observable's acceptance amplitude onto a fresh qubit.

    For Hermitian A with 0 <= A <= I on k qubits, returns U on k+1
    qubits (fresh qubit appended least significant) with
    U |psi>|0> = (sqrt(I-A) psi)|0> + (sqrt(A) psi)|1>,
    so measuring the new qubit yields 1 with probability <psi|A|psi>.
    """
    a = np.asarray(observable, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"observable must be square, got {a.shape}")
    if np.max(np.abs(a - a.conj().T)) > 1e-10:
        raise ValueError("observable must be Hermitian")
    evals, evecs = np.linalg.eigh(a)
    if evals[0] < -1e-10 or evals[-1] > 1.0 + 1e-10:
        raise ValueError(f"observable eigenvalues {evals[0]!r}..{evals[-1]!r} outside [0, 1]")
    lam = np.clip(evals.real, 0.0, 1.0)
    sq_a = (evecs * np.sqrt(lam)) @ evecs.conj().T
    sq_c = (evecs * np.sqrt(1.0 - lam)) @ evecs.conj().T
    d = a.shape[0]
    u = np.zeros((d, 2, d, 2), dtype=complex)
    u[:, 0, :, 0] = sq_c
    u[:, 0, :, 1] = -sq_a
    u[:, 1, :, 0] = sq_a
    u[:, 1, :, 1] = sq_c
    return u.reshape(2 * d, 2 * d)


@dataclass
class VerificationReport:
    label: str
    gap: GapParameters
    yes_floor: float
    no_ceiling: float
    witness_diluted: float
    best_diluted: float
    verdict: str
    margin: float
    ground_energy: float
    scaled_ground_energy: float


def verify_instance(instance: PromiseInstance, witness: QuantumState) -> VerificationReport:
    """Run the diluted energy verifier on a promise instance with a = 0.

    YES instances are judged on the supplied witness (meant to be the
    exact ground state); NO instances are judged against the best
    possible witness, which by the affine acceptance law is the ground
    state of H' itself.  Raises on instances outside the promise.
    """
    if instance.a != 0.0:
        raise ValueError("verification assumes promise threshold a = 0")
    label = promise_label(instance)
    if label == "OUTSIDE_PROMISE":
        raise ValueError(
            "instance is outside the promise: ground energy between a and b"
        )
    h = instance.hamiltonian
    gp = GapParameters(term_count=h.term_count, b=instance.b)
    scaled = scale_shift(h)
    yes_floor, no_ceiling = decision_thresholds(gp)
    spectral = ground(h)
    e_min_scaled = (spectral.ground_energy + gp.term_count) / 2.0
    best = dilute(
        float(min(1.0, max(0.0, 1.0 - e_min_scaled / gp.term_count))), gp.b_prime
    )
    witness_diluted = dilute(accept_probability(scaled, witness), gp.b_prime)
    if label == "YES":
        verdict = "YES" if witness_diluted >= yes_floor else "NO"
        margin = witness_diluted - yes_floor
    else:
        verdict = "NO" if best <= no_ceiling else "YES"
        margin = no_ceiling - best
    return VerificationReport(
        label=label,
        gap=gp,
        yes_floor=yes_floor,
        no_ceiling=no_ceiling,
        witness_diluted=witness_diluted,
        best_diluted=best,
        verdict=verdict,
        margin=margin,
        ground_energy=spectral.ground_energy,
        scaled_ground_energy=e_min_scaled,
    )
