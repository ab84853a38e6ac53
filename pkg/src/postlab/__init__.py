"""postlab: exact postselected-circuit simulation and a verification lab
for ground-state experiments on 3-local Hamiltonians."""

from .states import QuantumState, fidelity, tensor, tensor_power
from .circuits import (
    Gate,
    PostselectedCircuit,
    apply_circuit,
    apply_unitary,
    output_distribution,
    parse_circuit,
    format_circuit,
)
from .postselect import (
    ConditionalResult,
    UndefinedConditionalError,
    postselect,
    merge_postselections,
)
from .hamiltonians import (
    LocalTerm,
    LocalHamiltonian,
    PromiseInstance,
    ScaledHamiltonian,
    parse_hamiltonian,
    format_hamiltonian,
    assemble,
    ground,
    scale_shift,
    promise_label,
)
from .verifier import (
    GapParameters,
    accept_probability,
    povm_circuit,
    dilute,
    decision_thresholds,
    verify_instance,
    amplify_majority,
)
from .theorem1 import (
    approx_state,
    fidelity_schedule,
    build_synthetic_verifier,
    run_pair,
    check_propagation,
    theorem1_verdict,
    yes_lower_bound,
    no_upper_bound,
)
from .theorem2 import (
    envelope_optimize,
    vertex_optimize,
    subset_check,
    theorem2_verdict,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    end_to_end,
    load_instance,
    load_config,
)

__version__ = "0.1.0"
