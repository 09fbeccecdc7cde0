"""Trace-to-OTOC reductions and one-clean-qubit estimators for correlation functions."""

__version__ = "0.1.0"

from .builder import (
    build_ntime_dqc1,
    build_otoc_dqc1,
    build_otoc_dqc1_fallback,
    exact_ntime_correlator,
    hadamard_test,
    imaginary_variant,
    lambda_control,
)
from .circuit import (
    Circuit,
    Gate,
    LocalObservable,
    PauliString,
    adjoint,
    compose,
    controlled_on,
    gate,
    random_circuit,
    unitary_gate,
)
from .dynamics import HamiltonianSpec, autocorrelator_curve, trotterize
from .estimator import (
    EstimateResult,
    estimate_avg_bipartite_otoc,
    estimate_otoc,
    shots_for,
    time_averaged_otoc,
)
from .instances import NTimeInstance, OTOCInstance
from .pauli import PauliDecomposition, decompose, reconstruct
from .reduction import compile_trace_to_otoc, ruler, verify_reduction
from .sim import (
    DQC1Circuit,
    ShotPlan,
    dqc1_exact_p0,
    dqc1_sample,
    exact_normalized_trace,
    exact_otoc,
    exact_unitary,
    run_statevector,
)
