import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otoc_dqc1.builder import hadamard_test
from otoc_dqc1.circuit import Circuit, PauliString, adjoint, gate, random_circuit
from otoc_dqc1.instances import OTOCInstance
from otoc_dqc1.sim import (
    CapExceededError,
    DQC1Circuit,
    ShotPlan,
    dense_unitary,
    dqc1_exact_p0,
    dqc1_sample,
    exact_normalized_trace,
    exact_otoc,
    exact_unitary,
    run_statevector,
)

from conftest import maxdiff, reference_unitary

seeds = st.integers(0, 2**32 - 1)


def test_hadamard_statevector():
    psi = run_statevector(Circuit(1, (gate("H", 0),)))
    assert maxdiff(psi, [1 / math.sqrt(2)] * 2) <= 1e-12


def test_empty_circuit_keeps_basis_state():
    psi = run_statevector(Circuit(3), "101")
    assert psi[5] == 1 and np.count_nonzero(psi) == 1


def test_twenty_qubit_depth_hundred_norm():
    c = random_circuit(20, 100, 2024)
    psi = run_statevector(c, 0)
    assert abs(np.linalg.norm(psi) - 1) <= 1e-8


def test_statevector_cap():
    with pytest.raises(CapExceededError):
        run_statevector(Circuit(4), 0, cap=3)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_columns_match_reference(seed):
    c = random_circuit(4, 20, seed).then(gate("X", 2, [(0, 0), (3, 1)]))
    U = reference_unitary(c)
    for x in (0, 5, 15):
        assert maxdiff(run_statevector(c, x), U[:, x]) <= 1e-12


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_kernel_and_tensor_unitaries_agree(seed):
    c = random_circuit(5, 30, seed)
    assert maxdiff(exact_unitary(c), dense_unitary(c)) <= 1e-12


def test_trace_of_s_gate():
    z = exact_normalized_trace(Circuit(1, (gate("S", 0),)))
    assert abs(z - (1 + 1j) / 2) <= 1e-12


def test_trace_of_identity_and_paulis():
    assert abs(exact_normalized_trace(Circuit(4)) - 1) <= 1e-12
    assert abs(exact_normalized_trace(Circuit(2, (gate("X", 0),)))) <= 1e-12


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_trace_paths_agree_and_adjoint_conjugates(seed):
    c = random_circuit(6, 25, seed)
    a = exact_normalized_trace(c)
    assert abs(a - exact_normalized_trace(c, "dense")) <= 1e-12
    assert abs(a - np.trace(reference_unitary(c)) / 64) <= 1e-10
    assert abs(exact_normalized_trace(adjoint(c)) - np.conj(a)) <= 1e-12


def test_otoc_trivial_cases():
    n = 2
    Z0 = PauliString.single(n, 0, "Z")
    X1 = PauliString.single(n, 1, "X")
    X0 = PauliString.single(n, 0, "X")
    ident = Circuit(n)
    assert abs(exact_otoc(OTOCInstance(ident, [Z0, Z0], [X1, X1])) - 1) <= 1e-12
    # anticommuting probes at t = 0
    assert abs(exact_otoc(OTOCInstance(ident, [Z0, Z0], [X0, X0])) + 1) <= 1e-12


def test_otoc_matches_reference_formula():
    U = random_circuit(3, 15, 4)
    W = PauliString("ZIY")
    V = PauliString("IXI")
    Um = reference_unitary(U)
    Wt = Um @ W.matrix() @ Um.conj().T
    expected = np.trace(Wt @ V.matrix() @ Wt @ V.matrix()) / 8
    assert abs(exact_otoc(OTOCInstance(U, [W, W], [V, V])) - expected) <= 1e-12


def test_p0_examples():
    d = DQC1Circuit(Circuit(2, (gate("H", 0), gate("H", 0))), 1)
    assert abs(dqc1_exact_p0(d) - 1) <= 1e-12
    assert abs(dqc1_exact_p0(DQC1Circuit(Circuit(2, (gate("X", 0),)), 1))) <= 1e-12
    assert abs(dqc1_exact_p0(DQC1Circuit(Circuit(2, (gate("H", 0),)), 1)) - 0.5) <= 1e-12


def test_p0_hadamard_test_identity():
    C = random_circuit(3, 20, 8)
    z = exact_normalized_trace(C)
    assert abs(dqc1_exact_p0(hadamard_test(C)) - (1 + z.real) / 2) <= 1e-12


def test_sample_deterministic_extremes():
    plan = ShotPlan(1000, seed=3)
    assert dqc1_sample(DQC1Circuit(Circuit(3), 2), plan) == (1000, 0)
    assert dqc1_sample(DQC1Circuit(Circuit(3, (gate("X", 0),)), 2), plan) == (0, 1000)


def test_sample_rejects_bad_plans():
    with pytest.raises(ValueError):
        ShotPlan(0)
    with pytest.raises(ValueError):
        ShotPlan(10, seed=-1)


def _six_qubit_dqc1():
    return hadamard_test(random_circuit(5, 30, 77))


def test_sample_coverage_at_half_width():
    d = _six_qubit_dqc1()
    p0 = dqc1_exact_p0(d)
    eps = 0.05
    shots = math.ceil(math.log(2 / 0.05) / (2 * eps**2))
    hits = 0
    for s in range(200):
        zeros, _ = dqc1_sample(d, ShotPlan(shots, seed=s))
        hits += abs(zeros / shots - p0) <= eps
    assert hits >= 0.95 * 200 - 3 * math.sqrt(200 * 0.05 * 0.95)


def test_sample_unbiased():
    d = _six_qubit_dqc1()
    p0 = dqc1_exact_p0(d)
    shots = 100_000
    sigma = math.sqrt(p0 * (1 - p0) / shots)
    for seed in (1, 2, 3):
        zeros, ones = dqc1_sample(d, ShotPlan(shots, seed=seed))
        assert zeros + ones == shots
        assert abs(zeros / shots - p0) <= 3 * sigma + 1e-12


def test_sample_unbiased_without_table():
    # 12 mixed qubits with fewer shots than inputs takes the per-chunk path
    d = hadamard_test(random_circuit(12, 20, 5))
    p0 = dqc1_exact_p0(d)
    shots = 3000
    zeros, _ = dqc1_sample(d, ShotPlan(shots, seed=9))
    assert abs(zeros / shots - p0) <= 4 * math.sqrt(p0 * (1 - p0) / shots)


@pytest.mark.parametrize("n_mixed", [4, 12])
def test_sample_independent_of_workers(n_mixed):
    d = hadamard_test(random_circuit(n_mixed, 15, n_mixed))
    plan = ShotPlan(3001, seed=12345)
    ref = dqc1_sample(d, plan, workers=1)
    for w in (2, 3, 4):
        assert dqc1_sample(d, plan, workers=w) == ref


def test_sample_seed_changes_counts():
    d = _six_qubit_dqc1()
    a = dqc1_sample(d, ShotPlan(5000, seed=1))
    b = dqc1_sample(d, ShotPlan(5000, seed=2))
    assert a != b
