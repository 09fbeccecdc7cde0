"""One-clean-qubit circuits for OTOCs and time-ordered correlators.

Every builder returns an interference circuit ``H . (controlled branch ops) . H``
on the clean qubit. If ``A0`` / ``A1`` are the mixed-register operators applied
when the clean qubit is ``|0>`` / ``|1>``, then

    p0 = (1 + Re tr~[A0^dagger A1]) / 2.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, PauliString, adjoint, controlled_on, gate, relabel
from .instances import NTimeInstance, OTOCInstance
from .sim import DQC1Circuit, dense_unitary

__all__ = [
    "lift",
    "lambda_control",
    "hadamard_test",
    "build_otoc_dqc1",
    "build_otoc_dqc1_fallback",
    "build_ntime_dqc1",
    "imaginary_variant",
    "exact_ntime_correlator",
]


def lift(c: Circuit) -> Circuit:
    """``I_2 (x) c``: move ``c`` onto the mixed register (qubits 1..n)."""
    return relabel(c, [q + 1 for q in range(c.n_qubits)], c.n_qubits + 1)


def lambda_control(op: PauliString, polarity: int) -> Circuit:
    """Apply ``op`` on the mixed register when the clean qubit reads ``polarity``."""
    n = op.n_qubits
    return Circuit(n + 1, tuple(op.gates(offset=1, controls=[(0, polarity)])))


def _wrap(n_mixed: int, body: list[Circuit]) -> Circuit:
    gates = [gate("H", 0)]
    for part in body:
        gates.extend(part.gates)
    gates.append(gate("H", 0))
    return Circuit(n_mixed + 1, tuple(gates))


def _require_pauli(inst: OTOCInstance) -> None:
    if not inst.is_pauli():
        raise ValueError("DQC1 builders take Pauli-word probes; decompose observables first")


def hadamard_test(C: Circuit, meaning: str = "normalized trace") -> DQC1Circuit:
    """``p0 = (1 + Re tr~[C]) / 2``."""
    body = [controlled_on(lift(C), [(0, 1)])]
    return DQC1Circuit(_wrap(C.n_qubits, body), C.n_qubits, "real", meaning)


def build_otoc_dqc1(inst: OTOCInstance, fallback: bool = False) -> DQC1Circuit:
    """Paired construction: each block advances both ends of the alternating word.

    Block ``j`` (for ``j = k/2 .. 1`` in time order) runs
    ``L0(V_j), U^dag, L0(W_j), L1(W_{k-j+1}), U, L1(V_{k-j+1})`` with ``U``
    uncontrolled. The clean-0 branch then builds ``W_1(t)V_1 ... W_{k/2}(t)V_{k/2}``
    and the clean-1 branch the remaining half in reverse, so the branch overlap is
    the complex conjugate of the correlator. Odd ``k`` goes to the fallback.
    """
    _require_pauli(inst)
    k = inst.k
    if fallback or k % 2:
        return build_otoc_dqc1_fallback(inst)
    n = inst.n_qubits
    Ut = lift(inst.U)
    Ut_dag = adjoint(Ut)
    body = []
    for j in range(k // 2, 0, -1):
        hi = k - j  # zero-based index of W_{k-j+1}, V_{k-j+1}
        body += [
            lambda_control(inst.V[j - 1], 0),
            Ut_dag,
            lambda_control(inst.W[j - 1], 0),
            lambda_control(inst.W[hi], 1),
            Ut,
            lambda_control(inst.V[hi], 1),
        ]
    return DQC1Circuit(_wrap(n, body), n, "real", f"{2 * k}-point OTOC", conjugate=True)


def build_otoc_dqc1_fallback(inst: OTOCInstance) -> DQC1Circuit:
    """Single-sided construction: every probe on the clean-1 branch.

    Time order is ``L1(V_k), U^dag, L1(W_k), U, ..., L1(V_1), U^dag, L1(W_1), U``;
    the clean-0 branch sees ``U U^dag ... = I``.
    """
    _require_pauli(inst)
    n = inst.n_qubits
    Ut = lift(inst.U)
    Ut_dag = adjoint(Ut)
    body = []
    for j in range(inst.k - 1, -1, -1):
        body += [lambda_control(inst.V[j], 1), Ut_dag, lambda_control(inst.W[j], 1), Ut]
    return DQC1Circuit(_wrap(n, body), n, "real", f"{2 * inst.k}-point OTOC")


def build_ntime_dqc1(inst: NTimeInstance) -> DQC1Circuit:
    """Forward-only circuit for ``<O_1(t_1) ... O_N(t_N)>``.

    Segments run uncontrolled in time order; ``O_1 .. O_{N-1}`` sit on the
    clean-0 branch and ``O_N`` on the clean-1 branch, giving
    ``A0^dag A1 = O_1(t_1) ... O_N(t_N)``.
    """
    n = inst.n_qubits
    N = len(inst.segments)
    body = []
    for j, (seg, op) in enumerate(zip(inst.segments, inst.operators)):
        body.append(lift(seg))
        body.append(lambda_control(op, 1 if j == N - 1 else 0))
    return DQC1Circuit(_wrap(n, body), n, "real", f"{N}-time ordered correlator")


def imaginary_variant(d: DQC1Circuit) -> DQC1Circuit:
    """Same circuit with a phase gate after the first Hadamard: ``p0 = (1 + Im z)/2``."""
    if d.statistic != "real":
        raise ValueError("circuit already measures the imaginary part")
    gates = d.circuit.gates
    if not gates or gates[0].kind != "H" or gates[0].targets != (0,) or gates[0].controls:
        raise ValueError("expected the circuit to open with H on the clean qubit")
    phase = gate("S" if d.conjugate else "Sdg", 0)
    circuit = Circuit(d.circuit.n_qubits, (gates[0], phase) + gates[1:])
    return DQC1Circuit(circuit, d.n_mixed, "imag", d.meaning, d.conjugate)


def exact_ntime_correlator(inst: NTimeInstance) -> complex:
    """Dense ``tr~[O_1(t_1) ... O_N(t_N)]`` with ``O_j(t_j) = U_j^dag O_j U_j``."""
    n = inst.n_qubits
    cumulative = np.eye(2**n, dtype=complex)
    prod = np.eye(2**n, dtype=complex)
    for seg, op in zip(inst.segments, inst.operators):
        cumulative = dense_unitary(seg) @ cumulative
        prod = prod @ cumulative.conj().T @ op.matrix() @ cumulative
    return complex(np.trace(prod) / 2**n)
