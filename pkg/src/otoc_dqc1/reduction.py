"""Reduction from normalized-trace estimation to 2k-point OTOC instances.

The trace circuit ``C`` on ``m`` qubits is placed after ``a`` ancillas and
controlled on all of them reading ``|0...0>``. W probes are ``X`` on the first
ancilla; V probes walk the ancillas in Gray-code order so that the alternating
product visits every ancilla pattern and ``C`` / ``C^dagger`` survive on
exactly one of them.

Probe "wires" are numbered from 1, wire ``w`` being instance qubit ``w - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, PauliString, controlled_on, random_circuit, relabel
from .instances import OTOCInstance
from .sim import exact_normalized_trace, exact_otoc

__all__ = [
    "UnsupportedPairCount",
    "ReductionReport",
    "ruler",
    "ancilla_count",
    "probe_wires",
    "wire_tables",
    "compile_trace_to_otoc",
    "recover_trace",
    "verify_reduction",
    "fit_affine_relation",
    "seeded_family",
]

# k = 3: six of the eight ancilla patterns lie on the Gray cycle and pick up C or
# C^dagger (three each); the remaining two contribute the identity.
SIX_POINT_SLOPE = 0.75
SIX_POINT_OFFSET = 0.25
EXACT_TOL = 1e-10


class UnsupportedPairCount(ValueError):
    pass


def ruler(a: int) -> int:
    """2-adic valuation of ``2a``."""
    if a < 1:
        raise ValueError(f"ruler is defined for a >= 1, got {a}")
    return ((2 * a) & -(2 * a)).bit_length() - 1


def _is_power_of_two(k: int) -> bool:
    return k >= 1 and k & (k - 1) == 0


def ancilla_count(k: int) -> int:
    if _is_power_of_two(k):
        return (2 * k).bit_length() - 1
    if k == 3:
        return 3
    raise UnsupportedPairCount(
        f"k={k}: only powers of two and k=3 have a known gadget; other k are not extrapolated"
    )


def wire_tables(k: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """1-based ancilla wires carrying the X probes: ``(W wires, V wires)``."""
    a = ancilla_count(k)
    if k == 3:
        return (1, 3, 2), (2, 1, 3)
    W = (1,) * k
    V = tuple(ruler(2 * j) for j in range(1, k)) + (a,)
    return W, V


def compile_trace_to_otoc(C: Circuit, k: int) -> OTOCInstance:
    a = ancilla_count(k)
    n = a + C.n_qubits
    shifted = relabel(C, [a + q for q in range(C.n_qubits)], n)
    U = controlled_on(shifted, [(q, 0) for q in range(a)])
    w_wires, v_wires = wire_tables(k)
    W = [PauliString.single(n, w - 1, "X") for w in w_wires]
    V = [PauliString.single(n, w - 1, "X") for w in v_wires]
    return OTOCInstance(U, W, V)


def probe_wires(inst: OTOCInstance) -> tuple[list[int], list[int]]:
    """1-based wires of single-qubit probes, for comparing against tables."""

    def wire(p) -> int:
        support = p.support()
        if len(support) != 1:
            raise ValueError(f"probe {p} is not a single-qubit Pauli")
        return support[0] + 1

    return [wire(p) for p in inst.W], [wire(p) for p in inst.V]


def recover_trace(otoc_value: complex, k: int) -> float:
    """Map an OTOC value of the compiled instance back to ``Re tr~[C]``."""
    ancilla_count(k)
    value = float(np.real(otoc_value))
    if k == 3:
        return (value - SIX_POINT_OFFSET) / SIX_POINT_SLOPE
    return value


@dataclass(frozen=True)
class ReductionReport:
    k: int
    m: int
    otoc: complex
    trace: complex
    delta: float
    ratio: float | None
    passed: bool

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "otoc": [self.otoc.real, self.otoc.imag],
            "trace": [self.trace.real, self.trace.imag],
            "delta": self.delta,
            "ratio": self.ratio,
            "passed": self.passed,
        }


def verify_reduction(C: Circuit, k: int, tol: float = EXACT_TOL) -> ReductionReport:
    """Compare the compiled instance's OTOC with ``Re tr~[C]``.

    For powers of two the two must be equal. For ``k = 3`` the OTOC is affine in
    the trace; ``delta`` then measures the residual from that relation and
    ``ratio`` reports the raw OTOC / trace quotient.
    """
    inst = compile_trace_to_otoc(C, k)
    value = exact_otoc(inst)
    trace = exact_normalized_trace(C, method="dense")
    predicted = trace.real
    if k == 3:
        predicted = SIX_POINT_OFFSET + SIX_POINT_SLOPE * trace.real
    delta = abs(value - predicted)
    ratio = value.real / trace.real if abs(trace.real) > 1e-9 else None
    return ReductionReport(k, C.n_qubits, value, trace, delta, ratio, delta <= tol)


def fit_affine_relation(k: int, circuits: Sequence[Circuit]) -> tuple[float, float, float]:
    """Least-squares ``otoc = offset + slope * Re tr~[C]`` over ``circuits``.

    Returns ``(slope, offset, max_residual)``.
    """
    xs, ys = [], []
    for c in circuits:
        xs.append(exact_normalized_trace(c, method="dense").real)
        ys.append(exact_otoc(compile_trace_to_otoc(c, k)).real)
    A = np.column_stack([xs, np.ones(len(xs))])
    (slope, offset), *_ = np.linalg.lstsq(A, np.array(ys), rcond=None)
    resid = float(np.max(np.abs(A @ np.array([slope, offset]) - ys)))
    return float(slope), float(offset), resid


def seeded_family(count: int, seed: int, qubit_choices=(1, 2, 3), depth: int = 12) -> list[Circuit]:
    """Seeded random trace circuits with ``m`` cycling through ``qubit_choices``."""
    return [
        random_circuit(qubit_choices[i % len(qubit_choices)], depth, seed * 1000 + i)
        for i in range(count)
    ]
