"""Problem instances and their JSON documents."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .circuit import (
    Circuit,
    CircuitFormatError,
    LocalObservable,
    PauliString,
    _matrix_from_json,
    _matrix_to_json,
    circuit_from_dict,
    circuit_to_dict,
)

Probe = Union[PauliString, LocalObservable]

__all__ = [
    "Probe",
    "OTOCInstance",
    "NTimeInstance",
    "probe_support",
    "probe_matrix",
    "probe_to_dict",
    "probe_from_dict",
    "instance_to_dict",
    "instance_from_dict",
]


def probe_support(p: Probe) -> tuple[int, ...]:
    return p.support() if isinstance(p, PauliString) else p.support


def probe_matrix(p: Probe, n_qubits: int) -> np.ndarray:
    if isinstance(p, PauliString):
        if p.n_qubits != n_qubits:
            raise ValueError(f"Pauli word on {p.n_qubits} qubits used in a {n_qubits}-qubit instance")
        return p.matrix()
    return p.embed(n_qubits)


def _check_probe(p: Probe, n_qubits: int) -> None:
    if isinstance(p, PauliString):
        if p.n_qubits != n_qubits:
            raise ValueError(f"Pauli word {p} has {p.n_qubits} letters, instance has {n_qubits} qubits")
    elif isinstance(p, LocalObservable):
        if any(q >= n_qubits for q in p.support):
            raise ValueError(f"probe support {p.support} outside {n_qubits} qubits")
    else:
        raise TypeError(f"probe must be a PauliString or LocalObservable, got {type(p).__name__}")


@dataclass(frozen=True)
class OTOCInstance:
    """``(1/2^n) Tr[W_1(t) V_1 ... W_k(t) V_k]`` with ``W(t) = U W U^dagger``."""

    U: Circuit
    W: tuple[Probe, ...]
    V: tuple[Probe, ...]

    def __post_init__(self):
        object.__setattr__(self, "W", tuple(self.W))
        object.__setattr__(self, "V", tuple(self.V))
        if len(self.W) != len(self.V) or not self.W:
            raise ValueError("need k >= 1 W probes and the same number of V probes")
        for p in self.W + self.V:
            _check_probe(p, self.U.n_qubits)

    @property
    def k(self) -> int:
        return len(self.W)

    @property
    def n_qubits(self) -> int:
        return self.U.n_qubits

    def is_pauli(self) -> bool:
        return all(isinstance(p, PauliString) for p in self.W + self.V)


@dataclass(frozen=True)
class NTimeInstance:
    """Time-ordered correlator ``<O_1(t_1) ... O_N(t_N)>``.

    ``segments[j]`` evolves from ``t_{j-1}`` to ``t_j`` (with ``t_0 = 0``), so the
    evolution up to ``t_j`` is ``U_j = S_j ... S_1`` and ``O_j(t_j) = U_j^dagger O_j U_j``.
    """

    segments: tuple[Circuit, ...]
    operators: tuple[PauliString, ...]
    times: tuple[float, ...]

    def __post_init__(self):
        for name in ("segments", "operators", "times"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = len(self.segments)
        if n < 1 or len(self.operators) != n or len(self.times) != n:
            raise ValueError("segments, operators and times must have the same length N >= 1")
        if any(b < a for a, b in zip(self.times, self.times[1:])):
            raise ValueError(f"times must be non-decreasing, got {self.times}")
        width = self.segments[0].n_qubits
        if any(s.n_qubits != width for s in self.segments):
            raise ValueError("all segments must act on the same register")
        for op in self.operators:
            _check_probe(op, width)

    @property
    def n_qubits(self) -> int:
        return self.segments[0].n_qubits


def probe_to_dict(p: Probe) -> dict:
    if isinstance(p, PauliString):
        support = p.support()
        if len(support) == 1:
            return {"qubit": support[0], "pauli": p.letters[support[0]]}
        return {"qubits": list(support), "pauli": "".join(p.letters[q] for q in support)}
    return {"qubits": list(p.support), "matrix": _matrix_to_json(p.matrix)}


def probe_from_dict(d: dict, n_qubits: int) -> Probe:
    try:
        if "matrix" in d:
            support = [int(q) for q in d["qubits"]]
            return LocalObservable(tuple(support), _matrix_from_json(d["matrix"], 2 ** len(support)))
        if "qubit" in d:
            return PauliString.single(n_qubits, int(d["qubit"]), d["pauli"])
        return PauliString.from_sparse(n_qubits, [int(q) for q in d.get("qubits", [])], d["pauli"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitFormatError(f"bad probe entry {d!r}: {exc}") from exc


def instance_to_dict(inst: OTOCInstance) -> dict:
    return {
        "k": inst.k,
        "circuit": circuit_to_dict(inst.U),
        "W": [probe_to_dict(p) for p in inst.W],
        "V": [probe_to_dict(p) for p in inst.V],
    }


def instance_from_dict(d: dict) -> OTOCInstance:
    if not isinstance(d, dict) or not {"circuit", "W", "V"} <= d.keys():
        raise CircuitFormatError("instance document needs 'circuit', 'W' and 'V'")
    U = circuit_from_dict(d["circuit"])
    W = [probe_from_dict(p, U.n_qubits) for p in d["W"]]
    V = [probe_from_dict(p, U.n_qubits) for p in d["V"]]
    if "k" in d and int(d["k"]) != len(W):
        raise CircuitFormatError(f"'k'={d['k']} but {len(W)} W probes given")
    try:
        return OTOCInstance(U, W, V)
    except (ValueError, TypeError) as exc:
        raise CircuitFormatError(str(exc)) from exc
