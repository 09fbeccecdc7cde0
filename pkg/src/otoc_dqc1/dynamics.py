"""Nearest-neighbour spin chains and first-order Trotter circuits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .circuit import Circuit, PauliString, unitary_gate
from .estimator import estimate_otoc, term_seed
from .instances import OTOCInstance
from .sim import exact_otoc

__all__ = ["HamiltonianSpec", "pauli_exponential", "trotterize", "exact_evolution", "autocorrelator_curve"]


@dataclass(frozen=True)
class HamiltonianSpec:
    """``H = sum_j c_j P_j`` with Pauli words on at most two qubits."""

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(c), w) for c, w in self.terms))
        for c, w in self.terms:
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient on {w}")
            if w.n_qubits != self.n_qubits:
                raise ValueError(f"word {w} does not span {self.n_qubits} qubits")
            if len(w.support()) > 2:
                raise ValueError(f"word {w} acts on more than two qubits")

    @classmethod
    def ising(cls, n: int, coupling: float = 1.0, field: float = 1.0) -> HamiltonianSpec:
        """Transverse-field Ising chain, ``-J sum Z_i Z_{i+1} - g sum X_i`` (open ends)."""
        terms = [(-coupling, PauliString.from_sparse(n, (i, i + 1), "ZZ")) for i in range(n - 1)]
        terms += [(-field, PauliString.single(n, i, "X")) for i in range(n)]
        return cls(n, tuple(terms))

    @classmethod
    def xxz(cls, n: int, coupling: float = 1.0, delta: float = 1.0) -> HamiltonianSpec:
        """``J sum (X X + Y Y + delta Z Z)`` on nearest neighbours (open ends)."""
        terms = []
        for i in range(n - 1):
            for letters, c in (("XX", coupling), ("YY", coupling), ("ZZ", coupling * delta)):
                terms.append((c, PauliString.from_sparse(n, (i, i + 1), letters)))
        return cls(n, tuple(terms))

    def matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        H = np.zeros((dim, dim), dtype=complex)
        for c, w in self.terms:
            H += c * w.matrix()
        return H


def pauli_exponential(word: PauliString, angle: float):
    """Gate for ``exp(-i angle P)`` on the word's support, ``cos(a) I - i sin(a) P``."""
    support = word.support()
    local = PauliString("".join(word.letters[q] for q in support))
    m = math.cos(angle) * np.eye(2 ** len(support)) - 1j * math.sin(angle) * local.matrix()
    return unitary_gate(m, *support)


def trotterize(h: HamiltonianSpec, t: float, steps: int) -> Circuit:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t == 0:
        return Circuit(h.n_qubits)
    dt = t / steps
    layer = [pauli_exponential(w, c * dt) for c, w in h.terms if not w.is_identity()]
    return Circuit(h.n_qubits, tuple(layer * steps))


def exact_evolution(h: HamiltonianSpec, t: float) -> np.ndarray:
    return scipy.linalg.expm(-1j * t * h.matrix())


def autocorrelator_curve(
    h: HamiltonianSpec,
    O: PauliString,
    t_grid: Sequence[float],
    steps: int,
    mode: str = "exact",
    epsilon: float = 0.1,
    failure_prob: float = 0.05,
    seed: int | None = None,
) -> list[tuple[float, float]]:
    """``<O(t) O>`` along ``t_grid`` for the Trotterized evolution.

    ``mode="sampled"`` runs the one-clean-qubit estimator with failure
    probability split evenly across grid points and needs a ``seed``.
    """
    if not t_grid:
        raise ValueError("empty time grid")
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sampled" and seed is None:
        raise ValueError("sampled mode needs a seed")
    out = []
    for i, t in enumerate(t_grid):
        U = trotterize(h, t, steps)
        if mode == "exact":
            value = exact_otoc(OTOCInstance(U, [O], [O])).real
        else:
            r = estimate_otoc(U, [O], [O], epsilon, failure_prob / len(t_grid), term_seed(seed, i))
            value = r.value.real
        out.append((float(t), float(value)))
    return out
