"""Pauli-basis decomposition of local observables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .circuit import DEFAULT_L_MAX, LocalObservable, PauliString

__all__ = ["PRUNE_TOL", "PauliDecomposition", "decompose", "reconstruct", "pauli_words"]

PRUNE_TOL = 1e-12


@dataclass(frozen=True)
class PauliDecomposition:
    """``M = sum_w alpha_w sigma_w``; words are written on the support (letter i <-> support[i])."""

    terms: tuple[tuple[complex, PauliString], ...]
    support: tuple[int, ...]

    @property
    def l(self) -> int:
        return len(self.support)

    def coefficient(self, letters: str) -> complex:
        for alpha, word in self.terms:
            if word.letters == letters:
                return alpha
        return 0j

    def on_register(self, n_qubits: int) -> list[tuple[complex, PauliString]]:
        """Terms with words lifted to the full ``n_qubits`` register."""
        return [
            (alpha, PauliString.from_sparse(n_qubits, self.support, word.letters))
            for alpha, word in self.terms
        ]


def pauli_words(l: int):
    return (PauliString("".join(p)) for p in itertools.product("IXYZ", repeat=l))


def decompose(
    obs: LocalObservable, l_max: int = DEFAULT_L_MAX, prune_tol: float = PRUNE_TOL
) -> PauliDecomposition:
    if obs.l > l_max:
        raise ValueError(f"observable support size {obs.l} exceeds l_max={l_max}")
    M = obs.matrix
    dim = 2**obs.l
    terms = []
    for word in pauli_words(obs.l):
        # Pauli words are Hermitian: Tr[sigma M] = vdot(sigma, M)
        alpha = complex(np.vdot(word.matrix(), M) / dim)
        if abs(alpha) >= prune_tol:
            terms.append((alpha, word))
    return PauliDecomposition(tuple(terms), obs.support)


def reconstruct(d: PauliDecomposition) -> np.ndarray:
    dim = 2**d.l
    out = np.zeros((dim, dim), dtype=complex)
    for alpha, word in d.terms:
        out += alpha * word.matrix()
    return out
