import numpy as np
import pytest

from otoc_dqc1.circuit import Circuit

ACCEPTANCE_LINES: list[str] = []


def gate_operator(g, n: int) -> np.ndarray:
    """Full 2^n operator of one gate, filled in element by element."""
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    tmask = sum(1 << t for t in g.targets)
    for j in range(dim):
        if not all(((j >> q) & 1) == p for q, p in g.controls):
            out[j, j] = 1
            continue
        lj = sum(((j >> t) & 1) << pos for pos, t in enumerate(g.targets))
        for li in range(2 ** len(g.targets)):
            i = j & ~tmask
            for pos, t in enumerate(g.targets):
                i |= ((li >> pos) & 1) << t
            out[i, j] += g.matrix[li, lj]
    return out


def reference_unitary(c: Circuit) -> np.ndarray:
    U = np.eye(2**c.n_qubits, dtype=complex)
    for g in c.gates:
        U = gate_operator(g, c.n_qubits) @ U
    return U


def projector(bits: dict[int, int], n: int) -> np.ndarray:
    """Diagonal projector onto basis states with the given qubit values."""
    idx = np.arange(2**n)
    keep = np.ones(2**n, dtype=bool)
    for q, b in bits.items():
        keep &= ((idx >> q) & 1) == b
    return np.diag(keep.astype(complex))


def maxdiff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def seeded_pauli_instance(seed: int, max_qubits: int = 8, max_k: int = 4, depth: int = 12):
    """Random OTOC instance with Pauli-word probes, reproducible from ``seed``."""
    from otoc_dqc1.circuit import PauliString, random_circuit
    from otoc_dqc1.instances import OTOCInstance

    r = np.random.default_rng(seed)
    n = int(r.integers(1, max_qubits + 1))
    k = int(r.integers(1, max_k + 1))

    def word():
        return PauliString("".join(r.choice(list("IXYZ"), size=n)))

    U = random_circuit(n, depth, seed)
    return OTOCInstance(U, [word() for _ in range(k)], [word() for _ in range(k)])
