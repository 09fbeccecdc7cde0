"""Statevector engine, dense oracles and the one-clean-qubit sampler."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .circuit import Circuit
from .instances import OTOCInstance, probe_matrix

__all__ = [
    "CapExceededError",
    "DQC1Circuit",
    "ShotPlan",
    "run_statevector",
    "evolve_basis_states",
    "exact_unitary",
    "dense_unitary",
    "exact_normalized_trace",
    "exact_otoc",
    "clean_zero_probs",
    "dqc1_exact_p0",
    "dqc1_sample",
]

STATEVECTOR_CAP = 24
DENSE_CAP = 12
TRACE_CAP = 20
P0_CAP = 20
# amplitudes held per batched evolution
BATCH_AMPLITUDES = 1 << 22
SHOT_CHUNK = 1 << 16
# below this register size, clean-qubit probabilities are tabulated for all inputs
TABLE_MAX_QUBITS = 16


class CapExceededError(ValueError):
    """Requested register is larger than the configured simulation cap."""


def _check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapExceededError(f"{what}: {n} qubits exceeds cap of {cap}")


@dataclass(frozen=True)
class DQC1Circuit:
    """Circuit on ``1 + n_mixed`` qubits; qubit 0 starts clean in ``|0>``.

    ``p0 = (1 + Re z)/2`` (``statistic="real"``) or ``(1 + Im z)/2``
    (``"imag"``), where ``z`` is the correlator named by ``meaning``. With
    ``conjugate=True`` the branch overlap of the circuit is ``conj(z)``; the
    imaginary variant compensates for it.
    """

    circuit: Circuit
    n_mixed: int
    statistic: str = "real"
    meaning: str = ""
    conjugate: bool = False
    clean_qubit: int = 0

    def __post_init__(self):
        if self.clean_qubit != 0:
            raise ValueError("the clean qubit is always qubit 0")
        if self.circuit.n_qubits != 1 + self.n_mixed:
            raise ValueError(
                f"circuit has {self.circuit.n_qubits} qubits, expected 1 + {self.n_mixed}"
            )
        if self.statistic not in ("real", "imag"):
            raise ValueError(f"statistic must be 'real' or 'imag', got {self.statistic!r}")


@dataclass(frozen=True)
class ShotPlan:
    shots: int
    epsilon: float = 1.0
    failure_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.failure_prob < 1:
            raise ValueError("failure_prob must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _compile(c: Circuit):
    ops = []
    for g in c.gates:
        cmask = 0
        cval = 0
        for q, pol in g.controls:
            cmask |= 1 << q
            cval |= pol << q
        ops.append((g.targets, np.ascontiguousarray(g.matrix), cmask, cval))
    return ops


def _apply_ops(buf: np.ndarray, ops) -> None:
    for targets, m, cmask, cval in ops:
        if len(targets) == 1:
            _kernels.apply_1q(buf, targets[0], m, cmask, cval)
        else:
            _kernels.apply_2q(buf, targets[0], targets[1], m, cmask, cval)


def _basis_index(x, n: int) -> int:
    if isinstance(x, str):
        x = int(x, 2)
    x = int(x)
    if not 0 <= x < 2**n:
        raise ValueError(f"basis state {x} outside a {n}-qubit register")
    return x


def run_statevector(c: Circuit, input_basis_state=0, cap: int = STATEVECTOR_CAP) -> np.ndarray:
    """``U(c)|x>``. ``input_basis_state`` is an int or a binary string (qubit 0 rightmost)."""
    n = c.n_qubits
    _check_cap(n, cap, "run_statevector")
    state = np.zeros(2**n, dtype=complex)
    state[_basis_index(input_basis_state, n)] = 1.0
    _apply_ops(state, _compile(c))
    return state


def evolve_basis_states(c: Circuit, xs, ops=None) -> np.ndarray:
    """Rows are ``U(c)|x>`` for each ``x`` in ``xs``."""
    dim = 2**c.n_qubits
    xs = np.asarray(xs, dtype=np.int64)
    buf = np.zeros(xs.size * dim, dtype=complex)
    buf[np.arange(xs.size) * dim + xs] = 1.0
    _apply_ops(buf, _compile(c) if ops is None else ops)
    return buf.reshape(xs.size, dim)


def _batch_size(n: int) -> int:
    return max(1, BATCH_AMPLITUDES >> n)


def exact_unitary(c: Circuit, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense unitary; column ``j`` is ``run_statevector(c, j)``."""
    _check_cap(c.n_qubits, cap, "exact_unitary")
    return evolve_basis_states(c, np.arange(2**c.n_qubits)).T.copy()


def _dense_apply(mat: np.ndarray, targets, m: np.ndarray, cmask: int, cval: int, n: int) -> np.ndarray:
    # rows of mat viewed as an n-axis tensor, axis i <-> qubit n-1-i
    cols = mat.shape[1]
    t = mat.reshape([2] * n + [cols])
    axes = [n - 1 - q for q in reversed(targets)]  # high local bit first
    moved = np.moveaxis(t, axes, list(range(len(axes))))
    shape = moved.shape
    out = (m @ moved.reshape(2 ** len(targets), -1)).reshape(shape)
    out = np.moveaxis(out, list(range(len(axes))), axes).reshape(2**n, cols)
    if cmask:
        rows = np.arange(2**n)
        keep = (rows & cmask) != cval
        out[keep] = mat[keep]
    return out


def dense_unitary(c: Circuit, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense unitary built by tensor contraction, independent of the statevector kernels."""
    _check_cap(c.n_qubits, cap, "dense_unitary")
    n = c.n_qubits
    mat = np.eye(2**n, dtype=complex)
    for targets, m, cmask, cval in _compile(c):
        mat = _dense_apply(mat, targets, m, cmask, cval, n)
    return mat


def exact_normalized_trace(c: Circuit, method: str = "statevector") -> complex:
    """``Tr[U(c)] / 2^n``; ``method`` is ``"statevector"`` (n <= 20) or ``"dense"`` (n <= 12)."""
    n = c.n_qubits
    if method == "dense":
        return complex(np.trace(dense_unitary(c)) / 2**n)
    if method != "statevector":
        raise ValueError(f"unknown method {method!r}")
    _check_cap(n, TRACE_CAP, "exact_normalized_trace")
    ops = _compile(c)
    dim = 2**n
    step = _batch_size(n)
    acc = 0j
    for start in range(0, dim, step):
        xs = np.arange(start, min(dim, start + step))
        rows = evolve_basis_states(c, xs, ops)
        acc += _kernels.diag_sum(rows.reshape(-1), dim, start)
    return complex(acc / dim)


def exact_otoc(inst: OTOCInstance, cap: int = DENSE_CAP) -> complex:
    """Normalized trace of ``W_1(t) V_1 ... W_k(t) V_k`` from dense matrices."""
    n = inst.n_qubits
    _check_cap(n, cap, "exact_otoc")
    U = dense_unitary(inst.U, cap=cap)
    Ud = U.conj().T
    prod = np.eye(2**n, dtype=complex)
    for w, v in zip(inst.W, inst.V):
        prod = prod @ U @ probe_matrix(w, n) @ Ud @ probe_matrix(v, n)
    return complex(np.trace(prod) / 2**n)


def clean_zero_probs(c: Circuit, xs, ops=None) -> np.ndarray:
    """``||(<0| x I) U |0,x>||^2`` for each mixed-register input ``x``."""
    xs = np.asarray(xs, dtype=np.int64)
    ops = _compile(c) if ops is None else ops
    dim = 2**c.n_qubits
    step = _batch_size(c.n_qubits)
    out = np.empty(xs.size)
    for s in range(0, xs.size, step):
        rows = evolve_basis_states(c, 2 * xs[s : s + step], ops)
        out[s : s + step] = _kernels.clean_zero_prob(rows.reshape(-1), dim)
    return out


def dqc1_exact_p0(d: DQC1Circuit, cap: int = P0_CAP) -> float:
    """Probability that the clean qubit reads 0, averaged over the mixed register."""
    _check_cap(d.n_mixed, cap, "dqc1_exact_p0")
    probs = clean_zero_probs(d.circuit, np.arange(2**d.n_mixed))
    return float(min(1.0, max(0.0, probs.mean())))


def _draw(seed: int, start: int, count: int, n_mixed: int):
    # shot i owns Philox counter block i: word 0 picks the input, word 1 the outcome
    bg = np.random.Philox(key=seed)
    bg.advance(start)
    raw = bg.random_raw(4 * count).reshape(count, 4)
    if n_mixed:
        xs = (raw[:, 0] >> np.uint64(64 - n_mixed)).astype(np.int64)
    else:
        xs = np.zeros(count, dtype=np.int64)
    u = (raw[:, 1] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return xs, u


def _chunk_zeros(d: DQC1Circuit, seed: int, start: int, count: int, ops, table) -> int:
    xs, u = _draw(seed, start, count, d.n_mixed)
    if table is not None:
        p = table[xs]
    else:
        uniq, inv = np.unique(xs, return_inverse=True)
        p = clean_zero_probs(d.circuit, uniq, ops)[inv]
    return int(np.count_nonzero(u < p))


def dqc1_sample(d: DQC1Circuit, plan: ShotPlan, workers: int = 1) -> tuple[int, int]:
    """Sample the clean-qubit measurement ``plan.shots`` times.

    Each shot draws its mixed-register input and its outcome from a counter-based
    stream keyed by ``plan.seed`` and indexed by the shot number, so the counts do
    not depend on ``workers`` or on chunking.
    """
    _check_cap(d.circuit.n_qubits, STATEVECTOR_CAP, "dqc1_sample")
    ops = _compile(d.circuit)
    table = None
    if d.n_mixed <= TABLE_MAX_QUBITS and 2**d.n_mixed <= plan.shots:
        table = clean_zero_probs(d.circuit, np.arange(2**d.n_mixed), ops)
    chunk = max(1, min(SHOT_CHUNK, -(-plan.shots // (4 * max(1, workers)))))
    starts = range(0, plan.shots, chunk)

    def run(start: int) -> int:
        return _chunk_zeros(d, plan.seed, start, min(chunk, plan.shots - start), ops, table)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            zeros = sum(pool.map(run, starts))
    else:
        zeros = sum(run(s) for s in starts)
    return zeros, plan.shots - zeros
