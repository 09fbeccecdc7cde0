"""Gate-level circuit representation.

Conventions used throughout the package:

* basis states are little-endian, qubit 0 is the least significant bit;
* a gate's ``targets[0]`` is the least significant bit of the gate's local
  matrix index (likewise ``support[0]`` for local observables);
* a control polarity of ``1`` fires on ``|1>``, ``0`` fires on ``|0>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "NAMED_MATRICES",
    "CircuitFormatError",
    "Gate",
    "Circuit",
    "PauliString",
    "LocalObservable",
    "gate",
    "unitary_gate",
    "compose",
    "adjoint",
    "controlled_on",
    "relabel",
    "random_circuit",
    "circuit_to_dict",
    "circuit_from_dict",
    "dumps_circuit",
    "loads_circuit",
]

UNITARY_TOL = 1e-10
DEFAULT_L_MAX = 3

_SQ2 = 1 / np.sqrt(2)
NAMED_MATRICES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
}
for _m in NAMED_MATRICES.values():
    _m.setflags(write=False)

_ADJOINT_NAME = {"I": "I", "X": "X", "Y": "Y", "Z": "Z", "H": "H", "S": "Sdg", "Sdg": "S"}
DENSE_KINDS = {1: "U1", 2: "U2"}


class CircuitFormatError(ValueError):
    """Malformed circuit, gate or probe description."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    matrix: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind in NAMED_MATRICES:
            mat = NAMED_MATRICES[self.kind] if self.matrix is None else _frozen(self.matrix)
            if len(self.targets) != 1:
                raise CircuitFormatError(f"named gate {self.kind} takes one target")
        elif self.kind in ("U1", "U2"):
            if self.matrix is None:
                raise CircuitFormatError(f"gate kind {self.kind} needs a matrix")
            mat = _frozen(self.matrix)
            if len(self.targets) != int(self.kind[1]):
                raise CircuitFormatError(f"{self.kind} gate needs {self.kind[1]} target(s)")
        else:
            raise CircuitFormatError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(
            self, "controls", tuple((int(q), int(p)) for q, p in self.controls)
        )
        object.__setattr__(self, "matrix", mat)

        dim = 2 ** len(self.targets)
        if mat.shape != (dim, dim):
            raise CircuitFormatError(f"matrix shape {mat.shape} does not fit {len(self.targets)} target(s)")
        if np.max(np.abs(mat.conj().T @ mat - np.eye(dim))) > UNITARY_TOL:
            raise CircuitFormatError("gate matrix is not unitary")
        qubits = self.qubits
        if len(set(qubits)) != len(qubits):
            raise CircuitFormatError(f"repeated qubit index in gate {self.kind} {qubits}")
        if any(q < 0 for q in qubits):
            raise CircuitFormatError("negative qubit index")
        if any(p not in (0, 1) for _, p in self.controls):
            raise CircuitFormatError("control polarity must be 0 or 1")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.targets == other.targets
            and self.controls == other.controls
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None  # type: ignore[assignment]

    def dagger(self) -> Gate:
        kind = _ADJOINT_NAME.get(self.kind, self.kind)
        return Gate(kind, self.targets, self.controls, self.matrix.conj().T)

    def with_controls(self, controls: Iterable[tuple[int, int]]) -> Gate:
        return Gate(self.kind, self.targets, self.controls + tuple(controls), self.matrix)

    def remap(self, mapping: Sequence[int]) -> Gate:
        return Gate(
            self.kind,
            tuple(mapping[t] for t in self.targets),
            tuple((mapping[q], p) for q, p in self.controls),
            self.matrix,
        )


def gate(kind: str, target: int, controls: Iterable[tuple[int, int]] = ()) -> Gate:
    """Named single-qubit gate, e.g. ``gate("H", 0)``."""
    return Gate(kind, (target,), tuple(controls))


def unitary_gate(matrix, *targets: int, controls: Iterable[tuple[int, int]] = ()) -> Gate:
    matrix = np.asarray(matrix, dtype=complex)
    return Gate(DENSE_KINDS[len(targets)], targets, tuple(controls), matrix)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 0:
            raise CircuitFormatError("negative qubit count")
        for g in self.gates:
            if not isinstance(g, Gate):
                raise CircuitFormatError(f"not a gate: {g!r}")
            if any(q >= self.n_qubits for q in g.qubits):
                raise CircuitFormatError(
                    f"gate {g.kind} on {g.qubits} outside a {self.n_qubits}-qubit circuit"
                )

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def then(self, *gates: Gate) -> Circuit:
        """Append gates (applied after the existing ones)."""
        return Circuit(self.n_qubits, self.gates + gates)

    def acted_qubits(self) -> set[int]:
        return {q for g in self.gates for q in g.qubits}


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Operator product ``a @ b``: ``b`` runs first."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} != {b.n_qubits}")
    return Circuit(a.n_qubits, b.gates + a.gates)


def adjoint(c: Circuit) -> Circuit:
    return Circuit(c.n_qubits, tuple(g.dagger() for g in reversed(c.gates)))


def controlled_on(c: Circuit, controls: Sequence[tuple[int, int]]) -> Circuit:
    """Attach the whole control set to every gate of ``c``.

    The register is widened when a control index lies beyond ``c``.
    """
    controls = tuple((int(q), int(p)) for q, p in controls)
    cq = [q for q, _ in controls]
    if len(set(cq)) != len(cq):
        raise ValueError("repeated control qubit")
    overlap = set(cq) & c.acted_qubits()
    if overlap:
        raise ValueError(f"control qubits {sorted(overlap)} overlap the circuit's support")
    n = max([c.n_qubits] + [q + 1 for q in cq])
    return Circuit(n, tuple(g.with_controls(controls) for g in c.gates))


def relabel(c: Circuit, mapping: Sequence[int], n_qubits: int) -> Circuit:
    """Move qubit ``q`` of ``c`` to ``mapping[q]`` inside an ``n_qubits`` register."""
    if len(mapping) < c.n_qubits:
        raise ValueError("mapping shorter than the circuit's register")
    return Circuit(n_qubits, tuple(g.remap(mapping) for g in c.gates))


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_circuit(n_qubits: int, depth: int, seed: int, two_qubit_fraction: float = 0.5) -> Circuit:
    """Seeded circuit of ``depth`` Haar-random one- and two-qubit gates."""
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(depth):
        if n_qubits >= 2 and rng.random() < two_qubit_fraction:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(unitary_gate(_haar_unitary(4, rng), int(a), int(b)))
        else:
            q = int(rng.integers(n_qubits))
            gates.append(unitary_gate(_haar_unitary(2, rng), q))
    return Circuit(n_qubits, tuple(gates))


_PAULI_LETTERS = "IXYZ"


@dataclass(frozen=True)
class PauliString:
    """Pauli word; ``letters[q]`` acts on qubit ``q``."""

    letters: str

    def __post_init__(self):
        if any(ch not in _PAULI_LETTERS for ch in self.letters):
            raise CircuitFormatError(f"bad Pauli word {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls("I" * n_qubits)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> PauliString:
        if not 0 <= qubit < n_qubits:
            raise CircuitFormatError(f"qubit {qubit} outside {n_qubits}-qubit register")
        return cls("I" * qubit + letter + "I" * (n_qubits - qubit - 1))

    @classmethod
    def from_sparse(cls, n_qubits: int, qubits: Sequence[int], letters: str) -> PauliString:
        out = ["I"] * n_qubits
        for q, ch in zip(qubits, letters, strict=True):
            if not 0 <= q < n_qubits:
                raise CircuitFormatError(f"qubit {q} outside {n_qubits}-qubit register")
            out[q] = ch
        return cls("".join(out))

    def support(self) -> tuple[int, ...]:
        return tuple(q for q, ch in enumerate(self.letters) if ch != "I")

    def is_identity(self) -> bool:
        return not self.support()

    def matrix(self) -> np.ndarray:
        # kron puts its first factor on the most significant bit
        return reduce(np.kron, [NAMED_MATRICES[ch] for ch in reversed(self.letters)], np.eye(1))

    def gates(self, offset: int = 0, controls: Iterable[tuple[int, int]] = ()) -> list[Gate]:
        controls = tuple(controls)
        return [gate(self.letters[q], q + offset, controls) for q in self.support()]

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True, eq=False)
class LocalObservable:
    """Dense operator on a few qubits; ``support[0]`` is the low bit of ``matrix``."""

    support: tuple[int, ...]
    matrix: np.ndarray
    l_max: int = DEFAULT_L_MAX

    def __post_init__(self):
        support = tuple(int(q) for q in self.support)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        if len(set(support)) != len(support):
            raise CircuitFormatError("repeated qubit in observable support")
        if len(support) > self.l_max:
            raise ValueError(f"support size {len(support)} exceeds l_max={self.l_max}")
        dim = 2 ** len(support)
        if self.matrix.shape != (dim, dim):
            raise CircuitFormatError(f"observable matrix must be {dim}x{dim}")

    @property
    def l(self) -> int:
        return len(self.support)

    def embed(self, n_qubits: int) -> np.ndarray:
        """Dense ``2^n x 2^n`` matrix of the observable inside ``n_qubits``."""
        if any(q >= n_qubits for q in self.support):
            raise ValueError(f"observable support {self.support} outside {n_qubits} qubits")
        others = [q for q in range(n_qubits) if q not in self.support]
        full = np.kron(self.matrix, np.eye(2 ** len(others)))
        # kron axes run most-significant first; move qubit q to axis n-1-q
        order = list(reversed(self.support)) + list(reversed(others))
        src = np.argsort([n_qubits - 1 - q for q in order])
        t = full.reshape([2] * (2 * n_qubits))
        t = t.transpose(list(src) + [n_qubits + i for i in src])
        return t.reshape(2**n_qubits, 2**n_qubits)


# --- serialization ----------------------------------------------------------------


def _matrix_to_json(m: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m).reshape(-1)]


def _matrix_from_json(entries, dim: int | None = None) -> np.ndarray:
    try:
        flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise CircuitFormatError(f"bad matrix entries: {exc}") from exc
    side = int(round(np.sqrt(flat.size)))
    if side * side != flat.size or (dim is not None and side != dim):
        raise CircuitFormatError(f"matrix with {flat.size} entries is not square of the right size")
    return flat.reshape(side, side)


def gate_to_dict(g: Gate) -> dict:
    d: dict = {
        "kind": g.kind,
        "targets": list(g.targets),
        "controls": [[q, str(p)] for q, p in g.controls],
    }
    if g.kind not in NAMED_MATRICES or not np.array_equal(g.matrix, NAMED_MATRICES[g.kind]):
        d["matrix"] = _matrix_to_json(g.matrix)
    return d


def gate_from_dict(d: dict) -> Gate:
    try:
        kind = d["kind"]
        targets = tuple(int(t) for t in d["targets"])
        controls = tuple((int(q), int(p)) for q, p in d.get("controls", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitFormatError(f"bad gate entry {d!r}") from exc
    matrix = None
    if "matrix" in d:
        matrix = _matrix_from_json(d["matrix"], 2 ** len(targets))
    return Gate(kind, targets, controls, matrix)


def circuit_to_dict(c: Circuit) -> dict:
    return {"qubits": c.n_qubits, "gates": [gate_to_dict(g) for g in c.gates]}


def circuit_from_dict(d: dict) -> Circuit:
    if not isinstance(d, dict) or "qubits" not in d or "gates" not in d:
        raise CircuitFormatError("circuit document needs 'qubits' and 'gates'")
    try:
        n = int(d["qubits"])
    except (TypeError, ValueError) as exc:
        raise CircuitFormatError("'qubits' must be an integer") from exc
    return Circuit(n, tuple(gate_from_dict(g) for g in d["gates"]))


def dumps_circuit(c: Circuit) -> str:
    return json.dumps(circuit_to_dict(c), indent=1)


def loads_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"invalid JSON: {exc}") from exc
    return circuit_from_dict(doc)
