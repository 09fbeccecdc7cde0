"""Shot budgeting, Pauli-term enumeration and recombination of DQC1 estimates."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .builder import build_otoc_dqc1, imaginary_variant
from .circuit import DEFAULT_L_MAX, Circuit, LocalObservable, PauliString, controlled_on, relabel
from .instances import OTOCInstance, Probe
from .pauli import decompose
from .sim import ShotPlan, dqc1_exact_p0, dqc1_sample, exact_normalized_trace, exact_otoc

__all__ = [
    "TERM_CAP",
    "TermCapExceeded",
    "TermEstimate",
    "EstimateResult",
    "shots_for",
    "term_seed",
    "expand_terms",
    "estimate_terms",
    "estimate_otoc",
    "bipartite_gadget",
    "avg_bipartite_otoc_dense",
    "estimate_avg_bipartite_otoc",
    "time_averaged_otoc",
]

TERM_CAP = 4096
COEFF_TOL = 1e-12


class TermCapExceeded(ValueError):
    pass


def shots_for(epsilon: float, failure_prob: float) -> int:
    """Shots so that ``2 p0_hat - 1`` is within ``epsilon`` w.p. ``>= 1 - failure_prob``.

    Hoeffding on the {0,1} clean-qubit outcome at half-width ``epsilon / 2``:
    ``ceil(ln(2/p) / (2 (epsilon/2)^2))``.
    """
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if not 0 < failure_prob < 1:
        raise ValueError("failure_prob must lie in (0, 1)")
    return max(1, math.ceil(math.log(2 / failure_prob) / (2 * (epsilon / 2) ** 2)))


def term_seed(seed: int, *index: int) -> int:
    """64-bit seed for a sub-estimate, derived from the master seed and its index."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(index))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class TermEstimate:
    label: str
    coefficient: complex
    estimate: complex
    shots: int

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "coefficient": [self.coefficient.real, self.coefficient.imag],
            "estimate": [self.estimate.real, self.estimate.imag],
            "shots": self.shots,
        }


@dataclass(frozen=True)
class EstimateResult:
    value: complex
    epsilon: float
    failure_prob: float
    shots_total: int
    seed: int
    terms: tuple[TermEstimate, ...]
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        """Result document; ``elapsed`` is left out so documents are reproducible."""
        return {
            "value": [self.value.real, self.value.imag],
            "epsilon": self.epsilon,
            "failure_prob": self.failure_prob,
            "shots_total": self.shots_total,
            "seed": self.seed,
            "terms": [t.as_dict() for t in self.terms],
            **({"details": self.details} if self.details else {}),
        }


def _probe_terms(p: Probe, n: int, l_max: int) -> list[tuple[complex, PauliString]]:
    if isinstance(p, PauliString):
        return [(1.0 + 0j, p)]
    if isinstance(p, LocalObservable):
        return decompose(p, l_max=l_max).on_register(n)
    raise TypeError(f"unsupported probe type {type(p).__name__}")


def expand_terms(
    U: Circuit,
    W: Sequence[Probe],
    V: Sequence[Probe],
    l_max: int = DEFAULT_L_MAX,
    term_cap: int = TERM_CAP,
) -> list[tuple[complex, OTOCInstance]]:
    """Distribute the alternating product over the probes' Pauli decompositions."""
    if len(W) != len(V) or not W:
        raise ValueError("need matching, non-empty W and V sequences")
    n = U.n_qubits
    per_probe = []
    for w, v in zip(W, V):
        per_probe += [_probe_terms(w, n, l_max), _probe_terms(v, n, l_max)]
    count = math.prod(len(t) for t in per_probe)
    if count > term_cap:
        raise TermCapExceeded(f"{count} Pauli terms exceeds the cap of {term_cap}")
    out = []
    for combo in itertools.product(*per_probe):
        coef = complex(np.prod([c for c, _ in combo]))
        words = [w for _, w in combo]
        out.append((coef, OTOCInstance(U, words[0::2], words[1::2])))
    return out


def _is_constant(inst: OTOCInstance) -> bool:
    return all(p.is_identity() for p in inst.W + inst.V)


def _provably_real(inst: OTOCInstance) -> bool:
    # conj(tr[W1(t)V1..Wk(t)Vk]) = tr[Wk(t)V_{k-1} .. W1(t)Vk] for Hermitian words;
    # the term is real when that word is a pair-rotation of the original
    W = [p.letters for p in inst.W]
    V = [p.letters for p in inst.V]
    Wr = W[::-1]
    Vr = V[-2::-1] + V[-1:]
    k = len(W)
    return any(W[r:] + W[:r] == Wr and V[r:] + V[:r] == Vr for r in range(k))


def _label(inst: OTOCInstance) -> str:
    return " ".join(f"{w.letters}|{v.letters}" for w, v in zip(inst.W, inst.V))


def estimate_terms(
    terms: Sequence[tuple[complex, OTOCInstance]],
    epsilon: float,
    failure_prob: float,
    seed: int,
    exact: bool = False,
    workers: int = 1,
    fallback: bool = False,
) -> EstimateResult:
    """Estimate ``sum_t coef_t * OTOC(inst_t)`` for Pauli-probe instances.

    Per-part precision is ``epsilon / sum_t |coef_t| w_t`` with ``w_t = 1`` for
    provably real terms and ``sqrt(2)`` when an imaginary part is also sampled;
    the failure probability is split evenly over all sampled parts.
    """
    if not 0 < epsilon <= 1 or not 0 < failure_prob < 1:
        raise ValueError("need 0 < epsilon <= 1 and 0 < failure_prob < 1")
    start = time.perf_counter()
    constant = 0j
    records: list[TermEstimate] = []
    sampled = []
    for idx, (coef, inst) in enumerate(terms):
        if abs(coef) < COEFF_TOL:
            continue
        if _is_constant(inst):
            constant += coef
            records.append(TermEstimate(_label(inst), coef, 1.0 + 0j, 0))
            continue
        parts = ("real",) if _provably_real(inst) else ("real", "imag")
        sampled.append((idx, coef, inst, parts))

    mass = sum(abs(c) * (1.0 if len(p) == 1 else math.sqrt(2)) for _, c, _, p in sampled)
    n_parts = sum(len(p) for *_, p in sampled)
    shots = 0
    if sampled and not exact:
        delta = min(1.0, epsilon / mass)
        shots = shots_for(delta, failure_prob / n_parts)

    value = constant
    total = 0
    for idx, coef, inst, parts in sampled:
        d_real = build_otoc_dqc1(inst, fallback=fallback)
        est = 0j
        for part_idx, part in enumerate(parts):
            d = d_real if part == "real" else imaginary_variant(d_real)
            if exact:
                p0 = dqc1_exact_p0(d)
            else:
                plan = ShotPlan(shots, min(1.0, epsilon), failure_prob, term_seed(seed, idx, part_idx))
                zeros, _ = dqc1_sample(d, plan, workers=workers)
                p0 = zeros / shots
            est += (2 * p0 - 1) * (1 if part == "real" else 1j)
        used = 0 if exact else shots * len(parts)
        total += used
        value += coef * est
        records.append(TermEstimate(_label(inst), coef, est, used))
    records.sort(key=lambda r: r.label)
    return EstimateResult(
        value=complex(value),
        epsilon=epsilon,
        failure_prob=failure_prob,
        shots_total=total,
        seed=seed,
        terms=tuple(records),
        elapsed=time.perf_counter() - start,
    )


def estimate_otoc(
    U: Circuit,
    W: Sequence[Probe],
    V: Sequence[Probe],
    epsilon: float,
    failure_prob: float,
    seed: int,
    *,
    exact: bool = False,
    l_max: int = DEFAULT_L_MAX,
    term_cap: int = TERM_CAP,
    workers: int = 1,
    fallback: bool = False,
) -> EstimateResult:
    """Estimate ``<W_1(t) V_1 ... W_k(t) V_k>`` to additive ``epsilon`` (complex modulus).

    ``exact=True`` substitutes the exact clean-qubit probability for every term
    in place of sampling, which checks decomposition and recombination.
    """
    terms = expand_terms(U, W, V, l_max=l_max, term_cap=term_cap)
    return estimate_terms(terms, epsilon, failure_prob, seed, exact, workers, fallback)


def bipartite_gadget(C: Circuit) -> Circuit:
    """``|00><00| (x) C + (I - |00><00|) (x) I`` with the two control qubits first."""
    n = C.n_qubits + 2
    return controlled_on(relabel(C, [q + 2 for q in range(C.n_qubits)], n), [(0, 0), (1, 0)])


def _bipartite_terms(C: Circuit) -> list[tuple[complex, OTOCInstance]]:
    U = bipartite_gadget(C)
    n = U.n_qubits
    terms = []
    for a in "IXYZ":
        for b in "IXYZ":
            Wp = PauliString.single(n, 0, a)
            Vp = PauliString.single(n, 1, b)
            terms.append((1 / 16 + 0j, OTOCInstance(U, [Wp, Wp], [Vp, Vp])))
    return terms


def avg_bipartite_otoc_dense(C: Circuit) -> complex:
    """Average of the 16 four-point OTOCs on the gadget, from dense matrices."""
    return complex(sum(c * exact_otoc(inst) for c, inst in _bipartite_terms(C)))


def estimate_avg_bipartite_otoc(
    C: Circuit,
    epsilon: float,
    failure_prob: float,
    seed: int,
    *,
    exact: bool = False,
    workers: int = 1,
) -> EstimateResult:
    """Average bipartite 4-point OTOC of the two-control gadget around ``C``.

    ``details`` carries the closed form ``3/4 + Re tr~[C] / 4``.
    """
    res = estimate_terms(_bipartite_terms(C), epsilon, failure_prob, seed, exact, workers)
    closed = 0.75 + 0.25 * exact_normalized_trace(C).real
    return EstimateResult(
        res.value, res.epsilon, res.failure_prob, res.shots_total, res.seed, res.terms,
        res.elapsed, {"closed_form": closed},
    )


def time_averaged_otoc(
    family: Sequence[tuple[float, Circuit]],
    W: Probe,
    V: Probe,
    epsilon: float,
    failure_prob: float,
    seed: int,
    *,
    exact: bool = False,
    workers: int = 1,
) -> EstimateResult:
    """Uniform mean over the grid of ``<W(t) V W(t) V>``.

    Each point is estimated to ``epsilon`` with failure probability
    ``failure_prob / len(family)``, so the mean is within ``epsilon`` w.p.
    ``>= 1 - failure_prob``.
    """
    if not family:
        raise ValueError("empty time family")
    start = time.perf_counter()
    per_point = failure_prob / len(family)
    records = []
    total = 0
    acc = 0j
    for i, (t, U) in enumerate(family):
        r = estimate_otoc(
            U, [W, W], [V, V], epsilon, per_point, term_seed(seed, i), exact=exact, workers=workers
        )
        acc += r.value
        total += r.shots_total
        records.append(TermEstimate(f"t={t:g}", 1 / len(family) + 0j, r.value, r.shots_total))
    return EstimateResult(
        acc / len(family), epsilon, failure_prob, total, seed, tuple(records),
        time.perf_counter() - start,
    )
