"""Command-line front end.

Exit codes: 0 success, 2 verification failure, 3 input format error, 4 cap exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__
from .builder import build_otoc_dqc1, imaginary_variant
from .circuit import Circuit, CircuitFormatError, circuit_from_dict, circuit_to_dict, random_circuit
from .dynamics import HamiltonianSpec, trotterize
from .estimator import TermCapExceeded, estimate_otoc
from .instances import instance_from_dict, instance_to_dict
from .reduction import (
    UnsupportedPairCount,
    compile_trace_to_otoc,
    fit_affine_relation,
    probe_wires,
    seeded_family,
    verify_reduction,
)
from .sim import (
    CapExceededError,
    DQC1Circuit,
    ShotPlan,
    dqc1_exact_p0,
    dqc1_sample,
    exact_otoc,
    run_statevector,
)

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_INPUT = 3
EXIT_CAP = 4

# (W wires, V wires), 1-based, for k = 1, 2, 3, 4, 8
REFERENCE_WIRE_TABLES = {
    1: ([1], [1]),
    2: ([1, 1], [2, 2]),
    3: ([1, 3, 2], [2, 1, 3]),
    4: ([1, 1, 1, 1], [2, 3, 2, 3]),
    8: ([1] * 8, [2, 3, 2, 4, 2, 3, 2, 4]),
}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# --- file helpers --------------------------------------------------------------------


def _read_json(path: str) -> tuple[dict, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc


def _dump(doc) -> bytes:
    return (json.dumps(doc, indent=1, sort_keys=True) + "\n").encode()


def _write_atomic(path: str, data: bytes) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _emit(args, doc, inputs: dict[str, str], started: float) -> None:
    data = _dump(doc)
    if args.out is None:
        sys.stdout.write(data.decode())
        return
    _write_atomic(args.out, data)
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    manifest = {
        "command": args.command,
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "inputs": inputs,
        "output": {args.out: hashlib.sha256(data).hexdigest()},
        "elapsed": time.perf_counter() - started,
    }
    _write_atomic(args.out + ".manifest.json", _dump(manifest))


def _load_dqc1(doc: dict) -> DQC1Circuit:
    try:
        return DQC1Circuit(
            circuit_from_dict(doc["circuit"]),
            int(doc["n_mixed"]),
            doc.get("statistic", "real"),
            doc.get("meaning", ""),
            bool(doc.get("conjugate", False)),
            int(doc.get("clean_qubit", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise CircuitFormatError(f"bad DQC1 document: {exc}") from exc


def dqc1_to_dict(d: DQC1Circuit) -> dict:
    return {
        "circuit": circuit_to_dict(d.circuit),
        "clean_qubit": d.clean_qubit,
        "n_mixed": d.n_mixed,
        "statistic": d.statistic,
        "meaning": d.meaning,
        "conjugate": d.conjugate,
    }


# --- commands ------------------------------------------------------------------------


def cmd_random_circuit(args, started):
    c = random_circuit(args.n, args.depth, args.seed)
    _emit(args, circuit_to_dict(c), {}, started)
    return EXIT_OK


def cmd_compile_reduction(args, started):
    doc, digest = _read_json(args.inp)
    C = circuit_from_dict(doc)
    try:
        inst = compile_trace_to_otoc(C, args.k)
    except UnsupportedPairCount as exc:
        raise InputError(str(exc)) from exc
    _emit(args, instance_to_dict(inst), {args.inp: digest}, started)
    return EXIT_OK


def cmd_build_dqc1(args, started):
    doc, digest = _read_json(args.inp)
    inst = instance_from_dict(doc)
    if not inst.is_pauli():
        raise InputError("build-dqc1 needs Pauli probes; use 'estimate' for dense observables")
    d = build_otoc_dqc1(inst, fallback=args.fallback)
    if args.imag:
        d = imaginary_variant(d)
    _emit(args, dqc1_to_dict(d), {args.inp: digest}, started)
    return EXIT_OK


def cmd_simulate(args, started):
    doc, digest = _read_json(args.inp)
    d = _load_dqc1(doc)
    out = {"n_mixed": d.n_mixed, "statistic": d.statistic}
    if args.exact:
        out["p0"] = dqc1_exact_p0(d)
    else:
        if args.seed is None:
            raise InputError("--seed is required for sampling")
        zeros, ones = dqc1_sample(d, ShotPlan(args.shots, seed=args.seed), workers=args.threads)
        out.update(shots=args.shots, seed=args.seed, count_zero=zeros, count_one=ones, p0=zeros / args.shots)
    _emit(args, out, {args.inp: digest}, started)
    return EXIT_OK


def cmd_estimate(args, started):
    doc, digest = _read_json(args.inp)
    inst = instance_from_dict(doc)
    if args.exact:
        z = exact_otoc(inst)
        out = {"value": [z.real, z.imag], "exact": True}
    else:
        if args.seed is None:
            raise InputError("--seed is required for sampling")
        r = estimate_otoc(inst.U, inst.W, inst.V, args.eps, args.fail, args.seed, workers=args.threads)
        out = r.as_dict()
    _emit(args, out, {args.inp: digest}, started)
    return EXIT_OK


def cmd_trotterize(args, started):
    if args.model == "ising":
        h = HamiltonianSpec.ising(args.n, args.coupling, args.field)
    else:
        h = HamiltonianSpec.xxz(args.n, args.coupling, args.delta)
    _emit(args, circuit_to_dict(trotterize(h, args.t, args.steps)), {}, started)
    return EXIT_OK


def verify_appendix(seed: int = 0, family_size: int = 6, tol: float = 1e-10) -> dict:
    entries = []
    family = seeded_family(family_size, seed)
    identity = Circuit(2)
    for k, (w_ref, v_ref) in REFERENCE_WIRE_TABLES.items():
        inst = compile_trace_to_otoc(Circuit(1), k)
        w, v = probe_wires(inst)
        entries.append({"check": "wire-table", "k": k, "W": w, "V": v, "passed": (w, v) == (w_ref, v_ref)})
        r = verify_reduction(identity, k, tol)
        entries.append({"check": "identity", **r.as_dict()})
        for c in family:
            r = verify_reduction(c, k, tol)
            built = compile_trace_to_otoc(c, k)
            p0 = dqc1_exact_p0(build_otoc_dqc1(built))
            gap = abs(p0 - (1 + r.otoc.real) / 2)
            entry = {"check": "family", **r.as_dict(), "p0_gap": gap}
            entry["passed"] = r.passed and gap <= tol
            entries.append(entry)
    slope, offset, resid = fit_affine_relation(3, family)
    entries.append(
        {"check": "six-point-fit", "slope": slope, "offset": offset, "residual": resid, "passed": resid <= tol}
    )
    return {"seed": seed, "passed": all(e["passed"] for e in entries), "entries": entries}


def cmd_verify_appendix(args, started):
    report = verify_appendix(args.seed)
    _emit(args, report, {}, started)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def bench(n: int = 20, depth: int = 100, seed: int = 0, dqc1_mixed: int = 10, shots: int = 20000, threads: int = 1) -> dict:
    c = random_circuit(n, depth, seed, two_qubit_fraction=1.0)
    run_statevector(c, 0)  # compile kernels
    t0 = time.perf_counter()
    run_statevector(c, 0)
    gate_rate = depth / (time.perf_counter() - t0)

    d = build_otoc_dqc1(compile_trace_to_otoc(random_circuit(dqc1_mixed - 3, 20, seed), 4))
    t0 = time.perf_counter()
    dqc1_sample(d, ShotPlan(shots, seed=seed), workers=threads)
    shot_rate = shots / (time.perf_counter() - t0)
    return {
        "statevector": {"qubits": n, "depth": depth, "gates_per_second": gate_rate},
        "dqc1": {"n_mixed": d.n_mixed, "gates": len(d.circuit), "shots": shots, "shots_per_second": shot_rate},
        "threads": threads,
    }


def cmd_bench(args, started):
    _emit(args, bench(args.n, args.depth, args.seed, threads=args.threads), {}, started)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="otoc-dqc1", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--out", default=None, help="output file (stdout when omitted)")
        sp.add_argument("--threads", type=int, default=1)
        return sp

    sp = add("random-circuit", cmd_random_circuit, "seeded Haar-random circuit")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)

    sp = add("compile-reduction", cmd_compile_reduction, "trace circuit -> 2k-point OTOC instance")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--in", dest="inp", required=True)

    sp = add("build-dqc1", cmd_build_dqc1, "OTOC instance -> one-clean-qubit circuit")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--imag", action="store_true")
    sp.add_argument("--fallback", action="store_true")

    sp = add("simulate", cmd_simulate, "sample or evaluate a DQC1 circuit")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--shots", type=int, default=10000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--exact", action="store_true")

    sp = add("estimate", cmd_estimate, "estimate an OTOC instance")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--fail", type=float, default=0.05)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--exact", action="store_true")

    sp = add("trotterize", cmd_trotterize, "first-order Trotter circuit of a spin chain")
    sp.add_argument("--model", choices=["ising", "xxz"], required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--coupling", type=float, default=1.0)
    sp.add_argument("--field", type=float, default=1.0)
    sp.add_argument("--delta", type=float, default=1.0)

    sp = add("verify-appendix", cmd_verify_appendix, "check the reduction gadgets against oracles")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("bench", cmd_bench, "statevector and sampler throughput")
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--depth", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        return args.func(args, started)
    except (InputError, CircuitFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapExceededError, TermCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
