"""Command-line surface. Every command prints a JSON run record to stdout.

Exit codes: 0 success, 2 validation error, 3 numerical failure. The master
seed comes from --seed, falling back to the GIBBSKIT_SEED environment
variable, then to 0; rerunning with the same seed and --workers 1 reproduces
the result payload bit-exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from ._backend import USE_NUMBA, backend_name
from .bench import DEFAULT_SUITE, bench_kernels, rows_to_csv, run_suite
from .errors import NumericalError, ValidationError
from .exact import DEFAULT_CAP, Spectrum, exact_partition
from .hamiltonian import PauliString, PauliSumHamiltonian
from .pipeline import estimate_partition
from .reductions import (
    QdosOracle,
    QmvOracle,
    QpfOracle,
    normalize_to_unit_interval,
    qmv_from_qpf,
    qpf_from_qdos,
    qpf_from_qmv,
)
from .relaxation import solve_dense_free_energy


def _load_hamiltonian(path: str) -> PauliSumHamiltonian:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    return PauliSumHamiltonian.from_json(text)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GIBBSKIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ValidationError(f"GIBBSKIT_SEED={env!r} is not an integer") from exc
    return 0


def _emit(record: dict) -> None:
    json.dump(record, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")


def _cmd_exact(args) -> dict:
    h = _load_hamiltonian(args.hamiltonian)
    spec = Spectrum.of(h, cap=args.cap)
    z = spec.partition(args.beta)
    result = {
        "Z": z,
        "F": (-math.log(z) / args.beta) if args.beta > 0 else None,
        "spectrum": {
            "n": h.n,
            "levels": len(spec.eigenvalues),
            "min": float(spec.eigenvalues[0]),
            "max": float(spec.eigenvalues[-1]),
        },
    }
    return result


def _cmd_partition(args) -> dict:
    h = _load_hamiltonian(args.hamiltonian)
    est = estimate_partition(
        h,
        args.beta,
        args.delta,
        args.eta,
        _resolve_seed(args),
        method=args.method,
        boost=args.boost,
        b_override=args.norm_bound,
        use_exact_norm=args.use_exact_norm,
    )
    out = est.to_dict()
    if args.free_energy:
        if args.beta <= 0 or est.value <= 0:
            raise NumericalError("free energy needs beta > 0 and a positive Z estimate")
        out["free_energy"] = -math.log(est.value) / args.beta
    return out


def _cmd_free_energy_dense(args) -> dict:
    h = _load_hamiltonian(args.hamiltonian)
    res = solve_dense_free_energy(
        h, beta=args.beta, k=args.k, tol=args.tol, with_exact=not args.no_exact
    )
    return res.to_dict()


def _pauli_from_arg(label: str, n: int) -> PauliString:
    return PauliString.from_label(label, n)


def _cmd_reduce(args) -> dict:
    h = _load_hamiltonian(args.hamiltonian)
    seed = _resolve_seed(args)
    sweeps = []
    for rep in range(args.seeds):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))
        if args.reduction == "qpf-from-qdos":
            h_norm, lo, span = normalize_to_unit_interval(h)
            oracle = QdosOracle(
                Spectrum.of(h_norm), jitter=args.jitter if args.oracle == "jitter" else 0.0, rng=rng
            )
            out = qpf_from_qdos(h_norm, args.beta, oracle)
            out["normalization"] = {"lo": lo, "span": span}
            out["exact_Z_normalized"] = exact_partition(h_norm, args.beta)
        elif args.reduction == "qmv-from-qpf":
            if args.pauli is None:
                raise ValidationError("qmv-from-qpf requires --pauli")
            p = _pauli_from_arg(args.pauli, h.n)
            delta = args.epsilon**2 / 100.0
            oracle = QpfOracle(
                jitter=delta if args.oracle == "jitter" else 0.0, rng=rng
            )
            out = qmv_from_qpf(h, p, args.epsilon, oracle)
        else:  # qpf-from-qmv
            oracle = QmvOracle(
                h,
                jitter=(args.delta / 100.0) / max(sum(abs(c) for _, c in h.terms), 1e-12)
                if args.oracle == "jitter"
                else 0.0,
                rng=rng,
            )
            out = qpf_from_qmv(h, args.delta, oracle)
            out["exact_Z"] = float(
                math.fsum(math.exp(e) for e in Spectrum.of(h).eigenvalues)
            )
        if args.trace:
            out["oracle_trace"] = oracle.calls
        sweeps.append(out)
    return {"runs": sweeps} if args.seeds > 1 else sweeps[0]


def _cmd_bench(args) -> dict:
    if args.suite:
        with open(args.suite, "r", encoding="utf-8") as fh:
            try:
                suite = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"malformed suite file: {exc}") from exc
    else:
        suite = dict(DEFAULT_SUITE)
    rows = run_suite(suite)
    csv_text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        sys.stderr.write(csv_text)
    return {"rows": len(rows), "out": args.out, "suite": suite}


def _cmd_bench_kernels(args) -> dict:
    return bench_kernels(n=args.n, num_terms=args.terms, width=args.width, reps=args.reps)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gibbskit",
        description="Partition functions and free energies of k-local qubit Hamiltonians.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed", type=int, default=None, help="master seed (env GIBBSKIT_SEED fallback)"
    )
    common.add_argument(
        "--workers", type=int, default=None, help="kernel threads; 1 = bit-stable reference"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name: str, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    p = add_parser("exact", help="exact partition function and free energy")
    p.add_argument("hamiltonian")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(fn=_cmd_exact)

    p = add_parser("partition", help="stochastic partition-function estimate")
    p.add_argument("hamiltonian")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--method", choices=["hutchinson", "hutchpp", "compressed"], default="compressed")
    p.add_argument("--boost", type=int, default=1, help="odd median-boost repetitions")
    p.add_argument("--norm-bound", type=float, default=None, help="override b >= ||beta H||")
    p.add_argument("--use-exact-norm", action="store_true")
    p.add_argument("--free-energy", action="store_true")
    p.set_defaults(fn=_cmd_partition)

    p = add_parser("free-energy-dense", help="convex relaxation + rounding for 2-local H")
    p.add_argument("hamiltonian")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--no-exact", action="store_true", help="skip the exact-oracle comparison")
    p.set_defaults(fn=_cmd_free_energy_dense)

    p = add_parser("reduce", help="run a counting reduction against an oracle")
    p.add_argument("reduction", choices=["qpf-from-qdos", "qmv-from-qpf", "qpf-from-qmv"])
    p.add_argument("hamiltonian")
    p.add_argument("--oracle", choices=["exact", "jitter"], default="exact")
    p.add_argument("--jitter", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--pauli", type=str, default=None)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--no-trace", dest="trace", action="store_false")
    p.set_defaults(fn=_cmd_reduce)

    p = add_parser("bench", help="cost/accuracy benchmark grid -> CSV")
    p.add_argument("--suite", type=str, default=None, help="suite JSON (default: built-in)")
    p.add_argument("--out", type=str, default=None, help="CSV output path (default: stderr)")
    p.set_defaults(fn=_cmd_bench)

    p = add_parser("bench-kernels", help="numba vs numpy kernel timing")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--terms", type=int, default=40)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--reps", type=int, default=10)
    p.set_defaults(fn=_cmd_bench_kernels)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is not None and USE_NUMBA:
        import numba

        numba.set_num_threads(max(1, args.workers))
    t0 = time.perf_counter()
    try:
        result = args.fn(args)
    except ValidationError as exc:
        _emit({"error": str(exc), "kind": "validation", "exit_code": 2})
        return 2
    except NumericalError as exc:
        _emit({"error": str(exc), "kind": "numerical", "exit_code": 3})
        return 3
    record = {
        "command": args.command,
        "seed": _resolve_seed(args) if hasattr(args, "seed") else None,
        "config": {
            k: v
            for k, v in vars(args).items()
            if k not in ("fn", "command") and not callable(v)
        },
        "result": result,
        "wall_time_s": time.perf_counter() - t0,
        "version": __version__,
        "backend": backend_name(),
    }
    _emit(record)
    return 0


if __name__ == "__main__":
    sys.exit(main())
