"""Benchmark harnesses: estimator cost/accuracy grids and kernel-backend timing.

The estimator benchmark runs a declared grid of (n, method, delta, seed) on
seeded random instances and emits CSV rows with the exact header

    method,n,delta,k_compress,taylor_order,matvecs,wall_ms,rel_err_vs_exact

`matvecs` counts applications of the probed operator to single vectors (for
the compressed method, equivalently its inner full-dimension matvecs).
"""

from __future__ import annotations

import csv
import io
import time

import numpy as np

from ._backend import USE_NUMBA, backend_name
from . import _kernels
from .errors import ValidationError
from .exact import DEFAULT_CAP, exact_partition
from .hamiltonian import random_local_hamiltonian
from .pipeline import estimate_partition

CSV_HEADER = [
    "method",
    "n",
    "delta",
    "k_compress",
    "taylor_order",
    "matvecs",
    "wall_ms",
    "rel_err_vs_exact",
]

DEFAULT_SUITE = {
    "n": [8, 10],
    "delta": [0.2, 0.1, 0.05],
    "methods": ["hutchinson", "hutchpp", "compressed"],
    "seeds": 3,
    "beta": 1.0,
    "locality": 3,
    "num_terms": 30,
    "norm_bound": 2.0,
    "eta": 0.05,
    "instance_seed": 2024,
}


def run_suite(suite: dict) -> list[dict]:
    cfg = dict(DEFAULT_SUITE)
    cfg.update(suite or {})
    unknown = set(cfg) - set(DEFAULT_SUITE)
    if unknown:
        raise ValidationError(f"unknown suite keys: {sorted(unknown)}")
    rows = []
    for n in cfg["n"]:
        inst_rng = np.random.default_rng(cfg["instance_seed"] + n)
        h = random_local_hamiltonian(
            n, cfg["locality"], cfg["num_terms"], inst_rng, norm_bound=cfg["norm_bound"]
        )
        z_exact = exact_partition(h, cfg["beta"]) if n <= DEFAULT_CAP else None
        for method in cfg["methods"]:
            for delta in cfg["delta"]:
                for seed_idx in range(cfg["seeds"]):
                    seed = 1_000_000 * (seed_idx + 1) + n
                    t0 = time.perf_counter()
                    est = estimate_partition(
                        h, cfg["beta"], delta, cfg["eta"], seed, method=method
                    )
                    wall_ms = (time.perf_counter() - t0) * 1e3
                    rel_err = (
                        abs(est.value / z_exact - 1.0) if z_exact else float("nan")
                    )
                    rows.append(
                        {
                            "method": method,
                            "n": n,
                            "delta": delta,
                            "k_compress": est.details.get("k_compress"),
                            "taylor_order": est.details.get("taylor_order"),
                            "matvecs": est.matvec_count,
                            "wall_ms": round(wall_ms, 3),
                            "rel_err_vs_exact": rel_err,
                        }
                    )
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        out = dict(row)
        if out.get("k_compress") is None:
            out["k_compress"] = ""
        writer.writerow(out)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# kernel backend comparison
# ---------------------------------------------------------------------------


def bench_kernels(n: int = 10, num_terms: int = 40, width: int = 64, reps: int = 10) -> dict:
    """Time the Pauli block matvec on the numba path vs the numpy fallback."""
    rng = np.random.default_rng(0)
    d = 1 << n
    v = rng.standard_normal((d, width)) + 1j * rng.standard_normal((d, width))
    v = np.ascontiguousarray(v, dtype=np.complex128)
    xm = rng.integers(0, d, num_terms).astype(np.int64)
    zm = rng.integers(0, d, num_terms).astype(np.int64)
    w = (rng.standard_normal(num_terms) + 0j).astype(np.complex128)

    def timeit(fn):
        fn(v, xm, zm, w)  # warm up / compile
        t0 = time.perf_counter()
        for _ in range(reps):
            out = fn(v, xm, zm, w)
        return (time.perf_counter() - t0) / reps * 1e3, out

    numpy_ms, ref = timeit(_kernels.pauli_block_matvec_numpy)
    result = {
        "n": n,
        "num_terms": num_terms,
        "width": width,
        "reps": reps,
        "active_backend": backend_name(),
        "numpy_ms": round(numpy_ms, 3),
    }
    if USE_NUMBA:
        numba_ms, out = timeit(_kernels.pauli_block_matvec)
        result["numba_ms"] = round(numba_ms, 3)
        result["speedup"] = round(numpy_ms / numba_ms, 2) if numba_ms > 0 else None
        result["max_abs_diff"] = float(np.max(np.abs(out - ref)))
    return result
