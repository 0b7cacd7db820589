"""Stochastic trace estimators over matvec-capable PSD operators.

Estimators probe the real symmetrization (A + conj(A))/2, which for a real
probe vector v is simply Re(A v); it has the same trace as Hermitian A and
stays PSD, so all probe linear algebra runs in real arithmetic. Probes are
i.i.d. +-1 vectors. The operator protocol is duck-typed: `.dim`,
`.matvec_block(V) -> V'` on (dim, width) complex blocks, and a `.psd`
attestation flag that the estimators require before probing.

`matvec_count` in a TraceEstimate counts applications of the probed operator
to single vectors; for the compressed estimator each of those costs exactly
one inner (full-dimension) matvec plus two Clifford applications.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .clifford import CompressedOracle, compression_width, sample_clifford
from .errors import ValidationError


@dataclass
class EstimatorConfig:
    probes: int = 0
    delta: float = 0.1
    eta: float = 0.01
    seed: int | None = None
    compression: int | None = None
    boost: int = 1

    def validate(self) -> None:
        if self.probes < 0:
            raise ValidationError("probe count must be >= 0")
        if not 0 < self.delta < 1:
            raise ValidationError("delta must lie in (0, 1)")
        if not 0 < self.eta < 0.5:
            raise ValidationError("eta must lie in (0, 1/2)")
        if self.boost < 1 or self.boost % 2 == 0:
            raise ValidationError("boost repetitions must be odd")


@dataclass
class TraceEstimate:
    value: float
    matvec_count: int
    wall_time_s: float
    method: str
    config: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "matvec_count": self.matvec_count,
            "wall_time_s": self.wall_time_s,
            "method": self.method,
            "config": self.config,
            "details": self.details,
        }


class DenseOperator:
    """Dense-matrix operator for tests and small-scale runs."""

    def __init__(self, mat: np.ndarray, psd: bool = False):
        mat = np.asarray(mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError("operator matrix must be square")
        self.mat = mat
        self.dim = mat.shape[0]
        self.psd = psd
        self.matvec_count = 0

    def matvec_block(self, v: np.ndarray) -> np.ndarray:
        self.matvec_count += v.shape[1]
        return self.mat @ v


class CountingOperator:
    """Forwarding wrapper that ledgers single-vector applications."""

    def __init__(self, op, psd: bool | None = None):
        self._op = op
        self.dim = op.dim
        self.psd = op.psd if psd is None else psd
        self.matvec_count = 0

    def matvec_block(self, v: np.ndarray) -> np.ndarray:
        self.matvec_count += v.shape[1]
        return self._op.matvec_block(v)


def _require_psd(op) -> None:
    if not getattr(op, "psd", False):
        raise ValidationError(
            "trace estimators require a PSD attestation on the operator; "
            "relative-error guarantees fail for indefinite inputs"
        )


def _real_matvec(op, v_real: np.ndarray) -> np.ndarray:
    out = op.matvec_block(np.ascontiguousarray(v_real, dtype=np.complex128))
    return np.real(out)


def _rademacher(rng: np.random.Generator, d: int, m: int) -> np.ndarray:
    return 2.0 * rng.integers(0, 2, size=(d, m)).astype(np.float64) - 1.0


def probes_for(
    delta: float, eta: float, c1: float = 4.0, c2: float = 4.0, floor: int = 2
) -> int:
    """m = ceil(c1 sqrt(ln(1/eta))/delta + c2 ln(1/eta)), floored at `floor`."""
    if not 0 < delta < 1 or not 0 < eta < 1:
        raise ValidationError("delta and eta must lie in (0, 1)")
    ln = math.log(1.0 / eta)
    return max(floor, math.ceil(c1 * math.sqrt(ln) / delta + c2 * ln))


def hutchinson(A, m: int, rng: np.random.Generator, chunk: int = 4096) -> TraceEstimate:
    """Plain Hutchinson estimator: mean of <psi|A|psi> over +-1 probes."""
    _require_psd(A)
    if m < 1:
        raise ValidationError("probe count must be >= 1")
    t0 = time.perf_counter()
    d = A.dim
    total = 0.0
    done = 0
    calls = 0
    while done < m:
        w = min(chunk, m - done)
        s = _rademacher(rng, d, w)
        total += float(np.sum(s * _real_matvec(A, s)))
        calls += w
        done += w
    value = total / m
    return TraceEstimate(
        value=value,
        matvec_count=calls,
        wall_time_s=time.perf_counter() - t0,
        method="hutchinson",
        config={"m": m},
    )


def _orth_truncate(y: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Gram-Schmidt basis of the columns of y, dropping near-dependent ones."""
    d, m = y.shape
    q = np.empty((d, m))
    r = 0
    for i in range(m):
        v = y[:, i].copy()
        n0 = np.linalg.norm(v)
        if n0 == 0.0:
            continue
        for _ in range(2):  # re-orthogonalize once for stability
            if r:
                v -= q[:, :r] @ (q[:, :r].T @ v)
        nv = np.linalg.norm(v)
        if nv < rel_tol * n0:
            continue
        q[:, r] = v / nv
        r += 1
    return q[:, :r]


def hutchpp(A, m: int, rng: np.random.Generator) -> TraceEstimate:
    """Hutch++: exact trace on a random range plus Hutchinson on the residual.

    Draws 2m probes; the first m build an orthonormal range basis Q of the
    A-images (rank l' <= m after truncation), the rest probe (I-Q)A(I-Q).
    Operator applications: m + l' + m <= 3m.
    """
    _require_psd(A)
    if m < 1:
        raise ValidationError("probe count must be >= 1")
    t0 = time.perf_counter()
    d = A.dim
    s = _rademacher(rng, d, m)
    g = _rademacher(rng, d, m)
    y = _real_matvec(A, s)
    q = _orth_truncate(y)
    rank = q.shape[1]
    calls = m + rank + m
    if rank:
        aq = _real_matvec(A, q)
        head = float(np.sum(q * aq))
        g = g - q @ (q.T @ g)
    else:
        head = 0.0
    ag = _real_matvec(A, g)
    tail = float(np.sum(g * ag)) / m
    return TraceEstimate(
        value=head + tail,
        matvec_count=calls,
        wall_time_s=time.perf_counter() - t0,
        method="hutchpp",
        config={"m": m},
        details={"range_rank": rank},
    )


def compressed_hutchpp(
    A,
    n: int,
    delta: float,
    eta: float,
    rng: np.random.Generator,
    *,
    split: tuple[float, float] = (0.5, 0.5),
    eta_split: tuple[float, float] = (0.5, 0.5),
    k_override: int | None = None,
    k1_constant: float | None = None,
    c1: float = 4.0,
    c2: float = 4.0,
) -> TraceEstimate:
    """Hutch++ applied to a random Clifford compression of A.

    The error budget `delta` is split between the compression statistics and
    the Hutch++ run (default 50/50, giving the 2^k >= 800/delta^2 width at
    eta=0.01); `k1_constant` overrides the width rule with
    2^k >= k1_constant/delta^2 directly. When the required k reaches n the
    compression is bypassed (identity U) and, since that stage is then exact,
    its delta and eta shares are reallocated to the Hutch++ stage.
    """
    _require_psd(A)
    if A.dim != (1 << n):
        raise ValidationError("operator dimension does not match qubit count")
    t0 = time.perf_counter()
    if k_override is not None:
        k = k_override
        if not 0 <= k <= n:
            raise ValidationError("compression override must satisfy 0 <= k <= n")
    elif k1_constant is not None:
        k = compression_width(delta, 1.0 / k1_constant)
    else:
        k = compression_width(split[0] * delta, eta_split[0] * eta)
    bypassed = k >= n
    if bypassed:
        k = n
        delta_h, eta_h = delta, eta
        oracle = A
        tableau = None
    else:
        delta_h = split[1] * delta
        eta_h = eta_split[1] * eta
        tableau = sample_clifford(n, rng)
        oracle = CompressedOracle(k, tableau, A)
    m = probes_for(delta_h, eta_h, c1=c1, c2=c2)
    est = hutchpp(oracle, m, rng)
    scale = float(2 ** (n - k))
    return TraceEstimate(
        value=scale * est.value,
        matvec_count=est.matvec_count,
        wall_time_s=time.perf_counter() - t0,
        method="compressed-hutchpp",
        config={"delta": delta, "eta": eta, "m": m},
        details={
            "k_compress": k,
            "bypassed": bypassed,
            "range_rank": est.details.get("range_rank"),
            "delta_hutch": delta_h,
            "eta_hutch": eta_h,
        },
    )


def median_boost(make_estimate, ell: int, rng: np.random.Generator) -> TraceEstimate:
    """Median of `ell` independent repetitions of a base estimator.

    `make_estimate` receives an independent child generator per repetition;
    failure probability of the median decays exponentially in ell provided
    the base succeeds with probability > 1/2.
    """
    if ell < 1 or ell % 2 == 0:
        raise ValidationError("boost repetitions must be odd")
    t0 = time.perf_counter()
    runs = [make_estimate(child) for child in rng.spawn(ell)]
    values = sorted(r.value for r in runs)
    base = runs[0]
    return TraceEstimate(
        value=values[ell // 2],
        matvec_count=sum(r.matvec_count for r in runs),
        wall_time_s=time.perf_counter() - t0,
        method=base.method + f"+median{ell}",
        config=dict(base.config, boost=ell),
        details=dict(base.details, values=values),
    )
