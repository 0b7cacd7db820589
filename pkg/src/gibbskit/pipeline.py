"""Relative-error partition-function estimation end to end.

Tr(e^{-beta H}) is estimated by (i) splitting off the identity component c of
H analytically (Tr e^{G + sI} = e^s Tr e^G), (ii) replacing e^G for
G = -beta(H - cI) by the positive-definite truncated Taylor polynomial
T_k(G) whose order guarantees a relative truncation error, and (iii) running
a stochastic trace estimator on T_k(G). The error budget delta is split
across the three stages, by default in equal thirds.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .exact import Spectrum
from .hamiltonian import PauliSumHamiltonian
from .trace_est import (
    TraceEstimate,
    compressed_hutchpp,
    hutchinson,
    hutchpp,
    median_boost,
    probes_for,
)

_LN2 = math.log(2.0)


@dataclass
class TaylorPlan:
    """Truncation order for T_k(x) = sum_{p<=k} x^p/p! with |e^x - T_k| <= eps on [-b,b]."""

    order: int
    norm_bound: float  # clamped to >= 1, the lemma's hypothesis
    requested_bound: float
    delta: float
    eps_trunc: float
    coeffs: np.ndarray

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Scalar T_k(x), accumulated term by term (matches the matvec path)."""
        x = np.asarray(x, dtype=float)
        acc = np.ones_like(x)
        term = np.ones_like(x)
        for p in range(1, self.order + 1):
            term = term * x / p
            acc = acc + term
        return acc


def taylor_order(b: float, delta: float) -> TaylorPlan:
    """Smallest order with k >= 4b/ln2 + ln(1/eps)/ln2 at eps = delta e^{-b}.

    b below 1 is clamped to 1 (the truncation lemma assumes b >= 1), which
    only makes the order conservative.
    """
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    if not math.isfinite(b) or b < 0:
        raise ValidationError("norm bound must be finite and >= 0")
    b_eff = max(b, 1.0)
    eps = delta * math.exp(-b_eff)
    k = math.ceil(4.0 * b_eff / _LN2 + math.log(1.0 / eps) / _LN2)
    coeffs = np.cumprod([1.0] + [1.0 / p for p in range(1, k + 1)])
    return TaylorPlan(
        order=k,
        norm_bound=b_eff,
        requested_bound=b,
        delta=delta,
        eps_trunc=eps,
        coeffs=coeffs,
    )


class TaylorOperator:
    """T_k(G) as an implicit operator; each apply costs exactly k matvecs of G.

    Positive definite whenever ||G|| <= b, so it carries a PSD attestation.
    """

    psd = True

    def __init__(self, plan: TaylorPlan, g: PauliSumHamiltonian):
        self.plan = plan
        self.g = g
        self.dim = g.dim
        self.n = g.n
        self.matvec_count = 0
        self.inner_matvecs = 0

    def matvec_block(self, v: np.ndarray) -> np.ndarray:
        if v.ndim != 2 or v.shape[0] != self.dim:
            raise ValidationError(f"block has shape {v.shape}, expected ({self.dim}, m)")
        self.matvec_count += v.shape[1]
        term = np.array(v, dtype=np.complex128, copy=True)
        acc = np.array(v, dtype=np.complex128, copy=True)
        for p in range(1, self.plan.order + 1):
            term = self.g.matvec_block(term)
            term /= p
            acc += term
        self.inner_matvecs += self.plan.order * v.shape[1]
        return acc

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matvec_block(np.asarray(v).reshape(-1, 1)).ravel()

    def dense(self) -> np.ndarray:
        return self.matvec_block(np.eye(self.dim, dtype=np.complex128))


def taylor_matvec(plan: TaylorPlan, h: PauliSumHamiltonian, v: np.ndarray) -> np.ndarray:
    """T_k(H) v for a caller-scaled H with ||H|| <= plan.norm_bound."""
    return TaylorOperator(plan, h).matvec(v)


def _surrogate(
    h: PauliSumHamiltonian,
    beta: float,
    delta_taylor: float,
    b_override: float | None,
    use_exact_norm: bool,
) -> tuple[TaylorOperator | None, float, float, TaylorPlan | None]:
    """(operator, identity shift factor, b, plan); operator None when e^G = I."""
    if beta < 0:
        raise ValidationError("beta must be >= 0")
    shift = math.exp(-beta * h.identity_coeff)
    g = h.traceless_part().scaled(-beta)
    if b_override is not None:
        b = float(b_override)
        if not math.isfinite(b) or b < 0:
            raise ValidationError("norm bound override must be finite and >= 0")
    elif use_exact_norm:
        ev = Spectrum.of(g).eigenvalues
        b = float(max(abs(ev[0]), abs(ev[-1])))
    else:
        b = g.pauli_norm_bound()
    if not g.terms:
        return None, shift, 0.0, None
    plan = taylor_order(b, delta_taylor)
    return TaylorOperator(plan, g), shift, b, plan


def estimate_partition(
    h: PauliSumHamiltonian,
    beta: float,
    delta: float,
    eta: float,
    seed: int | None,
    *,
    method: str = "compressed",
    splits: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
    b_override: float | None = None,
    use_exact_norm: bool = False,
    boost: int = 1,
    k_override: int | None = None,
    k1_constant: float | None = None,
) -> TraceEstimate:
    """Tr(e^{-beta H}) to relative error delta with probability >= 1 - eta.

    `splits` assigns the delta budget to (Taylor truncation, compression,
    probe stage); stages compose multiplicatively, so the guarantee is
    conservative up to O(delta^2). Methods: compressed (default), hutchpp,
    hutchinson. `boost` odd > 1 wraps the run in a median of repetitions.
    """
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    if not 0 < eta < 0.5:
        raise ValidationError("eta must lie in (0, 1/2)")
    if abs(sum(splits) - 1.0) > 1e-9 or any(s <= 0 for s in splits):
        raise ValidationError("delta splits must be positive and sum to 1")
    if method not in ("compressed", "hutchpp", "hutchinson"):
        raise ValidationError(f"unknown method {method!r}")

    t0 = time.perf_counter()
    op, shift, b, plan = _surrogate(h, beta, splits[0] * delta, b_override, use_exact_norm)
    master = np.random.default_rng(seed)

    if op is None:
        # G = 0: every stage is exact
        return TraceEstimate(
            value=shift * float(h.dim),
            matvec_count=0,
            wall_time_s=time.perf_counter() - t0,
            method=method,
            config={"beta": beta, "delta": delta, "eta": eta, "seed": seed},
            details={"k_compress": None, "taylor_order": 0, "b": b, "exact": True},
        )

    delta_rest = (splits[1] + splits[2]) * delta

    def single(rng: np.random.Generator) -> TraceEstimate:
        op.matvec_count = 0
        op.inner_matvecs = 0
        if method == "compressed":
            est = compressed_hutchpp(
                op,
                h.n,
                delta_rest,
                eta,
                rng,
                split=(splits[1] / (splits[1] + splits[2]), splits[2] / (splits[1] + splits[2])),
                k_override=k_override,
                k1_constant=k1_constant,
            )
        elif method == "hutchpp":
            m = probes_for(delta_rest, eta)
            est = hutchpp(op, m, rng)
        else:
            m = math.ceil(2.0 / (eta * delta_rest * delta_rest))
            est = hutchinson(op, m, rng)
        est.value *= shift
        est.details.update(
            {
                "taylor_order": plan.order,
                "b": b,
                "taylor_h_matvecs": op.inner_matvecs,
                "identity_shift": shift,
            }
        )
        est.details.setdefault("k_compress", None)
        return est

    if boost > 1:
        est = median_boost(single, boost, master)
    else:
        est = single(master)
    est.config.update({"beta": beta, "delta": delta, "eta": eta, "seed": seed})
    est.wall_time_s = time.perf_counter() - t0
    return est


def estimate_free_energy(
    h: PauliSumHamiltonian,
    beta: float,
    delta: float,
    eta: float,
    seed: int | None,
    **kwargs,
) -> dict:
    """F = -(1/beta) ln Z~. A relative delta on Z maps to an additive error
    on F of at most |ln(1-delta)|/beta whenever the Z estimate meets its
    guarantee."""
    if beta <= 0:
        raise ValidationError("beta must be > 0")
    est = estimate_partition(h, beta, delta, eta, seed, **kwargs)
    if est.value <= 0:
        raise NumericalError("partition estimate non-positive; cannot take log")
    return {
        "free_energy": -math.log(est.value) / beta,
        "additive_error_bound": abs(math.log1p(-delta)) / beta,
        "partition_estimate": est.to_dict(),
    }
