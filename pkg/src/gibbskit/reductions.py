"""Executable reductions among quantum counting problems, at tiny scale.

Oracles are explicit handles so each reduction is tested as pure wiring:
an exact handle computes the quantity by diagonalization, a jittered handle
perturbs it at exactly the tolerance the reduction demands (multiplicative
for partition-type and eigenvalue-count oracles, additive for mean values),
with the perturbation sign drawn from a seeded stream. Every call is recorded
on the handle for the CLI's audit trace.

Sign convention, as everywhere in this package's counting problems: the
Boltzmann exponent is absorbed into the Hamiltonian, so partition values are
Tr(e^{H}) and mean values are taken in e^{H}/Tr(e^{H}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .exact import Spectrum
from .hamiltonian import PauliString, PauliSumHamiltonian, tile_copies

# ---------------------------------------------------------------------------
# oracle handles
# ---------------------------------------------------------------------------


def _sign(rng: np.random.Generator | None) -> float:
    if rng is None:
        return 1.0
    return 1.0 if rng.integers(0, 2) else -1.0


@dataclass
class QpfOracle:
    """Relative-error oracle for Tr(e^{H}); jitter saturates the demanded tol."""

    jitter: float = 0.0
    rng: np.random.Generator | None = None
    calls: list = field(default_factory=list)

    def partition(self, h: PauliSumHamiltonian, rel_tol: float) -> float:
        if self.jitter > rel_tol + 1e-15:
            raise ValidationError(
                f"oracle jitter {self.jitter} exceeds demanded tolerance {rel_tol}"
            )
        exact = float(
            math.fsum(math.exp(e) for e in Spectrum.of(h).eigenvalues)
        )
        value = exact * (1.0 + _sign(self.rng) * self.jitter)
        self.calls.append({"kind": "qpf", "n": h.n, "rel_tol": rel_tol, "value": value})
        return value


class QmvOracle:
    """Additive-error oracle for Pauli means in e^{scale H}/Tr(e^{scale H}).

    Diagonalizes H once; per-Pauli diagonal expectations are cached so the
    telescoping reduction's m * num_terms calls stay cheap.
    """

    def __init__(
        self,
        h: PauliSumHamiltonian,
        jitter: float = 0.0,
        rng: np.random.Generator | None = None,
    ):
        self.h = h
        self.jitter = jitter
        self.rng = rng
        self.calls: list = []
        self._spec = Spectrum.of(h, vectors=True)
        self._diag_cache: dict[tuple[int, int], np.ndarray] = {}

    def _diag(self, p: PauliString) -> np.ndarray:
        key = (p.xmask, p.zmask)
        if key not in self._diag_cache:
            pv = PauliSumHamiltonian(self.h.n, [(p, 1.0)]).matvec_block(
                self._spec.eigenvectors
            )
            self._diag_cache[key] = np.real(
                np.einsum("ij,ij->j", self._spec.eigenvectors.conj(), pv)
            )
        return self._diag_cache[key]

    def mean(self, p: PauliString, scale: float, abs_tol: float) -> float:
        if p.is_identity():
            raise ValidationError("mean-value oracle requires a non-identity Pauli")
        if self.jitter > abs_tol + 1e-15:
            raise ValidationError(
                f"oracle jitter {self.jitter} exceeds demanded tolerance {abs_tol}"
            )
        expo = scale * self._spec.eigenvalues
        w = np.exp(expo - np.max(expo))
        exact = float(np.dot(w, self._diag(p)) / np.sum(w))
        value = exact + _sign(self.rng) * self.jitter
        self.calls.append(
            {"kind": "qmv", "pauli": p.label, "scale": scale, "abs_tol": abs_tol, "value": value}
        )
        return value


@dataclass
class QdosOracle:
    """Eigenvalue-count oracle meeting (1-d) m_[a,b] <= m~ <= (1+d) m_[a-e,b+e].

    The jittered variant returns one of the two corridor extremes, so it
    saturates the contract exactly at its jitter level.
    """

    spectrum: Spectrum
    jitter: float = 0.0
    rng: np.random.Generator | None = None
    calls: list = field(default_factory=list)

    def count(self, a: float, b: float, eps: float, rel_tol: float) -> float:
        if self.jitter > rel_tol + 1e-15:
            raise ValidationError(
                f"oracle jitter {self.jitter} exceeds demanded tolerance {rel_tol}"
            )
        if self.jitter == 0.0:
            value = float(self.spectrum.count_in(a, b))
        else:
            lo = (1.0 - self.jitter) * self.spectrum.count_in(a, b)
            hi = (1.0 + self.jitter) * self.spectrum.count_in(a - eps, b + eps)
            value = hi if _sign(self.rng) > 0 else lo
        self.calls.append(
            {"kind": "qdos", "a": a, "b": b, "eps": eps, "rel_tol": rel_tol, "value": value}
        )
        return value


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------


def normalize_to_unit_interval(
    h: PauliSumHamiltonian, margin: float = 1e-6
) -> tuple[PauliSumHamiltonian, float, float]:
    """Affine rescale so the spectrum lies strictly inside (0, 1).

    Returns (h', lo, span) with h' = (h - lo)/span; the margin keeps
    eigenvalues off interval endpoints (bin counts are endpoint-sensitive),
    and Z_h(beta) = e^{-beta lo} Z_{h'}(beta*span)."""
    ev = Spectrum.of(h).eigenvalues
    span = float(ev[-1] - ev[0]) + margin
    lo = float(ev[0]) - margin / 2.0
    shifted = h.scaled(1.0 / span)
    shifted.identity_coeff -= lo / span
    return shifted, lo, span


def qpf_from_qdos(
    h: PauliSumHamiltonian,
    beta: float,
    qdos: QdosOracle,
    oracle_tol: float = 0.01,
) -> dict:
    """Partition estimate from binned eigenvalue counts (spectrum in [0,1)).

    Splits [0,1) into T = max(4, ceil(4 beta)) bins, queries the count oracle
    per bin with half-bin widening, and returns (1/4) sum_j m_j e^{-beta(j-1)/T}.
    With an oracle meeting its contract at tolerance 0.01 the output lies in
    [0.99/4, 1] * Z(beta).
    """
    if beta <= 0:
        raise ValidationError("beta must be > 0")
    t_bins = max(4, math.ceil(4 * beta))
    eps = 1.0 / (2 * t_bins)
    total = 0.0
    for j in range(1, t_bins + 1):
        a = (j - 1) / t_bins
        b = j / t_bins
        m_j = qdos.count(a, b, eps, oracle_tol)
        total += m_j * math.exp(-beta * (j - 1) / t_bins)
    return {
        "estimate": total / 4.0,
        "bins": t_bins,
        "oracle_calls": t_bins,
        "window": (0.99 / 4.0, 1.0),
    }


def qmv_from_qpf(
    h: PauliSumHamiltonian,
    p: PauliString,
    epsilon: float,
    qpf: QpfOracle,
) -> dict:
    """Gibbs mean of P in e^H/Tr e^H from two partition calls.

    mu~ = (Z~(eps) - Z~(0)) / (eps Z~(0)) with both calls at relative
    tolerance eps^2/100; guarantees |mu~ - mu| <= eps.
    """
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon must lie in (0, 1)")
    if p.is_identity():
        raise ValidationError("P must be a non-identity Pauli observable")
    delta = epsilon * epsilon / 100.0
    z0 = qpf.partition(h, delta)
    z1 = qpf.partition(h.plus_pauli(p, epsilon), delta)
    mu = (z1 - z0) / (epsilon * z0)
    return {"estimate": mu, "delta_oracle": delta, "oracle_calls": 2}


def qpf_from_qmv(
    h: PauliSumHamiltonian,
    delta: float,
    qmv: QmvOracle,
    stages: int | None = None,
) -> dict:
    """Tr(e^H) via the telescoping product over beta_p = p/m.

    Each ratio Z(beta_{p+1})/Z(beta_p) is replaced by 1 + mu_p/m where mu_p
    sums one mean-value call per Pauli term at per-stage additive budget
    delta/100 (split across terms by |coefficient|); m is chosen so the
    second-order remainder ||H||^2/m^2 is at most delta/(100 m).
    """
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    dim = float(h.dim)
    if not h.terms and h.identity_coeff == 0.0:
        return {"estimate": dim, "stages": 0, "oracle_calls": 0}
    b = h.pauli_norm_bound()
    if stages is None:
        stages = max(1, math.ceil(100.0 * b * b / delta), math.ceil(b))
    coeff_sum = sum(abs(c) for _, c in h.terms)
    per_term_tol = (delta / 100.0) / coeff_sum if coeff_sum else 0.0
    calls = 0
    log_prod = 0.0
    for pstage in range(stages):
        scale = pstage / stages
        mu = h.identity_coeff
        for pauli, coeff in h.terms:
            mu += coeff * qmv.mean(pauli, scale, per_term_tol)
            calls += 1
        log_prod += math.log1p(mu / stages)
    return {
        "estimate": dim * math.exp(log_prod),
        "stages": stages,
        "oracle_calls": calls,
    }


def amplify_precision(base, copies: int):
    """Wrap a partition estimator: evaluate on `copies` disjoint copies, take the root.

    A relative error delta' on the product system becomes
    (1+delta')^{1/copies} - 1 on the returned estimate.
    """
    if copies < 1:
        raise ValidationError("copies must be >= 1")
    if copies == 1:
        return base

    def amplified(h: PauliSumHamiltonian) -> float:
        big = tile_copies(h, copies)
        return float(base(big)) ** (1.0 / copies)

    return amplified
