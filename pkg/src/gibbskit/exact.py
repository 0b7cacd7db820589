"""Brute-force ground truth: dense matrices, spectra, exact thermal quantities.

Everything here is O(8^n) at worst and capped at n <= 12 by default (a dense
4096x4096 Hermitian eigensolve); estimators elsewhere in the package are
validated against these routines.

Sign convention for mean values: the Boltzmann exponent's sign is absorbed
into the Hamiltonian, i.e. gibbs_mean(H, P, beta) = Tr(P e^{beta H}) / Tr(e^{beta H}).
The thermal state of +H at inverse temperature b is obtained with beta=-b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .hamiltonian import PauliString, PauliSumHamiltonian

DEFAULT_CAP = 12


def _check_cap(h: PauliSumHamiltonian, cap: int) -> None:
    if h.n > cap:
        raise ValidationError(f"n={h.n} exceeds exact cap {cap}")


def dense_matrix(h: PauliSumHamiltonian, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Entrywise-exact 2^n x 2^n Hermitian matrix of H (one block matvec on I)."""
    _check_cap(h, cap)
    return h.matvec_block(np.eye(h.dim, dtype=np.complex128))


@dataclass
class Spectrum:
    """Ascending eigenvalues of a Hamiltonian, optionally with eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @classmethod
    def of(
        cls, h: PauliSumHamiltonian, vectors: bool = False, cap: int = DEFAULT_CAP
    ) -> "Spectrum":
        mat = dense_matrix(h, cap)
        if vectors:
            vals, vecs = np.linalg.eigh(mat)
            return cls(vals, vecs)
        return cls(np.linalg.eigvalsh(mat))

    def partition(self, beta: float) -> float:
        """Z(beta) = sum_i exp(-beta e_i) with compensated summation."""
        return math.fsum(math.exp(-beta * e) for e in self.eigenvalues)

    def count_in(self, a: float, b: float) -> int:
        if a > b:
            raise ValidationError("interval endpoints must satisfy a <= b")
        e = self.eigenvalues
        return int(np.count_nonzero((e >= a) & (e <= b)))


def exact_partition(h: PauliSumHamiltonian, beta: float, cap: int = DEFAULT_CAP) -> float:
    if beta < 0:
        raise ValidationError("beta must be >= 0")
    return Spectrum.of(h, cap=cap).partition(beta)


def exact_free_energy(h: PauliSumHamiltonian, beta: float, cap: int = DEFAULT_CAP) -> float:
    """F = -(1/beta) ln Z(beta), natural logarithm."""
    if beta <= 0:
        raise ValidationError("beta must be > 0")
    return -math.log(exact_partition(h, beta, cap)) / beta


def exact_gibbs_mean(
    h: PauliSumHamiltonian,
    p: PauliString,
    beta: float = 1.0,
    cap: int = DEFAULT_CAP,
) -> float:
    """Tr(P e^{beta H}) / Tr(e^{beta H}) (absorbed-sign convention, see module doc)."""
    _check_cap(h, cap)
    if p.n != h.n:
        raise ValidationError("observable qubit count mismatch")
    spec = Spectrum.of(h, vectors=True, cap=cap)
    # shift by the max exponent before exponentiating so large beta stays finite
    expo = beta * spec.eigenvalues
    w = np.exp(expo - np.max(expo))
    pv = PauliSumHamiltonian(h.n, [(p, 1.0)]).matvec_block(spec.eigenvectors)
    diag = np.real(np.einsum("ij,ij->j", spec.eigenvectors.conj(), pv))
    return float(np.dot(w, diag) / np.sum(w))


def count_eigenvalues(
    h: PauliSumHamiltonian, a: float, b: float, cap: int = DEFAULT_CAP
) -> int:
    """Number of eigenvalues in the closed interval [a, b]."""
    return Spectrum.of(h, cap=cap).count_in(a, b)
