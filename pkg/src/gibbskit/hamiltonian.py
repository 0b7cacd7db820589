"""Pauli-sum Hamiltonians on n qubits with matrix-free matvecs.

A Hamiltonian is a real-weighted sum of Pauli strings. Strings are stored as
two bitmasks (x part and z part): the string letter at position q lives in bit
(n-1-q) of the masks, so P = i^{|Y|} X(xmask) Z(zmask) and

    P|a> = i^{|Y|} (-1)^{parity(zmask & (a ^ xmask))} |a ^ xmask>.

Identity terms are tracked as a scalar shift so that two-qubit block
decompositions satisfy Gamma_ii = 0 and Tr e^{H + cI} = e^c Tr e^H can be
applied analytically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ValidationError

_LETTERS = "IXYZ"
# (x bit, z bit) per letter
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

COEFF_CUTOFF = 1e-15


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli string held as x/z bitmasks (qubit q <-> bit n-1-q)."""

    n: int
    xmask: int
    zmask: int

    @classmethod
    def from_label(cls, label: str, n: int | None = None) -> "PauliString":
        if n is None:
            n = len(label)
        if len(label) != n:
            raise ValidationError(
                f"pauli string {label!r} has length {len(label)}, expected {n}"
            )
        x = z = 0
        for q, ch in enumerate(label):
            if ch not in _LETTER_BITS:
                raise ValidationError(f"invalid pauli letter {ch!r} in {label!r}")
            xb, zb = _LETTER_BITS[ch]
            bit = 1 << (n - 1 - q)
            if xb:
                x |= bit
            if zb:
                z |= bit
        return cls(n, x, z)

    @classmethod
    def from_sites(cls, n: int, sites: tuple[int, ...], letters: str) -> "PauliString":
        """Pauli acting with `letters` (subset of XYZ) on `sites`, identity elsewhere."""
        label = ["I"] * n
        for q, ch in zip(sites, letters):
            label[q] = ch
        return cls.from_label("".join(label), n)

    @property
    def label(self) -> str:
        out = []
        for q in range(self.n):
            bit = 1 << (self.n - 1 - q)
            xb = 1 if self.xmask & bit else 0
            zb = 1 if self.zmask & bit else 0
            out.append({(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}[(xb, zb)])
        return "".join(out)

    @property
    def weight(self) -> int:
        return bin(self.xmask | self.zmask).count("1")

    @property
    def n_y(self) -> int:
        return bin(self.xmask & self.zmask).count("1")

    def support(self) -> tuple[int, ...]:
        mask = self.xmask | self.zmask
        return tuple(q for q in range(self.n) if mask & (1 << (self.n - 1 - q)))

    def is_identity(self) -> bool:
        return self.xmask == 0 and self.zmask == 0

    def dense(self) -> np.ndarray:
        mat = np.array([[1.0 + 0.0j]])
        for ch in self.label:
            mat = np.kron(mat, PAULI_1Q[ch])
        return mat


class PauliSumHamiltonian:
    """Canonicalized real-weighted Pauli sum; duplicate strings merged."""

    def __init__(self, n: int, terms: list[tuple[PauliString, float]]):
        if n < 1:
            raise ValidationError("qubit count must be >= 1")
        self.n = n
        merged: dict[tuple[int, int], float] = {}
        identity = 0.0
        for p, c in terms:
            if p.n != n:
                raise ValidationError("pauli string length mismatch with n")
            c = float(c)
            if not math.isfinite(c):
                raise ValidationError("non-finite coefficient")
            if p.is_identity():
                identity += c
            else:
                key = (p.xmask, p.zmask)
                merged[key] = merged.get(key, 0.0) + c
        self.identity_coeff = identity
        self.terms: list[tuple[PauliString, float]] = [
            (PauliString(n, x, z), c)
            for (x, z), c in sorted(merged.items())
            if abs(c) > COEFF_CUTOFF
        ]
        self.locality = max((p.weight for p, _ in self.terms), default=0)
        self._mask_cache: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_terms(cls, n: int, labelled: list[tuple[str, float]]) -> "PauliSumHamiltonian":
        return cls(n, [(PauliString.from_label(s, n), c) for s, c in labelled])

    @classmethod
    def from_json(cls, text: str) -> "PauliSumHamiltonian":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON: {exc}") from exc
        if not isinstance(doc, dict) or set(doc) != {"n", "terms"}:
            raise ValidationError('document must be {"n": ..., "terms": [...]}')
        n = doc["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValidationError('"n" must be a positive integer')
        if not isinstance(doc["terms"], list):
            raise ValidationError('"terms" must be a list')
        terms = []
        for entry in doc["terms"]:
            if not isinstance(entry, dict) or set(entry) != {"pauli", "coeff"}:
                raise ValidationError('each term must be {"pauli": ..., "coeff": ...}')
            coeff = entry["coeff"]
            if isinstance(coeff, bool) or not isinstance(coeff, (int, float)):
                raise ValidationError("coefficient must be a real number")
            if not math.isfinite(float(coeff)):
                raise ValidationError("non-finite coefficient")
            terms.append((PauliString.from_label(entry["pauli"], n), float(coeff)))
        return cls(n, terms)

    def to_json(self) -> str:
        doc = {"n": self.n, "terms": [{"pauli": p.label, "coeff": c} for p, c in self.terms]}
        if self.identity_coeff:
            doc["terms"].insert(0, {"pauli": "I" * self.n, "coeff": self.identity_coeff})
        return json.dumps(doc)

    # -- algebra ------------------------------------------------------------

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def scaled(self, factor: float) -> "PauliSumHamiltonian":
        h = PauliSumHamiltonian(self.n, [(p, c * factor) for p, c in self.terms])
        h.identity_coeff = self.identity_coeff * factor
        return h

    def plus_pauli(self, p: PauliString, coeff: float) -> "PauliSumHamiltonian":
        h = PauliSumHamiltonian(self.n, list(self.terms) + [(p, coeff)])
        h.identity_coeff += self.identity_coeff
        return h

    def traceless_part(self) -> "PauliSumHamiltonian":
        """The Hamiltonian with its identity component removed."""
        h = PauliSumHamiltonian(self.n, list(self.terms))
        h.identity_coeff = 0.0
        return h

    def pauli_norm_bound(self) -> float:
        """Triangle-inequality bound sum |coeff| >= operator norm of H."""
        return abs(self.identity_coeff) + sum(abs(c) for _, c in self.terms)

    def _masks(self):
        if self._mask_cache is None:
            xm = np.array([p.xmask for p, _ in self.terms], dtype=np.int64)
            zm = np.array([p.zmask for p, _ in self.terms], dtype=np.int64)
            w = np.array(
                [c * (1j ** p.n_y) for p, c in self.terms], dtype=np.complex128
            )
            self._mask_cache = (xm, zm, w)
        return self._mask_cache

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Hv for a length-2^n vector, term by term, without building H."""
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise ValidationError(f"vector has shape {v.shape}, expected ({self.dim},)")
        return self.matvec_block(v.reshape(-1, 1).astype(np.complex128)).ravel()

    def matvec_block(self, v: np.ndarray) -> np.ndarray:
        """H applied to a (2^n, width) block of column vectors."""
        if v.ndim != 2 or v.shape[0] != self.dim:
            raise ValidationError(f"block has shape {v.shape}, expected ({self.dim}, m)")
        v = np.ascontiguousarray(v, dtype=np.complex128)
        if not self.terms:
            out = np.zeros_like(v)
        else:
            xm, zm, w = self._masks()
            out = _kernels.pauli_block_matvec(v, xm, zm, w)
        if self.identity_coeff:
            out += self.identity_coeff * v
        return out


# ---------------------------------------------------------------------------
# two-local block view
# ---------------------------------------------------------------------------


@dataclass
class TwoLocalView:
    """Decomposition H = c_id*I + sum over unordered pairs {i,j} of H_ij.

    Single-qubit terms on qubit i are spread evenly over the n-1 blocks that
    contain i, preserving the sum. Gamma counts each unordered pair once and
    the denseness parameter is Delta = Gamma / (n^2 max_ij Gamma_ij); all
    downstream guarantees are stated relative to this convention.
    """

    n: int
    blocks: dict[tuple[int, int], np.ndarray]
    gammas: dict[tuple[int, int], float]
    gamma_total: float
    delta: float | None
    identity_coeff: float
    degenerate: bool = False
    pauli_coeffs: dict[tuple[tuple[int, ...], str], float] = field(default_factory=dict)


def two_local_view(h: PauliSumHamiltonian) -> TwoLocalView:
    if h.locality > 2:
        raise ValidationError(f"two_local_view requires locality <= 2, got {h.locality}")
    n = h.n
    if n < 2 and h.terms:
        raise ValidationError("two_local_view needs n >= 2 for non-identity terms")
    blocks: dict[tuple[int, int], np.ndarray] = {}
    coeffs: dict[tuple[tuple[int, ...], str], float] = {}

    def block(i: int, j: int) -> np.ndarray:
        key = (min(i, j), max(i, j))
        if key not in blocks:
            blocks[key] = np.zeros((4, 4), dtype=complex)
        return blocks[key]

    for p, c in h.terms:
        sites = p.support()
        letters = "".join(p.label[q] for q in sites)
        coeffs[(sites, letters)] = coeffs.get((sites, letters), 0.0) + c
        if len(sites) == 2:
            i, j = sites
            op = np.kron(PAULI_1Q[letters[0]], PAULI_1Q[letters[1]])
            block(i, j)[:] += c * op
        else:
            (i,) = sites
            share = c / (n - 1)
            for j in range(n):
                if j == i:
                    continue
                a, b = min(i, j), max(i, j)
                if i == a:
                    op = np.kron(PAULI_1Q[letters[0]], PAULI_1Q["I"])
                else:
                    op = np.kron(PAULI_1Q["I"], PAULI_1Q[letters[0]])
                block(a, b)[:] += share * op

    gammas = {}
    for key, mat in blocks.items():
        gammas[key] = float(np.max(np.abs(np.linalg.eigvalsh(mat)))) if np.any(mat) else 0.0
    gamma_total = sum(gammas.values())
    gmax = max(gammas.values(), default=0.0)
    degenerate = gmax == 0.0
    delta = None if degenerate else gamma_total / (n * n * gmax)
    return TwoLocalView(
        n=n,
        blocks=blocks,
        gammas=gammas,
        gamma_total=gamma_total,
        delta=delta,
        identity_coeff=h.identity_coeff,
        degenerate=degenerate,
        pauli_coeffs=coeffs,
    )


# ---------------------------------------------------------------------------
# random instances (tests and benchmark harness)
# ---------------------------------------------------------------------------


def random_local_hamiltonian(
    n: int,
    locality: int,
    num_terms: int,
    rng: np.random.Generator,
    norm_bound: float | None = None,
) -> PauliSumHamiltonian:
    """Random k-local Pauli sum; coefficients rescaled so sum|c| = norm_bound."""
    labels = {}
    attempts = 0
    while len(labels) < num_terms and attempts < 50 * num_terms:
        attempts += 1
        w = int(rng.integers(1, locality + 1))
        sites = tuple(sorted(rng.choice(n, size=w, replace=False).tolist()))
        letters = "".join(rng.choice(list("XYZ")) for _ in range(w))
        labels[(sites, letters)] = rng.standard_normal()
    terms = [
        (PauliString.from_sites(n, sites, letters), c)
        for (sites, letters), c in labels.items()
    ]
    h = PauliSumHamiltonian(n, terms)
    if norm_bound is not None and h.terms:
        total = sum(abs(c) for _, c in h.terms)
        h = h.scaled(norm_bound / total)
    return h


def tile_copies(h: PauliSumHamiltonian, copies: int) -> PauliSumHamiltonian:
    """Disjoint union of `copies` systems on copies*n qubits; Z_G = Z^copies."""
    if copies < 1:
        raise ValidationError("copies must be >= 1")
    n_big = copies * h.n
    terms: list[tuple[PauliString, float]] = []
    for block in range(copies):
        off = block * h.n
        for p, c in h.terms:
            sites = tuple(off + q for q in p.support())
            letters = "".join(p.label[q] for q in p.support())
            terms.append((PauliString.from_sites(n_big, sites, letters), c))
    big = PauliSumHamiltonian(n_big, terms)
    big.identity_coeff = copies * h.identity_coeff
    return big


def complete_graph_zz(n: int, coeff: float = 1.0) -> PauliSumHamiltonian:
    terms = [
        (PauliString.from_sites(n, (i, j), "ZZ"), coeff)
        for i in range(n)
        for j in range(i + 1, n)
    ]
    return PauliSumHamiltonian(n, terms)
