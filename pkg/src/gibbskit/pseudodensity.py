"""Local pseudodensity matrices: consistent families of <=k-qubit marginals.

A k-local pseudodensity matrix on n qubits is parameterized by one real
coefficient per Pauli string of weight 1..k, interpreted as the expectation
value c_P = Tr(sigma P). The marginal on a subset S (|S| = t) is

    sigma_S = 2^{-t} (I + sum_{supp(P) subseteq S} c_P P|_S),

so marginal consistency across subsets holds automatically; feasibility is
the statement that every such marginal is PSD. (The paper-normalized vector
is beta_P = 2^{-n} c_P; we store c_P since the marginal formula above is the
one that makes the shared-coefficient family consistent. Any coefficient
vector with ||c||_1 <= 1, in particular <= 2^{-k}, is feasible.)

Also here: the single-qubit random-Pauli-basis measurement channel and the
1-norm machinery for classical pseudodistributions obtained by measuring a
pseudodensity matrix qubit-wise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .hamiltonian import PAULI_1Q

_SQ2 = 1.0 / math.sqrt(2.0)
# eigenvectors |psi_{b,r}> of X, Y, Z (b = 1, 2, 3) with eigenvalue (-1)^r
PAULI_EIGENVECTORS = {
    (1, 0): np.array([_SQ2, _SQ2], dtype=complex),
    (1, 1): np.array([_SQ2, -_SQ2], dtype=complex),
    (2, 0): np.array([_SQ2, 1j * _SQ2], dtype=complex),
    (2, 1): np.array([_SQ2, -1j * _SQ2], dtype=complex),
    (3, 0): np.array([1.0, 0.0], dtype=complex),
    (3, 1): np.array([0.0, 1.0], dtype=complex),
}
# flat outcome order o = 2*(b-1) + r, o = 0..5
OUTCOME_VECTORS = [PAULI_EIGENVECTORS[(b, r)] for b in (1, 2, 3) for r in (0, 1)]


def von_neumann_entropy(mat: np.ndarray, floor: float = 1e-12, tol: float = 1e-8) -> float:
    """-Tr(rho ln rho); eigenvalues below `floor` contribute zero."""
    vals = np.linalg.eigvalsh(mat)
    if vals[0] < -tol:
        raise NumericalError(f"matrix has eigenvalue {vals[0]:.3e} < -{tol:.1e}")
    vals = vals[vals > floor]
    return float(-np.sum(vals * np.log(vals)))


def partial_trace(rho: np.ndarray, keep: tuple[int, ...], n: int) -> np.ndarray:
    """Reduce an n-qubit density matrix to the sorted subset `keep`."""
    keep = tuple(sorted(keep))
    t = len(keep)
    arr = rho.reshape((2,) * (2 * n))
    # move kept row/col axes to the front, trace the rest pairwise
    drop = [q for q in range(n) if q not in keep]
    for q in reversed(drop):
        arr = np.trace(arr, axis1=q, axis2=q + arr.ndim // 2)
    return arr.reshape(2**t, 2**t)


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-induced random mixed state."""
    d = 1 << n
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@dataclass(frozen=True)
class _SubsetOps:
    """Stacked embedded Pauli matrices for one subset, plus coefficient slots."""

    indices: np.ndarray  # flat coefficient indices, shape (p,)
    mats: np.ndarray  # (p, 2^t, 2^t)


class PauliIndex:
    """Deterministic flat index over Pauli strings of weight 1..k on n qubits."""

    def __init__(self, n: int, k: int):
        if not 1 <= k <= n:
            raise ValidationError("locality must satisfy 1 <= k <= n")
        self.n = n
        self.k = k
        self.keys: list[tuple[tuple[int, ...], str]] = []
        for w in range(1, k + 1):
            for sites in itertools.combinations(range(n), w):
                for letters in itertools.product("XYZ", repeat=w):
                    self.keys.append((sites, "".join(letters)))
        self.position = {key: i for i, key in enumerate(self.keys)}
        self.size = len(self.keys)
        self._subset_cache: dict[tuple[int, ...], _SubsetOps] = {}

    def subset_ops(self, subset: tuple[int, ...]) -> _SubsetOps:
        subset = tuple(sorted(subset))
        if subset not in self._subset_cache:
            t = len(subset)
            if t > self.k:
                raise ValidationError(f"subset {subset} larger than locality {self.k}")
            pos_in_subset = {q: i for i, q in enumerate(subset)}
            idx = []
            mats = []
            for w in range(1, t + 1):
                for sites in itertools.combinations(subset, w):
                    for letters in itertools.product("XYZ", repeat=w):
                        key = (sites, "".join(letters))
                        idx.append(self.position[key])
                        factors = ["I"] * t
                        for q, ch in zip(sites, letters):
                            factors[pos_in_subset[q]] = ch
                        mat = np.array([[1.0 + 0j]])
                        for ch in factors:
                            mat = np.kron(mat, PAULI_1Q[ch])
                        mats.append(mat)
            self._subset_cache[subset] = _SubsetOps(
                indices=np.array(idx, dtype=np.intp),
                mats=np.stack(mats) if mats else np.zeros((0, 2**t, 2**t), dtype=complex),
            )
        return self._subset_cache[subset]


class PseudoDensityMatrix:
    """Coefficient vector c_P over PauliIndex(n, k) with marginal accessors."""

    def __init__(self, index: PauliIndex, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (index.size,):
            raise ValidationError(f"coefficient vector must have shape ({index.size},)")
        self.index = index
        self.coeffs = coeffs

    @property
    def n(self) -> int:
        return self.index.n

    @property
    def k(self) -> int:
        return self.index.k

    @classmethod
    def maximally_mixed(cls, n: int, k: int) -> "PseudoDensityMatrix":
        idx = PauliIndex(n, k)
        return cls(idx, np.zeros(idx.size))

    @classmethod
    def from_global_state(cls, rho: np.ndarray, n: int, k: int) -> "PseudoDensityMatrix":
        """Marginal family of an actual n-qubit density matrix."""
        idx = PauliIndex(n, k)
        c = np.zeros(idx.size)
        for subset in itertools.combinations(range(n), min(k, n)):
            ops = idx.subset_ops(subset)
            rho_s = partial_trace(rho, subset, n)
            vals = np.real(np.einsum("pij,ji->p", ops.mats, rho_s))
            c[ops.indices] = vals
        return cls(idx, c)

    def marginal(self, subset: tuple[int, ...]) -> np.ndarray:
        """Reduced density matrix on sorted(subset)."""
        subset = tuple(sorted(subset))
        t = len(subset)
        ops = self.index.subset_ops(subset)
        mat = np.eye(2**t, dtype=complex)
        if ops.indices.size:
            mat += np.tensordot(self.coeffs[ops.indices], ops.mats, axes=(0, 0))
        return mat / 2**t

    def paper_vector(self) -> np.ndarray:
        """The 2^{-n}-normalized coefficient vector used in the convex-program analysis."""
        return self.coeffs / 2**self.n

    def min_marginal_eigenvalue(self) -> float:
        worst = np.inf
        for subset in itertools.combinations(range(self.n), min(self.k, self.n)):
            vals = np.linalg.eigvalsh(self.marginal(subset))
            worst = min(worst, float(vals[0]))
        return worst

    def is_feasible(self, tol: float = 1e-10) -> bool:
        """Membership oracle: every <=k-qubit marginal is PSD (up to tol)."""
        return self.min_marginal_eigenvalue() >= -tol


# ---------------------------------------------------------------------------
# pseudo-entropy
# ---------------------------------------------------------------------------


def conditioning_sets(n: int, k: int) -> list[tuple[int, ...]]:
    """All C subseteq [n] with |C| < k, in lexicographic order (ties break low)."""
    out: list[tuple[int, ...]] = []
    for m in range(k):
        out.extend(itertools.combinations(range(n), m))
    return out


def pseudo_entropy(
    sigma: PseudoDensityMatrix, return_argmin: bool = False
) -> float | tuple[float, tuple[int, ...]]:
    """min over |C| < k of S(sigma_C) + sum_{j not in C} [S(sigma_{C u j}) - S(sigma_C)]."""
    n, k = sigma.n, sigma.k
    entropy_cache: dict[tuple[int, ...], float] = {(): 0.0}

    def ent(subset: tuple[int, ...]) -> float:
        if subset not in entropy_cache:
            entropy_cache[subset] = von_neumann_entropy(sigma.marginal(subset))
        return entropy_cache[subset]

    best = np.inf
    best_c: tuple[int, ...] = ()
    for c_set in conditioning_sets(n, k):
        rest = [j for j in range(n) if j not in c_set]
        val = sum(ent(tuple(sorted(c_set + (j,)))) for j in rest)
        val -= (len(rest) - 1) * ent(c_set)
        if val < best - 1e-15:
            best = val
            best_c = c_set
    if return_argmin:
        return float(best), best_c
    return float(best)


# ---------------------------------------------------------------------------
# random-Pauli-basis measurement channel and pseudodistributions
# ---------------------------------------------------------------------------


def measurement_channel(q: np.ndarray) -> np.ndarray:
    """Qubit-wise channel Lambda^{(x)l}: Hermitian 2^l x 2^l -> real array (6,)*l.

    Outcome index per qubit is o = 2(b-1)+r for basis b in {X,Y,Z} and
    eigenvalue label r; the entry at x is 3^{-l} <psi_x|Q|psi_x>.
    """
    dim = q.shape[0]
    ell = int(round(math.log2(dim)))
    if q.shape != (dim, dim) or 2**ell != dim:
        raise ValidationError("operator must be square with power-of-two dimension")
    out = np.empty((6,) * ell)
    for outcome in itertools.product(range(6), repeat=ell):
        psi = np.array([1.0 + 0j])
        for o in outcome:
            psi = np.kron(psi, OUTCOME_VECTORS[o])
        out[outcome] = np.real(psi.conj() @ q @ psi) / 3**ell
    return out


def measured_marginal(sigma: PseudoDensityMatrix, subset: tuple[int, ...]) -> np.ndarray:
    """p_S = Lambda-measured marginal, axes ordered like sorted(subset)."""
    return measurement_channel(sigma.marginal(subset))


def pseudodistribution_1norm_check(
    sigma: PseudoDensityMatrix,
    omega: np.ndarray,
    k: int,
    delta_dense: float,
) -> tuple[float, float]:
    """Exact left side and right side of the conditional-independence 1-norm bound.

    LHS = (1/k) sum_{m<k} E_{|C|=m} E_{(i,j)~omega}
              || p_ij - E_{x_C} p_{i|x_C} p_{j|x_C} ||_1
    for the 6-ary pseudodistribution p obtained by measuring sigma qubit-wise;
    RHS = sqrt(2 ln 6 / (k Delta)). Requires omega(i,i)=0 and
    Delta n^2 omega(i,j) <= 1.
    """
    n = sigma.n
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (n, n):
        raise ValidationError("omega must be an n x n array")
    if np.any(omega < -1e-15) or abs(omega.sum() - 1.0) > 1e-9:
        raise ValidationError("omega must be a probability distribution")
    if np.any(np.abs(np.diag(omega)) > 1e-15):
        raise ValidationError("omega(i,i) must vanish")
    if delta_dense * n * n * omega.max() > 1.0 + 1e-9:
        raise ValidationError("Delta n^2 omega(i,j) <= 1 violated")
    if k > sigma.k:
        raise ValidationError("k exceeds the locality of sigma")

    total = 0.0
    for m in range(k):
        subset_avg = 0.0
        subsets = list(itertools.combinations(range(n), m))
        for c_set in subsets:
            q_c = measured_marginal(sigma, c_set).reshape(-1) if m else np.array([1.0])
            cond: dict[int, np.ndarray] = {}

            def conditional(i: int) -> np.ndarray:
                """p_{i|x_C} as an array (6^m, 6); exact for i in C too."""
                if i in cond:
                    return cond[i]
                if i in c_set:
                    pos = c_set.index(i)
                    arr = np.zeros((6**m, 6))
                    digits = np.array(
                        list(itertools.product(range(6), repeat=m)), dtype=int
                    ).reshape(6**m, m)
                    arr[np.arange(6**m), digits[:, pos]] = 1.0
                else:
                    s_sorted = tuple(sorted(c_set + (i,)))
                    arr6 = measured_marginal(sigma, s_sorted)
                    # bring the i axis last, C axes in c_set order first
                    order = [s_sorted.index(q) for q in c_set] + [s_sorted.index(i)]
                    arr = arr6.transpose(order).reshape(6**m, 6)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        arr = np.where(q_c[:, None] > 0, arr / q_c[:, None], 0.0)
                cond[i] = arr
                return arr

            pair_avg = 0.0
            for i in range(n):
                for j in range(n):
                    w = omega[i, j]
                    if w == 0.0 or i == j:
                        continue
                    model = np.einsum("x,xa,xb->ab", q_c, conditional(i), conditional(j))
                    p_ij = measured_marginal(sigma, (min(i, j), max(i, j)))
                    if j < i:
                        p_ij = p_ij.T
                    pair_avg += w * float(np.abs(p_ij - model).sum())
            subset_avg += pair_avg
        total += subset_avg / len(subsets)
    lhs = total / k
    bound = math.sqrt(2.0 * math.log(6.0) / (k * delta_dense))
    return lhs, bound
