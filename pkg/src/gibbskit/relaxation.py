"""Convex free-energy relaxation for dense 2-local Hamiltonians, with rounding.

The relaxed objective over k-local pseudodensity matrices is

    f_k(sigma) = sum_{i<j} Tr(H_ij sigma_ij) - S_k(sigma),

a convex function of the Pauli coefficient vector (linear energy minus a
minimum of concave per-C entropies). It is minimized with a log-det barrier
interior-point scheme: the objective is augmented with
-mu * sum_{|S|<=k} ln det sigma_S, minimized by damped gradient descent with
analytic gradients (subgradient of the active C, ties broken by lowest
lexicographic C), and mu is annealed downward. A PSD membership oracle over
all marginals backstops feasibility during the line search.

The rounding map averages, over m < k and |C| = m, the states obtained by
measuring sigma_C in a random Pauli basis and attaching the conditional
single-qubit states of every other qubit; it never samples, all index sets
are enumerated exactly.
"""

from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .exact import DEFAULT_CAP, exact_free_energy
from .hamiltonian import PauliString, PauliSumHamiltonian, TwoLocalView, two_local_view
from .pseudodensity import (
    OUTCOME_VECTORS,
    PauliIndex,
    PseudoDensityMatrix,
    conditioning_sets,
    pseudo_entropy,
    von_neumann_entropy,
)

_EIG_FLOOR = 1e-12


def relaxed_objective(sigma: PseudoDensityMatrix, view: TwoLocalView) -> float:
    """sum_blocks Tr(H_ij sigma_ij) - S_k(sigma); identity component excluded."""
    if sigma.k < 2:
        raise ValidationError("relaxation locality must be >= 2")
    energy = 0.0
    for (sites, letters), coeff in view.pauli_coeffs.items():
        energy += coeff * sigma.coeffs[sigma.index.position[(sites, letters)]]
    return energy - pseudo_entropy(sigma)


class _Problem:
    """Precomputed index structures and analytic gradients for one instance."""

    def __init__(self, view: TwoLocalView, k: int, beta: float):
        n = view.n
        if k < 2:
            raise ValidationError("relaxation locality must be >= 2")
        if k > n:
            raise ValidationError("relaxation locality cannot exceed n")
        self.n, self.k = n, k
        self.index = PauliIndex(n, k)
        self.energy = np.zeros(self.index.size)
        for (sites, letters), coeff in view.pauli_coeffs.items():
            self.energy[self.index.position[(sites, letters)]] += beta * coeff
        self.subsets = [
            tuple(s)
            for w in range(1, k + 1)
            for s in itertools.combinations(range(n), w)
        ]
        self.cond_sets = conditioning_sets(n, k)
        self.ops = [self.index.subset_ops(s) for s in self.subsets]
        self.barrier_nu = sum(2 ** len(s) for s in self.subsets)

    def _marginals(self, c: np.ndarray):
        out = []
        for s, ops in zip(self.subsets, self.ops):
            t = len(s)
            mat = np.eye(2**t, dtype=complex)
            mat += np.tensordot(c[ops.indices], ops.mats, axes=(0, 0))
            out.append(mat / 2**t)
        return out

    def evaluate(self, c: np.ndarray, mu: float, with_grad: bool):
        """(value, grad | None, info); value = +inf when infeasible."""
        margs = self._marginals(c)
        eigs = [np.linalg.eigh(m) for m in margs]
        min_eig = min(float(v[0][0]) for v in eigs)
        if min_eig <= _EIG_FLOOR:
            return np.inf, None, {"feasible": False, "min_eig": min_eig}
        entropies = {}
        for s, (vals, _) in zip(self.subsets, eigs):
            entropies[s] = float(-np.sum(vals * np.log(vals)))
        entropies[()] = 0.0
        barrier = -sum(float(np.sum(np.log(v[0]))) for v in eigs)

        best_val, best_c = np.inf, ()
        for cset in self.cond_sets:
            rest = [j for j in range(self.n) if j not in cset]
            val = sum(entropies[tuple(sorted(cset + (j,)))] for j in rest)
            val -= (len(rest) - 1) * entropies[cset]
            if val < best_val - 1e-15:
                best_val, best_c = val, cset
        value = float(self.energy @ c) - best_val + mu * barrier
        info = {
            "feasible": True,
            "min_eig": min_eig,
            "entropy": best_val,
            "active_C": best_c,
            "objective": float(self.energy @ c) - best_val,
        }
        if not with_grad:
            return value, None, info

        ent_grad: dict[tuple[int, ...], np.ndarray] = {(): np.zeros(0)}
        grad = self.energy.copy()
        barrier_grad = np.zeros(self.index.size)
        for s, ops, (vals, vecs) in zip(self.subsets, self.ops, eigs):
            t = len(s)
            ln_m = (vecs * np.log(vals)) @ vecs.conj().T
            inv_m = (vecs / vals) @ vecs.conj().T
            # d S(sigma_S) / d c_P = -2^{-t} Tr(P ln sigma_S)
            gS = -np.real(np.einsum("pij,ji->p", ops.mats, ln_m)) / 2**t
            ent_grad[s] = gS
            barrier_grad[ops.indices] += -np.real(
                np.einsum("pij,ji->p", ops.mats, inv_m)
            ) / 2**t
        # subtract the active-C entropy gradient
        cset = best_c
        rest = [j for j in range(self.n) if j not in cset]
        acc = np.zeros(self.index.size)
        for j in rest:
            s = tuple(sorted(cset + (j,)))
            acc[self.index.subset_ops(s).indices] += ent_grad[s]
        if cset:
            acc[self.index.subset_ops(cset).indices] -= (len(rest) - 1) * ent_grad[cset]
        grad -= acc
        grad += mu * barrier_grad
        return value, grad, info


@dataclass
class RelaxationResult:
    f_k_star: float  # includes the identity component, divided by beta
    sigma_star: PseudoDensityMatrix
    block_objective: float  # energy(beta-scaled) - S_k at the optimum
    energy_relaxed: float  # sum Tr(H_ij sigma_ij) + c_id, original units
    pseudo_entropy: float
    iterations: int
    mu_final: float
    tol: float
    converged: bool
    solver_log: dict = field(default_factory=dict)


def minimize_relaxation(
    view: TwoLocalView,
    k: int,
    tol: float = 1e-5,
    beta: float = 1.0,
    mu0: float = 1.0,
    mu_factor: float = 0.2,
    max_inner: int = 4000,
    max_total: int = 60000,
) -> RelaxationResult:
    """Barrier minimization of f_k over the pseudodensity set.

    beta != 1 follows the substitution H <- beta H with the optimum divided by
    beta at the end. Non-convergence is reported on the result, not silent.
    """
    if beta <= 0:
        raise ValidationError("beta must be > 0")
    prob = _Problem(view, k, beta)
    c = np.zeros(prob.index.size)
    mu_final = max(1e-10, tol / (4.0 * prob.barrier_nu))
    mu = mu0
    step = 0.05
    total = 0
    converged = True
    while True:
        val, grad, info = prob.evaluate(c, mu, with_grad=True)
        inner = 0
        while inner < max_inner and total < max_total:
            gnorm2 = float(grad @ grad)
            if gnorm2 < 1e-24:
                break
            s = step
            accepted = False
            while s > 1e-16:
                c_try = c - s * grad
                val_try, _, _ = prob.evaluate(c_try, mu, with_grad=False)
                if val_try <= val - 1e-4 * s * gnorm2:
                    accepted = True
                    break
                s *= 0.5
            if not accepted:
                break
            decrease = val - val_try
            c = c_try
            step = min(s * 1.6, 10.0)
            val, grad, info = prob.evaluate(c, mu, with_grad=True)
            inner += 1
            total += 1
            if decrease < max(1e-13, 1e-7 * mu):
                break
        if total >= max_total and mu > mu_final:
            converged = False
            warnings.warn(
                "relaxation solver hit its iteration budget before reaching "
                f"mu_final={mu_final:.2e} (stopped at mu={mu:.2e})",
                stacklevel=2,
            )
            break
        if mu <= mu_final * (1 + 1e-12):
            break
        mu = max(mu * mu_factor, mu_final)

    _, _, info = prob.evaluate(c, 0.0, with_grad=False)
    sigma = PseudoDensityMatrix(prob.index, c)
    block_obj = info["objective"]
    energy_scaled = float(prob.energy @ c)
    return RelaxationResult(
        f_k_star=view.identity_coeff + block_obj / beta,
        sigma_star=sigma,
        block_objective=block_obj,
        energy_relaxed=energy_scaled / beta + view.identity_coeff,
        pseudo_entropy=info["entropy"],
        iterations=total,
        mu_final=mu,
        tol=tol,
        converged=converged,
        solver_log={"active_C": list(info["active_C"]), "min_eig": info["min_eig"]},
    )


# ---------------------------------------------------------------------------
# rounding
# ---------------------------------------------------------------------------


def _kron_chain(factors: list[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for f in factors:
        out = np.kron(out, f)
    return out


def round_state(
    sigma: PseudoDensityMatrix,
    k: int | None = None,
    p_cutoff: float = 1e-13,
    neg_tol: float = 1e-9,
    max_n: int = 8,
) -> np.ndarray:
    """Exact evaluation of the rounding map: a dense 2^n density matrix.

    Uniform average over m in {0..k-1} and |C| = m of
    sum_x p_C(x) |psi_x><psi_x|_C (x) prod_{i not in C} rho_i^(x), with
    p_C(x) = 3^{-m} <psi_x|sigma_C|psi_x> and rho_i^(x) the conditional
    single-qubit state from sigma_{C u {i}}. Outcomes with p_C(x) = 0 are
    skipped; p_C(x) < -neg_tol raises (infeasible sigma).
    """
    n = sigma.n
    if n > max_n:
        raise ValidationError(f"rounding materializes a 2^{n} state; n <= {max_n} required")
    if k is None:
        k = sigma.k
    if k < 1 or k > sigma.k:
        raise ValidationError("rounding depth must satisfy 1 <= k <= locality of sigma")
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    for m in range(k):
        subsets = list(itertools.combinations(range(n), m))
        weight = 1.0 / (k * len(subsets))
        for c_set in subsets:
            sig_c = sigma.marginal(c_set) if m else np.array([[1.0 + 0j]])
            cond_margs = {
                i: sigma.marginal(tuple(sorted(c_set + (i,))))
                for i in range(n)
                if i not in c_set
            }
            for outcome in itertools.product(range(6), repeat=m):
                psi = _kron_chain([OUTCOME_VECTORS[o].reshape(2, 1) for o in outcome])
                raw = float((psi.conj().T @ sig_c @ psi)[0, 0].real)
                if raw < -neg_tol:
                    raise NumericalError(f"negative rounding weight {raw:.3e}")
                p = raw / 3**m  # p_C(x)
                if raw <= p_cutoff:
                    continue
                factors: dict[int, np.ndarray] = {}
                for pos, q in enumerate(c_set):
                    v = OUTCOME_VECTORS[outcome[pos]].reshape(2, 1)
                    factors[q] = v @ v.conj().T
                for i, marg in cond_margs.items():
                    s_sorted = tuple(sorted(c_set + (i,)))
                    cols = [
                        OUTCOME_VECTORS[outcome[c_set.index(q)]].reshape(2, 1)
                        if q in c_set
                        else np.eye(2, dtype=complex)
                        for q in s_sorted
                    ]
                    w = _kron_chain(cols)  # (2^{m+1}, 2) isometry onto |psi_x>_C (x) qubit i
                    cond = (w.conj().T @ marg @ w) / raw
                    factors[i] = cond
                rho += (weight * p) * _kron_chain([factors[q] for q in range(n)])
    trace = float(np.real(np.trace(rho)))
    if not 0.5 < trace < 1.5:
        raise NumericalError(f"rounded state trace {trace:.6f} far from 1")
    return rho / trace


def energy_gap_report(
    sigma: PseudoDensityMatrix, rho: np.ndarray, view: TwoLocalView
) -> dict:
    """|Tr(H rho) - sum Tr(H_ij sigma_ij)| absolutely and per unit Gamma."""
    energy_sigma = 0.0
    for (sites, letters), coeff in view.pauli_coeffs.items():
        energy_sigma += coeff * sigma.coeffs[sigma.index.position[(sites, letters)]]
    h = PauliSumHamiltonian(
        view.n,
        [
            (PauliString.from_sites(view.n, sites, letters), coeff)
            for (sites, letters), coeff in view.pauli_coeffs.items()
        ],
    )
    dense_h = h.matvec_block(np.eye(h.dim, dtype=np.complex128))
    energy_rho = float(np.real(np.einsum("ij,ji->", dense_h, rho)))
    deviation = abs(energy_rho - energy_sigma)
    return {
        "deviation": deviation,
        "deviation_per_gamma": deviation / view.gamma_total if view.gamma_total else 0.0,
        "energy_sigma": energy_sigma,
        "energy_rho": energy_rho,
    }


# ---------------------------------------------------------------------------
# end-to-end driver
# ---------------------------------------------------------------------------


@dataclass
class DenseFreeEnergyResult:
    f_k_star: float
    energy_relaxed: float
    pseudo_entropy: float
    energy_rounded: float
    entropy_rounded: float
    f_rounded: float
    f_exact: float | None
    k: int
    n: int
    beta: float
    solver: dict
    wall_time_s: float
    sigma_star: PseudoDensityMatrix | None = None
    rho_rounded: np.ndarray | None = None

    @property
    def gaps(self) -> dict:
        """Sandwich diagnostics; both entries nonnegative when exact F is known."""
        if self.f_exact is None:
            return {"relaxation": None, "rounding": None}
        return {
            "relaxation": self.f_exact - self.f_k_star,
            "rounding": self.f_rounded - self.f_exact,
        }

    def to_dict(self) -> dict:
        return {
            "f_k_star": self.f_k_star,
            "S_k": self.pseudo_entropy,
            "energy_relaxed": self.energy_relaxed,
            "energy_rounded": self.energy_rounded,
            "entropy_rounded": self.entropy_rounded,
            "f_rounded": self.f_rounded,
            "F_exact": self.f_exact,
            "gaps": self.gaps,
            "k": self.k,
            "n": self.n,
            "beta": self.beta,
            "solver": self.solver,
            "wall_time_s": self.wall_time_s,
        }


def solve_dense_free_energy(
    h: PauliSumHamiltonian,
    beta: float = 1.0,
    k: int = 2,
    tol: float = 1e-5,
    with_exact: bool = True,
    **solver_kwargs,
) -> DenseFreeEnergyResult:
    """Relax, solve, round, and report the free-energy sandwich for 2-local H."""
    t0 = time.perf_counter()
    if h.n > 8:
        raise ValidationError("dense free-energy pipeline requires n <= 8")
    view = two_local_view(h)
    res = minimize_relaxation(view, k, tol=tol, beta=beta, **solver_kwargs)
    rho = round_state(res.sigma_star)
    dense_h = h.matvec_block(np.eye(h.dim, dtype=np.complex128))
    energy_rounded = float(np.real(np.einsum("ij,ji->", dense_h, rho)))
    entropy_rounded = von_neumann_entropy(rho)
    f_exact = None
    if with_exact and h.n <= DEFAULT_CAP:
        f_exact = exact_free_energy(h, beta)
    return DenseFreeEnergyResult(
        f_k_star=res.f_k_star,
        energy_relaxed=res.energy_relaxed,
        pseudo_entropy=res.pseudo_entropy,
        energy_rounded=energy_rounded,
        entropy_rounded=entropy_rounded,
        f_rounded=energy_rounded - entropy_rounded / beta,
        f_exact=f_exact,
        k=k,
        n=h.n,
        beta=beta,
        solver={
            "iterations": res.iterations,
            "mu_final": res.mu_final,
            "tol": res.tol,
            "converged": res.converged,
        },
        wall_time_s=time.perf_counter() - t0,
        sigma_star=res.sigma_star,
        rho_rounded=rho,
    )
