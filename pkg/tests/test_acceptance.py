"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`. Every tolerance is pinned
here; seeds are fixed so the suite is deterministic.
"""

import math

import numpy as np
import pytest

from gibbskit.bench import run_suite
from gibbskit.clifford import apply_clifford_block, sample_clifford
from gibbskit.exact import Spectrum, exact_free_energy, exact_partition
from gibbskit.hamiltonian import (
    PauliSumHamiltonian,
    complete_graph_zz,
    random_local_hamiltonian,
)
from gibbskit.pipeline import TaylorOperator, estimate_partition, taylor_order
from gibbskit.pseudodensity import (
    PauliIndex,
    PseudoDensityMatrix,
    measurement_channel,
    pseudo_entropy,
    pseudodistribution_1norm_check,
    random_density_matrix,
    von_neumann_entropy,
)
from gibbskit.reductions import (
    QdosOracle,
    QmvOracle,
    QpfOracle,
    normalize_to_unit_interval,
    qmv_from_qpf,
    qpf_from_qdos,
    qpf_from_qmv,
)
from gibbskit.relaxation import energy_gap_report, round_state, solve_dense_free_energy
from gibbskit.trace_est import probes_for
from gibbskit.hamiltonian import two_local_view

LN2 = math.log(2.0)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


# ---------------------------------------------------------------------------
# 1. exact-oracle closed forms
# ---------------------------------------------------------------------------


def test_criterion_01_exact_closed_forms():
    z1 = exact_partition(PauliSumHamiltonian.from_terms(1, [("Z", 1.0)]), 1.0)
    ok = abs(z1 - 2 * math.cosh(1.0)) < 1e-10
    z2 = exact_partition(PauliSumHamiltonian.from_terms(2, [("ZZ", 1.0)]), 1.0)
    ok &= abs(z2 - 2 * (math.e + 1 / math.e)) < 1e-10
    for n, beta in [(1, 1.0), (3, 0.7), (5, 2.0)]:
        f = exact_free_energy(PauliSumHamiltonian(n, []), beta)
        ok &= abs(f - (-(n / beta) * LN2)) < 1e-14
    _report(1, ok, f"Z(H=Z)={z1:.12f}, Z(H=ZZ)={z2:.12f}, F(0)=-n ln2/beta")


# ---------------------------------------------------------------------------
# 2. Taylor truncation order meets its grid bound
# ---------------------------------------------------------------------------


def test_criterion_02_taylor_truncation():
    worst = 0.0
    ok = True
    for b in (1.0, 2.0, 4.0):
        for delta in (1e-1, 1e-3):
            plan = taylor_order(b, delta)
            xs = np.linspace(-b, b, 10_000)
            err = float(np.max(np.abs(np.exp(xs) - plan.evaluate(xs))))
            ok &= err <= plan.eps_trunc
            worst = max(worst, err / plan.eps_trunc)
    _report(2, ok, f"max grid error / eps over 6 plans = {worst:.3e}")


# ---------------------------------------------------------------------------
# 3. relative-error sandwich of the PSD surrogate (dense check)
# ---------------------------------------------------------------------------


def test_criterion_03_surrogate_sandwich():
    rng = np.random.default_rng(33)
    delta = 0.2
    ok = True
    min_eig_seen = np.inf
    for trial in range(20):
        n = int(rng.integers(2, 9))
        beta = float(rng.uniform(0.2, 1.2))
        h = random_local_hamiltonian(n, 2, 3 * n, rng, norm_bound=2.0)
        g = h.traceless_part().scaled(-beta)
        plan = taylor_order(g.pauli_norm_bound(), delta)
        dense_t = TaylorOperator(plan, g).dense()
        vals = np.linalg.eigvalsh(dense_t)
        min_eig_seen = min(min_eig_seen, float(vals[0]))
        z = float(np.sum(np.exp(Spectrum.of(g).eigenvalues)))
        tr = float(np.real(np.trace(dense_t)))
        ok &= vals[0] > 0 and (1 - delta) * z <= tr <= (1 + delta) * z
    _report(3, ok, f"20 instances n<=8, min surrogate eigenvalue {min_eig_seen:.3e}")


# ---------------------------------------------------------------------------
# 4. Clifford compression statistics
# ---------------------------------------------------------------------------


def test_criterion_04_compression_statistics():
    rng = np.random.default_rng(44)
    n, samples = 5, 20_000
    dim = 1 << n
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a = g @ g.conj().T
    a /= np.trace(a).real / dim  # Tr A = dim, a convenient scale
    tr_a = float(np.trace(a).real)
    tr_a2 = float(np.trace(a @ a).real)
    xi = {k: np.empty(samples) for k in (1, 2, 3)}
    for s in range(samples):
        tab = sample_clifford(n, rng)
        u = apply_clifford_block(tab, np.eye(dim, dtype=complex))
        conj = u @ a @ u.conj().T
        for k in (1, 2, 3):
            xi[k][s] = 2.0 ** (n - k) * float(np.trace(conj[: 1 << k, : 1 << k]).real)
    ok = True
    lines = []
    for k in (1, 2, 3):
        mean = float(np.mean(xi[k]))
        var = float(np.var(xi[k], ddof=1))
        se = math.sqrt(var / samples)
        bound = 2.0**-k * tr_a2
        ok &= abs(mean - tr_a) <= 4 * se
        ok &= var <= 1.1 * bound
        lines.append(f"k={k}: |mean-Tr|/SE={abs(mean - tr_a) / se:.2f}, var/bound={var / bound:.3f}")
    _report(4, ok, "; ".join(lines))


# ---------------------------------------------------------------------------
# 5. unitary 2-design second-moment structure
# ---------------------------------------------------------------------------


def _swap_matrix(d):
    s = np.zeros((d * d, d * d))
    for x in range(d):
        for y in range(d):
            s[y * d + x, x * d + y] = 1.0
    return s


def _moment_targets(n, k):
    d2, d4 = 2**n, 4**n
    det = d4 * d4 - d2 * d2
    a = (4**k * d4 - 2**k * d2) / det
    b = (2**k * d4 - 4**k * d2) / det
    return a, b


def test_criterion_05_two_design_moments():
    rng = np.random.default_rng(55)
    ok = True
    lines = []
    for n, k in [(2, 1), (3, 1), (3, 2)]:
        dim = 1 << n
        samples = 10_000
        mask = np.zeros(dim)
        mask[: 1 << k] = 1.0
        acc = np.zeros((dim * dim, dim * dim), dtype=complex)
        acc_sq = np.zeros((dim * dim, dim * dim))
        for _ in range(samples):
            tab = sample_clifford(n, rng)
            u = apply_clifford_block(tab, np.eye(dim, dtype=complex))
            p = (u.conj().T * mask) @ u
            pp = np.kron(p, p)
            acc += pp
            acc_sq += np.abs(pp) ** 2
        mean = acc / samples
        var = np.maximum(acc_sq / samples - np.abs(mean) ** 2, 0.0)
        a, b = _moment_targets(n, k)
        model = a * np.eye(dim * dim) + b * _swap_matrix(dim)
        resid = mean - model
        # aggregate 3-standard-error criterion on the Frobenius residual
        agg_se = math.sqrt(float(np.sum(var)) / samples)
        ok_pair = np.linalg.norm(resid) <= 3 * agg_se + 1e-12
        ok &= bool(ok_pair)
        ok &= a <= 4.0 ** (k - n) + 1e-12 and b <= 2.0**k * 4.0**-n + 1e-12
        lines.append(f"(n={n},k={k}): |resid|/SE={np.linalg.norm(resid) / agg_se:.2f}")
    _report(5, ok, "; ".join(lines))


# ---------------------------------------------------------------------------
# 6. end-to-end partition estimation at n=10
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def n10_instances():
    out = {}
    for locality, seed in ((2, 101), (3, 202)):
        h = random_local_hamiltonian(
            10, locality, 25 if locality == 2 else 30, np.random.default_rng(seed), norm_bound=2.0
        )
        out[locality] = (h, exact_partition(h, 1.0))
    return out


def test_criterion_06_end_to_end_qpf(n10_instances):
    delta, eta = 0.1, 0.05
    ok = True
    lines = []
    for locality, (h, z) in n10_instances.items():
        hits = 0
        for seed in range(100):
            est = estimate_partition(h, 1.0, delta, eta, seed=seed)
            hits += abs(est.value / z - 1.0) <= delta
        ok &= hits >= 95
        lines.append(f"{locality}-local {hits}/100")
    h, z = n10_instances[3]
    boost_hits = 0
    for seed in range(100):
        est = estimate_partition(h, 1.0, delta, eta, seed=10_000 + seed, boost=15)
        boost_hits += abs(est.value / z - 1.0) <= delta
    ok &= boost_hits >= 99
    lines.append(f"boost15 {boost_hits}/100")
    _report(6, ok, "; ".join(lines))


# ---------------------------------------------------------------------------
# 7. dense free-energy sandwich and k-monotonicity
# ---------------------------------------------------------------------------


def _sandwich_instances():
    rng = np.random.default_rng(77)
    plans = []
    for _ in range(8):
        plans.append((2, 2, 1e-6))
    for _ in range(10):
        plans.append((int(rng.integers(3, 6)), 2, 1e-6))
    for _ in range(6):
        plans.append((int(rng.integers(4, 6)), 3, 1e-6))
    for _ in range(6):
        plans.append((6, int(rng.integers(2, 4)), 1e-6))
    return plans, rng


def test_criterion_07_free_energy_sandwich():
    plans, rng = _sandwich_instances()
    assert len(plans) == 30
    ok = True
    worst_gap_low = -np.inf
    worst_gap_up = -np.inf
    tight_worst = 0.0
    for n, k, tol in plans:
        h = random_local_hamiltonian(n, 2, 2 * n * (n - 1) // 2, rng, norm_bound=0.35 * n)
        res = solve_dense_free_energy(h, beta=1.0, k=k, tol=tol)
        gap_low = res.f_k_star - res.f_exact  # must be <= 1e-6
        gap_up = res.f_exact - res.f_rounded  # must be <= 1e-6
        worst_gap_low = max(worst_gap_low, gap_low)
        worst_gap_up = max(worst_gap_up, gap_up)
        ok &= gap_low <= 1e-6 and gap_up <= 1e-6
        if n == 2 and k == 2:
            tight_worst = max(tight_worst, abs(res.f_k_star - res.f_exact))
            ok &= abs(res.f_k_star - res.f_exact) <= 1e-4
    # substituted quantitative check: median energy deviation per Gamma is
    # non-increasing in the rounding depth on the complete-graph suite
    h6 = complete_graph_zz(6, 0.5)
    view = two_local_view(h6)
    dev_rng = np.random.default_rng(777)
    medians = []
    sigmas = [
        PseudoDensityMatrix.from_global_state(random_density_matrix(6, dev_rng), 6, 4)
        for _ in range(20)
    ]
    for k in (2, 3, 4):
        devs = [
            energy_gap_report(s, round_state(s, k=k), view)["deviation_per_gamma"]
            for s in sigmas
        ]
        medians.append(float(np.median(devs)))
    ok &= medians[0] >= medians[1] - 1e-12 and medians[1] >= medians[2] - 1e-12
    _report(
        7,
        ok,
        f"worst f_k*-F={worst_gap_low:.2e}, worst F-f_round={worst_gap_up:.2e}, "
        f"tight |f_2*-F|={tight_worst:.2e}, dev/Gamma medians k=2,3,4: "
        + ", ".join(f"{m:.4f}" for m in medians),
    )


# ---------------------------------------------------------------------------
# 8. rounding inequalities
# ---------------------------------------------------------------------------


def test_criterion_08_rounding_inequalities():
    rng = np.random.default_rng(88)
    ok = True
    worst_round = np.inf
    for trial in range(50):
        n = int(rng.integers(3, 6))
        if trial % 2 == 0:
            sigma = PseudoDensityMatrix.from_global_state(random_density_matrix(n, rng), n, 2)
        else:
            idx = PauliIndex(n, 2)
            raw = rng.standard_normal(idx.size)
            sigma = PseudoDensityMatrix(idx, raw * (0.25 / np.abs(raw).sum()))
        slack = von_neumann_entropy(round_state(sigma)) - pseudo_entropy(sigma)
        worst_round = min(worst_round, slack)
        ok &= slack >= -1e-9
    worst_rel = np.inf
    for _ in range(50):
        n = int(rng.integers(2, 6))
        rho = random_density_matrix(n, rng)
        sigma = PseudoDensityMatrix.from_global_state(rho, n, 2)
        slack = pseudo_entropy(sigma) - von_neumann_entropy(rho)
        worst_rel = min(worst_rel, slack)
        ok &= slack >= -1e-9
    _report(8, ok, f"min S(rho)-S_k(sigma)={worst_round:.2e}, min S_k-S={worst_rel:.2e}")


# ---------------------------------------------------------------------------
# 9. reduction correctness with exact and tolerance-saturating oracles
# ---------------------------------------------------------------------------


def test_criterion_09_reductions():
    rng = np.random.default_rng(99)
    ok = True
    fails = {"qdos": 0, "qmv": 0, "qpf": 0}
    eps = 0.05
    for trial in range(50):
        n = int(rng.integers(2, 6))
        h = random_local_hamiltonian(n, 2, 2 * n, rng, norm_bound=1.0)
        seed = 10_000 + trial

        h_norm, _, _ = normalize_to_unit_interval(h)
        spec = Spectrum.of(h_norm)
        beta = float(rng.uniform(0.5, 3.0))
        z = exact_partition(h_norm, beta)
        for oracle in (
            QdosOracle(spec),
            QdosOracle(spec, jitter=0.01, rng=np.random.default_rng(seed)),
        ):
            est = qpf_from_qdos(h_norm, beta, oracle)["estimate"]
            if not (0.2475 * z <= est <= z):
                fails["qdos"] += 1

        p, _ = h.terms[int(rng.integers(0, h.num_terms))]
        mu = QmvOracle(h).mean(p, 1.0, 1.0)
        delta_oracle = eps * eps / 100.0
        for oracle in (
            QpfOracle(),
            QpfOracle(jitter=delta_oracle, rng=np.random.default_rng(seed)),
        ):
            mu_est = qmv_from_qpf(h, p, eps, oracle)["estimate"]
            if abs(mu_est - mu) > eps:
                fails["qmv"] += 1

        delta = 0.1
        z_abs = float(math.fsum(math.exp(e) for e in Spectrum.of(h).eigenvalues))
        coeff_sum = sum(abs(c) for _, c in h.terms)
        for oracle in (
            QmvOracle(h),
            QmvOracle(h, jitter=(delta / 100.0) / coeff_sum, rng=np.random.default_rng(seed)),
        ):
            est = qpf_from_qmv(h, delta, oracle)["estimate"]
            if not ((1 - delta) * z_abs <= est <= (1 + delta) * z_abs):
                fails["qpf"] += 1
    ok = all(v == 0 for v in fails.values())
    _report(9, ok, f"window violations over 50 instances x 2 oracles: {fails}")


# ---------------------------------------------------------------------------
# 10. delta-scaling trend from the benchmark CSV
# ---------------------------------------------------------------------------


def test_criterion_10_delta_scaling_trend():
    deltas = [0.2, 0.1, 0.05, 0.025]
    eta = 0.05
    suite = {
        "n": [10],
        "delta": deltas,
        "methods": ["hutchpp", "compressed"],
        "seeds": 2,
        "locality": 3,
        "num_terms": 30,
        "norm_bound": 2.0,
        "eta": eta,
        "instance_seed": 1010,
    }
    rows = run_suite(suite)
    ok = True

    def med_matvecs(method, delta):
        vals = [r["matvecs"] for r in rows if r["method"] == method and r["delta"] == delta]
        return float(np.median(vals))

    comp_ratios = []
    pp_ratios = []
    for lo, hi in zip(deltas[1:], deltas[:-1]):
        comp_ratios.append(med_matvecs("compressed", lo) / med_matvecs("compressed", hi))
        # plain Hutch++ floating-point work: matvec cost + dense residual
        # (Gram-Schmidt / projection) proxy m^2 d
        d = 2**10
        work = {}
        for delta in (lo, hi):
            m = probes_for((2.0 / 3.0) * delta, eta)
            work[delta] = med_matvecs("hutchpp", delta) * d + m * m * d
        pp_ratios.append(work[lo] / work[hi])
    ok &= all(r <= 2.5 for r in comp_ratios)
    ok &= all(r >= 3.0 for r in pp_ratios)
    # at equal delta the compressed path never needs more inner matvecs
    ok &= all(
        med_matvecs("compressed", d) <= med_matvecs("hutchpp", d) for d in deltas
    )
    comp_rows = [r for r in rows if r["method"] == "compressed"]
    hit = sum(r["rel_err_vs_exact"] <= r["delta"] for r in comp_rows)
    ok &= hit >= math.ceil(0.95 * len(comp_rows))
    _report(
        10,
        ok,
        "compressed matvec ratios per halving: "
        + ", ".join(f"{r:.2f}" for r in comp_ratios)
        + "; hutchpp work ratios: "
        + ", ".join(f"{r:.2f}" for r in pp_ratios)
        + f"; compressed rel_err<=delta in {hit}/{len(comp_rows)} rows",
    )


# ---------------------------------------------------------------------------
# 11. measurement-channel distortion and pseudodistribution bound
# ---------------------------------------------------------------------------


def test_criterion_11_channel_and_pseudodistribution():
    rng = np.random.default_rng(111)
    ok = True
    worst_ratio = np.inf
    for _ in range(1000):
        ell = int(rng.integers(1, 3))
        dim = 1 << ell
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        q = (g + g.conj().T) / 2
        trace_norm = float(np.abs(np.linalg.eigvalsh(q)).sum())
        out_norm = float(np.abs(measurement_channel(q)).sum())
        ratio = out_norm / (6.0**-ell * trace_norm)
        worst_ratio = min(worst_ratio, ratio)
        ok &= out_norm >= 6.0**-ell * trace_norm - 1e-12
    n, k = 5, 2
    om = np.full((n, n), 1.0 / (n * (n - 1)))
    np.fill_diagonal(om, 0.0)
    delta_dense = (n - 1) / n
    worst_margin = np.inf
    for _ in range(20):
        sigma = PseudoDensityMatrix.from_global_state(random_density_matrix(n, rng), n, k)
        lhs, bound = pseudodistribution_1norm_check(sigma, om, k, delta_dense)
        worst_margin = min(worst_margin, bound - lhs)
        ok &= lhs <= bound
    _report(
        11,
        ok,
        f"min ||Lambda(Q)||_1 / (6^-l ||Q||_1) = {worst_ratio:.3f}; "
        f"min bound-lhs over 20 instances = {worst_margin:.3f}",
    )
