import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbskit.errors import ValidationError
from gibbskit.exact import Spectrum, dense_matrix
from gibbskit.hamiltonian import (
    PauliString,
    PauliSumHamiltonian,
    complete_graph_zz,
    random_local_hamiltonian,
    tile_copies,
    two_local_view,
)


def test_parse_single_term():
    h = PauliSumHamiltonian.from_json('{"n":1,"terms":[{"pauli":"Z","coeff":1.0}]}')
    assert h.n == 1 and h.locality == 1
    assert h.terms[0][0].label == "Z" and h.terms[0][1] == 1.0


def test_parse_merges_duplicates():
    doc = '{"n":2,"terms":[{"pauli":"ZZ","coeff":1.0},{"pauli":"ZZ","coeff":0.5}]}'
    h = PauliSumHamiltonian.from_json(doc)
    assert len(h.terms) == 1
    assert h.terms[0][1] == pytest.approx(1.5)


def test_parse_length_mismatch():
    with pytest.raises(ValidationError):
        PauliSumHamiltonian.from_json('{"n":2,"terms":[{"pauli":"ZZZ","coeff":1.0}]}')


@pytest.mark.parametrize(
    "doc",
    [
        "not json",
        '{"n":1}',
        '{"n":0,"terms":[]}',
        '{"n":1,"terms":[{"pauli":"Q","coeff":1.0}]}',
        '{"n":1,"terms":[{"pauli":"Z","coeff":"x"}]}',
        '{"n":1,"terms":[{"pauli":"Z","coeff":true}]}',
    ],
)
def test_parse_rejects(doc):
    with pytest.raises(ValidationError):
        PauliSumHamiltonian.from_json(doc)


def test_parse_rejects_nonfinite_coeff():
    with pytest.raises(ValidationError):
        PauliSumHamiltonian.from_terms(1, [("Z", float("inf"))])


def test_cancellation_drops_term():
    h = PauliSumHamiltonian.from_terms(1, [("Z", 1.0), ("Z", -1.0)])
    assert h.num_terms == 0
    assert h.pauli_norm_bound() == 0.0


def test_identity_tracked_separately():
    h = PauliSumHamiltonian.from_terms(2, [("II", 0.7), ("ZZ", 1.0)])
    assert h.identity_coeff == pytest.approx(0.7)
    assert h.num_terms == 1
    assert h.traceless_part().identity_coeff == 0.0


def test_matvec_eigenvector():
    h = PauliSumHamiltonian.from_terms(1, [("Z", 1.0)])
    assert np.allclose(h.matvec(np.array([1.0, 0.0])), [1.0, 0.0])


def test_matvec_bitflip():
    h = PauliSumHamiltonian.from_terms(1, [("X", 1.0)])
    assert np.allclose(h.matvec(np.array([1.0, 0.0])), [0.0, 1.0])


def test_matvec_vs_dense(rng):
    h = PauliSumHamiltonian.from_terms(2, [("ZZ", 1.0), ("XI", 0.5)])
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    assert np.max(np.abs(h.matvec(v) - dense_matrix(h) @ v)) < 1e-12


def test_matvec_dimension_mismatch():
    h = PauliSumHamiltonian.from_terms(2, [("ZZ", 1.0)])
    with pytest.raises(ValidationError):
        h.matvec(np.zeros(3))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10))
def test_matvec_linear_and_hermitian(seed, n):
    rng = np.random.default_rng(seed)
    h = random_local_hamiltonian(n, min(3, n), 8, rng)
    d = h.dim
    u = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    a, b = rng.standard_normal(2)
    lin = h.matvec(a * u + b * v) - a * h.matvec(u) - b * h.matvec(v)
    assert np.max(np.abs(lin)) < 1e-12 * max(1.0, h.pauli_norm_bound())
    lhs = np.vdot(u, h.matvec(v))
    rhs = np.conj(np.vdot(v, h.matvec(u)))
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_two_local_view_complete_graph():
    h = complete_graph_zz(4)
    view = two_local_view(h)
    assert len(view.blocks) == 6
    for key, g in view.gammas.items():
        assert g == pytest.approx(1.0)
    assert view.gamma_total == pytest.approx(6.0)
    assert view.delta == pytest.approx(6.0 / 16.0)


def test_two_local_view_single_block():
    h = PauliSumHamiltonian.from_terms(4, [("IZZI", 1.0)])
    view = two_local_view(h)
    assert view.gamma_total == pytest.approx(max(view.gammas.values()))
    assert view.delta == pytest.approx(1.0 / 16.0)


def test_two_local_view_zero_hamiltonian():
    view = two_local_view(PauliSumHamiltonian(3, []))
    assert view.degenerate and view.delta is None


def test_two_local_view_rejects_3_local():
    h = PauliSumHamiltonian.from_terms(3, [("XXZ", 1.0)])
    with pytest.raises(ValidationError):
        two_local_view(h)


def _embed_two_qubit(mat4, i, j, n):
    """Place a 4x4 operator on qubits (i, j) of an n-qubit register."""
    order = [i, j] + [q for q in range(n) if q not in (i, j)]
    inv = [order.index(q) for q in range(n)]
    arr = np.kron(mat4, np.eye(2 ** (n - 2), dtype=complex)).reshape((2,) * (2 * n))
    arr = arr.transpose(inv + [n + p for p in inv])
    return arr.reshape(2**n, 2**n)


@pytest.mark.parametrize("seed", range(6))
def test_two_local_view_reconstruction(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    h = random_local_hamiltonian(n, 2, 10, rng)
    h = h.plus_pauli(PauliString.from_label("I" * n), 0.3)
    view = two_local_view(h)
    rebuilt = np.eye(h.dim, dtype=complex) * view.identity_coeff
    for (i, j), block in view.blocks.items():
        rebuilt += _embed_two_qubit(block, i, j, n)
    assert np.max(np.abs(rebuilt - dense_matrix(h))) < 1e-12


def test_pauli_norm_bound_examples():
    assert PauliSumHamiltonian.from_terms(1, [("Z", 1.0)]).pauli_norm_bound() == 1.0
    h = PauliSumHamiltonian.from_terms(2, [("ZZ", 1.0), ("XI", 0.5)])
    assert h.pauli_norm_bound() == pytest.approx(1.5)


def test_pauli_norm_bound_dominates_spectral_norm():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        h = random_local_hamiltonian(n, min(3, n), int(rng.integers(1, 12)), rng)
        ev = Spectrum.of(h).eigenvalues
        spectral = max(abs(ev[0]), abs(ev[-1]))
        assert h.pauli_norm_bound() >= spectral - 1e-10


def test_tile_copies_partition_power(rng):
    from gibbskit.exact import exact_partition

    h = random_local_hamiltonian(2, 2, 4, rng)
    z1 = exact_partition(h, 1.0)
    z3 = exact_partition(tile_copies(h, 3), 1.0)
    assert z3 == pytest.approx(z1**3, rel=1e-10)


def test_json_roundtrip(rng):
    h = random_local_hamiltonian(4, 3, 8, rng)
    h2 = PauliSumHamiltonian.from_json(h.to_json())
    assert h2.n == h.n
    assert [(p.label, c) for p, c in h2.terms] == [(p.label, c) for p, c in h.terms]
