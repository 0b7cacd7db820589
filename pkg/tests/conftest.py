import numpy as np
import pytest

from gibbskit.hamiltonian import PauliString

H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S1 = np.diag([1, 1j]).astype(complex)
X1 = np.array([[0, 1], [1, 0]], dtype=complex)
Z1 = np.diag([1, -1]).astype(complex)


def gate_dense(n, gate):
    """Dense unitary of a single gate, independent of the package's kernels."""
    kind = gate[0]
    if kind in ("H", "S", "SDG", "X", "Z"):
        q = gate[1]
        m = {"H": H1, "S": S1, "SDG": S1.conj().T, "X": X1, "Z": Z1}[kind]
        out = np.array([[1.0 + 0j]])
        for i in range(n):
            out = np.kron(out, m if i == q else np.eye(2))
        return out
    if kind == "CX":
        c, t = gate[1], gate[2]
        dim = 2**n
        out = np.zeros((dim, dim), dtype=complex)
        for a in range(dim):
            cb = (a >> (n - 1 - c)) & 1
            out[a ^ (cb << (n - 1 - t)), a] = 1.0
        return out
    if kind == "CZ":
        qa, qb = gate[1], gate[2]
        dim = 2**n
        diag = np.ones(dim, dtype=complex)
        for a in range(dim):
            if ((a >> (n - 1 - qa)) & 1) and ((a >> (n - 1 - qb)) & 1):
                diag[a] = -1.0
        return np.diag(diag)
    raise ValueError(gate)


def clifford_dense(tab):
    """Dense unitary realized by a tableau's gate sequence."""
    u = np.eye(2**tab.n, dtype=complex)
    for g in tab.gate_sequence:
        u = gate_dense(tab.n, g) @ u
    return u


def pauli_dense_from_bits(n, xbits, zbits):
    label = []
    for q in range(n):
        key = (int(xbits[q]), int(zbits[q]))
        label.append({(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}[key])
    return PauliString.from_label("".join(label)).dense()


def random_psd(rng, d, decay=None):
    """Random PSD matrix; `decay` > 0 gives an exponentially decaying spectrum."""
    g = rng.standard_normal((d, d))
    q, _ = np.linalg.qr(g)
    if decay is None:
        vals = rng.uniform(0.1, 1.0, size=d)
    else:
        vals = np.exp(-decay * np.arange(d)) * rng.uniform(0.5, 1.0, size=d)
    return (q * vals) @ q.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
