"""Uniformly random Clifford elements and the compressed-matrix oracle.

A Clifford element is stored as a tableau: a 2n x 2n binary symplectic matrix
whose rows are the conjugation images of X_0..X_{n-1}, Z_0..Z_{n-1} (columns
0..n-1 hold x parts, n..2n-1 z parts) plus a sign bit per row. Sampling draws
a uniform element of Sp(2n, GF(2)) through the Koenig-Smolin transvection
bijection and attaches 2n uniform sign bits, which together enumerate the
Clifford group modulo global phase exactly once. A gate sequence over
{H, S, CX, CZ, X, Z} realizing the element is synthesized by Gaussian
elimination on the tableau and is what acts on state vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ValidationError

Gate = tuple  # ("H", q) | ("S", q) | ("SDG", q) | ("CX", c, t) | ("CZ", a, b) | ("X", q) | ("Z", q)


# ---------------------------------------------------------------------------
# tableau conjugation updates (vectorized over all rows)
# ---------------------------------------------------------------------------


def _t_apply(sym: np.ndarray, ph: np.ndarray, n: int, gate: Gate) -> None:
    kind = gate[0]
    if kind == "H":
        q = gate[1]
        x = sym[:, q].copy()
        z = sym[:, n + q].copy()
        ph ^= x & z
        sym[:, q] = z
        sym[:, n + q] = x
    elif kind == "S":
        q = gate[1]
        x = sym[:, q]
        z = sym[:, n + q]
        ph ^= x & z
        sym[:, n + q] = z ^ x
    elif kind == "SDG":
        q = gate[1]
        x = sym[:, q]
        z = sym[:, n + q]
        ph ^= x & (z ^ 1)
        sym[:, n + q] = z ^ x
    elif kind == "CX":
        c, t = gate[1], gate[2]
        xc = sym[:, c].copy()
        zc = sym[:, n + c].copy()
        xt = sym[:, t].copy()
        zt = sym[:, n + t].copy()
        ph ^= xc & zt & (xt ^ zc ^ 1)
        sym[:, t] = xt ^ xc
        sym[:, n + c] = zc ^ zt
    elif kind == "CZ":
        a, b = gate[1], gate[2]
        for g in (("H", b), ("CX", a, b), ("H", b)):
            _t_apply(sym, ph, n, g)
    elif kind == "X":
        ph ^= sym[:, n + gate[1]]
    elif kind == "Z":
        ph ^= sym[:, gate[1]]
    else:  # pragma: no cover
        raise ValidationError(f"unknown gate {gate!r}")


def tableau_from_gates(n: int, gates: list[Gate]) -> tuple[np.ndarray, np.ndarray]:
    """Conjugation tableau of the unitary that applies `gates` in list order."""
    sym = np.eye(2 * n, dtype=np.uint8)
    ph = np.zeros(2 * n, dtype=np.uint8)
    for g in gates:
        _t_apply(sym, ph, n, g)
    return sym, ph


# ---------------------------------------------------------------------------
# Koenig-Smolin uniform symplectic sampling (interleaved x/z layout inside)
# ---------------------------------------------------------------------------


def _sympl_inner(u: np.ndarray, v: np.ndarray) -> int:
    t = 0
    for i in range(u.size >> 1):
        t += int(u[2 * i]) * int(v[2 * i + 1]) + int(u[2 * i + 1]) * int(v[2 * i])
    return t & 1


def _transvect(k: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (v + _sympl_inner(k, v) * k) % 2


def _int_bits(i: int, width: int) -> np.ndarray:
    return np.array([(i >> j) & 1 for j in range(width)], dtype=np.uint8)


def _find_transvection(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two transvections carrying x to y (Koenig-Smolin Lemma 2); x, y != 0."""
    nn = x.size
    zero = np.zeros(nn, dtype=np.uint8)
    if np.array_equal(x, y):
        return zero, zero
    if _sympl_inner(x, y) == 1:
        return (x ^ y).astype(np.uint8), zero
    z = np.zeros(nn, dtype=np.uint8)
    # a coordinate pair where both x and y are nonzero
    for i in range(nn >> 1):
        ii = 2 * i
        if (x[ii] | x[ii + 1]) and (y[ii] | y[ii + 1]):
            z[ii] = x[ii] ^ y[ii]
            z[ii + 1] = x[ii + 1] ^ y[ii + 1]
            if z[ii] == 0 and z[ii + 1] == 0:
                z[ii + 1] = 1
                if x[ii] != x[ii + 1]:
                    z[ii] = 1
            return (x ^ z).astype(np.uint8), (y ^ z).astype(np.uint8)
    # otherwise pick pairs where one of x, y is 00 and the other is not
    for i in range(nn >> 1):
        ii = 2 * i
        if (x[ii] | x[ii + 1]) and not (y[ii] | y[ii + 1]):
            if x[ii] == x[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = x[ii]
                z[ii] = x[ii + 1]
            break
    for i in range(nn >> 1):
        ii = 2 * i
        if not (x[ii] | x[ii + 1]) and (y[ii] | y[ii + 1]):
            if y[ii] == y[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = y[ii]
                z[ii] = y[ii + 1]
            break
    return (x ^ z).astype(np.uint8), (y ^ z).astype(np.uint8)


def _symplectic_sample(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform element of Sp(2n, GF(2)), rows = images of e1,f1,...,en,fn."""
    nn = 2 * n
    k = int(rng.integers(1, 1 << nn))
    bits = _int_bits(int(rng.integers(0, 1 << (nn - 1))), nn - 1)

    f1 = _int_bits(k, nn)
    e1 = np.zeros(nn, dtype=np.uint8)
    e1[0] = 1
    t0, t1 = _find_transvection(e1, f1)

    eprime = e1.copy()
    eprime[2:nn] = bits[1:]
    h0 = _transvect(t0, eprime)
    h0 = _transvect(t1, h0)
    if bits[0] == 1:
        f1 = np.zeros(nn, dtype=np.uint8)

    if n == 1:
        g = np.eye(2, dtype=np.uint8)
    else:
        g = np.zeros((nn, nn), dtype=np.uint8)
        g[:2, :2] = np.eye(2, dtype=np.uint8)
        g[2:, 2:] = _symplectic_sample(n - 1, rng)
    for j in range(nn):
        row = _transvect(t0, g[j])
        row = _transvect(t1, row)
        row = _transvect(h0, row)
        row = _transvect(f1, row)
        g[j] = row
    return g


def _interleaved_to_block(g: np.ndarray, n: int) -> np.ndarray:
    """Reorder rows/columns from (x0,z0,x1,z1,...) to (x...|z...) layout."""
    perm = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return np.ascontiguousarray(g[np.ix_(perm, perm)]).astype(np.uint8)


# ---------------------------------------------------------------------------
# tableau object, synthesis, state application
# ---------------------------------------------------------------------------


@dataclass
class CliffordTableau:
    n: int
    symplectic: np.ndarray  # (2n, 2n) uint8
    phases: np.ndarray  # (2n,) uint8
    gate_sequence: list[Gate] = field(default_factory=list)

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(n, np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8), [])

    def is_symplectic(self) -> bool:
        n = self.n
        omega = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        omega[:n, n:] = np.eye(n, dtype=np.uint8)
        omega[n:, :n] = np.eye(n, dtype=np.uint8)
        lhs = (self.symplectic @ omega @ self.symplectic.T) % 2
        return bool(np.array_equal(lhs, omega))

    def image_of_generator(self, row: int) -> tuple[np.ndarray, np.ndarray, int]:
        """(x bits, z bits, sign bit) of the image of X_row (row<n) or Z_{row-n}."""
        n = self.n
        return (
            self.symplectic[row, :n].copy(),
            self.symplectic[row, n:].copy(),
            int(self.phases[row]),
        )


def _synthesize(sym: np.ndarray, ph: np.ndarray, n: int) -> list[Gate]:
    """Gate list g_1..g_m with (g_m ... g_1) U = I; mutates the inputs to identity."""
    ops: list[Gate] = []

    def do(gate: Gate) -> None:
        _t_apply(sym, ph, n, gate)
        ops.append(gate)

    for j in range(n):
        rz = n + j
        # pin the Z_j image: convert any x support to z, then sweep z onto qubit j
        for q in range(j, n):
            if sym[rz, q]:
                if sym[rz, n + q]:
                    do(("S", q))
                do(("H", q))
        if not sym[rz, n + j]:
            q = next(q for q in range(j + 1, n) if sym[rz, n + q])
            do(("CX", j, q))
        for q in range(j + 1, n):
            if sym[rz, n + q]:
                do(("CX", q, j))
        # pin the X_j image using gates that fix Z_j
        rx = j
        for q in range(j + 1, n):
            if sym[rx, q] and sym[rx, n + q]:
                do(("S", q))
        for q in range(j + 1, n):
            if sym[rx, q]:
                do(("CX", j, q))
        for q in range(j + 1, n):
            if sym[rx, n + q]:
                do(("H", q))
                do(("CX", j, q))
        if sym[rx, n + j]:
            do(("S", j))
    for j in range(n):
        if ph[j]:
            do(("Z", j))
        if ph[n + j]:
            do(("X", j))
    return ops


_INVERSE = {"H": "H", "CX": "CX", "CZ": "CZ", "X": "X", "Z": "Z", "S": "SDG", "SDG": "S"}


def _invert_gate(gate: Gate) -> Gate:
    return (_INVERSE[gate[0]],) + gate[1:]


def sample_clifford(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Uniformly random n-qubit Clifford element (mod global phase)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    sym = _interleaved_to_block(_symplectic_sample(n, rng), n)
    ph = rng.integers(0, 2, size=2 * n).astype(np.uint8)
    tab = CliffordTableau(n, sym, ph)
    reduction = _synthesize(sym.copy(), ph.copy(), n)
    gates: list[Gate] = []
    for g in reversed(reduction):
        inv = _invert_gate(g)
        if inv[0] == "SDG":
            # keep the emitted sequence inside {H,S,CX,CZ,X,Z}: Sdg = S o Z
            gates.append(("Z", inv[1]))
            gates.append(("S", inv[1]))
        else:
            gates.append(inv)
    tab.gate_sequence = gates
    return tab


def _apply_gate_block(v: np.ndarray, n: int, gate: Gate) -> None:
    kind = gate[0]
    bit = lambda q: n - 1 - q  # noqa: E731 - qubit q lives in bit n-1-q
    if kind == "H":
        _kernels.apply_h(v, bit(gate[1]))
    elif kind == "S":
        _kernels.apply_phase(v, bit(gate[1]), 1.0j)
    elif kind == "SDG":
        _kernels.apply_phase(v, bit(gate[1]), -1.0j)
    elif kind == "Z":
        _kernels.apply_phase(v, bit(gate[1]), -1.0)
    elif kind == "X":
        _kernels.apply_x(v, bit(gate[1]))
    elif kind == "CX":
        _kernels.apply_cx(v, bit(gate[1]), bit(gate[2]))
    elif kind == "CZ":
        _kernels.apply_cz(v, bit(gate[1]), bit(gate[2]))
    else:  # pragma: no cover
        raise ValidationError(f"unknown gate {gate!r}")


def apply_clifford_block(
    tab: CliffordTableau, v: np.ndarray, dagger: bool = False
) -> np.ndarray:
    """U V (or U^dag V) for a (2^n, width) block, gate by gate."""
    if v.ndim != 2 or v.shape[0] != (1 << tab.n):
        raise ValidationError(f"block has shape {v.shape}, expected ({1 << tab.n}, m)")
    out = np.array(v, dtype=np.complex128, order="C", copy=True)
    gates = (
        [_invert_gate(g) for g in reversed(tab.gate_sequence)]
        if dagger
        else tab.gate_sequence
    )
    for g in gates:
        _apply_gate_block(out, tab.n, g)
    return out


def apply_clifford(tab: CliffordTableau, v: np.ndarray, dagger: bool = False) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (1 << tab.n,):
        raise ValidationError(f"vector has shape {v.shape}, expected ({1 << tab.n},)")
    return apply_clifford_block(tab, v.reshape(-1, 1), dagger).ravel()


# ---------------------------------------------------------------------------
# compression
# ---------------------------------------------------------------------------


def compression_width(delta: float, eta: float, n: int | None = None) -> int:
    """Smallest k with 2^k >= 1/(eta delta^2); capped at n when given."""
    if not (0 < delta <= 1) or not (0 < eta <= 1):
        raise ValidationError("delta and eta must lie in (0, 1]")
    need = 1.0 / (eta * delta * delta)
    k = max(0, int(np.floor(np.log2(need))) - 1)
    while (1 << k) < need:
        k += 1
    if n is not None:
        k = min(k, n)
    return k


class CompressedOracle:
    """phi_U(A): the 2^k x 2^k corner of U A U^dag on the |0^{n-k}> block.

    The compressed coordinates occupy the last k qubits, i.e. the first 2^k
    coordinates of the full vector. One compressed matvec costs exactly one
    inner matvec plus two Clifford applications.
    """

    def __init__(self, k: int, tableau: CliffordTableau, inner):
        if not 0 <= k <= tableau.n:
            raise ValidationError("compression width must satisfy 0 <= k <= n")
        self.k = k
        self.tableau = tableau
        self.inner = inner
        self.n = tableau.n
        self.dim = 1 << k
        self.psd = getattr(inner, "psd", False)

    def matvec_block(self, w: np.ndarray) -> np.ndarray:
        if w.ndim != 2 or w.shape[0] != self.dim:
            raise ValidationError(f"block has shape {w.shape}, expected ({self.dim}, m)")
        full = np.zeros((1 << self.n, w.shape[1]), dtype=np.complex128)
        full[: self.dim] = w
        full = apply_clifford_block(self.tableau, full, dagger=True)
        full = self.inner.matvec_block(full)
        full = apply_clifford_block(self.tableau, full, dagger=False)
        return full[: self.dim]

    def matvec(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w)
        if w.shape != (self.dim,):
            raise ValidationError(f"vector has shape {w.shape}, expected ({self.dim},)")
        return self.matvec_block(w.reshape(-1, 1)).ravel()

    def dense(self) -> np.ndarray:
        return self.matvec_block(np.eye(self.dim, dtype=np.complex128))
