"""Hot numeric kernels: Pauli-sum matvecs and Clifford gate action on state blocks.

Every kernel exists in two variants, `*_numpy` and (when numba is available)
an @njit-compiled one. The module-level names without suffix dispatch to the
variant selected by GIBBSKIT_DISABLE_NUMBA (see _backend). All kernels operate
on (2**n, width) complex128 blocks so probe batches share one pass over memory.

Bit convention: qubit q of an n-qubit register is bit (n-1-q) of the basis
index, so the basis index reads like the Pauli string and |0...0> is index 0.
"""

import numpy as np

from ._backend import USE_NUMBA

# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------


def _parity_u64(x):
    """Bitwise parity of each entry of an unsigned integer array."""
    x = x.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        x ^= x >> shift
    return (x & 1).astype(np.int8)


def pauli_block_matvec_numpy(v, xmasks, zmasks, weights):
    """out[b] += sum_t w_t * (-1)^parity(z_t & (b^x_t)) * v[b ^ x_t]."""
    d = v.shape[0]
    idx = np.arange(d, dtype=np.uint64)
    out = np.zeros_like(v)
    for t in range(xmasks.shape[0]):
        src = idx ^ np.uint64(xmasks[t])
        sign = 1.0 - 2.0 * _parity_u64(src & np.uint64(zmasks[t]))
        out += (weights[t] * sign)[:, None] * v[src.astype(np.intp)]
    return out


def apply_h_numpy(v, bit):
    mask = 1 << bit
    d = v.shape[0]
    idx = np.arange(d)
    lo = idx[(idx & mask) == 0]
    hi = lo | mask
    a = v[lo].copy()
    b = v[hi]
    s = np.sqrt(0.5)
    v[lo] = s * (a + b)
    v[hi] = s * (a - b)
    return v


def apply_phase_numpy(v, bit, phase):
    """Multiply amplitudes with the bit set by `phase` (S: +1j, Sdg: -1j, Z: -1)."""
    mask = 1 << bit
    idx = np.arange(v.shape[0])
    v[(idx & mask) != 0] *= phase
    return v


def apply_x_numpy(v, bit):
    mask = 1 << bit
    idx = np.arange(v.shape[0])
    v[:] = v[idx ^ mask]
    return v


def apply_cx_numpy(v, cbit, tbit):
    cmask = 1 << cbit
    tmask = 1 << tbit
    idx = np.arange(v.shape[0])
    sel = (idx & cmask) != 0
    v[sel] = v[(idx ^ tmask)[sel]]
    return v


def apply_cz_numpy(v, bit_a, bit_b):
    amask = 1 << bit_a
    bmask = 1 << bit_b
    idx = np.arange(v.shape[0])
    v[((idx & amask) != 0) & ((idx & bmask) != 0)] *= -1.0
    return v


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if USE_NUMBA:
    from numba import njit, prange

    @njit(cache=True, parallel=True)
    def _pauli_block_matvec_numba(v, out, xmasks, zmasks, weights):
        d, m = v.shape
        nterms = xmasks.shape[0]
        for b in prange(d):
            for t in range(nterms):
                src = b ^ xmasks[t]
                x = src & zmasks[t]
                x ^= x >> 32
                x ^= x >> 16
                x ^= x >> 8
                x ^= x >> 4
                x ^= x >> 2
                x ^= x >> 1
                w = weights[t] * (1.0 - 2.0 * (x & 1))
                for c in range(m):
                    out[b, c] += w * v[src, c]

    def pauli_block_matvec(v, xmasks, zmasks, weights):
        out = np.zeros_like(v)
        _pauli_block_matvec_numba(v, out, xmasks, zmasks, weights)
        return out

    @njit(cache=True)
    def _apply_h_numba(v, bit):
        d, m = v.shape
        mask = 1 << bit
        s = np.sqrt(0.5)
        for i in range(d):
            if i & mask == 0:
                j = i | mask
                for c in range(m):
                    a = v[i, c]
                    b = v[j, c]
                    v[i, c] = s * (a + b)
                    v[j, c] = s * (a - b)

    @njit(cache=True)
    def _apply_phase_numba(v, bit, phase):
        d, m = v.shape
        mask = 1 << bit
        for i in range(d):
            if i & mask:
                for c in range(m):
                    v[i, c] *= phase

    @njit(cache=True)
    def _apply_x_numba(v, bit):
        d, m = v.shape
        mask = 1 << bit
        for i in range(d):
            if i & mask == 0:
                j = i | mask
                for c in range(m):
                    tmp = v[i, c]
                    v[i, c] = v[j, c]
                    v[j, c] = tmp

    @njit(cache=True)
    def _apply_cx_numba(v, cbit, tbit):
        d, m = v.shape
        cmask = 1 << cbit
        tmask = 1 << tbit
        for i in range(d):
            if (i & cmask) and (i & tmask) == 0:
                j = i | tmask
                for c in range(m):
                    tmp = v[i, c]
                    v[i, c] = v[j, c]
                    v[j, c] = tmp

    @njit(cache=True)
    def _apply_cz_numba(v, abit, bbit):
        d, m = v.shape
        amask = 1 << abit
        bmask = 1 << bbit
        for i in range(d):
            if (i & amask) and (i & bmask):
                for c in range(m):
                    v[i, c] = -v[i, c]

    def apply_h(v, bit):
        _apply_h_numba(v, bit)
        return v

    def apply_phase(v, bit, phase):
        _apply_phase_numba(v, bit, phase)
        return v

    def apply_x(v, bit):
        _apply_x_numba(v, bit)
        return v

    def apply_cx(v, cbit, tbit):
        _apply_cx_numba(v, cbit, tbit)
        return v

    def apply_cz(v, abit, bbit):
        _apply_cz_numba(v, abit, bbit)
        return v

else:
    pauli_block_matvec = pauli_block_matvec_numpy
    apply_h = apply_h_numpy
    apply_phase = apply_phase_numpy
    apply_x = apply_x_numpy
    apply_cx = apply_cx_numpy
    apply_cz = apply_cz_numpy
