# Statevector kernels. A state buffer is a flat complex128 array whose length
# is a multiple of 2**n; bits above n index independent batch members, so one
# call evolves a whole batch of basis states.
import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def apply_1q(state, t, m, cmask, cval):
    bit = 1 << t
    low = bit - 1
    m00 = m[0, 0]
    m01 = m[0, 1]
    m10 = m[1, 0]
    m11 = m[1, 1]
    for r in range(state.size >> 1):
        i0 = ((r >> t) << (t + 1)) | (r & low)
        if (i0 & cmask) != cval:
            continue
        i1 = i0 | bit
        a0 = state[i0]
        a1 = state[i1]
        state[i0] = m00 * a0 + m01 * a1
        state[i1] = m10 * a0 + m11 * a1


@nb.njit(cache=True, nogil=True)
def apply_2q(state, t0, t1, m, cmask, cval):
    # m is indexed by b(t0) + 2*b(t1)
    b0 = 1 << t0
    b1 = 1 << t1
    lo = min(t0, t1)
    hi = max(t0, t1)
    low_lo = (1 << lo) - 1
    low_hi = (1 << hi) - 1
    for r in range(state.size >> 2):
        i = ((r >> lo) << (lo + 1)) | (r & low_lo)
        i = ((i >> hi) << (hi + 1)) | (i & low_hi)
        if (i & cmask) != cval:
            continue
        j1 = i | b0
        j2 = i | b1
        j3 = i | b0 | b1
        a0 = state[i]
        a1 = state[j1]
        a2 = state[j2]
        a3 = state[j3]
        state[i] = m[0, 0] * a0 + m[0, 1] * a1 + m[0, 2] * a2 + m[0, 3] * a3
        state[j1] = m[1, 0] * a0 + m[1, 1] * a1 + m[1, 2] * a2 + m[1, 3] * a3
        state[j2] = m[2, 0] * a0 + m[2, 1] * a1 + m[2, 2] * a2 + m[2, 3] * a3
        state[j3] = m[3, 0] * a0 + m[3, 1] * a1 + m[3, 2] * a2 + m[3, 3] * a3


@nb.njit(cache=True, nogil=True)
def clean_zero_prob(state, dim):
    """Per batch member: probability that qubit 0 reads 0 (fixed summation order)."""
    batch = state.size // dim
    out = np.empty(batch)
    for b in range(batch):
        acc = 0.0
        base = b * dim
        for i in range(0, dim, 2):
            z = state[base + i]
            acc += z.real * z.real + z.imag * z.imag
        out[b] = acc
    return out


@nb.njit(cache=True, nogil=True)
def diag_sum(state, dim, start):
    """Sum of <x|psi_x> where batch member b was prepared in basis state start + b."""
    batch = state.size // dim
    acc = 0j
    for b in range(batch):
        acc += state[b * dim + start + b]
    return acc
