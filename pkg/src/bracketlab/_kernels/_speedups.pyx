# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels.

Mirror of _pure.py with identical IEEE-754 operation order: same
left-to-right accumulation, same stable sigmoid branches, same
SplitMix64 integer arithmetic. Compiled without -ffast-math so that
output is bit-identical to the pure backend.
"""

from libc.math cimport exp
from libc.stdint cimport uint64_t

import numpy as np

BACKEND = "compiled"

cdef uint64_t _GOLDEN = 0x9E3779B97F4A7C15u
cdef uint64_t _MIX1 = 0xBF58476D1CE4E5B9u
cdef uint64_t _MIX2 = 0x94D049BB133111EBu
cdef double _INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _next_u64(uint64_t* state) noexcept nogil:
    state[0] = state[0] + _GOLDEN
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline double _sigmoid(double t) noexcept nogil:
    cdef double e
    if t >= 0.0:
        return 1.0 / (1.0 + exp(-t))
    e = exp(t)
    return e / (1.0 + e)


def splitmix64_stream(seed, count):
    """First `count` raw 64-bit outputs of SplitMix64 for `seed`."""
    cdef uint64_t state = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef int i
    out = []
    for i in range(count):
        out.append(_next_u64(&state))
    return out


def pair_probability(fa, fb, means, stds, coefs, double intercept):
    """Win probability for the first team of a pair (see _pure)."""
    cdef double[::1] a = np.ascontiguousarray(fa, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(fb, dtype=np.float64)
    cdef double[::1] mu = np.ascontiguousarray(means, dtype=np.float64)
    cdef double[::1] sd = np.ascontiguousarray(stds, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef double t = intercept
    cdef Py_ssize_t f
    for f in range(w.shape[0]):
        t += w[f] * ((a[f] - b[f]) - mu[f]) / sd[f]
    return _sigmoid(t)


def run_iterations(feats, means, stds, coefs, double intercept,
                   base_seed, int iterations):
    """Simulate tournaments; contract identical to _pure.run_iterations."""
    cdef double[:, ::1] rows = np.ascontiguousarray(feats, dtype=np.float64)
    cdef double[::1] mu = np.ascontiguousarray(means, dtype=np.float64)
    cdef double[::1] sd = np.ascontiguousarray(stds, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t p = w.shape[0]
    if n < 2 or n & (n - 1) or n > 64:
        raise ValueError("slot count must be a power of two between 2 and 64")
    cdef uint64_t seed0 = <uint64_t> (base_seed & 0xFFFFFFFFFFFFFFFF)

    out_arr = np.empty((iterations, n - 1), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef unsigned char[64] cur
    cdef unsigned char[32] nxt
    cdef uint64_t state
    cdef double t, pa, u
    cdef Py_ssize_t it, j, f, g, size
    cdef unsigned char a, b, winner

    with nogil:
        for it in range(iterations):
            state = seed0 + <uint64_t> it
            for j in range(n):
                cur[j] = <unsigned char> j
            g = 0
            size = n
            while size > 1:
                for j in range(size // 2):
                    a = cur[2 * j]
                    b = cur[2 * j + 1]
                    t = intercept
                    for f in range(p):
                        t += w[f] * ((rows[a, f] - rows[b, f]) - mu[f]) / sd[f]
                    pa = _sigmoid(t)
                    u = <double> (_next_u64(&state) >> 11) * _INV_2_53
                    winner = a if u < pa else b
                    out[it, g] = winner
                    nxt[j] = winner
                    g += 1
                for j in range(size // 2):
                    cur[j] = nxt[j]
                size //= 2
    return out_arr
