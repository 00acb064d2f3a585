# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled bit kernels; bit-identical twin of ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef extern from *:
    """
    static inline int fc_parity(unsigned long long x) { return __builtin_parityll(x); }
    """
    int fc_parity(unsigned long long x) nogil

BACKEND = "cython"

cdef uint64_t EVEN_BITS = 0x5555555555555555ULL
cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t STREAM = 0xD1B54A32D192ED03ULL


cdef inline uint64_t splitmix_next(uint64_t* state) noexcept nogil:
    state[0] += GOLDEN
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t swap_pairs(uint64_t x) noexcept nogil:
    return ((x & EVEN_BITS) << 1) | ((x >> 1) & EVEN_BITS)


cdef inline uint64_t low_mask(int bits) noexcept nogil:
    if bits >= 64:
        return 0xFFFFFFFFFFFFFFFFULL
    return ((<uint64_t>1) << bits) - 1


cdef inline uint64_t combine(uint64_t* basis, uint64_t coeff, int width) noexcept nogil:
    cdef uint64_t out = 0
    cdef int k
    for k in range(width):
        out ^= basis[k] & (0 - ((coeff >> k) & 1))
    return out


cdef inline void pivot_out(uint64_t* basis, uint64_t probe, int width) noexcept nogil:
    # first basis vector odd against probe is moved to slot width-1; others made even
    cdef int k, p = -1
    cdef uint64_t piv
    for k in range(width):
        if fc_parity(basis[k] & probe):
            p = k
            break
    piv = basis[p]
    for k in range(width):
        basis[k] ^= piv & (0 - <uint64_t>fc_parity(basis[k] & probe))
    basis[p] = piv  # restores the pivot when p == width - 1
    basis[p] = basis[width - 1]
    basis[width - 1] = piv


cdef void sample_one(int n, uint64_t* state, uint64_t* cols, uint64_t* basis) noexcept nogil:
    cdef int dim = 2 * n
    cdef int width = dim
    cdef int i, k
    cdef uint64_t coeff, u, v
    for k in range(dim):
        basis[k] = (<uint64_t>1) << k
    for i in range(n):
        coeff = splitmix_next(state) & low_mask(width)
        while coeff == 0:
            coeff = splitmix_next(state) & low_mask(width)
        u = combine(basis, coeff, width)
        pivot_out(basis, swap_pairs(u), width)
        coeff = splitmix_next(state) & low_mask(width - 1)
        v = basis[width - 1] ^ combine(basis, coeff, width - 1)
        pivot_out(basis, swap_pairs(v), width - 1)
        cols[2 * i] = u
        cols[2 * i + 1] = v
        width -= 2


def sample_symplectic(int n, Py_ssize_t count, uint64_t seed):
    """Uniform symplectic 2n x 2n matrices as row words, shape (count, 2n)."""
    if n < 1 or n > 32:
        raise ValueError(f"n must lie in 1..32, got {n}")
    cdef int dim = 2 * n
    out = np.zeros((count, dim), dtype=np.uint64)
    cdef uint64_t[:, ::1] ov = out
    cdef uint64_t cols[64]
    cdef uint64_t basis[64]
    cdef uint64_t state, row
    cdef Py_ssize_t m
    cdef int i, j
    with nogil:
        for m in range(count):
            state = seed + <uint64_t>(m + 1) * STREAM
            sample_one(n, &state, cols, basis)
            for i in range(dim):
                row = 0
                for j in range(dim):
                    row |= ((cols[j] >> i) & 1) << j
                ov[m, i] = row
    return out


def transpose_words(m, int dim):
    src = np.ascontiguousarray(m, dtype=np.uint64)
    flat = src.reshape(-1, dim)
    out = np.zeros_like(flat)
    cdef const uint64_t[:, ::1] sv = flat
    cdef uint64_t[:, ::1] dv = out
    cdef Py_ssize_t r
    cdef int i, j
    cdef uint64_t row
    with nogil:
        for r in range(sv.shape[0]):
            for i in range(dim):
                row = 0
                for j in range(dim):
                    row |= ((sv[r, j] >> i) & 1) << j
                dv[r, i] = row
    return out.reshape(src.shape)


cdef inline void apply_gates(const uint64_t[:, :, ::1] gates, uint64_t* u, Py_ssize_t r,
                             int sites, int half, int parity) noexcept nogil:
    cdef int x, y, i
    cdef uint64_t w, out
    cdef uint64_t smask = low_mask(half)
    for x in range(parity, sites, 2):
        y = (x + 1) % sites
        w = u[x] | (u[y] << half)
        out = 0
        for i in range(2 * half):
            out |= (<uint64_t>fc_parity(gates[r, x, i] & w)) << i
        u[x] = out & smask
        u[y] = out >> half


def evolve_sites(gates, u0, int n_modes, int t2, int parity0=0):
    """Apply t2 alternating half-steps to site words u0 of shape (R, L)."""
    cdef const uint64_t[:, :, ::1] gv = np.ascontiguousarray(gates, dtype=np.uint64)
    u = np.array(u0, dtype=np.uint64, copy=True, order="C")
    cdef uint64_t[:, ::1] uv = u
    cdef Py_ssize_t r
    cdef int h
    cdef int sites = uv.shape[1]
    with nogil:
        for r in range(uv.shape[0]):
            for h in range(t2):
                apply_gates(gv, &uv[r, 0], r, sites, 2 * n_modes, (parity0 + h) & 1)
    return u


def evolve_trace(gates, u0, int n_modes, int t2, int parity0=0):
    """Like ``evolve_sites`` but records every half-step, shape (R, t2+1, L)."""
    cdef const uint64_t[:, :, ::1] gv = np.ascontiguousarray(gates, dtype=np.uint64)
    u = np.array(u0, dtype=np.uint64, copy=True, order="C")
    cdef uint64_t[:, ::1] uv = u
    out = np.empty((u.shape[0], t2 + 1, u.shape[1]), dtype=np.uint64)
    cdef uint64_t[:, :, ::1] ov = out
    cdef Py_ssize_t r
    cdef int h, x
    cdef int sites = uv.shape[1]
    with nogil:
        for r in range(uv.shape[0]):
            for x in range(sites):
                ov[r, 0, x] = uv[r, x]
            for h in range(t2):
                apply_gates(gv, &uv[r, 0], r, sites, 2 * n_modes, (parity0 + h) & 1)
                for x in range(sites):
                    ov[r, h + 1, x] = uv[r, x]
    return out


def batch_matmul(a, b, int m):
    """Products a[r] @ b[r] of m x m matrices in row-word form."""
    cdef const uint64_t[:, ::1] av = np.ascontiguousarray(a, dtype=np.uint64)
    cdef const uint64_t[:, ::1] bv = np.ascontiguousarray(b, dtype=np.uint64)
    out = np.zeros((av.shape[0], av.shape[1]), dtype=np.uint64)
    cdef uint64_t[:, ::1] ov = out
    cdef Py_ssize_t r
    cdef int i, k
    cdef uint64_t row, acc
    with nogil:
        for r in range(av.shape[0]):
            for i in range(av.shape[1]):
                row = av[r, i]
                acc = 0
                for k in range(m):
                    if (row >> k) & 1:
                        acc ^= bv[r, k]
                ov[r, i] = acc
    return out


def batch_matvec(a, v, int m):
    cdef const uint64_t[:, ::1] av = np.ascontiguousarray(a, dtype=np.uint64)
    cdef const uint64_t[::1] vv = np.ascontiguousarray(v, dtype=np.uint64)
    out = np.zeros(av.shape[0], dtype=np.uint64)
    cdef uint64_t[::1] ov = out
    cdef Py_ssize_t r
    cdef int i
    cdef uint64_t acc
    with nogil:
        for r in range(av.shape[0]):
            acc = 0
            for i in range(m):
                acc |= (<uint64_t>fc_parity(av[r, i] & vv[r])) << i
            ov[r] = acc
    return out


def batch_rank(a, int ncols):
    """Rank of each matrix in a batch of row-word matrices."""
    work = np.array(a, dtype=np.uint64, copy=True, order="C")
    cdef uint64_t[:, ::1] mv = work
    out = np.zeros(work.shape[0], dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef Py_ssize_t r
    cdef int nrows = mv.shape[1]
    cdef int c, i, rank, p
    cdef uint64_t piv, tmp
    with nogil:
        for r in range(mv.shape[0]):
            rank = 0
            for c in range(ncols):
                if rank == nrows:
                    break
                p = -1
                for i in range(rank, nrows):
                    if (mv[r, i] >> c) & 1:
                        p = i
                        break
                if p < 0:
                    continue
                piv = mv[r, p]
                mv[r, p] = mv[r, rank]
                mv[r, rank] = piv
                for i in range(rank + 1, nrows):
                    if (mv[r, i] >> c) & 1:
                        mv[r, i] ^= piv
                rank += 1
            ov[r] = rank
    return out


def row_reduce(m, int ncols):
    """Reduce multiword rows (rows, words) to RREF in place; returns (rank, pivot columns)."""
    cdef uint64_t[:, ::1] mv = m
    cdef int nrows = mv.shape[0]
    cdef int nwords = mv.shape[1]
    pivots = np.zeros(min(nrows, ncols), dtype=np.int64)
    cdef int64_t[::1] pv = pivots
    cdef int c, i, k, p, word, bit
    cdef int rank = 0
    cdef uint64_t tmp
    with nogil:
        for c in range(ncols):
            if rank == nrows:
                break
            word = c >> 6
            bit = c & 63
            p = -1
            for i in range(rank, nrows):
                if (mv[i, word] >> bit) & 1:
                    p = i
                    break
            if p < 0:
                continue
            if p != rank:
                for k in range(nwords):
                    tmp = mv[p, k]
                    mv[p, k] = mv[rank, k]
                    mv[rank, k] = tmp
            for i in range(nrows):
                if i != rank and (mv[i, word] >> bit) & 1:
                    for k in range(word, nwords):
                        mv[i, k] ^= mv[rank, k]
            pv[rank] = c
            rank += 1
    return rank, pivots[:rank].copy()


def matmul_words(a, b, int inner):
    """Multiword product: row i of the result XORs rows j of b where a[i, j] = 1."""
    cdef const uint64_t[:, ::1] av = np.ascontiguousarray(a, dtype=np.uint64)
    cdef const uint64_t[:, ::1] bv = np.ascontiguousarray(b, dtype=np.uint64)
    out = np.zeros((av.shape[0], bv.shape[1]), dtype=np.uint64)
    cdef uint64_t[:, ::1] ov = out
    cdef Py_ssize_t i
    cdef int j, k
    cdef int nw = bv.shape[1]
    with nogil:
        for i in range(av.shape[0]):
            for j in range(inner):
                if (av[i, j >> 6] >> (j & 63)) & 1:
                    for k in range(nw):
                        ov[i, k] ^= bv[j, k]
    return out
