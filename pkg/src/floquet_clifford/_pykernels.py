"""Pure numpy implementation of the bit kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and bit-identical output. Arrays are ``uint64``; a row of a small matrix is a
single word with column ``j`` stored at bit ``j``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_U64 = np.uint64
_ONE = np.uint64(1)
_EVEN_BITS = np.uint64(0x5555555555555555)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STREAM = np.uint64(0xD1B54A32D192ED03)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _parity(x: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(x) & 1).astype(_U64)


def _swap_pairs(x: np.ndarray) -> np.ndarray:
    return ((x & _EVEN_BITS) << _ONE) | ((x >> _ONE) & _EVEN_BITS)


def _low_mask(bits: int) -> np.uint64:
    if bits >= 64:
        return np.uint64(0xFFFFFFFFFFFFFFFF)
    return np.uint64((1 << bits) - 1)


class _SplitMix:
    """One splitmix64 stream per lane, advanced in lockstep."""

    def __init__(self, seed: int, lanes: int):
        lane = np.arange(1, lanes + 1, dtype=_U64)
        with np.errstate(over="ignore"):
            self.state = np.uint64(seed) + lane * _STREAM

    def next(self, active: np.ndarray | None = None) -> np.ndarray:
        with np.errstate(over="ignore"):
            if active is None:
                self.state = self.state + _GOLDEN
                z = self.state.copy()
            else:
                self.state[active] = self.state[active] + _GOLDEN
                z = self.state[active].copy()
            z = (z ^ (z >> np.uint64(30))) * _MIX1
            z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _combine(basis: np.ndarray, coeffs: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros(basis.shape[0], dtype=_U64)
    for k in range(width):
        bit = ((coeffs >> np.uint64(k)) & _ONE).astype(bool)
        out[bit] ^= basis[bit, k]
    return out


def _first_odd(basis: np.ndarray, probe: np.ndarray, width: int) -> tuple[np.ndarray, np.ndarray]:
    hits = _parity(basis[:, :width] & probe[:, None]).astype(bool)
    return np.argmax(hits, axis=1), hits


def sample_symplectic(n: int, count: int, seed: int) -> np.ndarray:
    """Uniform symplectic 2n x 2n matrices as row words, shape (count, 2n)."""
    dim = 2 * n
    if not 1 <= n <= 32:
        raise ValueError(f"n must lie in 1..32, got {n}")
    rows_idx = np.arange(count)
    rng = _SplitMix(seed, count)
    basis = np.tile((_ONE << np.arange(dim, dtype=_U64)), (count, 1))
    cols = np.zeros((count, dim), dtype=_U64)
    width = dim
    for i in range(n):
        mask = _low_mask(width)
        coeff = rng.next() & mask
        zero = coeff == 0
        while zero.any():
            idx = np.nonzero(zero)[0]
            coeff[idx] = rng.next(idx) & mask
            zero = coeff == 0
        u = _combine(basis, coeff, width)

        # pivot with <u, w_p> = 1 moves to the last slot, the rest lands in ker<u, .>
        su = _swap_pairs(u)
        p, hits = _first_odd(basis, su, width)
        piv = basis[rows_idx, p].copy()
        hits[rows_idx, p] = False
        basis[:, :width] ^= np.where(hits, piv[:, None], _U64(0))
        last = width - 1
        tmp = basis[:, last].copy()
        basis[rows_idx, p] = tmp
        basis[:, last] = piv

        coeff = rng.next() & _low_mask(last)
        v = basis[:, last] ^ _combine(basis, coeff, last)

        sv = _swap_pairs(v)
        q, hits = _first_odd(basis, sv, last)
        piv = basis[rows_idx, q].copy()
        hits[rows_idx, q] = False
        basis[:, :last] ^= np.where(hits, piv[:, None], _U64(0))
        tmp = basis[:, last - 1].copy()
        basis[rows_idx, q] = tmp
        basis[:, last - 1] = piv

        cols[:, 2 * i] = u
        cols[:, 2 * i + 1] = v
        width -= 2
    return transpose_words(cols, dim)


def transpose_words(m: np.ndarray, dim: int) -> np.ndarray:
    """Transpose a batch of dim x dim matrices stored as row words."""
    out = np.zeros_like(m)
    for j in range(dim):
        col = m[..., j]
        for i in range(dim):
            out[..., i] |= ((col >> np.uint64(i)) & _ONE) << np.uint64(j)
    return out


def _apply_gates(u: np.ndarray, gates: np.ndarray, n_modes: int, parity: int) -> None:
    sites = u.shape[1]
    half = 2 * n_modes
    smask = _low_mask(half)
    shift = np.uint64(half)
    for x in range(parity, sites, 2):
        y = (x + 1) % sites
        w = u[:, x] | (u[:, y] << shift)
        rows = gates[:, x, :]
        out = np.zeros_like(w)
        for i in range(2 * half):
            out |= _parity(rows[:, i] & w) << np.uint64(i)
        u[:, x] = out & smask
        u[:, y] = out >> shift


def evolve_sites(gates: np.ndarray, u0: np.ndarray, n_modes: int, t2: int, parity0: int = 0) -> np.ndarray:
    """Apply t2 alternating half-steps to site words u0 of shape (R, L)."""
    u = np.array(u0, dtype=_U64, copy=True)
    for h in range(t2):
        _apply_gates(u, gates, n_modes, (parity0 + h) & 1)
    return u


def evolve_trace(gates: np.ndarray, u0: np.ndarray, n_modes: int, t2: int, parity0: int = 0) -> np.ndarray:
    """Like ``evolve_sites`` but records every half-step, shape (R, t2+1, L)."""
    u = np.array(u0, dtype=_U64, copy=True)
    out = np.empty((u.shape[0], t2 + 1, u.shape[1]), dtype=_U64)
    out[:, 0] = u
    for h in range(t2):
        _apply_gates(u, gates, n_modes, (parity0 + h) & 1)
        out[:, h + 1] = u
    return out


def batch_matmul(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Products a[r] @ b[r] of m x m matrices in row-word form."""
    out = np.zeros_like(a)
    for k in range(m):
        bit = ((a >> np.uint64(k)) & _ONE).astype(bool)
        out ^= np.where(bit, b[:, k : k + 1], _U64(0))
    return out


def batch_matvec(a: np.ndarray, v: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros(a.shape[0], dtype=_U64)
    for i in range(m):
        out |= _parity(a[:, i] & v) << np.uint64(i)
    return out


def batch_rank(a: np.ndarray, ncols: int) -> np.ndarray:
    """Rank of each matrix in a batch of row-word matrices."""
    m = np.array(a, dtype=_U64, copy=True)
    count, nrows = m.shape
    rank = np.zeros(count, dtype=np.int64)
    used = np.zeros((count, nrows), dtype=bool)
    idx = np.arange(count)
    for c in range(ncols):
        bit = ((m >> np.uint64(c)) & _ONE).astype(bool)
        cand = bit & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        p = np.argmax(cand, axis=1)
        piv = m[idx, p]
        elim = bit & has[:, None]
        elim[idx, p] = False
        m ^= np.where(elim, piv[:, None], _U64(0))
        used[idx[has], p[has]] = True
        rank += has
    return rank


def row_reduce(m: np.ndarray, ncols: int) -> tuple[int, np.ndarray]:
    """Reduce multiword rows (rows, words) to RREF in place; returns (rank, pivot columns)."""
    nrows = m.shape[0]
    rank = 0
    pivots = []
    for c in range(ncols):
        if rank == nrows:
            break
        word, bit = divmod(c, 64)
        col = ((m[:, word] >> np.uint64(bit)) & _ONE).astype(bool)
        cand = np.nonzero(col[rank:])[0]
        if cand.size == 0:
            continue
        p = rank + int(cand[0])
        if p != rank:
            m[[rank, p]] = m[[p, rank]]
            col[[rank, p]] = col[[p, rank]]
        col[rank] = False
        m[col] ^= m[rank]
        pivots.append(c)
        rank += 1
    return rank, np.asarray(pivots, dtype=np.int64)


def matmul_words(a: np.ndarray, b: np.ndarray, inner: int) -> np.ndarray:
    """Multiword product: row i of the result XORs rows j of b where a[i, j] = 1."""
    out = np.zeros((a.shape[0], b.shape[1]), dtype=_U64)
    for j in range(inner):
        word, bit = divmod(j, 64)
        sel = ((a[:, word] >> np.uint64(bit)) & _ONE).astype(bool)
        if sel.any():
            out[sel] ^= b[j]
    return out
