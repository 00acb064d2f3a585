"""Exact transition laws of the two-site, one-qubit-per-site ring.

All 720² gate pairs are enumerated. Chain vectors are 4-bit integers with
site 0 in bits 0-1 and site 1 in bits 2-3.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .symplectic import all_elements

REALIZATIONS = 720 * 720
_SWAP_SITES = np.array([((v & 3) << 2) | (v >> 2) for v in range(16)], dtype=np.int64)


def _apply_table(words: np.ndarray, dim: int) -> np.ndarray:
    """table[g, v] = S_g v for every vector v of length dim."""
    vs = np.arange(1 << dim, dtype=np.uint64)
    out = np.zeros((len(words), 1 << dim), dtype=np.int64)
    for i in range(dim):
        bit = np.bitwise_count(words[:, i : i + 1] & vs[None, :]) & 1
        out |= bit.astype(np.int64) << i
    return out


@lru_cache(maxsize=None)
def step_tables() -> tuple[np.ndarray, np.ndarray]:
    """(even, odd) maps indexed by [gate index, chain vector]."""
    table = _apply_table(np.array(all_elements(2)), 4)
    even = table
    odd = _SWAP_SITES[table[:, _SWAP_SITES]]
    return even, odd


@lru_cache(maxsize=None)
def transition_counts(t2: int) -> np.ndarray:
    """counts[u, v] = number of gate pairs with S(t) u = v, out of 720²."""
    even, odd = step_tables()
    m = even.shape[0]
    g0 = np.repeat(np.arange(m), m)
    g1 = np.tile(np.arange(m), m)
    counts = np.zeros((16, 16), dtype=np.int64)
    for u in range(16):
        v = np.full(m * m, u, dtype=np.int64)
        for h in range(t2):
            v = even[g0, v] if h % 2 == 0 else odd[g1, v]
        counts[u] = np.bincount(v, minlength=16)
    counts.flags.writeable = False
    return counts


def transition_law(u0: int, t2: int) -> dict[int, Fraction]:
    row = transition_counts(t2)[u0]
    return {v: Fraction(int(c), REALIZATIONS) for v, c in enumerate(row.tolist()) if c}


def zero_probabilities(u0: int, t2: int) -> tuple[Fraction, Fraction]:
    """(prob site 0 is zero, prob site 1 is zero)."""
    law = transition_law(u0, t2)
    return (
        sum((p for v, p in law.items() if v & 3 == 0), Fraction(0)),
        sum((p for v, p in law.items() if v >> 2 == 0), Fraction(0)),
    )


def l1_to_nonzero_uniform(u0: int, t2: int) -> Fraction:
    """Σ_{v≠0} |P(v|u0) − 1/15|."""
    law = transition_law(u0, t2)
    q = Fraction(1, 15)
    return sum((abs(law.get(v, Fraction(0)) - q) for v in range(1, 16)), Fraction(0))


def local_action(site_words: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """perm[v] = (X_0 ⊕ X_1) v for two single-site 2x2 elements given as row words."""
    tables = [_apply_table(np.asarray(w, dtype=np.uint64)[None], 2)[0] for w in site_words]
    v = np.arange(16)
    return tables[0][v & 3] | (tables[1][v >> 2] << 2)


def single_site_group() -> np.ndarray:
    return np.array(all_elements(1))


def dressed_counts(t2: int, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Counts of the dressed evolution Y S(t) X, with X = ``right`` and Y = ``left`` permutations.

    dressed[u, v] = #{S : Y S X u = v} = counts[X u, Y⁻¹ v].
    """
    counts = transition_counts(t2)
    inv_left = np.argsort(left)
    return counts[np.ix_(right, inv_left)]
