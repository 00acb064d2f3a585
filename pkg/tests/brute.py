"""Dense brute-force reference, independent of the package.

Matrices are plain 0/1 integer arrays; nothing is bit-packed. Running this
file regenerates ``data/frozen.json``:

    python3 tests/brute.py
"""

import json
from pathlib import Path

import numpy as np

FROZEN = Path(__file__).with_name("data") / "frozen.json"


def form(n):
    j = np.zeros((2 * n, 2 * n), dtype=np.int64)
    for i in range(n):
        j[2 * i, 2 * i + 1] = j[2 * i + 1, 2 * i] = 1
    return j


def all_matrices(dim):
    """Every dim x dim 0/1 matrix, shape (2^(dim²), dim, dim)."""
    bits = (np.arange(1 << (dim * dim))[:, None] >> np.arange(dim * dim)) & 1
    return bits.reshape(-1, dim, dim)


def symplectic_group(n):
    j = form(n)
    m = all_matrices(2 * n)
    lhs = np.einsum("kji,jl,klm->kim", m, j, m) % 2
    return m[(lhs == j).all(axis=(1, 2))]


def vec(v, dim):
    return np.array([(v >> i) & 1 for i in range(dim)], dtype=np.int64)


def num(x):
    return int(sum(int(b) << i for i, b in enumerate(x)))


def two_site_maps():
    """(even, odd) lookup tables on 4-bit chain vectors for every 2-mode element."""
    group = symplectic_group(2)
    perm = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])
    vs = np.array([vec(v, 4) for v in range(16)]).T
    powers = 1 << np.arange(4)
    even = ((group @ vs) % 2).transpose(0, 2, 1) @ powers
    odd = ((perm @ group @ perm @ vs) % 2).transpose(0, 2, 1) @ powers
    return even, odd


def transition_counts(u0, t2):
    even, odd = two_site_maps()
    m = len(even)
    g0, g1 = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    v = np.full(g0.shape, u0)
    for h in range(t2):
        v = even[g0, v] if h % 2 == 0 else odd[g1, v]
    return np.bincount(v.ravel(), minlength=16)


def blocks(m):
    h = m.shape[-1] // 2
    return m[..., :h, :h], m[..., :h, h:], m[..., h:, :h], m[..., h:, h:]


def wall_counts():
    """Right walls among all pairs, with the k-range 0..3 and with k in {0, 1}."""
    group = symplectic_group(2)
    _, _, c, d = blocks(group)
    a, _, _, _ = blocks(group)
    full = short = 0
    for i in range(len(group)):
        step = (d[i][None] @ a) % 2
        power = np.broadcast_to(c[i], step.shape)
        ok_full = np.ones(len(group), dtype=bool)
        ok_short = np.ones(len(group), dtype=bool)
        for k in range(4):
            z = ~((c @ power) % 2).any(axis=(1, 2))
            ok_full &= z
            if k < 2:
                ok_short &= z
            power = (step @ power) % 2
        full += int(ok_full.sum())
        short += int(ok_short.sum())
    return full, short


def product_form_count():
    group = symplectic_group(2)
    _, b, c, _ = blocks(group)
    return int((~c.any(axis=(1, 2)) & ~b.any(axis=(1, 2))).sum())


def block_rank_counts():
    group = symplectic_group(2)
    _, _, c, _ = blocks(group)
    det = (c[:, 0, 0] * c[:, 1, 1] + c[:, 0, 1] * c[:, 1, 0]) % 2
    ranks = np.where(det == 1, 2, np.where(c.any(axis=(1, 2)), 1, 0))
    return np.bincount(ranks, minlength=3)


def single_qubit_uniformity():
    """counts[u][v] = #{S in Sp(2) : S u = v} for nonzero u, v."""
    group = symplectic_group(1)
    out = {}
    for u in range(1, 4):
        images = [num((s @ vec(u, 2)) % 2) for s in group]
        out[u] = [images.count(v) for v in range(4)]
    return out


def generate():
    return {
        "group_order": {"1": len(symplectic_group(1)), "2": len(symplectic_group(2))},
        "transition_counts_x0": {str(t2): transition_counts(1, t2).tolist() for t2 in range(1, 7)},
        "transition_counts_full": {str(t2): transition_counts(5, t2).tolist() for t2 in range(1, 7)},
        "wall_counts": dict(zip(["full", "k_lt_2"], wall_counts())),
        "product_form_count": product_form_count(),
        "block_rank_counts": block_rank_counts().tolist(),
        "single_qubit_images": {str(k): v for k, v in single_qubit_uniformity().items()},
    }


def load():
    return json.loads(FROZEN.read_text())


if __name__ == "__main__":
    FROZEN.parent.mkdir(exist_ok=True)
    FROZEN.write_text(json.dumps(generate(), indent=1) + "\n")
    print(FROZEN.read_text())
