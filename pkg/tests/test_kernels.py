import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floquet_clifford import _pykernels as py

ck = pytest.importorskip("floquet_clifford._ckernels")

seeds = st.integers(0, 2**63 - 1)


def rand_words(rng, shape, bits):
    return rng.integers(0, 1 << bits, size=shape, dtype=np.uint64)


@given(st.integers(1, 16), st.integers(1, 20), seeds)
def test_sampler_bit_identical(n, count, seed):
    assert np.array_equal(ck.sample_symplectic(n, count, seed), py.sample_symplectic(n, count, seed))


@given(st.integers(1, 4), st.integers(1, 5), st.integers(0, 9), st.integers(0, 1), seeds)
def test_evolution_identical(N, half_L, t2, parity0, seed):
    L = 2 * half_L
    rng = np.random.default_rng(seed % 2**32)
    gates = py.sample_symplectic(2 * N, 3 * L, seed).reshape(3, L, 4 * N)
    u0 = rand_words(rng, (3, L), 2 * N)
    a = ck.evolve_sites(gates, u0, N, t2, parity0)
    assert np.array_equal(a, py.evolve_sites(gates, u0, N, t2, parity0))
    tr = ck.evolve_trace(gates, u0, N, t2, parity0)
    assert np.array_equal(tr, py.evolve_trace(gates, u0, N, t2, parity0))
    assert np.array_equal(tr[:, -1], a)


@given(st.integers(1, 32), seeds)
def test_batch_linear_algebra_identical(m, seed):
    rng = np.random.default_rng(seed % 2**32)
    a = rand_words(rng, (7, m), m)
    b = rand_words(rng, (7, m), m)
    v = rand_words(rng, 7, m)
    assert np.array_equal(ck.batch_matmul(a, b, m), py.batch_matmul(a, b, m))
    assert np.array_equal(ck.batch_matvec(a, v, m), py.batch_matvec(a, v, m))
    assert np.array_equal(ck.batch_rank(a, m), py.batch_rank(a, m))
    assert np.array_equal(ck.transpose_words(a, m), py.transpose_words(a, m))


@given(st.integers(1, 12), st.integers(65, 128), seeds)
def test_row_reduce_identical(rows, cols, seed):
    rng = np.random.default_rng(seed % 2**32)
    m = rng.integers(0, 2**64, size=(rows, 2), dtype=np.uint64)
    m[:, 1] &= np.uint64((1 << max(cols - 64, 0)) - 1)
    a, b = m.copy(), m.copy()
    ra, pa = ck.row_reduce(a, cols)
    rb, pb = py.row_reduce(b, cols)
    assert ra == rb
    assert np.array_equal(np.asarray(pa), np.asarray(pb))
    assert np.array_equal(a, b)


def test_matmul_words_identical():
    rng = np.random.default_rng(2)
    a = rng.integers(0, 2**64, size=(40, 2), dtype=np.uint64)
    b = rng.integers(0, 2**64, size=(128, 3), dtype=np.uint64)
    assert np.array_equal(ck.matmul_words(a, b, 128), py.matmul_words(a, b, 128))


def test_backend_env_switch():
    env = dict(os.environ, FLOQUET_CLIFFORD_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import floquet_clifford as f; print(f.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
