import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floquet_clifford.gf2 import (
    BitMatrix,
    BitVector,
    DimensionError,
    SymplecticForm,
    inverse,
    is_symplectic,
    kernel_basis,
    rank,
    swap_pairs,
    symp_form,
)


def dense_matrices(rows, cols):
    return st.lists(st.integers(0, 1), min_size=rows * cols, max_size=rows * cols).map(
        lambda b: np.array(b, dtype=np.uint8).reshape(rows, cols)
    )


def dense_rank(a):
    a = a.copy() % 2
    r = 0
    for c in range(a.shape[1]):
        piv = [i for i in range(r, a.shape[0]) if a[i, c]]
        if not piv:
            continue
        a[[r, piv[0]]] = a[[piv[0], r]]
        for i in range(a.shape[0]):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


def test_vector_roundtrip_and_weight():
    v = BitVector.from_bits([1, 0, 1, 1, 0])
    assert v.value == 0b01101
    assert v.weight() == 3
    assert list(v.to_bits()) == [1, 0, 1, 1, 0]
    assert (v ^ v).is_zero()


def test_vector_length_mismatch():
    with pytest.raises(DimensionError):
        BitVector(1, 3) ^ BitVector(1, 4)


def test_vector_wide_words():
    v = BitVector.unit(100, 130)
    assert v.words.tolist() == [0, 1 << 36, 0]


def test_swap_pairs():
    assert swap_pairs(0b0110, 4) == 0b1001
    assert swap_pairs(0b01, 2) == 0b10


@given(st.integers(1, 9), st.integers(1, 9), st.data())
def test_dense_roundtrip(r, c, data):
    a = data.draw(dense_matrices(r, c))
    m = BitMatrix.from_dense(a)
    assert np.array_equal(m.to_dense(), a)
    assert np.array_equal(m.T.to_dense(), a.T)


@given(st.integers(1, 7), st.integers(1, 7), st.integers(1, 7), st.data())
def test_matmul_matches_dense(r, k, c, data):
    a = data.draw(dense_matrices(r, k))
    b = data.draw(dense_matrices(k, c))
    got = (BitMatrix.from_dense(a) @ BitMatrix.from_dense(b)).to_dense()
    assert np.array_equal(got, (a.astype(int) @ b.astype(int)) % 2)


def test_matmul_wide():
    rng = np.random.default_rng(4)
    a = rng.integers(0, 2, size=(70, 90))
    b = rng.integers(0, 2, size=(90, 65))
    got = (BitMatrix.from_dense(a) @ BitMatrix.from_dense(b)).to_dense()
    assert np.array_equal(got, (a @ b) % 2)


@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_rank_nullity(r, c, data):
    a = data.draw(dense_matrices(r, c))
    m = BitMatrix.from_dense(a)
    assert rank(m) == dense_rank(a)
    ker = kernel_basis(m)
    assert len(ker) == c - rank(m)
    for v in ker:
        assert (m @ v).is_zero()


@given(st.integers(1, 7), st.data())
def test_inverse(n, data):
    a = data.draw(dense_matrices(n, n))
    m = BitMatrix.from_dense(a)
    if rank(m) < n:
        with pytest.raises(ValueError):
            inverse(m)
    else:
        assert inverse(m) @ m == BitMatrix.identity(n)
        assert m ** -1 == inverse(m)


def test_text_roundtrip():
    m = BitMatrix.from_rows(["101", "011"])
    assert BitMatrix.from_text(m.to_text()) == m


def test_form_and_symplectic_check():
    form = SymplecticForm(2)
    e = [BitVector.unit(i, 4) for i in range(4)]
    assert symp_form(e[0], e[1], form) == 1
    assert symp_form(e[0], e[2], form) == 0
    assert is_symplectic(BitMatrix.identity(4), form)
    assert not is_symplectic(BitMatrix.zeros(4, 4), form)
    with pytest.raises(DimensionError):
        is_symplectic(BitMatrix.identity(2), form)
    with pytest.raises(DimensionError):
        is_symplectic(BitMatrix.zeros(4, 3), form)


@given(st.integers(0, 255), st.integers(0, 255))
def test_form_is_alternating_and_symmetric(a, b):
    form = SymplecticForm(4)
    u, v = BitVector(a, 8), BitVector(b, 8)
    assert symp_form(u, u, form) == 0
    assert symp_form(u, v, form) == symp_form(v, u, form)
