"""Bit-packed linear algebra over GF(2) and the symplectic form.

Matrices are stored row-major in 64-bit words with column ``j`` of a row at
bit ``j % 64`` of word ``j // 64``. Padding bits are always zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._backend import kernels

WORD_BITS = 64
_EVEN_BITS = int("55" * 8, 16)


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


def _nwords(bits: int) -> int:
    return (bits + WORD_BITS - 1) // WORD_BITS


def _int_to_words(value: int, nwords: int) -> np.ndarray:
    out = np.zeros(nwords, dtype=np.uint64)
    for k in range(nwords):
        out[k] = (value >> (WORD_BITS * k)) & 0xFFFFFFFFFFFFFFFF
    return out


def _words_to_int(words: np.ndarray) -> int:
    value = 0
    for k, w in enumerate(words.tolist()):
        value |= int(w) << (WORD_BITS * k)
    return value


def swap_pairs(value: int, length: int) -> int:
    """Exchange bits 2i and 2i+1 of an integer; this is multiplication by J."""
    mask = 0
    for k in range(_nwords(length)):
        mask |= _EVEN_BITS << (WORD_BITS * k)
    return ((value & mask) << 1) | ((value >> 1) & mask)


class BitVector:
    """Immutable vector in GF(2)^length. Coordinate ``i`` is bit ``i`` of ``value``."""

    __slots__ = ("length", "value")

    def __init__(self, value: int, length: int):
        if length < 0:
            raise DimensionError(f"negative length {length}")
        if value < 0 or value >> length:
            raise ValueError(f"value does not fit in {length} bits")
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, val):
        raise AttributeError("BitVector is immutable")

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(0, length)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        value = 0
        n = 0
        for i, b in enumerate(bits):
            if b not in (0, 1, True, False):
                raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
            value |= int(b) << i
            n = i + 1
        return cls(value, n)

    @classmethod
    def unit(cls, index: int, length: int) -> "BitVector":
        if not 0 <= index < length:
            raise IndexError(index)
        return cls(1 << index, length)

    @property
    def words(self) -> np.ndarray:
        return _int_to_words(self.value, _nwords(self.length))

    def to_bits(self) -> np.ndarray:
        return np.array([(self.value >> i) & 1 for i in range(self.length)], dtype=np.uint8)

    def weight(self) -> int:
        return self.value.bit_count()

    def is_zero(self) -> bool:
        return self.value == 0

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not -self.length <= i < self.length:
            raise IndexError(i)
        return (self.value >> (i % self.length)) & 1

    def _check(self, other: "BitVector") -> None:
        if not isinstance(other, BitVector):
            raise TypeError(f"expected BitVector, got {type(other).__name__}")
        if other.length != self.length:
            raise DimensionError(f"length mismatch: {self.length} vs {other.length}")

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector(self.value ^ other.value, self.length)

    __add__ = __xor__
    __sub__ = __xor__

    def dot(self, other: "BitVector") -> int:
        self._check(other)
        return (self.value & other.value).bit_count() & 1

    def __eq__(self, other) -> bool:
        return isinstance(other, BitVector) and other.length == self.length and other.value == self.value

    def __hash__(self) -> int:
        return hash((self.length, self.value))

    def __repr__(self) -> str:
        return f"BitVector('{''.join(map(str, self.to_bits()))}')"


class BitMatrix:
    """Immutable dense GF(2) matrix, bit-packed row-major."""

    __slots__ = ("rows", "cols", "words", "__dict__")

    def __init__(self, words: np.ndarray, rows: int, cols: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.shape != (rows, _nwords(cols)):
            raise DimensionError(f"word array shape {words.shape} does not match {rows}x{cols}")
        rem = cols % WORD_BITS
        if rem and rows and np.any(words[:, -1] >> np.uint64(rem)):
            raise ValueError("padding bits must be zero")
        words = words.copy()
        words.flags.writeable = False
        self.rows = rows
        self.cols = cols
        self.words = words

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(np.zeros((rows, _nwords(cols)), dtype=np.uint64), rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        words = np.zeros((n, _nwords(n)), dtype=np.uint64)
        for i in range(n):
            words[i, i // WORD_BITS] = np.uint64(1) << np.uint64(i % WORD_BITS)
        return cls(words, n, n)

    @classmethod
    def from_dense(cls, dense) -> "BitMatrix":
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-d array, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        rows, cols = arr.shape
        nw = _nwords(cols)
        padded = np.zeros((rows, nw * WORD_BITS), dtype=np.uint8)
        padded[:, :cols] = arr
        packed = np.packbits(padded.reshape(rows, nw * 8, 8), axis=-1, bitorder="little")
        words = packed.reshape(rows, nw * 8).view("<u8").astype(np.uint64)
        return cls(words, rows, cols)

    @classmethod
    def from_rows(cls, rows: Sequence) -> "BitMatrix":
        """Build from a sequence of 0/1 rows or '0101' strings."""
        dense = [[int(c) for c in r] if isinstance(r, str) else list(r) for r in rows]
        if not dense:
            return cls.zeros(0, 0)
        widths = {len(r) for r in dense}
        if len(widths) != 1:
            raise DimensionError(f"ragged rows with widths {sorted(widths)}")
        return cls.from_dense(np.array(dense, dtype=np.uint8))

    @classmethod
    def from_row_words(cls, row_words, cols: int) -> "BitMatrix":
        """Single-word rows (cols <= 64), e.g. kernel output."""
        arr = np.asarray(row_words, dtype=np.uint64).reshape(-1, 1)
        if cols == 0:
            arr = arr[:, :0]
        return cls(arr, arr.shape[0], cols)

    @classmethod
    def block(cls, a: "BitMatrix", b: "BitMatrix", c: "BitMatrix", d: "BitMatrix") -> "BitMatrix":
        top = np.hstack([a.to_dense(), b.to_dense()])
        bottom = np.hstack([c.to_dense(), d.to_dense()])
        return cls.from_dense(np.vstack([top, bottom]))

    def to_dense(self) -> np.ndarray:
        if self.rows == 0 or self.cols == 0:
            return np.zeros((self.rows, self.cols), dtype=np.uint8)
        raw = self.words.astype("<u8").view(np.uint8).reshape(self.rows, -1)
        return np.unpackbits(raw, axis=1, bitorder="little")[:, : self.cols]

    def row_words(self) -> np.ndarray:
        """Rows as single words; requires cols <= 64."""
        if self.cols > WORD_BITS:
            raise DimensionError(f"{self.cols} columns do not fit one word")
        if self.cols == 0:
            return np.zeros(self.rows, dtype=np.uint64)
        return self.words[:, 0].copy()

    def row(self, i: int) -> BitVector:
        return BitVector(_words_to_int(self.words[i]), self.cols)

    def column(self, j: int) -> BitVector:
        return BitVector.from_bits(self.to_dense()[:, j].tolist()) if self.rows else BitVector(0, 0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return not self.words.any()

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return int((self.words[i, j // WORD_BITS] >> np.uint64(j % WORD_BITS)) & np.uint64(1))

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense()[r0:r1, c0:c1])

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    @property
    def T(self) -> "BitMatrix":
        return self.transpose()

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if not isinstance(other, BitMatrix):
            return NotImplemented
        if other.shape != self.shape:
            raise DimensionError(f"shape mismatch: {self.shape} vs {other.shape}")
        return BitMatrix(self.words ^ other.words, self.rows, self.cols)

    __xor__ = __add__

    def __matmul__(self, other):
        if isinstance(other, BitMatrix):
            return mat_mul(self, other)
        if isinstance(other, BitVector):
            return mat_vec(self, other)
        return NotImplemented

    def __pow__(self, k: int) -> "BitMatrix":
        if not self.is_square():
            raise DimensionError("power of a non-square matrix")
        if k < 0:
            return inverse(self) ** (-k)
        result = BitMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and other.shape == self.shape
            and np.array_equal(other.words, self.words)
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.words.tobytes()))

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines += ["".join(map(str, r)) for r in self.to_dense().tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty matrix text")
        try:
            rows, cols = (int(x) for x in lines[0].split())
        except ValueError as exc:
            raise ValueError(f"bad header line {lines[0]!r}") from exc
        body = lines[1:]
        if len(body) != rows:
            raise DimensionError(f"header says {rows} rows, found {len(body)}")
        if any(len(r) != cols or set(r) - {"0", "1"} for r in body):
            raise ValueError(f"rows must be {cols} characters of 0/1")
        if rows == 0:
            return cls.zeros(0, cols)
        return cls.from_rows(body)

    def __repr__(self) -> str:
        body = "; ".join("".join(map(str, r)) for r in self.to_dense().tolist())
        return f"BitMatrix({self.rows}x{self.cols}: {body})"


def mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    if a.rows == 0 or b.cols == 0:
        return BitMatrix.zeros(a.rows, b.cols)
    words = kernels.matmul_words(a.words, b.words, a.cols)
    return BitMatrix(words, a.rows, b.cols)


def mat_vec(a: BitMatrix, v: BitVector) -> BitVector:
    if a.cols != v.length:
        raise DimensionError(f"cannot apply {a.rows}x{a.cols} matrix to length-{v.length} vector")
    value = 0
    for i in range(a.rows):
        if (_words_to_int(a.words[i]) & v.value).bit_count() & 1:
            value |= 1 << i
    return BitVector(value, a.rows)


def _reduced(m: BitMatrix) -> tuple[np.ndarray, int, np.ndarray]:
    work = np.array(m.words, dtype=np.uint64, copy=True, order="C")
    if m.rows == 0 or m.cols == 0:
        return work, 0, np.zeros(0, dtype=np.int64)
    r, pivots = kernels.row_reduce(work, m.cols)
    return work, int(r), pivots


def rank(m: BitMatrix) -> int:
    return _reduced(m)[1]


def kernel_basis(m: BitMatrix) -> list[BitVector]:
    """Basis of {u : Mu = 0}, one vector per non-pivot column."""
    work, r, pivots = _reduced(m)
    pivot_list = pivots.tolist()
    pivot_set = set(pivot_list)
    rows = [_words_to_int(work[i]) for i in range(r)]
    basis = []
    for f in range(m.cols):
        if f in pivot_set:
            continue
        value = 1 << f
        for i, p in enumerate(pivot_list):
            if (rows[i] >> f) & 1:
                value |= 1 << p
        basis.append(BitVector(value, m.cols))
    return basis


def inverse(m: BitMatrix) -> BitMatrix:
    if not m.is_square():
        raise DimensionError(f"cannot invert {m.rows}x{m.cols}")
    n = m.rows
    aug = BitMatrix.from_dense(np.hstack([m.to_dense(), np.eye(n, dtype=np.uint8)]))
    work, r, pivots = _reduced(aug)
    if r < n or (n and pivots[n - 1] != n - 1):
        raise np.linalg.LinAlgError("matrix is singular over GF(2)")
    dense = BitMatrix(work, n, 2 * n).to_dense()
    return BitMatrix.from_dense(dense[:, n:])


@dataclass(frozen=True)
class SymplecticForm:
    """J = direct sum of n copies of [[0,1],[1,0]] on (q1,p1,...,qn,pn)."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError(f"negative mode count {self.n}")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @cached_property
    def J(self) -> BitMatrix:
        dense = np.zeros((self.dim, self.dim), dtype=np.uint8)
        for i in range(self.n):
            dense[2 * i, 2 * i + 1] = dense[2 * i + 1, 2 * i] = 1
        return BitMatrix.from_dense(dense)


def symp_form(u: BitVector, v: BitVector, form: SymplecticForm) -> int:
    if u.length != form.dim or v.length != form.dim:
        raise DimensionError(f"vectors of length {u.length}, {v.length} for form of size {form.dim}")
    return (u.value & swap_pairs(v.value, form.dim)).bit_count() & 1


def is_symplectic(s: BitMatrix, form: SymplecticForm) -> bool:
    if not s.is_square():
        raise DimensionError(f"non-square matrix {s.rows}x{s.cols}")
    if s.rows != form.dim:
        raise DimensionError(f"matrix size {s.rows} does not match form size {form.dim}")
    return s.T @ form.J @ s == form.J
