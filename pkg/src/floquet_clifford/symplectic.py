"""The binary symplectic group: sampling, exact counts, blocks and block-rank statistics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._backend import kernels
from .gf2 import BitMatrix, BitVector, DimensionError, SymplecticForm, is_symplectic, mat_vec
from .stats import EmpiricalDistribution, below_with_slack, binomial_sigma, kernel_seed, run_streams

BLOCK_NAMES = ("A", "B", "C", "D")


class ExactCount(int):
    """Arbitrary-precision non-negative count."""

    @property
    def value(self) -> int:
        return int(self)


class SymplecticMatrix:
    """A BitMatrix known to satisfy SᵀJS = J."""

    __slots__ = ("n", "m")

    def __init__(self, m: BitMatrix, *, check: bool = True):
        if not m.is_square() or m.rows % 2:
            raise DimensionError(f"symplectic matrices are square of even size, got {m.rows}x{m.cols}")
        n = m.rows // 2
        if check and not is_symplectic(m, SymplecticForm(n)):
            raise ValueError("matrix does not satisfy SᵀJS = J")
        self.n = n
        self.m = m

    @classmethod
    def identity(cls, n: int) -> "SymplecticMatrix":
        return cls(BitMatrix.identity(2 * n), check=False)

    @classmethod
    def from_row_words(cls, words, n: int, *, check: bool = True) -> "SymplecticMatrix":
        return cls(BitMatrix.from_row_words(words, 2 * n), check=check)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def row_words(self) -> np.ndarray:
        return self.m.row_words()

    def __matmul__(self, other):
        if isinstance(other, SymplecticMatrix):
            if other.n != self.n:
                raise DimensionError(f"mode count mismatch {self.n} vs {other.n}")
            return SymplecticMatrix(self.m @ other.m, check=False)
        if isinstance(other, BitVector):
            return mat_vec(self.m, other)
        return NotImplemented

    def inverse(self) -> "SymplecticMatrix":
        j = SymplecticForm(self.n).J
        return SymplecticMatrix(j @ self.m.T @ j, check=False)

    def blocks(self) -> "BlockView":
        return blocks(self)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymplecticMatrix) and other.m == self.m

    def __hash__(self) -> int:
        return hash(self.m)

    def __repr__(self) -> str:
        return f"SymplecticMatrix(n={self.n}, {self.m!r})"


@dataclass(frozen=True)
class BlockView:
    """(A B; C D) split of a matrix acting on a direct sum of two equal halves."""

    A: BitMatrix
    B: BitMatrix
    C: BitMatrix
    D: BitMatrix

    def reassemble(self) -> BitMatrix:
        return BitMatrix.block(self.A, self.B, self.C, self.D)

    def get(self, name: str) -> BitMatrix:
        if name not in BLOCK_NAMES:
            raise ValueError(f"block name must be one of {BLOCK_NAMES}, got {name!r}")
        return getattr(self, name)

    def swapped_columns(self) -> "BlockView":
        """Blocks of S·M, M the half swap."""
        return BlockView(self.B, self.A, self.D, self.C)

    def swapped_rows(self) -> "BlockView":
        """Blocks of M·S."""
        return BlockView(self.C, self.D, self.A, self.B)

    def mirrored(self) -> "BlockView":
        """Blocks of M·S·M."""
        return BlockView(self.D, self.C, self.B, self.A)


def blocks(s: SymplecticMatrix | BitMatrix) -> BlockView:
    m = s.m if isinstance(s, SymplecticMatrix) else s
    if m.rows != m.cols or m.rows % 4:
        raise DimensionError(f"block split needs a square matrix of size divisible by 4, got {m.rows}x{m.cols}")
    h = m.rows // 2
    d = m.to_dense()
    return BlockView(*(BitMatrix.from_dense(x) for x in (d[:h, :h], d[:h, h:], d[h:, :h], d[h:, h:])))


def half_swap(n_half: int) -> BitMatrix:
    """M = (0 I; I 0) exchanging two halves of size n_half."""
    z = np.zeros((n_half, n_half), dtype=np.uint8)
    i = np.eye(n_half, dtype=np.uint8)
    return BitMatrix.from_dense(np.block([[z, i], [i, z]]))


def direct_sum(a: SymplecticMatrix, b: SymplecticMatrix) -> SymplecticMatrix:
    za = BitMatrix.zeros(a.dim, b.dim)
    zb = BitMatrix.zeros(b.dim, a.dim)
    return SymplecticMatrix(BitMatrix.block(a.m, za, zb, b.m), check=False)


# sampling -----------------------------------------------------------------

def sample_words(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` uniform elements of the n-mode group as row words, shape (count, 2n)."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return kernels.sample_symplectic(n, count, kernel_seed(rng))


def sample_uniform(n: int, rng: np.random.Generator) -> SymplecticMatrix:
    return SymplecticMatrix.from_row_words(sample_words(n, 1, rng)[0], n, check=False)


def words_symplectic(words: np.ndarray, n: int) -> np.ndarray:
    """Vectorised SᵀJS = J test for a batch of row-word matrices (2n <= 64)."""
    words = np.asarray(words, dtype=np.uint64)
    dim = 2 * n
    cols = kernels.transpose_words(words, dim)
    even = np.uint64(int("55" * 8, 16))
    swapped = ((cols & even) << np.uint64(1)) | ((cols >> np.uint64(1)) & even)
    ok = np.ones(words.shape[0], dtype=bool)
    for i in range(dim):
        for j in range(i + 1, dim):
            val = np.bitwise_count(cols[:, i] & swapped[:, j]) & 1
            want = 1 if (i // 2 == j // 2) else 0
            ok &= val == want
    return ok


@lru_cache(maxsize=None)
def all_elements(n: int) -> np.ndarray:
    """Every element of the n-mode group by brute force over all matrices (n <= 2)."""
    if n > 2:
        raise ValueError("brute-force enumeration is limited to n <= 2")
    dim = 2 * n
    width = dim * dim
    codes = np.arange(1 << width, dtype=np.uint64)
    rowmask = np.uint64((1 << dim) - 1)
    words = np.stack([(codes >> np.uint64(dim * i)) & rowmask for i in range(dim)], axis=1)
    out = words[words_symplectic(words, n)]
    out.flags.writeable = False
    return out


# exact counting -----------------------------------------------------------

def group_order(n: int) -> ExactCount:
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    value = 1
    for i in range(1, n + 1):
        value *= (4**i - 1) * 2 ** (2 * i - 1)
    return ExactCount(value)


def order_window(n: int) -> tuple[Decimal, Decimal, Decimal]:
    """(a(n), order / 2^(2n²+n), b(n)) at 40 significant digits."""
    with localcontext() as ctx:
        ctx.prec = 40
        a = (-sum(Decimal(1) / Decimal(4**i - 1) for i in range(1, n + 1))).exp()
        b = (-(Decimal(1) - Decimal(4) ** -n) / 3).exp()
        ratio = Decimal(int(group_order(n))) / Decimal(2) ** (2 * n * n + n)
    return a, ratio, b


def order_in_window(n: int, slack: Decimal = Decimal("1e-9")) -> bool:
    a, ratio, b = order_window(n)
    return Decimal("0.64") < a and b < Decimal("0.78") and a - slack <= ratio <= b + slack


def count_subspaces(n: int, k: int) -> ExactCount:
    """Number of k-dimensional subspaces of GF(2)^n."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    num = den = 1
    for i in range(k):
        num *= 2**n - 2**i
        den *= 2**k - 2**i
    return ExactCount(num // den)


def subspace_bounds(n: int, k: int) -> tuple[Fraction, Fraction]:
    base = Fraction(2) ** ((n - k) * k)
    return base * (1 - Fraction(2) ** (k - n)) ** k, base * min(2**k, 4)


# block ranks --------------------------------------------------------------

def block_words(words: np.ndarray, n: int, which: str) -> np.ndarray:
    """Extract block ``which`` from row words of 4n x 4n matrices, shape (count, 2n)."""
    half = 2 * n
    mask = np.uint64((1 << half) - 1)
    top = which in ("A", "B")
    right = which in ("B", "D")
    if which not in BLOCK_NAMES:
        raise ValueError(f"block name must be one of {BLOCK_NAMES}, got {which!r}")
    rows = words[:, :half] if top else words[:, half:]
    return (rows >> np.uint64(half)) & mask if right else rows & mask


def single_rank_bound(n: int, k: int) -> float:
    """Tail bound for prob{rank <= 2n-k} of one block of a uniform 4n x 4n element."""
    return min(2**k, 4) * 2.0 ** (-k * k) / (1 - 2.0 ** (-2 * n)) ** k


def product_rank_bound(n: int, k: int, r: int) -> float:
    return 2.0**k / (1 - 2.0 ** (-2 * n)) ** k * math.comb(k + r - 1, k) * 2.0 ** (-k * k / 2)


def kernel_hit_bound(n: int, r: int) -> float:
    return 8 * r * 2.0**-n


@dataclass
class TailRow:
    k: int
    rank_at_most: int
    frequency: float
    bound: float
    sigma: float
    passed: bool


@dataclass
class RankReport:
    n: int
    which: str
    r: int
    samples: int
    distribution: EmpiricalDistribution
    tails: list[TailRow]
    kernel_hit_frequency: float | None = None
    kernel_hit_bound: float | None = None
    kernel_hit_pass: bool | None = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        ok = all(t.passed for t in self.tails)
        return ok and self.kernel_hit_pass is not False

    def to_csv(self) -> str:
        """One row per rank; bound and pass refer to the tail event rank <= row rank."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["rank", "count", "frequency", "paper_bound", "pass"])
        by_rank = {t.rank_at_most: t for t in self.tails}
        for rk in range(2 * self.n + 1):
            c = self.distribution.counts.get(rk, 0)
            t = by_rank[rk]
            w.writerow([rk, c, repr(c / self.distribution.total), repr(t.bound), str(t.passed).lower()])
        return buf.getvalue()


def _tail_rows(dist: EmpiricalDistribution, n: int, bound) -> list[TailRow]:
    rows = []
    for k in range(2 * n + 1):
        thr = 2 * n - k
        freq = sum(c for rk, c in dist.counts.items() if rk <= thr) / dist.total
        b = bound(k)
        rows.append(TailRow(k, thr, freq, b, binomial_sigma(freq, dist.total), below_with_slack(freq, b, dist.total)))
    return rows


_CHUNK = 1 << 15


def _product_ranks(n: int, which: str, r: int, count: int, rng: np.random.Generator, hits: list[int]) -> np.ndarray:
    half = 2 * n
    acc = block_words(sample_words(2 * n, count, rng), n, which)
    for _ in range(r - 1):
        e = block_words(sample_words(2 * n, count, rng), n, which)
        acc = kernels.batch_matmul(e, acc, half)
    u = rng.integers(0, 1 << half, size=count, dtype=np.uint64)
    hits[0] += int(np.count_nonzero(kernels.batch_matvec(acc, u, half) == 0))
    return kernels.batch_rank(acc, half)


def product_rank_experiment(
    n: int,
    r: int,
    samples: int,
    rng: np.random.Generator | int,
    which: str = "C",
    streams: int = 1,
) -> RankReport:
    """Rank of E_r⋯E_1 for blocks of independent uniform 4n x 4n elements, and kernel hits."""
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    if samples < 1:
        raise ValueError("samples must be positive")
    if not 1 <= n <= 16:
        raise ValueError(f"n must lie in 1..16, got {n}")
    seed = rng if isinstance(rng, int) else kernel_seed(rng) >> 1
    hits_total = [0]

    def task(count: int, g: np.random.Generator) -> EmpiricalDistribution:
        hits = [0]
        parts = []
        for start in range(0, count, _CHUNK):
            parts.append(_product_ranks(n, which, r, min(_CHUNK, count - start), g, hits))
        hits_total[0] += hits[0]
        return EmpiricalDistribution.from_outcomes(np.concatenate(parts))

    dist = run_streams(task, samples, seed, streams)
    dist.metadata.update(n=n, which=which, r=r)
    if r == 1:
        tails = _tail_rows(dist, n, lambda k: single_rank_bound(n, k))
    else:
        tails = _tail_rows(dist, n, lambda k: product_rank_bound(n, k, r))
    hit_freq = hits_total[0] / samples
    hb = kernel_hit_bound(n, r)
    return RankReport(
        n, which, r, samples, dist, tails,
        kernel_hit_frequency=hit_freq,
        kernel_hit_bound=hb,
        kernel_hit_pass=below_with_slack(hit_freq, hb, samples),
    )


def block_rank_histogram(n: int, which: str, samples: int, rng: np.random.Generator | int, streams: int = 1) -> RankReport:
    report = product_rank_experiment(n, 1, samples, rng, which=which, streams=streams)
    report.kernel_hit_frequency = report.kernel_hit_bound = report.kernel_hit_pass = None
    return report


def exact_block_rank_distribution(which: str = "C") -> dict[int, Fraction]:
    """Rank law of one block over all 720 elements of the 2-mode group."""
    ranks = kernels.batch_rank(block_words(np.array(all_elements(2)), 1, which), 2)
    keys, cnt = np.unique(ranks, return_counts=True)
    total = len(ranks)
    return {int(k): Fraction(int(c), total) for k, c in zip(keys, cnt)}


def exact_product_rank_distribution(which: str = "C") -> dict[int, Fraction]:
    """Rank law of E₂E₁ over all 720² pairs of 2-mode elements."""
    e = block_words(np.array(all_elements(2)), 1, which)
    m = len(e)
    left = np.repeat(e, m, axis=0)
    right = np.tile(e, (m, 1))
    ranks = kernels.batch_rank(kernels.batch_matmul(left, right, 2), 2)
    keys, cnt = np.unique(ranks, return_counts=True)
    return {int(k): Fraction(int(c), m * m) for k, c in zip(keys, cnt)}
