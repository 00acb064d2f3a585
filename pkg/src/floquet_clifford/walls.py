"""One-sided walls: detection, probabilities, chain scans and confinement.

A right wall sits at an even gate x when the pair (gate x, gate x+1)
satisfies C1 (D0 A1)^k C0 = 0 for k < 4N². Operators supported on sites
<= x then stay on sites <= x+1. A left wall at an even gate e is the mirror
image with the odd gate e-1; operators on sites >= e+1 stay on sites >= e.
A product-form gate (C = 0) decouples its two sites in both directions.

Confinement is checked on the periodic covering line of the ring, so an
operator cannot reach the far side of a wall by travelling around the ring.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from ._backend import kernels
from .chain import ChainGeometry, DisorderRealization, PhaseVector, trace_words
from .gf2 import BitMatrix
from .stats import SIGMA_LEVEL, binomial_sigma, stream_rngs, split_count, within_sigma
from .symplectic import SymplecticMatrix, all_elements, blocks, group_order, sample_words


# block algebra on row words ------------------------------------------------

def _split(words: np.ndarray, n_modes: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    half = 2 * n_modes
    mask = np.uint64((1 << half) - 1)
    sh = np.uint64(half)
    top, bottom = words[:, :half], words[:, half:]
    return top & mask, top >> sh, bottom & mask, bottom >> sh


def mirror_words(words: np.ndarray, n_modes: int) -> np.ndarray:
    """M S M with M the exchange of the two sites."""
    half = 2 * n_modes
    a, b, c, d = _split(np.asarray(words, dtype=np.uint64), n_modes)
    sh = np.uint64(half)
    return np.concatenate([d | (c << sh), b | (a << sh)], axis=1)


def _zero_rows(m: np.ndarray) -> np.ndarray:
    return ~m.any(axis=1)


def right_wall_mask(s0: np.ndarray, s1: np.ndarray, n_modes: int, k_max: int | None = None) -> np.ndarray:
    """Batched right-wall test for gate pairs given as row words (R, 4N)."""
    s0 = np.atleast_2d(np.asarray(s0, dtype=np.uint64))
    s1 = np.atleast_2d(np.asarray(s1, dtype=np.uint64))
    half = 2 * n_modes
    k_max = 4 * n_modes * n_modes if k_max is None else k_max
    _, _, c0, d0 = _split(s0, n_modes)
    a1, _, c1, _ = _split(s1, n_modes)
    step = kernels.batch_matmul(d0, a1, half)
    ok = np.ones(len(s0), dtype=bool)
    live = np.arange(len(s0))
    power = c0.copy()
    for _ in range(k_max):
        bad = ~_zero_rows(kernels.batch_matmul(c1[live], power, half))
        ok[live[bad]] = False
        keep = ~bad & ~_zero_rows(power)
        live, power = live[keep], power[keep]
        if live.size == 0:
            break
        power = kernels.batch_matmul(step[live], power, half)
    return ok


def right_wall_mask_n1(s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
    """The two qubit conditions C1 C0 = 0 and C1 D0 A1 C0 = 0."""
    return right_wall_mask(s0, s1, 1, k_max=2)


def product_form_mask(words: np.ndarray, n_modes: int) -> np.ndarray:
    _, _, c, _ = _split(np.atleast_2d(np.asarray(words, dtype=np.uint64)), n_modes)
    return _zero_rows(c)


def _gate_modes(s: SymplecticMatrix) -> int:
    if s.dim % 4:
        raise ValueError(f"gate size {s.dim} is not 4N")
    return s.dim // 4


def _pair_modes(s0: SymplecticMatrix, s1: SymplecticMatrix, N: int | None) -> int:
    if s0.dim != s1.dim:
        raise ValueError(f"gate sizes differ: {s0.dim} vs {s1.dim}")
    n = _gate_modes(s0)
    if N is not None and N != n:
        raise ValueError(f"gates have size {s0.dim}, expected {4 * N}")
    if n > 16:
        raise ValueError("gate blocks wider than 32 bits are not supported")
    return n


def is_right_wall(s0: SymplecticMatrix, s1: SymplecticMatrix, N: int | None = None) -> bool:
    n = _pair_modes(s0, s1, N)
    return bool(right_wall_mask(s0.row_words()[None], s1.row_words()[None], n)[0])


def is_right_wall_N1(s0: SymplecticMatrix, s1: SymplecticMatrix) -> bool:
    if _pair_modes(s0, s1, None) != 1:
        raise ValueError("the two-condition test applies to one qubit per site only")
    return bool(right_wall_mask_n1(s0.row_words()[None], s1.row_words()[None])[0])


def is_left_wall(s_even: SymplecticMatrix, s_odd_left: SymplecticMatrix, N: int | None = None) -> bool:
    """Left wall at the even gate ``s_even`` paired with the odd gate on its left."""
    n = _pair_modes(s_even, s_odd_left, N)
    return bool(right_wall_mask(mirror_words(s_even.row_words()[None], n), mirror_words(s_odd_left.row_words()[None], n), n)[0])


def is_product_form(s: SymplecticMatrix) -> bool:
    return blocks(s).C.is_zero()


def mirror(s: SymplecticMatrix) -> SymplecticMatrix:
    n = _gate_modes(s)
    return SymplecticMatrix.from_row_words(mirror_words(s.row_words()[None], n)[0], 2 * n, check=False)


# fixtures ------------------------------------------------------------------------

def _load(name: str) -> SymplecticMatrix:
    text = resources.files("floquet_clifford").joinpath("data", name).read_text()
    return SymplecticMatrix(BitMatrix.from_text(text))


def counterexample_fixture() -> tuple[SymplecticMatrix, SymplecticMatrix]:
    """Two-qubit-per-site pair passing the k=0,1 conditions but not k=2."""
    return _load("wall_counterexample_s0.txt"), _load("wall_counterexample_s1.txt")


def qubit_wall_pair() -> tuple[SymplecticMatrix, SymplecticMatrix]:
    """A one-qubit-per-site pair forming a right wall."""
    return _load("qubit_wall_s0.txt"), _load("qubit_wall_s1.txt")


# probabilities --------------------------------------------------------------------

def wall_bound(N: int) -> float:
    return 4 * N * 2.0 ** (-2 * N * (N - 1))


def product_form_probability(N: int) -> Fraction:
    """|Sp_N|² / |Sp_2N| for one 4N x 4N gate."""
    return Fraction(int(group_order(N)) ** 2, int(group_order(2 * N)))


def product_form_window(N: int) -> tuple[Fraction, Fraction]:
    top = Fraction(1, 2 ** (4 * N * N))
    return top / 2, top


@dataclass(frozen=True)
class QubitWallCounts:
    """Exact counts over all 720² gate pairs at one qubit per site."""

    pairs: int
    right: int
    left: int
    right_two_conditions: int
    product_form: int
    group_size: int

    @property
    def right_probability(self) -> Fraction:
        return Fraction(self.right, self.pairs)

    @property
    def product_form_probability(self) -> Fraction:
        return Fraction(self.product_form, self.group_size)

    @property
    def rounds_to_012(self) -> bool:
        return round(float(self.right_probability), 2) == 0.12


def exact_qubit_wall_counts() -> QubitWallCounts:
    elems = np.array(all_elements(2))
    m = len(elems)
    s0 = np.repeat(elems, m, axis=0)
    s1 = np.tile(elems, (m, 1))
    full = right_wall_mask(s0, s1, 1)
    two = right_wall_mask_n1(s0, s1)
    left = right_wall_mask(mirror_words(s0, 1), mirror_words(s1, 1), 1)
    return QubitWallCounts(m * m, int(full.sum()), int(left.sum()), int(two.sum()),
                           int(product_form_mask(elems, 1).sum()), m)


@dataclass
class WallProbabilityReport:
    N: int
    samples: int
    seed: int | None
    count: int
    frequency: float
    sigma: float
    bound: float
    bound_pass: bool
    exact: Fraction | None = None
    exact_pass: bool | None = None

    @property
    def passed(self) -> bool:
        return self.bound_pass and self.exact_pass is not False


def wall_probability(N: int, samples: int, rng: np.random.Generator | int, streams: int = 1) -> WallProbabilityReport:
    """Monte-Carlo frequency of right walls over independent uniform gate pairs."""
    if samples < 1:
        raise ValueError("samples must be positive")
    seed = rng if isinstance(rng, (int, np.integer)) else int(rng.integers(0, 2**63))
    count = 0
    for n, g in zip(split_count(samples, streams), stream_rngs(int(seed), streams)):
        for start in range(0, n, 1 << 16):
            c = min(1 << 16, n - start)
            s0 = sample_words(2 * N, c, g)
            s1 = sample_words(2 * N, c, g)
            count += int(right_wall_mask(s0, s1, N).sum())
    freq = count / samples
    sig = binomial_sigma(freq, samples)
    bound = wall_bound(N)
    report = WallProbabilityReport(N, samples, int(seed), count, freq, sig, bound,
                                   freq <= bound + SIGMA_LEVEL * max(sig, 1 / samples))
    if N == 1:
        exact = exact_qubit_wall_counts().right_probability
        report.exact = exact
        report.exact_pass = within_sigma(freq, float(exact), samples)
    return report


def product_form_frequency(N: int, samples: int, rng: np.random.Generator) -> tuple[int, float]:
    count = 0
    for start in range(0, samples, 1 << 16):
        c = min(1 << 16, samples - start)
        count += int(product_form_mask(sample_words(2 * N, c, rng), N).sum())
    return count, count / samples


# scans ------------------------------------------------------------------------------

@dataclass(frozen=True)
class WallReport:
    position: int
    side: str
    penetration: int
    detected_by: tuple[str, ...] = field(default_factory=tuple)


def scan_chain(realization: DisorderRealization) -> list[WallReport]:
    """Right/left walls at every even gate and trivial walls at every product-form gate."""
    g = realization.geometry
    w = realization.gate_words
    N, L = g.N, g.L
    k = 4 * N * N
    out = []
    for x in range(0, L, 2):
        if right_wall_mask(w[x][None], w[(x + 1) % L][None], N)[0]:
            out.append(WallReport(x, "right", 1, (f"C1(D0A1)^kC0=0 for k<{k}",)))
        if right_wall_mask(mirror_words(w[x][None], N), mirror_words(w[(x - 1) % L][None], N), N)[0]:
            out.append(WallReport(x, "left", 1, (f"mirrored C1(D0A1)^kC0=0 for k<{k}",)))
    for x in range(L):
        if product_form_mask(w[x][None], N)[0]:
            out.append(WallReport(x, "both", 0, ("C=0",)))
    return out


# confinement on the covering line --------------------------------------------------

@dataclass
class ConfinementResult:
    wall: WallReport
    T: int
    trials: int
    passed: bool
    violations: int
    first_violation: tuple[int, int] | None = None  # (trial, half-step)


def _line_gates(realization: DisorderRealization, lo: int, width: int) -> np.ndarray:
    """Gates of the cover segment lo..lo+width-1 laid out as a ring with an identity seam."""
    g = realization.geometry
    words = realization.gate_words
    ident = np.array([1 << i for i in range(4 * g.N)], dtype=np.uint64)
    out = np.empty((width, 4 * g.N), dtype=np.uint64)
    for i in range(width - 1):
        out[i] = words[(lo + i) % g.L]
    out[width - 1] = ident
    return out


def _random_seeds(count: int, positions: np.ndarray, width: int, offset: int, geometry: ChainGeometry, rng: np.random.Generator) -> np.ndarray:
    """Random vectors supported on a random nonempty subset of ``positions`` (segment-relative)."""
    seeds = np.zeros((count, width), dtype=np.uint64)
    hi = 1 << geometry.site_bits
    for r in range(count):
        k = int(rng.integers(1, len(positions) + 1))
        chosen = rng.choice(positions, size=k, replace=False)
        seeds[r, chosen - offset] = rng.integers(1, hi, size=k, dtype=np.uint64)
    return seeds


def confinement_test(
    realization: DisorderRealization,
    wall: WallReport,
    T: int,
    trials: int,
    rng: np.random.Generator | int,
) -> ConfinementResult:
    """Evolve random seeds from the allowed side and check the support bound at every half-step."""
    g = realization.geometry
    rng = np.random.default_rng(rng) if isinstance(rng, (int, np.integer)) else rng
    x, L = wall.position, g.L
    sides = ["right", "left"] if wall.side == "both" else [wall.side]
    violations = 0
    first = None
    per_side = split_count(trials, len(sides))
    trial_index = 0
    for side, n in zip(sides, per_side):
        if n == 0:
            continue
        if side == "right":
            lo = x - L + 1 - T - 2
            lo -= lo % 2
            hi = x + 4
            allowed = np.arange(x - L + 1, x + 1)
            limit_hi, limit_lo = x + wall.penetration, None
        else:
            first_site = x + 1
            lo = x - 4
            lo -= lo % 2
            hi = first_site + L + T + 2
            allowed = np.arange(first_site, first_site + L)
            limit_lo, limit_hi = first_site - wall.penetration, None
        width = hi - lo + 1
        width += width % 2
        gates = _line_gates(realization, lo, width)
        seeds = _random_seeds(n, allowed, width, lo, g, rng)
        tr = trace_words(np.broadcast_to(gates, (n,) + gates.shape), seeds, g.N, T)
        pos = np.arange(lo, lo + width)
        occupied = tr != 0
        if limit_hi is not None:
            bad = (occupied & (pos > limit_hi)).any(axis=2)
        else:
            bad = (occupied & (pos < limit_lo)).any(axis=2)
        hit = bad.any(axis=1)
        violations += int(hit.sum())
        if first is None and hit.any():
            r = int(np.argmax(hit))
            first = (trial_index + r, int(np.argmax(bad[r])))
        trial_index += n
    return ConfinementResult(wall, T, trials, violations == 0, violations, first)


# lightcones -----------------------------------------------------------------------------

@dataclass
class LightconeGrid:
    """Row r holds the site occupancy after r half-steps; ``classes`` holds per-qubit Pauli letters 0..3."""

    occupancy: np.ndarray
    classes: np.ndarray
    walls: tuple[int, ...] = ()

    @property
    def rows(self) -> int:
        return self.occupancy.shape[0]

    def extents(self) -> list[tuple[int, int, int]]:
        """(t2, leftmost, rightmost) of the shortest ring arc covering the support."""
        L = self.occupancy.shape[1]
        out = []
        for r, row in enumerate(self.occupancy):
            sites = np.nonzero(row)[0]
            if sites.size == 0:
                out.append((r, -1, -1))
                continue
            gaps = np.diff(np.concatenate([sites, [sites[0] + L]]))
            i = int(np.argmax(gaps))
            left = int(sites[(i + 1) % sites.size])
            right = int(sites[i])
            out.append((r, left, right))
        return out

    def widths(self) -> list[int]:
        L = self.occupancy.shape[1]
        return [0 if lft < 0 else (rgt - lft) % L + 1 for _, lft, rgt in self.extents()]

    def extents_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["t2", "leftmost", "rightmost"])
        w.writerows(self.extents())
        return buf.getvalue()

    def to_pgm(self) -> str:
        rows, cols = self.occupancy.shape
        lines = ["P2", f"{cols} {rows}", "255"]
        lines += [" ".join("0" if v else "255" for v in row) for row in self.occupancy]
        return "\n".join(lines) + "\n"

    def to_svg(self, cell: int = 8) -> str:
        rows, cols = self.occupancy.shape
        w, h = cols * cell, rows * cell
        parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
            f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        ]
        for r, c in zip(*np.nonzero(self.occupancy)):
            parts.append(f'<rect x="{c * cell}" y="{r * cell}" width="{cell}" height="{cell}" fill="black"/>')
        for x in self.walls:
            xc = (x + 1) * cell
            parts.append(f'<line x1="{xc}" y1="0" x2="{xc}" y2="{h}" stroke="red" stroke-width="1"/>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def lightcone_grid(realization: DisorderRealization, u0: PhaseVector, t2max: int, walls: tuple[int, ...] = ()) -> LightconeGrid:
    g = realization.geometry
    tr = trace_words(realization.gate_words[None], u0.site_array()[None], g.N, t2max)[0]
    occupancy = (tr != 0).astype(np.uint8)
    classes = np.zeros((t2max + 1, g.L * g.N), dtype=np.uint8)
    for i in range(g.N):
        q = (tr >> np.uint64(2 * i)) & np.uint64(1)
        p = (tr >> np.uint64(2 * i + 1)) & np.uint64(1)
        classes[:, i :: g.N] = (q | (p << np.uint64(1))).astype(np.uint8)
    return LightconeGrid(occupancy, classes, tuple(walls))
