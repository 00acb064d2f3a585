"""Disordered Floquet brickwork chains in phase space.

A chain has ``L`` sites (``L`` even) of ``N`` qubits each. Site ``x`` owns
coordinates ``2N*x .. 2N*x + 2N - 1`` ordered (q1, p1, ..., qN, pN). Gate
``x`` acts on sites ``(x, x+1 mod L)`` with site ``x`` as the first half of
its 4N-dimensional input. A half-step of even parity applies gates
0, 2, ..., L-2; odd parity applies 1, 3, ..., L-1. Evolution to time t2/2
applies t2 half-steps starting with the even one.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._backend import kernels
from .gf2 import BitMatrix, BitVector, DimensionError, SymplecticForm
from .stats import kernel_seed
from .symplectic import SymplecticMatrix

MAX_MODES = 16  # 4N-bit gate inputs must fit one machine word

PAULI_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
LETTER_BITS = {v: k for k, v in PAULI_LETTERS.items()}


@dataclass(frozen=True)
class ChainGeometry:
    L: int
    N: int

    def __post_init__(self):
        if self.L < 2 or self.L % 2:
            raise ValueError(f"L must be even and at least 2, got {self.L}")
        if not 1 <= self.N <= MAX_MODES:
            raise ValueError(f"N must lie in 1..{MAX_MODES}, got {self.N}")

    @property
    def site_bits(self) -> int:
        return 2 * self.N

    @property
    def dim(self) -> int:
        return 2 * self.N * self.L

    @property
    def site_mask(self) -> int:
        return (1 << self.site_bits) - 1

    def canonical(self, x: int) -> int:
        return x % self.L


@dataclass(frozen=True, order=True)
class HalfTime:
    """Time measured in half-steps; t = t2 / 2."""

    t2: int

    def __post_init__(self):
        if self.t2 < 0:
            raise ValueError(f"time must be non-negative, got t2={self.t2}")

    @classmethod
    def parse(cls, text: "str | int | Fraction | HalfTime") -> "HalfTime":
        """Accepts '5/2', '2.5', 't2=5', plain integers and Fractions."""
        if isinstance(text, HalfTime):
            return text
        if isinstance(text, int):
            return cls(2 * text)
        if isinstance(text, Fraction):
            return cls.from_time(text)
        s = str(text).strip().replace(" ", "")
        m = re.fullmatch(r"t2=(\d+)", s)
        if m:
            return cls(int(m.group(1)))
        try:
            value = Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse time {text!r}") from exc
        return cls.from_time(value)

    @classmethod
    def from_time(cls, t: Fraction | float | int) -> "HalfTime":
        doubled = Fraction(t) * 2
        if doubled.denominator != 1:
            raise ValueError(f"time {t} is not a multiple of 1/2")
        return cls(int(doubled))

    @property
    def t(self) -> Fraction:
        return Fraction(self.t2, 2)

    @property
    def is_integer(self) -> bool:
        return self.t2 % 2 == 0

    def __float__(self) -> float:
        return self.t2 / 2

    def __str__(self) -> str:
        return str(self.t2 // 2) if self.is_integer else f"{self.t2}/2"


# phase vectors -------------------------------------------------------------

class PhaseVector:
    """Vector of the chain phase space with per-site access."""

    __slots__ = ("geometry", "bits")

    def __init__(self, geometry: ChainGeometry, bits: BitVector):
        if bits.length != geometry.dim:
            raise DimensionError(f"vector length {bits.length} does not match chain dimension {geometry.dim}")
        self.geometry = geometry
        self.bits = bits

    @classmethod
    def zero(cls, geometry: ChainGeometry) -> "PhaseVector":
        return cls(geometry, BitVector(0, geometry.dim))

    @classmethod
    def from_sites(cls, geometry: ChainGeometry, sites: Sequence[int]) -> "PhaseVector":
        if len(sites) != geometry.L:
            raise DimensionError(f"expected {geometry.L} site words, got {len(sites)}")
        value = 0
        for x, w in enumerate(sites):
            w = int(w)
            if w < 0 or w > geometry.site_mask:
                raise ValueError(f"site word {w} does not fit {geometry.site_bits} bits")
            value |= w << (geometry.site_bits * x)
        return cls(geometry, BitVector(value, geometry.dim))

    @classmethod
    def local(cls, geometry: ChainGeometry, x: int, word: int = 1) -> "PhaseVector":
        """``word`` on site x, zero elsewhere; default X on the first qubit."""
        sites = [0] * geometry.L
        sites[geometry.canonical(x)] = word
        return cls.from_sites(geometry, sites)

    @classmethod
    def full_support(cls, geometry: ChainGeometry) -> "PhaseVector":
        """X on every qubit."""
        word = sum(1 << (2 * i) for i in range(geometry.N))
        return cls.from_sites(geometry, [word] * geometry.L)

    def site(self, x: int) -> int:
        g = self.geometry
        return (self.bits.value >> (g.site_bits * g.canonical(x))) & g.site_mask

    def sites(self) -> list[int]:
        return [self.site(x) for x in range(self.geometry.L)]

    def site_array(self) -> np.ndarray:
        return np.array(self.sites(), dtype=np.uint64)

    def support(self) -> frozenset[int]:
        return frozenset(x for x in range(self.geometry.L) if self.site(x))

    def is_zero(self) -> bool:
        return self.bits.is_zero()

    def project(self, region: Iterable[int]) -> int:
        """Concatenated site words of ``region`` in the given order."""
        out = 0
        for i, x in enumerate(region):
            out |= self.site(x) << (self.geometry.site_bits * i)
        return out

    def to_pauli(self) -> str:
        return pauli_string(self)

    @classmethod
    def from_pauli(cls, text: str, geometry: ChainGeometry) -> "PhaseVector":
        return parse_pauli(text, geometry)

    def __eq__(self, other) -> bool:
        return isinstance(other, PhaseVector) and other.geometry == self.geometry and other.bits == self.bits

    def __hash__(self) -> int:
        return hash((self.geometry, self.bits))

    def __repr__(self) -> str:
        return f"PhaseVector({self.to_pauli()!r})"


def site_letters(word: int, n_modes: int) -> str:
    return "".join(PAULI_LETTERS[((word >> (2 * i)) & 1, (word >> (2 * i + 1)) & 1)] for i in range(n_modes))


def pauli_string(u: PhaseVector) -> str:
    """Sites separated by spaces, qubits within a site adjacent: N=2, L=2 -> 'XI IZ'."""
    return " ".join(site_letters(w, u.geometry.N) for w in u.sites())


def parse_pauli(text: str, geometry: ChainGeometry) -> PhaseVector:
    """Inverse of ``pauli_string``; separators may be spaces, '|' or ','."""
    cleaned = text.strip().upper()
    if not cleaned:
        raise ValueError("empty Pauli string")
    chunks = [c for c in re.split(r"[\s|,]+", cleaned) if c]
    letters = "".join(chunks)
    bad = set(letters) - set(LETTER_BITS)
    if bad:
        raise ValueError(f"invalid Pauli letters {sorted(bad)} in {text!r}")
    if len(letters) != geometry.N * geometry.L:
        raise ValueError(f"Pauli string has {len(letters)} qubits, chain has {geometry.N * geometry.L}")
    if len(chunks) > 1 and any(len(c) % geometry.N for c in chunks):
        raise ValueError(f"site groups in {text!r} are not multiples of N={geometry.N}")
    value = 0
    for i, ch in enumerate(letters):
        q, p = LETTER_BITS[ch]
        value |= (q << (2 * i)) | (p << (2 * i + 1))
    return PhaseVector(geometry, BitVector(value, geometry.dim))


def parse_initial(spec: str, geometry: ChainGeometry) -> PhaseVector:
    """'local:x', 'full' or a Pauli string."""
    s = spec.strip()
    if s == "full":
        return PhaseVector.full_support(geometry)
    m = re.fullmatch(r"local:(-?\d+)", s)
    if m:
        return PhaseVector.local(geometry, int(m.group(1)))
    return parse_pauli(s, geometry)


# disorder ------------------------------------------------------------------

class DisorderRealization:
    """The L gate matrices of one circuit sample."""

    def __init__(self, geometry: ChainGeometry, gates: Sequence[SymplecticMatrix], seed: int | None = None):
        if len(gates) != geometry.L:
            raise ValueError(f"expected {geometry.L} gates, got {len(gates)}")
        for x, g in enumerate(gates):
            if g.n != 2 * geometry.N:
                raise DimensionError(f"gate {x} has size {g.dim}, expected {4 * geometry.N}")
        self.geometry = geometry
        self.gates = tuple(gates)
        self.seed = seed

    @classmethod
    def from_words(cls, geometry: ChainGeometry, words: np.ndarray, seed: int | None = None, check: bool = False) -> "DisorderRealization":
        n = 2 * geometry.N
        gates = [SymplecticMatrix.from_row_words(words[x], n, check=check) for x in range(geometry.L)]
        out = cls(geometry, gates, seed)
        out.__dict__["gate_words"] = np.array(words, dtype=np.uint64)
        return out

    @classmethod
    def identity(cls, geometry: ChainGeometry) -> "DisorderRealization":
        return cls(geometry, [SymplecticMatrix.identity(2 * geometry.N)] * geometry.L)

    @cached_property
    def gate_words(self) -> np.ndarray:
        """Gate rows as words, shape (L, 4N)."""
        out = np.stack([g.row_words() for g in self.gates])
        out.flags.writeable = False
        return out

    def with_gate(self, x: int, gate: SymplecticMatrix) -> "DisorderRealization":
        gates = list(self.gates)
        gates[self.geometry.canonical(x)] = gate
        return DisorderRealization(self.geometry, gates, self.seed)

    def to_json(self) -> str:
        doc = {
            "L": self.geometry.L,
            "N": self.geometry.N,
            "seed": self.seed,
            "gates": [g.m.to_text() for g in self.gates],
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DisorderRealization":
        doc = json.loads(text)
        geometry = ChainGeometry(int(doc["L"]), int(doc["N"]))
        gates = [SymplecticMatrix(BitMatrix.from_text(t)) for t in doc["gates"]]
        return cls(geometry, gates, doc.get("seed"))

    def __eq__(self, other) -> bool:
        return isinstance(other, DisorderRealization) and other.geometry == self.geometry and other.gates == self.gates

    def __hash__(self) -> int:
        return hash((self.geometry, self.gates))


def sample_gate_words(geometry: ChainGeometry, count: int, rng: np.random.Generator) -> np.ndarray:
    """Gates for ``count`` independent realizations, shape (count, L, 4N)."""
    flat = kernels.sample_symplectic(2 * geometry.N, count * geometry.L, kernel_seed(rng))
    return flat.reshape(count, geometry.L, 4 * geometry.N)


def build_disorder(geometry: ChainGeometry, rng: np.random.Generator | int) -> DisorderRealization:
    seed = rng if isinstance(rng, int) else None
    gen = np.random.default_rng(rng) if isinstance(rng, int) else rng
    return DisorderRealization.from_words(geometry, sample_gate_words(geometry, 1, gen)[0], seed=seed)


# matrices ------------------------------------------------------------------

def half_step_matrix(realization: DisorderRealization, parity: int | str) -> BitMatrix:
    """Dense 2NL x 2NL matrix of one half-step; odd parity wraps gate L-1 around the ring."""
    par = {"even": 0, "odd": 1}.get(parity, parity)
    if par not in (0, 1):
        raise ValueError(f"parity must be even/odd or 0/1, got {parity!r}")
    g = realization.geometry
    h = g.site_bits
    dense = np.zeros((g.dim, g.dim), dtype=np.uint8)
    for x in range(par, g.L, 2):
        y = (x + 1) % g.L
        s = realization.gates[x].m.to_dense()
        idx = np.r_[h * x : h * x + h, h * y : h * y + h]
        dense[np.ix_(idx, idx)] = s
    return BitMatrix.from_dense(dense)


def chain_form(geometry: ChainGeometry) -> SymplecticForm:
    return SymplecticForm(geometry.N * geometry.L)


def evolution_matrix(realization: DisorderRealization, t: HalfTime | str | int) -> BitMatrix:
    """Dense S(t); intended for small chains."""
    t = HalfTime.parse(t)
    even = half_step_matrix(realization, 0)
    odd = half_step_matrix(realization, 1)
    out = BitMatrix.identity(realization.geometry.dim)
    for h in range(t.t2):
        out = (even if h % 2 == 0 else odd) @ out
    return out


# evolution -----------------------------------------------------------------

def evolve_words(gate_words: np.ndarray, u0: np.ndarray, n_modes: int, t2: int, parity0: int = 0) -> np.ndarray:
    """Batched evolution: gates (R, L, 4N), site words (R, L) or (L,) broadcast to R."""
    gate_words = np.asarray(gate_words, dtype=np.uint64)
    u0 = np.asarray(u0, dtype=np.uint64)
    if u0.ndim == 1:
        u0 = np.broadcast_to(u0, (gate_words.shape[0], u0.shape[0]))
    return kernels.evolve_sites(gate_words, u0, n_modes, t2, parity0)


def trace_words(gate_words: np.ndarray, u0: np.ndarray, n_modes: int, t2: int, parity0: int = 0) -> np.ndarray:
    gate_words = np.asarray(gate_words, dtype=np.uint64)
    u0 = np.asarray(u0, dtype=np.uint64)
    if u0.ndim == 1:
        u0 = np.broadcast_to(u0, (gate_words.shape[0], u0.shape[0]))
    return kernels.evolve_trace(gate_words, u0, n_modes, t2, parity0)


def evolve(realization: DisorderRealization, u0: PhaseVector, t: HalfTime | str | int) -> PhaseVector:
    if u0.geometry != realization.geometry:
        raise DimensionError(f"vector geometry {u0.geometry} differs from realization geometry {realization.geometry}")
    t = HalfTime.parse(t)
    g = realization.geometry
    out = evolve_words(realization.gate_words[None], u0.site_array()[None], g.N, t.t2)
    return PhaseVector.from_sites(g, out[0].tolist())


def trajectory(realization: DisorderRealization, u0: PhaseVector, t2max: int) -> list[PhaseVector]:
    g = realization.geometry
    tr = trace_words(realization.gate_words[None], u0.site_array()[None], g.N, t2max)[0]
    return [PhaseVector.from_sites(g, row.tolist()) for row in tr]


def inverse_gate_words(gate_words: np.ndarray, n_modes: int) -> np.ndarray:
    """Row words of S⁻¹ = J Sᵀ J for a batch of gates (..., 4N)."""
    dim = 4 * n_modes
    shape = gate_words.shape
    flat = np.asarray(gate_words, dtype=np.uint64).reshape(-1, dim)
    even = np.uint64(int("55" * 8, 16))
    # J Sᵀ J: transpose, then swap paired rows and paired columns
    t = kernels.transpose_words(flat, dim)
    t = ((t & even) << np.uint64(1)) | ((t >> np.uint64(1)) & even)
    t = t.reshape(-1, dim // 2, 2)[:, :, ::-1].reshape(-1, dim)
    return np.ascontiguousarray(t).reshape(shape)


def unevolve_words(gate_words: np.ndarray, u: np.ndarray, n_modes: int, t2: int) -> np.ndarray:
    """Undo ``evolve_words(..., t2)`` by inverse half-steps in reverse order."""
    inv = inverse_gate_words(gate_words, n_modes)
    out = np.array(u, dtype=np.uint64)
    for h in reversed(range(t2)):
        out = kernels.evolve_sites(inv, out, n_modes, 1, h & 1)
    return out


# time and space structure ------------------------------------------------

def scrambling_time(L: int) -> HalfTime:
    if L < 2 or L % 2:
        raise ValueError(f"L must be even and at least 2, got {L}")
    half = L // 2
    t = Fraction(L, 4) if half % 2 == 0 else Fraction(half + 1, 2)
    return HalfTime.from_time(t)


def causal_window(x0: int, t: HalfTime | str | int, L: int) -> tuple[int, ...]:
    """Sites reachable from a seed at x0 after time t, left to right, canonical mod L.

    For even x0 the window is [x0-2t+1, x0+2t]; an odd seed first meets the
    gate to its left, giving [x0-2t, x0+2t-1]. The whole ring is returned
    once the window length 4t reaches L.
    """
    t = HalfTime.parse(t)
    if L < 2 or L % 2:
        raise ValueError(f"L must be even and at least 2, got {L}")
    if t.t2 == 0:
        return (x0 % L,)
    if 2 * t.t2 >= L:
        return tuple(range(L))
    if x0 % 2 == 0:
        lo, hi = x0 - t.t2 + 1, x0 + t.t2
    else:
        lo, hi = x0 - t.t2, x0 + t.t2 - 1
    return tuple(x % L for x in range(lo, hi + 1))
