"""Phase-space simulation of disordered Floquet Clifford chains."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .chain import (
    ChainGeometry,
    DisorderRealization,
    HalfTime,
    PhaseVector,
    build_disorder,
    causal_window,
    evolve,
    half_step_matrix,
    scrambling_time,
)
from .gf2 import BitMatrix, BitVector, SymplecticForm, is_symplectic, kernel_basis, mat_mul, rank, symp_form
from .symplectic import SymplecticMatrix, count_subspaces, group_order, sample_uniform

__all__ = [
    "BACKEND",
    "BitMatrix",
    "BitVector",
    "ChainGeometry",
    "DisorderRealization",
    "HalfTime",
    "PhaseVector",
    "SymplecticForm",
    "SymplecticMatrix",
    "build_disorder",
    "causal_window",
    "count_subspaces",
    "evolve",
    "group_order",
    "half_step_matrix",
    "is_symplectic",
    "kernel_basis",
    "mat_mul",
    "rank",
    "sample_uniform",
    "scrambling_time",
    "symp_form",
]
