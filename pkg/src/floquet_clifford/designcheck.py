"""Distinguishability of half-integer-time chains from Haar-random unitaries.

The advantage of a two-copy Pauli-measurement test is bounded through the
l1 distance between the transition law P_t(·|u0) and the uniform law on
nonzero chain vectors: p_guess <= 1/2 + worst_l1 / 4.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import oracle
from .chain import ChainGeometry, HalfTime, PhaseVector, scrambling_time
from .ergodicity import (
    SCHEMA,
    TwirlClasses,
    UniformReference,
    class_law_from_exact,
    l1_from_classes,
    l1_to_uniform,
    transition_classes,
    transition_histogram,
    _seed_of,
)


@dataclass(frozen=True)
class HaarReference:
    gamma: Fraction
    support_size: int


def haar_reference(geometry: ChainGeometry) -> HaarReference:
    size = 2**geometry.dim - 1
    return HaarReference(Fraction(1, size), size)


@dataclass
class DesignReport:
    L: int
    N: int
    t2: int
    samples: int | None
    exact: bool
    worst_l1: float
    p_guess_estimate: float
    paper_bound: float
    appendix_bound: float
    paper_vacuous: bool
    appendix_vacuous: bool
    method: str
    seed: int | None = None
    per_input: list = field(default_factory=list)
    worst_l1_exact: str | None = None

    def as_dict(self) -> dict:
        from . import __version__

        d = asdict(self)
        d["schema"] = SCHEMA
        d["version"] = __version__
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1) + "\n"


def default_inputs(geometry: ChainGeometry) -> list[PhaseVector]:
    """Single-site X seed and the all-X seed."""
    return [PhaseVector.local(geometry, 0), PhaseVector.full_support(geometry)]


def support_representatives(geometry: ChainGeometry) -> list[PhaseVector]:
    """One input per nonempty support pattern (X on the first qubit of each chosen site)."""
    out = []
    for mask in range(1, 1 << geometry.L):
        out.append(PhaseVector.from_sites(geometry, [1 if (mask >> x) & 1 else 0 for x in range(geometry.L)]))
    return out


def exact_input_l1(u0: PhaseVector, t2: int) -> Fraction:
    g = u0.geometry
    if not (g.L == 2 and g.N == 1):
        raise ValueError("exact enumeration covers the two-site, one-qubit ring only")
    Q = UniformReference(g, tuple(range(g.L)), False)
    return l1_to_uniform(oracle.transition_law(u0.bits.value, t2), Q)


def advantage_estimate(
    geometry: ChainGeometry,
    t: HalfTime | str | int,
    inputs: Sequence[PhaseVector] | None = None,
    samples: int | None = None,
    exact: bool = False,
    rng: np.random.Generator | int | None = None,
    method: str = "classes",
    streams: int = 1,
) -> DesignReport:
    """worst_l1 = max over inputs of Σ_{u'≠0} |P_t(u'|u0) − γ|.

    ``exact`` enumerates every realization (two-site, one-qubit ring only).
    Otherwise ``method`` selects the class or histogram estimator.
    """
    t = HalfTime.parse(t)
    if t.is_integer:
        raise ValueError("the design estimate needs a half-integer time")
    tscr = scrambling_time(geometry.L)
    if not (tscr.t2 <= t.t2 <= 2 * tscr.t2):
        raise ValueError(f"time {t} outside [{tscr}, {HalfTime(2 * tscr.t2)}]")
    inputs = list(inputs) if inputs is not None else default_inputs(geometry)
    if not inputs:
        raise ValueError("at least one input vector is required")
    for u in inputs:
        if u.is_zero():
            raise ValueError("inputs must be nonzero")
    Q = UniformReference(geometry, tuple(range(geometry.L)), False)
    per_input = []
    worst_exact = None
    seed = None
    if exact:
        values = [exact_input_l1(u, t.t2) for u in inputs]
        worst_exact = max(values)
        per_input = [(u.to_pauli(), float(v)) for u, v in zip(inputs, values)]
        worst = float(worst_exact)
        method = "exact"
    else:
        if samples is None or samples < 1:
            raise ValueError("Monte-Carlo estimate needs a positive sample count")
        seed = _seed_of(rng)
        for i, u in enumerate(inputs):
            sub = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
            if method == "classes":
                P, classes = transition_classes(u, t, geometry, samples, sub, None, streams)
                v = l1_from_classes(P, Q, classes)
            elif method == "histogram":
                v = l1_to_uniform(transition_histogram(u, t, geometry, samples, sub, None, streams), Q)
            else:
                raise ValueError(f"unknown method {method!r}")
            per_input.append((u.to_pauli(), float(v)))
        worst = max(v for _, v in per_input)
    tf = float(t)
    L, N = geometry.L, geometry.N
    loose = 0.5 + 8 * tf * L * 2.0**-N
    appendix = 0.5 + 33 * tf * L * 2.0**-N / 4
    return DesignReport(
        L, N, t.t2, samples, exact, worst, 0.5 + worst / 4, loose, appendix,
        loose >= 1, appendix >= 1, method, seed, per_input,
        str(worst_exact) if worst_exact is not None else None,
    )


def class_assembled_l1(u0: PhaseVector, t2: int) -> Fraction:
    """Exact l1 rebuilt from the zero/nonzero pattern law only (two-site, one-qubit ring)."""
    g = u0.geometry
    classes = TwirlClasses.for_time(g, u0, HalfTime(t2))
    law = class_law_from_exact(oracle.transition_law(u0.bits.value, t2), classes)
    Q = UniformReference(g, tuple(range(g.L)), False, classes.region)
    return l1_from_classes(law, Q, classes)
