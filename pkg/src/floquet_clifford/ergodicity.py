"""Monte-Carlo and exact estimates of the disorder-averaged transition law.

Two estimators of distances to uniform are provided:

* ``histogram`` counts the projected outcome vectors directly. It is exact in
  the limit but needs many more samples than outcomes.
* ``classes`` counts, per site, only the orbit of the outcome under the local
  twirl that leaves the disorder law invariant: zero / nonzero at half-integer
  times, and zero / equal to the input / commuting / anticommuting with the
  input site word at integer times. The transition law is constant on each
  product of orbits, so the distance follows from the orbit frequencies.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import oracle
from ._backend import kernels
from .chain import (
    ChainGeometry,
    HalfTime,
    PhaseVector,
    causal_window,
    evolve_words,
    sample_gate_words,
    scrambling_time,
)
from .stats import (
    EmpiricalDistribution,
    SIGMA_LEVEL,
    below_with_slack,
    binomial_sigma,
    merge_all,
    stream_rngs,
    split_count,
)

SCHEMA = 1
CHUNK = 4096
_EVEN = np.uint64(int("55" * 8, 16))


class CausalityViolation(ValueError):
    """Observed mass outside the support of the reference distribution."""


# reference laws -------------------------------------------------------------

@dataclass(frozen=True)
class UniformReference:
    """Uniform law on ``support`` sites (others zero), projected onto ``region``.

    Without ``include_zero`` the ambient law excludes the zero vector.
    """

    geometry: ChainGeometry
    support: tuple[int, ...]
    include_zero: bool = False
    region: tuple[int, ...] | None = None

    @property
    def sites(self) -> tuple[int, ...]:
        return self.region if self.region is not None else tuple(range(self.geometry.L))

    @property
    def ambient_bits(self) -> int:
        return self.geometry.site_bits * len(set(self.support))

    @property
    def visible_bits(self) -> int:
        return self.geometry.site_bits * len(set(self.sites) & set(self.support))

    def point_mass(self, is_zero: bool) -> Fraction:
        a, b = self.ambient_bits, self.visible_bits
        if self.include_zero:
            return Fraction(1, 2**b)
        if is_zero:
            return Fraction(2 ** (a - b) - 1, 2**a - 1)
        return Fraction(2 ** (a - b), 2**a - 1)

    def support_size(self) -> int:
        """Number of region vectors with positive mass."""
        b = self.visible_bits
        if self.include_zero or self.ambient_bits > b:
            return 2**b
        return 2**b - 1

    def allowed_region_mask(self) -> list[bool]:
        supp = set(self.support)
        return [x in supp for x in self.sites]


def window_reference(geometry: ChainGeometry, x0: int, t: HalfTime, region: Sequence[int] | None = None) -> UniformReference:
    return UniformReference(geometry, causal_window(x0, t, geometry.L), False, tuple(region) if region is not None else None)


def _decode_sites(key: int, nsites: int, bits: int) -> list[int]:
    mask = (1 << bits) - 1
    return [(key >> (bits * i)) & mask for i in range(nsites)]


def l1_to_uniform(P: EmpiricalDistribution | Mapping[int, Fraction], Q: UniformReference) -> float | Fraction:
    """Σ|P − Q| over the whole support of Q; keys are region-projected vectors.

    Returns a Fraction when ``P`` is a mapping of exact probabilities.
    """
    exact = not isinstance(P, EmpiricalDistribution)
    probs = P if exact else {k: Fraction(c, P.total) for k, c in P.counts.items()}
    allowed = Q.allowed_region_mask()
    bits = Q.geometry.site_bits
    acc = Fraction(0)
    seen = Fraction(0)
    for key, p in probs.items():
        if p == 0:
            continue
        words = _decode_sites(key, len(allowed), bits)
        if key >> (bits * len(allowed)) or any(w and not ok for w, ok in zip(words, allowed)):
            raise CausalityViolation(f"outcome {key:#x} lies outside the reference support")
        q = Q.point_mass(key == 0)
        if q == 0:
            raise CausalityViolation(f"outcome {key:#x} has zero reference mass")
        acc += abs(p - q)
        seen += q
    value = acc + (1 - seen)
    return value if exact else float(value)


# twirl classes --------------------------------------------------------------

ZERO, EQUAL, COMMUTING, ANTICOMMUTING = 0, 1, 2, 3


@dataclass(frozen=True)
class TwirlClasses:
    """Per-site orbit labels on ``region``; ``refs[i]`` None means zero/nonzero only."""

    geometry: ChainGeometry
    region: tuple[int, ...]
    refs: tuple[int | None, ...]

    @classmethod
    def for_time(cls, geometry: ChainGeometry, u0: PhaseVector, t: HalfTime, region: Sequence[int] | None = None) -> "TwirlClasses":
        region = tuple(region) if region is not None else tuple(range(geometry.L))
        if t.is_integer:
            refs = tuple(u0.site(x) or None for x in region)
        else:
            refs = (None,) * len(region)
        return cls(geometry, region, refs)

    def keys(self, sites: np.ndarray) -> np.ndarray:
        out = np.zeros(sites.shape[0], dtype=np.int64)
        for i, (x, r) in enumerate(zip(self.region, self.refs)):
            w = sites[:, x]
            code = np.where(w == 0, ZERO, ANTICOMMUTING).astype(np.int64)
            if r is not None:
                ref = np.uint64(r)
                sref = ((ref & _EVEN) << np.uint64(1)) | ((ref >> np.uint64(1)) & _EVEN)
                odd = (np.bitwise_count(w & sref) & 1).astype(bool)
                code = np.where(w == 0, ZERO, np.where(w == ref, EQUAL, np.where(odd, ANTICOMMUTING, COMMUTING)))
            out += code.astype(np.int64) << (2 * i)
        return out

    def site_size(self, i: int, code: int) -> int:
        n2 = self.geometry.site_bits
        if code == ZERO:
            return 1
        if self.refs[i] is None:
            return 2**n2 - 1 if code == ANTICOMMUTING else 0
        return {EQUAL: 1, COMMUTING: 2 ** (n2 - 1) - 2, ANTICOMMUTING: 2 ** (n2 - 1)}[code]

    def codes(self, key: int) -> list[int]:
        return [(key >> (2 * i)) & 3 for i in range(len(self.region))]

    def size(self, key: int) -> int:
        return math.prod(self.site_size(i, c) for i, c in enumerate(self.codes(key)))


def l1_from_classes(P: EmpiricalDistribution | Mapping[int, Fraction], Q: UniformReference, classes: TwirlClasses) -> float | Fraction:
    """Distance to ``Q`` assuming the law is uniform inside every class."""
    if Q.sites != classes.region:
        raise ValueError("reference region and class region differ")
    exact = not isinstance(P, EmpiricalDistribution)
    probs = P if exact else {k: Fraction(c, P.total) for k, c in P.counts.items()}
    allowed = Q.allowed_region_mask()
    acc = Fraction(0)
    seen = Fraction(0)
    for key, p in probs.items():
        if p == 0:
            continue
        codes = classes.codes(key)
        if any(c and not ok for c, ok in zip(codes, allowed)):
            raise CausalityViolation(f"class {codes} has nonzero sites outside the reference support")
        q = classes.size(key) * Q.point_mass(key == 0)
        acc += abs(p - q)
        seen += q
    value = acc + (1 - seen)
    return value if exact else float(value)


def class_law_from_exact(law: Mapping[int, Fraction], classes: TwirlClasses) -> dict[int, Fraction]:
    """Aggregate an exact vector law (L=2, N=1 keys) into class probabilities."""
    out: dict[int, Fraction] = {}
    g = classes.geometry
    for v, p in law.items():
        sites = np.array([[(v >> (g.site_bits * x)) & g.site_mask for x in range(g.L)]], dtype=np.uint64)
        k = int(classes.keys(sites)[0])
        out[k] = out.get(k, Fraction(0)) + p
    return out


# sampling engine ------------------------------------------------------------

def region_keys(sites: np.ndarray, region: Sequence[int], site_bits: int) -> np.ndarray:
    """Concatenate region site words; object dtype when wider than 64 bits."""
    region = list(region)
    if site_bits * len(region) <= 64:
        out = np.zeros(sites.shape[0], dtype=np.uint64)
        for i, x in enumerate(region):
            out |= sites[:, x] << np.uint64(site_bits * i)
        return out
    out = np.zeros(sites.shape[0], dtype=object)
    for i, x in enumerate(region):
        out += sites[:, x].astype(object) * (1 << (site_bits * i))
    return out


def apply_local(site_words: np.ndarray, local: np.ndarray, site_bits: int) -> np.ndarray:
    """Apply one 2N x 2N matrix per site: local has shape (L, 2N) of row words."""
    out = np.empty_like(site_words)
    for x in range(site_words.shape[1]):
        rows = np.broadcast_to(local[x], (site_words.shape[0], site_bits))
        out[:, x] = kernels.batch_matvec(np.ascontiguousarray(rows), np.ascontiguousarray(site_words[:, x]), site_bits)
    return out


def invert_local(local: np.ndarray, n_modes: int) -> np.ndarray:
    """Inverses J Xᵀ J of single-site elements given as row words."""
    dim = 2 * n_modes
    even = np.uint64(int("55" * 8, 16))
    t = kernels.transpose_words(np.ascontiguousarray(local, dtype=np.uint64), dim)
    t = ((t & even) << np.uint64(1)) | ((t >> np.uint64(1)) & even)
    return np.ascontiguousarray(t.reshape(-1, dim // 2, 2)[:, :, ::-1].reshape(local.shape))


@dataclass(frozen=True)
class Dressing:
    """Fixed local symplectics applied before (``right``) and after (``left``) the evolution."""

    right: np.ndarray | None = None
    left: np.ndarray | None = None


def sample_outcomes(
    geometry: ChainGeometry,
    u0: PhaseVector,
    t: HalfTime,
    count: int,
    rng: np.random.Generator,
    reducer: Callable[[np.ndarray], np.ndarray],
    dressing: Dressing | None = None,
) -> EmpiricalDistribution:
    """Evolve ``u0`` under ``count`` fresh realizations and count ``reducer(final sites)``."""
    parts = []
    start_sites = u0.site_array()
    if dressing is not None and dressing.right is not None:
        start_sites = apply_local(start_sites[None], dressing.right, geometry.site_bits)[0]
    for start in range(0, count, CHUNK):
        c = min(CHUNK, count - start)
        gates = sample_gate_words(geometry, c, rng)
        final = evolve_words(gates, start_sites, geometry.N, t.t2)
        if dressing is not None and dressing.left is not None:
            final = apply_local(final, dressing.left, geometry.site_bits)
        parts.append(EmpiricalDistribution.from_outcomes(reducer(final)))
    return merge_all(parts)


def _streamed(seed: int, streams: int, samples: int, fn: Callable[[int, np.random.Generator], EmpiricalDistribution]) -> EmpiricalDistribution:
    rngs = stream_rngs(seed, streams)
    parts = [fn(n, r) for n, r in zip(split_count(samples, streams), rngs) if n]
    out = merge_all(parts, seed=seed)
    out.metadata["streams"] = streams
    return out


def _seed_of(rng: np.random.Generator | int | None) -> int:
    if rng is None:
        return int(np.random.SeedSequence().entropy % (2**63))
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return int(rng.integers(0, 2**63))


def _check_u0(u0: PhaseVector, geometry: ChainGeometry) -> None:
    if u0.geometry != geometry:
        raise ValueError(f"initial vector geometry {u0.geometry} differs from {geometry}")
    if u0.is_zero():
        raise ValueError("the zero vector is fixed by every realization; pass a nonzero u0")


def transition_histogram(
    u0: PhaseVector,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    restrict: Sequence[int] | None = None,
    streams: int = 1,
    dressing: Dressing | None = None,
) -> EmpiricalDistribution:
    """Counts of S(t)u0 (projected onto ``restrict`` in the given order)."""
    t = HalfTime.parse(t)
    _check_u0(u0, geometry)
    region = tuple(geometry.canonical(x) for x in restrict) if restrict is not None else tuple(range(geometry.L))
    seed = _seed_of(rng)
    dist = _streamed(seed, streams, samples, lambda n, g: sample_outcomes(
        geometry, u0, t, n, g, lambda s: region_keys(s, region, geometry.site_bits), dressing))
    dist.metadata.update(kind="vector", region=region, t2=t.t2, L=geometry.L, N=geometry.N)
    return dist


def transition_classes(
    u0: PhaseVector,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    region: Sequence[int] | None = None,
    streams: int = 1,
) -> tuple[EmpiricalDistribution, TwirlClasses]:
    t = HalfTime.parse(t)
    _check_u0(u0, geometry)
    classes = TwirlClasses.for_time(geometry, u0, t, region)
    seed = _seed_of(rng)
    dist = _streamed(seed, streams, samples, lambda n, g: sample_outcomes(geometry, u0, t, n, g, classes.keys))
    dist.metadata.update(kind="classes", region=classes.region, t2=t.t2, L=geometry.L, N=geometry.N)
    return dist, classes


# reports ----------------------------------------------------------------------

@dataclass
class ErgodicityReport:
    experiment: str
    L: int
    N: int
    t2: int
    samples: int
    seed: int | None
    l1: float
    bound_main: float
    bound_appendix: float
    vacuous: bool
    passed: bool
    method: str = "classes"
    region: tuple[int, ...] = ()
    streams: int = 1
    extra: dict = field(default_factory=dict)

    @property
    def l1_distance(self) -> float:
        return self.l1

    @property
    def paper_bound(self) -> float:
        return self.bound_appendix

    def as_dict(self) -> dict:
        from . import __version__

        d = asdict(self)
        d["pass"] = d.pop("passed")
        d["region"] = list(self.region)
        d["schema"] = SCHEMA
        d["version"] = __version__
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (tuple, set, frozenset)):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def l1_sigma(samples: int) -> float:
    """Standard error ceiling of a plug-in l1 estimate: Var ≤ 1/samples."""
    return 1.0 / math.sqrt(samples) if samples else math.inf


def _judge(l1: float, bound: float, samples: int | None) -> tuple[bool, bool]:
    vacuous = bound >= 2.0
    slack = 0.0 if samples is None else SIGMA_LEVEL * l1_sigma(samples)
    return vacuous, vacuous or l1 <= bound + slack


def weak_bounds(t: HalfTime, geometry: ChainGeometry) -> tuple[float, float]:
    tf = float(t)
    N, L = geometry.N, geometry.L
    eff = L if t >= scrambling_time(L) else min(L, 4 * tf)
    return 130 * tf * tf * 2.0**-N, 32 * tf * (eff + 1) * 2.0**-N + eff * 2.0 ** (-2 * N)


def half_bounds(t: HalfTime, geometry: ChainGeometry) -> tuple[float, float]:
    tf = float(t)
    N, L = geometry.N, geometry.L
    return 33 * tf * L * 2.0**-N, 32 * tf * L * 2.0**-N + L * 2.0 ** (-2 * N)


def subsystem_bounds(t: HalfTime, geometry: ChainGeometry, Ls: int) -> tuple[float, float]:
    tf = float(t)
    N, L = geometry.N, geometry.L
    main = 34 * tf * 3.0 ** (Ls / 2) * 2.0**-N
    app = 32 * tf * 2.0**-N * (2 * Ls + 3.0 ** (Ls / 2 + 1)) + 4 * L * 2.0 ** (-2 * N)
    return main, app


def _is_exact_oracle(geometry: ChainGeometry) -> bool:
    return geometry.L == 2 and geometry.N == 1


def _vector_key(u: PhaseVector) -> int:
    return u.bits.value


def weak_ergodicity_check(
    x0: int,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    restrict: Sequence[int] | None = None,
    method: str = "classes",
    word: int = 1,
    streams: int = 1,
) -> ErgodicityReport:
    """Distance of S(t)u0 (u0 = ``word`` at x0) to the uniform law on the causal window.

    ``method`` is 'classes', 'histogram' or 'exact' (L=2, N=1 only).
    """
    t = HalfTime.parse(t)
    tscr = scrambling_time(geometry.L)
    if not (1 <= t.t2 <= 2 * tscr.t2):
        raise ValueError(f"time {t} outside [1/2, {HalfTime(2 * tscr.t2)}]")
    x0 = geometry.canonical(x0)
    u0 = PhaseVector.local(geometry, x0, word)
    region = tuple(geometry.canonical(x) for x in restrict) if restrict is not None else tuple(range(geometry.L))
    Q = window_reference(geometry, x0, t, region)
    main, app = weak_bounds(t, geometry)
    seed = _seed_of(rng) if method != "exact" else None
    l1, extra = _estimate_l1(u0, t, geometry, samples, seed, Q, region, method, streams)
    vacuous, ok = _judge(l1, app, None if method == "exact" else samples)
    extra["window"] = list(Q.support)
    return ErgodicityReport("weak", geometry.L, geometry.N, t.t2, samples if method != "exact" else oracle.REALIZATIONS,
                            seed, l1, main, app, vacuous, ok, method, region, streams, extra)


def _estimate_l1(u0, t, geometry, samples, seed, Q, region, method, streams):
    extra: dict = {}
    if method == "exact":
        if not _is_exact_oracle(geometry) or region != tuple(range(geometry.L)):
            raise ValueError("the exact path covers the full two-site, one-qubit ring only")
        law = oracle.transition_law(_vector_key(u0), t.t2)
        value = l1_to_uniform(law, Q)
        extra["l1_exact"] = str(value)
        return float(value), extra
    if method == "histogram":
        P = transition_histogram(u0, t, geometry, samples, seed, region, streams)
        extra["distinct_outcomes"] = len(P.counts)
        extra["support_size"] = Q.support_size()
        return l1_to_uniform(P, Q), extra
    if method == "classes":
        P, classes = transition_classes(u0, t, geometry, samples, seed, region, streams)
        extra["class_frequencies"] = {str(classes.codes(k)): c / P.total for k, c in sorted(P.counts.items())}
        return l1_from_classes(P, Q, classes), extra
    raise ValueError(f"unknown method {method!r}")


def halfinteger_ergodicity_check(
    u0: PhaseVector,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    method: str = "classes",
    streams: int = 1,
) -> ErgodicityReport:
    """Distance of S(t)u0 to the uniform law on all nonzero chain vectors at half-integer t."""
    t = HalfTime.parse(t)
    if t.is_integer:
        raise ValueError("this check needs a half-integer time")
    tscr = scrambling_time(geometry.L)
    if not (tscr.t2 <= t.t2 <= 2 * tscr.t2):
        raise ValueError(f"time {t} outside [{tscr}, {HalfTime(2 * tscr.t2)}]")
    _check_u0(u0, geometry)
    region = tuple(range(geometry.L))
    Q = UniformReference(geometry, region, False, region)
    main, app = half_bounds(t, geometry)
    exact = method == "exact"
    seed = None if exact else _seed_of(rng)
    l1, extra = _estimate_l1(u0, t, geometry, samples, seed, Q, region, method, streams)
    n_used = oracle.REALIZATIONS if exact else samples
    # all sites nonzero
    if exact:
        law = oracle.transition_law(_vector_key(u0), t.t2)
        nz = sum((p for v, p in law.items() if v & 3 and v >> 2), Fraction(0))
        extra["all_nonzero_exact"] = str(nz)
        all_nonzero = float(nz)
    elif method == "classes":
        all_nonzero = extra["class_frequencies"].get(str([ANTICOMMUTING] * geometry.L), 0.0)
    else:
        P, _ = transition_classes(u0, t, geometry, samples, seed, None, streams)
        all_nonzero = P.frequency(sum(ANTICOMMUTING << (2 * i) for i in range(geometry.L)))
    nz_bound = 1 - 16 * float(t) * geometry.L * 2.0**-geometry.N
    extra["all_nonzero"] = all_nonzero
    extra["all_nonzero_bound"] = nz_bound
    extra["all_nonzero_vacuous"] = nz_bound <= 0
    extra["all_nonzero_pass"] = nz_bound <= 0 or all_nonzero >= nz_bound - SIGMA_LEVEL * binomial_sigma(all_nonzero, n_used)
    vacuous, ok = _judge(l1, app, None if exact else samples)
    return ErgodicityReport("half", geometry.L, geometry.N, t.t2, n_used, seed, l1, main, app, vacuous,
                            ok and extra["all_nonzero_pass"], method, region, streams, extra)


def conditional_nonzero_law(u0: int, t2: int) -> dict[int, Fraction]:
    """Exact law of S(t)u0 given every site nonzero, two-site one-qubit ring."""
    law = oracle.transition_law(u0, t2)
    sel = {v: p for v, p in law.items() if v & 3 and v >> 2}
    total = sum(sel.values(), Fraction(0))
    return {v: p / total for v, p in sel.items()}


# zero-site table --------------------------------------------------------------

@dataclass
class ZeroSiteRow:
    site: int
    frequency: float
    sigma: float
    bound: float | None
    bound_kind: str
    passed: bool


@dataclass
class ZeroSiteTable:
    L: int
    N: int
    t2: int
    samples: int
    seed: int | None
    initial: str
    rows: list[ZeroSiteRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def frequency(self, site: int) -> float:
        return self.rows[site].frequency


def zero_site_stats(
    u0_class: str,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    x0: int = 0,
    streams: int = 1,
    gate_sampler: Callable | None = None,
) -> ZeroSiteTable:
    """prob{u_x^t = 0} per site for a local seed at x0 or the full-support seed.

    Bound column: 2t·2^(-2N) at the two rightmost sites of a local seed's
    light cone, 16t·2^(-N) at every site for the full-support seed.
    """
    t = HalfTime.parse(t)
    if u0_class == "local":
        u0 = PhaseVector.local(geometry, x0)
    elif u0_class in ("full", "full-support"):
        u0 = PhaseVector.full_support(geometry)
    else:
        raise ValueError(f"initial class must be 'local' or 'full', got {u0_class!r}")
    seed = _seed_of(rng)
    L = geometry.L

    def reducer(sites: np.ndarray) -> np.ndarray:
        z = (sites == 0).astype(np.int64)
        return (z << np.arange(L, dtype=np.int64)).sum(axis=1)

    if gate_sampler is None:
        dist = _streamed(seed, streams, samples, lambda n, g: sample_outcomes(geometry, u0, t, n, g, reducer))
    else:
        final = evolve_words(gate_sampler(samples), u0.site_array(), geometry.N, t.t2)
        dist = EmpiricalDistribution.from_outcomes(reducer(final), seed=seed)
    tf = float(t)
    window = causal_window(x0, t, L)
    rightmost = set(window[-2:]) if u0_class == "local" and len(window) < L and t.t2 > 0 else set()
    rows = []
    for x in range(L):
        f = sum(c for k, c in dist.counts.items() if (k >> x) & 1) / dist.total
        sig = binomial_sigma(f, dist.total)
        if u0_class == "local" and x in rightmost:
            b, kind = 2 * tf * 2.0 ** (-2 * geometry.N), "rightmost-lightcone"
        elif u0_class != "local":
            b, kind = 16 * tf * 2.0**-geometry.N, "full-support"
        else:
            b, kind = None, "none"
        ok = b is None or below_with_slack(f, b, dist.total)
        rows.append(ZeroSiteRow(x, f, sig, b, kind, ok))
    return ZeroSiteTable(L, geometry.N, t.t2, dist.total, seed, u0_class, rows)


# subsystem ------------------------------------------------------------------------

def _subsystem_region(geometry: ChainGeometry, Ls: int, t: HalfTime, start: int) -> tuple[int, ...]:
    if Ls < 2 or Ls % 2:
        raise ValueError(f"region length must be even and positive, got {Ls}")
    if not t.is_integer:
        raise ValueError("subsystem statistics need an integer time")
    if Ls >= geometry.L or 4 * float(t) > geometry.L - Ls:
        raise ValueError(f"need t <= (L - Ls)/4 = {Fraction(geometry.L - Ls, 4)}, got t={t}")
    return tuple(geometry.canonical(start + i) for i in range(Ls))


def subsystem_check(
    u0: PhaseVector | None,
    Ls: int,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    method: str = "classes",
    start: int = 1,
    streams: int = 1,
) -> ErgodicityReport:
    """Distance of the projection onto sites start..start+Ls-1 to the uniform law (zero included)."""
    t = HalfTime.parse(t)
    if t.t2 == 0:
        raise ValueError("time must be positive")
    u0 = u0 if u0 is not None else PhaseVector.full_support(geometry)
    if any(u0.site(x) == 0 for x in range(geometry.L)):
        raise ValueError("subsystem statistics need an initial vector nonzero on every site")
    region = _subsystem_region(geometry, Ls, t, start)
    Q = UniformReference(geometry, region, True, region)
    main, app = subsystem_bounds(t, geometry, Ls)
    seed = _seed_of(rng)
    l1, extra = _estimate_l1(u0, t, geometry, samples, seed, Q, region, method, streams)
    vacuous, ok = _judge(l1, app, samples)
    extra["main_pass"] = main >= 2 or l1 <= main + SIGMA_LEVEL * l1_sigma(samples)
    return ErgodicityReport("subsystem", geometry.L, geometry.N, t.t2, samples, seed, l1, main, app, vacuous, ok,
                            method, region, streams, extra)


@dataclass
class PhaseReport:
    L: int
    N: int
    t2: int
    samples: int
    seed: int | None
    region: tuple[int, ...]
    distribution: EmpiricalDistribution
    max_probability: float
    bound: float
    vacuous: bool
    passed: bool


def _phase_bits(sites: np.ndarray, region: Sequence[int], refs: Sequence[int]) -> np.ndarray:
    out = np.zeros(sites.shape[0], dtype=np.int64)
    for i, (x, r) in enumerate(zip(region, refs)):
        ref = np.uint64(r)
        sref = ((ref & _EVEN) << np.uint64(1)) | ((ref >> np.uint64(1)) & _EVEN)
        out |= (np.bitwise_count(sites[:, x] & sref).astype(np.int64) & 1) << i
    return out


def phase_statistics(
    u0: PhaseVector | None,
    Ls: int,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    start: int = 1,
    streams: int = 1,
) -> PhaseReport:
    """Joint law of s_x = ⟨u_x^t, u_x^0⟩ on the region; bit i of a key is s at region site i."""
    t = HalfTime.parse(t)
    u0 = u0 if u0 is not None else PhaseVector.full_support(geometry)
    region = _subsystem_region(geometry, Ls, t, start)
    refs = [u0.site(x) for x in region]
    seed = _seed_of(rng)
    dist = _streamed(seed, streams, samples, lambda n, g: sample_outcomes(
        geometry, u0, t, n, g, lambda s: _phase_bits(s, region, refs)))
    bound = 2.0**-Ls + 32 * float(t) * 3.0 ** (Ls / 2 + 1) * 2.0**-geometry.N
    pmax = max(dist.frequencies().values())
    ok = bound >= 1 or below_with_slack(pmax, bound, dist.total)
    return PhaseReport(geometry.L, geometry.N, t.t2, samples, seed, region, dist, pmax, bound, bound >= 1, ok)


@dataclass
class SingleSitePhase:
    N: int
    t2: int
    samples: int
    prob_zero: float
    prob_one: float
    bound: float
    passed: bool


def single_site_phase(
    x0: int,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    word: int = 1,
    streams: int = 1,
) -> SingleSitePhase:
    """Law of ⟨u_x0^t, u_x0^0⟩ for a seed nonzero only at x0, integer t."""
    t = HalfTime.parse(t)
    if not t.is_integer:
        raise ValueError("single-site phase statistics need an integer time")
    u0 = PhaseVector.local(geometry, x0, word)
    x0 = geometry.canonical(x0)
    seed = _seed_of(rng)
    dist = _streamed(seed, streams, samples, lambda n, g: sample_outcomes(
        geometry, u0, t, n, g, lambda s: _phase_bits(s, (x0,), (word,))))
    p0, p1 = dist.frequency(0), dist.frequency(1)
    bound = 0.5 + 8 * float(t) * 2.0**-geometry.N
    ok = all(below_with_slack(p, bound, dist.total) for p in (p0, p1))
    return SingleSitePhase(geometry.N, t.t2, samples, p0, p1, bound, ok)


# twirl symmetry --------------------------------------------------------------------

@dataclass
class TwirlReport:
    statistic: str
    t2: int
    samples: int
    seed: int | None
    max_deviation_sigma: float
    bins: int
    passed: bool
    exact: bool = False


def random_local(geometry: ChainGeometry, rng: np.random.Generator) -> np.ndarray:
    """One uniform single-site symplectic per site, shape (L, 2N)."""
    from .symplectic import sample_words

    return sample_words(geometry.N, geometry.L, rng)


def twirl_invariance_test(
    statistic: str,
    t: HalfTime | str | int,
    geometry: ChainGeometry,
    samples: int,
    rng: np.random.Generator | int | None,
    u0: PhaseVector | None = None,
    dressing: Dressing | None = None,
    region: Sequence[int] | None = None,
    streams: int = 1,
) -> TwirlReport:
    """Compare a statistic of S(t)u0 with the same statistic of the dressed evolution.

    Integer t uses X⁻¹ S(t) X with one fixed local X; half-integer t uses
    Y S(t) X with independent fixed local X, Y. Both runs share the seed, so
    an identity dressing yields identical counts.
    """
    t = HalfTime.parse(t)
    u0 = u0 if u0 is not None else PhaseVector.local(geometry, 0)
    seed = _seed_of(rng)
    if dressing is None:
        g = np.random.default_rng(seed ^ 0x5EED)
        right = random_local(geometry, g)
        left = invert_local(right, geometry.N) if t.is_integer else random_local(geometry, g)
        dressing = Dressing(right=right, left=left)
    if statistic == "transition":
        reg = tuple(region) if region is not None else tuple(range(min(geometry.L, 2)))
        if geometry.site_bits * len(reg) > 16:
            raise ValueError("transition statistic is limited to 16-bit windows")
        reducer = lambda s: region_keys(s, reg, geometry.site_bits).astype(np.int64)
    elif statistic == "zeros":
        L = geometry.L
        reducer = lambda s: ((s == 0).astype(np.int64) << np.arange(L, dtype=np.int64)).sum(axis=1)
    else:
        raise ValueError(f"statistic must be 'transition' or 'zeros', got {statistic!r}")
    plain = _streamed(seed, streams, samples, lambda n, g: sample_outcomes(geometry, u0, t, n, g, reducer))
    dressed = _streamed(seed, streams, samples, lambda n, g: sample_outcomes(geometry, u0, t, n, g, reducer, dressing))
    worst = 0.0
    keys = set(plain.counts) | set(dressed.counts)
    for k in keys:
        p, q = plain.frequency(k), dressed.frequency(k)
        pooled = (plain.counts.get(k, 0) + dressed.counts.get(k, 0)) / (plain.total + dressed.total)
        sd = math.sqrt(pooled * (1 - pooled) * (1 / plain.total + 1 / dressed.total))
        dev = abs(p - q) / sd if sd > 0 else (0.0 if p == q else math.inf)
        worst = max(worst, dev)
    return TwirlReport(statistic, t.t2, samples, seed, worst, len(keys), worst <= SIGMA_LEVEL)


def exact_twirl_invariance(t2: int, right: np.ndarray, left: np.ndarray | None = None) -> bool:
    """Two-site one-qubit ring: dressed and plain transition counts agree exactly.

    ``right``/``left`` are (2, 2) row-word arrays of single-site elements. With
    ``left`` None the dressing is the conjugation X⁻¹ S(t) X.
    """
    x = oracle.local_action((right[0], right[1]))
    if left is None:
        y = np.argsort(x)
    else:
        y = oracle.local_action((left[0], left[1]))
    return bool(np.array_equal(oracle.dressed_counts(t2, y, x), oracle.transition_counts(t2)))
