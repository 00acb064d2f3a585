"""Counted outcomes, binomial error bars and deterministic parallel streams."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

SIGMA_LEVEL = 4.0


def stream_rngs(seed: int, streams: int) -> list[np.random.Generator]:
    """Independent generators derived from (seed, stream index)."""
    if streams < 1:
        raise ValueError(f"streams must be positive, got {streams}")
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(streams)]


def split_count(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


def kernel_seed(rng: np.random.Generator) -> int:
    """One 64-bit seed for the compiled sampler, drawn from a numpy generator."""
    return int(rng.integers(0, 2**64, dtype=np.uint64))


def binomial_sigma(p: float, samples: int) -> float:
    if samples <= 0:
        return math.inf
    p = min(max(float(p), 0.0), 1.0)
    return math.sqrt(p * (1.0 - p) / samples)


def within_sigma(observed: float, expected: float, samples: int, level: float = SIGMA_LEVEL) -> bool:
    """|observed - expected| within ``level`` binomial standard errors of ``expected``."""
    return abs(observed - float(expected)) <= level * binomial_sigma(expected, samples) + 1e-12


def below_with_slack(observed: float, bound: float, samples: int, level: float = SIGMA_LEVEL) -> bool:
    """observed <= bound + level*sigma, sigma taken at the observed frequency."""
    sigma = binomial_sigma(observed, samples)
    return observed <= float(bound) + level * max(sigma, 1.0 / samples) + 1e-12


@dataclass
class EmpiricalDistribution:
    """Outcome counts. Outcomes are non-negative integers (bit patterns)."""

    counts: Counter = field(default_factory=Counter)
    total: int = 0
    seed: int | None = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_outcomes(cls, outcomes: Iterable[int] | np.ndarray, **kwargs) -> "EmpiricalDistribution":
        if isinstance(outcomes, np.ndarray):
            keys, cnt = np.unique(outcomes, return_counts=True)
            counts = Counter({int(k): int(c) for k, c in zip(keys.tolist(), cnt.tolist())})
        else:
            counts = Counter(int(o) for o in outcomes)
        return cls(counts=counts, total=sum(counts.values()), **kwargs)

    def merge(self, other: "EmpiricalDistribution") -> "EmpiricalDistribution":
        counts = Counter(self.counts)
        counts.update(other.counts)
        return EmpiricalDistribution(counts, self.total + other.total, self.seed, dict(self.metadata))

    def frequency(self, outcome: int) -> float:
        return self.counts.get(outcome, 0) / self.total if self.total else 0.0

    def exact_frequency(self, outcome: int) -> Fraction:
        return Fraction(self.counts.get(outcome, 0), self.total)

    def frequencies(self) -> dict[int, float]:
        return {k: c / self.total for k, c in sorted(self.counts.items())}

    def probability_sum(self) -> Fraction:
        return Fraction(sum(self.counts.values()), self.total)

    def sigma(self, outcome: int) -> float:
        return binomial_sigma(self.frequency(outcome), self.total)

    @staticmethod
    def key_bytes(outcome: int, bits: int) -> bytes:
        return int(outcome).to_bytes(max(1, (bits + 7) // 8), "little")

    def to_csv(self, bits: int | None = None) -> str:
        width = max(1, ((bits or max(self.counts, default=0).bit_length()) + 3) // 4)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["outcome_hex", "count", "frequency"])
        for k, c in sorted(self.counts.items()):
            writer.writerow([f"{k:0{width}x}", c, repr(c / self.total)])
        return buf.getvalue()


def merge_all(parts: Iterable[EmpiricalDistribution], seed: int | None = None) -> EmpiricalDistribution:
    out = EmpiricalDistribution(seed=seed)
    for p in parts:
        out.counts.update(p.counts)
        out.total += p.total
        out.metadata.update(p.metadata)
    return out


def run_streams(
    task: Callable[[int, np.random.Generator], EmpiricalDistribution],
    samples: int,
    seed: int,
    streams: int = 1,
    workers: int | None = None,
) -> EmpiricalDistribution:
    """Split ``samples`` over ``streams`` generators and merge the counts.

    The result depends only on (seed, streams); ``workers`` changes scheduling only.
    """
    rngs = stream_rngs(seed, streams)
    sizes = split_count(samples, streams)
    jobs = [(n, r) for n, r in zip(sizes, rngs) if n > 0]
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: task(*job), jobs))
    else:
        parts = [task(n, r) for n, r in jobs]
    merged = merge_all(parts, seed=seed)
    merged.metadata["streams"] = streams
    return merged


def l1_from_mass(observed: Mapping[int, float], reference: Callable[[int], Fraction | float], total_reference_mass: float = 1.0) -> float:
    """Σ|P-Q| over the support when Q outside ``observed`` is never summed explicitly."""
    acc = 0.0
    seen_q = 0.0
    for k, p in observed.items():
        q = float(reference(k))
        acc += abs(p - q)
        seen_q += q
    return acc + max(0.0, total_reference_mass - seen_q)
