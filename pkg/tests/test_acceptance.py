"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import math
import time
from fractions import Fraction

import brute
import numpy as np
import pytest

from floquet_clifford import oracle
from floquet_clifford.chain import (
    ChainGeometry,
    DisorderRealization,
    HalfTime,
    PhaseVector,
    build_disorder,
    causal_window,
    sample_gate_words,
    scrambling_time,
    trace_words,
)
from floquet_clifford.designcheck import advantage_estimate, support_representatives
from floquet_clifford.ergodicity import (
    conditional_nonzero_law,
    exact_twirl_invariance,
    l1_sigma,
    transition_histogram,
    zero_site_stats,
)
from floquet_clifford.gf2 import BitMatrix, SymplecticForm, is_symplectic
from floquet_clifford.stats import SIGMA_LEVEL, binomial_sigma
from floquet_clifford.symplectic import (
    all_elements,
    block_rank_histogram,
    blocks,
    exact_block_rank_distribution,
    group_order,
    single_rank_bound,
)
from floquet_clifford.walls import (
    WallReport,
    confinement_test,
    counterexample_fixture,
    exact_qubit_wall_counts,
    is_right_wall,
    product_form_mask,
    product_form_probability,
    product_form_window,
    qubit_wall_pair,
    right_wall_mask,
    right_wall_mask_n1,
    scan_chain,
    wall_probability,
)


@pytest.fixture
def verdict(capsys):
    start = time.perf_counter()

    def report(number, title, ok, detail, limit):
        elapsed = time.perf_counter() - start
        ok = bool(ok) and elapsed < limit
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail} ({elapsed:.1f}s / {limit:.0f}s)")
        assert ok, detail

    return report


def test_c01_group_orders(verdict):
    brute_1 = len(brute.symplectic_group(1))
    brute_2 = len(brute.symplectic_group(2))
    ok = group_order(1) == brute_1 == 6 and group_order(2) == brute_2 == 720
    verdict(1, "group orders", ok, f"|Sp(2)|={int(group_order(1))} vs {brute_1}, |Sp(4)|={int(group_order(2))} vs {brute_2}", 10)


def test_c02_uniform_output(verdict):
    elems = all_elements(1)
    laws = {}
    for u in range(1, 4):
        images = [int(sum(((bin(int(row) & u).count("1") & 1) << i) for i, row in enumerate(s))) for s in elems]
        laws[u] = {v: Fraction(images.count(v), len(elems)) for v in range(1, 4)}
    ok = all(p == Fraction(1, 3) for law in laws.values() for p in law.values())
    frozen = brute.load()["single_qubit_images"]
    ok = ok and all(frozen[str(u)] == [0, 2, 2, 2] for u in range(1, 4))
    verdict(2, "uniform output at n=1", ok, "prob{u'=Su} = 1/3 for every nonzero u, u'", 1)


def test_c03_wall_probability_one_mode(verdict):
    counts = exact_qubit_wall_counts()
    exact = counts.right_probability
    samples = 10**6
    rep = wall_probability(1, samples, 20240601)
    sigma = binomial_sigma(float(exact), samples)
    mc_ok = abs(rep.frequency - float(exact)) <= SIGMA_LEVEL * sigma
    ok = round(float(exact), 2) == 0.12 and mc_ok and counts.right == brute.load()["wall_counts"]["full"]
    verdict(3, "wall probability N=1", ok, f"exact {exact} = {float(exact):.4f}; MC {rep.frequency:.5f} ± {sigma:.5f}", 300)


def test_c04_product_form_probability(verdict):
    elems = np.array(all_elements(2))
    freq = Fraction(int(product_form_mask(elems, 1).sum()), len(elems))
    formula = Fraction(int(group_order(1)) ** 2, int(group_order(2)))
    lo, hi = product_form_window(1)
    ok = freq == formula == Fraction(36, 720) == product_form_probability(1) and lo <= freq <= hi
    verdict(4, "product-form probability", ok, f"{freq} in [{lo}, {hi}]", 60)


def test_c05_counterexample_fixture(verdict):
    s0, s1 = counterexample_fixture()
    v0, v1 = blocks(s0), blocks(s1)
    step = v0.D @ v1.A
    checks = {
        "symplectic": all(is_symplectic(s.m, SymplecticForm(4)) for s in (s0, s1)),
        "C1C0=0": (v1.C @ v0.C).is_zero(),
        "C1(D0A1)C0=0": (v1.C @ step @ v0.C).is_zero(),
        "C1(D0A1)^2C0!=0": not (v1.C @ step @ step @ v0.C).is_zero(),
        "(D0A1)^2=J": step**2 == SymplecticForm(2).J,
        "(D0A1)^4=I": step**4 == BitMatrix.identity(4),
    }
    failed = [k for k, v in checks.items() if not v]
    verdict(5, "counterexample fixture", not failed, "all identities hold" if not failed else f"failed {failed}", 1)


def test_c06_one_mode_wall_equivalence(verdict):
    elems = np.array(all_elements(2))
    m = len(elems)
    s0 = np.repeat(elems, m, axis=0)
    s1 = np.tile(elems, (m, 1))
    full = right_wall_mask(s0, s1, 1)
    two = right_wall_mask_n1(s0, s1)
    agree = int((full == two).sum())
    verdict(6, "N=1 wall-condition equivalence", agree == m * m, f"{agree}/{m * m} pairs agree, {int(full.sum())} walls", 300)


def test_c07_causality(verdict):
    L = 12
    rng = np.random.default_rng(7)
    tscr = scrambling_time(L).t2
    violations = 0
    for N in (1, 2, 3):
        g = ChainGeometry(L, N)
        gates = sample_gate_words(g, 1000, rng)
        x0 = rng.integers(0, L, size=1000)
        u0 = np.zeros((1000, L), dtype=np.uint64)
        u0[np.arange(1000), x0] = rng.integers(1, 1 << g.site_bits, size=1000, dtype=np.uint64)
        tr = trace_words(gates, u0, N, tscr - 1)
        for x in range(L):
            sel = x0 == x
            for h in range(tscr):
                outside = np.setdiff1d(np.arange(L), causal_window(x, HalfTime(h), L))
                violations += int((tr[sel, h][:, outside] != 0).sum())
    verdict(7, "causality before scrambling", violations == 0,
            f"3000 realizations, t2 < {tscr}, {violations} out-of-window site hits", 60)


def test_c08_exact_oracle_ergodicity(verdict):
    g = ChainGeometry(2, 1)
    u0 = PhaseVector.local(g, 0)
    samples = 10**5
    worst = 0.0
    ok = True
    for t2 in range(1, 7):
        P = transition_histogram(u0, HalfTime(t2), g, samples, 1000 + t2)
        law = oracle.transition_law(1, t2)
        for v in range(16):
            p = float(law.get(v, 0))
            f = P.frequency(v)
            sigma = binomial_sigma(p, samples)
            if sigma == 0:
                ok &= f == p
            else:
                worst = max(worst, abs(f - p) / sigma)
    ok &= worst <= SIGMA_LEVEL
    tscr = scrambling_time(2).t2
    half = [t2 for t2 in range(tscr, 2 * tscr + 2) if t2 % 2]
    uniform = all(
        set(conditional_nonzero_law(u, t2).values()) == {Fraction(1, 9)} and len(conditional_nonzero_law(u, t2)) == 9
        for u in range(1, 16) for t2 in half
    )
    verdict(8, "exact-oracle ergodicity", ok and uniform,
            f"max deviation {worst:.2f} sigma over t2=1..6; conditional law 1/9 exact at t2 in {half}", 600)


def test_c09_zero_site_statistic(verdict):
    g = ChainGeometry(2, 1)
    samples = 10**5
    table = zero_site_stats("local", "1/2", g, samples, 99)
    f = table.frequency(1)
    exact = oracle.zero_probabilities(1, 1)[1]
    sigma = binomial_sigma(0.2, samples)
    ok = exact == Fraction(3, 15) and abs(f - 0.2) <= SIGMA_LEVEL * sigma
    verdict(9, "zero-site statistic", ok, f"exact {exact}, MC {f:.5f} ± {sigma:.5f}", 60)


def test_c10_rank_decay_bounds(verdict):
    law = exact_block_rank_distribution("C")
    exact_ok = all(
        sum((p for r, p in law.items() if r <= 2 - k), Fraction(0)) <= single_rank_bound(1, k) for k in range(3)
    )
    sampled = {n: block_rank_histogram(n, "C", 10**5, 500 + n) for n in (2, 4, 6)}
    mc_ok = all(rep.passed for rep in sampled.values())
    tails = {n: [f"{t.frequency:.4f}<={t.bound:.4f}" for t in rep.tails[1:4]] for n, rep in sampled.items()}
    verdict(10, "rank-decay bounds", exact_ok and mc_ok, f"exact n=1 { {r: str(p) for r, p in law.items()} }; sampled tails {tails}", 300)


def test_c11_monotone_pseudorandomness(verdict):
    L = 4
    t = HalfTime(scrambling_time(L).t2 + 1)
    samples = 2 * 10**5
    values = {}
    for N in (1, 2, 3):
        g = ChainGeometry(L, N)
        values[N] = advantage_estimate(g, t, support_representatives(g), samples=samples, rng=11 + N).worst_l1
    slack = SIGMA_LEVEL * math.sqrt(2) * l1_sigma(samples)
    ok = values[1] - values[2] > slack and values[2] - values[3] > slack
    detail = ", ".join(f"N={N}: {v:.5f}" for N, v in values.items())
    verdict(11, "monotone pseudo-randomness", ok, f"worst_l1 at t={t} ({detail}); gap slack {slack:.4f}", 1800)


def test_c12_confinement(verdict):
    L = 8
    rng = np.random.default_rng(12)
    checked = 0
    failures = []
    chains = [build_disorder(ChainGeometry(L, 1), int(s)) for s in rng.integers(0, 2**31, size=12)]
    s0, s1 = qubit_wall_pair()
    chains.append(build_disorder(ChainGeometry(L, 1), 3).with_gate(4, s0).with_gate(5, s1))
    chains += [build_disorder(ChainGeometry(L, 2), int(s)) for s in rng.integers(0, 2**31, size=4)]
    for real in chains:
        for wall in scan_chain(real):
            res = confinement_test(real, wall, 6 * L, 100, rng)
            checked += 1
            if not res.passed:
                failures.append((wall, res.first_violation))
    c0, c1 = counterexample_fixture()
    g2 = ChainGeometry(4, 2)
    fixture_chain = DisorderRealization.identity(g2).with_gate(0, c0).with_gate(1, c1)
    leak = confinement_test(fixture_chain, WallReport(0, "right", 1), 6 * g2.L, 100, rng)
    ok = checked > 0 and not failures and not leak.passed and not is_right_wall(c0, c1)
    verdict(12, "confinement", ok,
            f"{checked} detected walls confined to t2={6 * L}; fixture leaks in {leak.violations}/100 trials, first at t2={leak.first_violation[1]}",
            300)


def test_c13_twirl_symmetry(verdict):
    elems = all_elements(1)
    fixed = np.array([elems[3], elems[5]])
    exact_fixed = all(exact_twirl_invariance(t2, fixed) for t2 in (2, 4, 6))
    every = all(
        exact_twirl_invariance(t2, np.array([elems[i], elems[j]])) for t2 in (2, 4, 6) for i in range(6) for j in range(6)
    )
    verdict(13, "twirl symmetry", exact_fixed and every,
            "enumerated laws at t=1,2,3 unchanged under X^-1 S(t) X for all 36 local X", 120)
