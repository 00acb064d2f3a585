from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floquet_clifford.chain import (
    ChainGeometry,
    DisorderRealization,
    HalfTime,
    PhaseVector,
    build_disorder,
    causal_window,
    chain_form,
    evolution_matrix,
    evolve,
    evolve_words,
    half_step_matrix,
    parse_initial,
    parse_pauli,
    sample_gate_words,
    scrambling_time,
    trace_words,
    trajectory,
    unevolve_words,
)
from floquet_clifford.gf2 import BitVector, is_symplectic, symp_form

geometries = st.builds(ChainGeometry, st.integers(1, 4).map(lambda h: 2 * h), st.integers(1, 3))


@st.composite
def chains(draw, max_t2=8):
    g = draw(geometries)
    seed = draw(st.integers(0, 2**32))
    t2 = draw(st.integers(0, max_t2))
    u = draw(st.integers(1, 2**g.dim - 1))
    return g, build_disorder(g, seed), t2, PhaseVector(g, BitVector(u, g.dim))


@pytest.mark.parametrize("text,t2", [("5/2", 5), ("2.5", 5), ("t2=5", 5), ("3", 6), (1, 2), (Fraction(1, 2), 1)])
def test_halftime_parse(text, t2):
    assert HalfTime.parse(text).t2 == t2


@pytest.mark.parametrize("bad", ["1/3", "abc", "-1", "0.25"])
def test_halftime_parse_rejects(bad):
    with pytest.raises(ValueError):
        HalfTime.parse(bad)


def test_halftime_str_and_flags():
    assert str(HalfTime(5)) == "5/2" and str(HalfTime(4)) == "2"
    assert HalfTime(4).is_integer and not HalfTime(3).is_integer


@pytest.mark.parametrize("L,expected", [(2, 2), (4, 2), (6, 4), (8, 4), (12, 6), (14, 8)])
def test_scrambling_time(L, expected):
    assert scrambling_time(L).t2 == expected


def test_geometry_validation():
    for L, N in [(3, 1), (0, 1), (4, 0), (4, 17)]:
        with pytest.raises(ValueError):
            ChainGeometry(L, N)


def test_pauli_roundtrip_and_separators():
    g = ChainGeometry(2, 2)
    u = parse_pauli("XI IZ", g)
    assert u.to_pauli() == "XI IZ"
    assert parse_pauli("XI|IZ", g) == u == parse_pauli("xiiz", g)
    assert u.sites() == [1, 8]
    with pytest.raises(ValueError):
        parse_pauli("XQ IZ", g)
    with pytest.raises(ValueError):
        parse_pauli("XI", g)


def test_parse_initial():
    g = ChainGeometry(4, 1)
    assert parse_initial("local:2", g).support() == frozenset({2})
    assert parse_initial("full", g).support() == frozenset(range(4))
    assert parse_initial("Y I I Z", g).sites() == [3, 0, 0, 2]


def test_realization_json_roundtrip():
    real = build_disorder(ChainGeometry(4, 2), 3)
    back = DisorderRealization.from_json(real.to_json())
    assert back == real and back.seed == 3


def test_identity_realization_is_static():
    g = ChainGeometry(4, 1)
    u = PhaseVector.local(g, 1)
    assert evolve(DisorderRealization.identity(g), u, "7/2") == u


@given(chains())
def test_evolve_matches_dense(case):
    g, real, t2, u = case
    s = evolution_matrix(real, HalfTime(t2))
    assert evolve(real, u, HalfTime(t2)).bits == s @ u.bits
    assert is_symplectic(s, chain_form(g))


@given(chains(max_t2=3))
def test_half_steps_symplectic(case):
    g, real, _, _ = case
    for parity in (0, 1):
        assert is_symplectic(half_step_matrix(real, parity), chain_form(g))


@given(chains(), st.integers(1, 2**12))
def test_evolution_linear_and_form_preserving(case, other):
    g, real, t2, u = case
    v = PhaseVector(g, BitVector(other % (2**g.dim), g.dim))
    t = HalfTime(t2)
    su, sv = evolve(real, u, t), evolve(real, v, t)
    w = PhaseVector(g, u.bits ^ v.bits)
    assert evolve(real, w, t).bits == su.bits ^ sv.bits
    form = chain_form(g)
    assert symp_form(su.bits, sv.bits, form) == symp_form(u.bits, v.bits, form)


@given(chains())
def test_unevolve_inverts(case):
    g, real, t2, u = case
    fwd = evolve_words(real.gate_words[None], u.site_array(), g.N, t2)
    back = unevolve_words(real.gate_words[None], fwd, g.N, t2)
    assert np.array_equal(back[0], u.site_array())


@given(chains(max_t2=12), st.integers(0, 7))
def test_local_seed_stays_in_window(case, x0):
    g, real, t2, _ = case
    x0 %= g.L
    u = PhaseVector.local(g, x0, 3)
    for h, v in enumerate(trajectory(real, u, t2)):
        assert v.support() <= set(causal_window(x0, HalfTime(h), g.L))
        assert not v.is_zero()


def test_causal_window_shapes():
    assert causal_window(4, "1/2", 12) == (4, 5)
    assert causal_window(5, "1/2", 12) == (4, 5)
    assert causal_window(4, 1, 12) == (3, 4, 5, 6)
    assert causal_window(0, "1/2", 12) == (0, 1)
    assert causal_window(0, 1, 12) == (11, 0, 1, 2)
    assert causal_window(0, 3, 12) == tuple(range(12))
    assert causal_window(3, 0, 12) == (3,)


def test_trace_words_records_every_half_step():
    g = ChainGeometry(6, 2)
    words = sample_gate_words(g, 5, np.random.default_rng(0))
    u0 = PhaseVector.local(g, 2).site_array()
    tr = trace_words(words, u0, g.N, 7)
    assert tr.shape == (5, 8, 6)
    for h in range(8):
        assert np.array_equal(tr[:, h], evolve_words(words, u0, g.N, h))


def test_phase_vector_projection():
    g = ChainGeometry(4, 2)
    u = PhaseVector.from_sites(g, [1, 0, 5, 3])
    assert u.project([2, 3]) == 5 | (3 << 4)
    assert u.site(2) == 5 and u.support() == frozenset({0, 2, 3})
