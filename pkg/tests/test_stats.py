from collections import Counter

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from floquet_clifford.stats import (
    EmpiricalDistribution,
    below_with_slack,
    binomial_sigma,
    merge_all,
    run_streams,
    split_count,
    stream_rngs,
    within_sigma,
)

outcome_lists = st.lists(st.integers(0, 20), min_size=1, max_size=50)


@given(outcome_lists, outcome_lists, outcome_lists)
def test_merge_associative_commutative(a, b, c):
    da, db, dc = (EmpiricalDistribution.from_outcomes(x) for x in (a, b, c))
    left = da.merge(db).merge(dc)
    right = dc.merge(da.merge(db))
    assert left.counts == right.counts == Counter(a + b + c)
    assert left.probability_sum() == 1


@given(st.integers(0, 1000), st.integers(1, 16))
def test_split_count(total, parts):
    chunks = split_count(total, parts)
    assert sum(chunks) == total and len(chunks) == parts
    assert max(chunks) - min(chunks) <= 1


def test_streams_independent_and_reproducible():
    a = [g.integers(0, 2**32) for g in stream_rngs(5, 3)]
    b = [g.integers(0, 2**32) for g in stream_rngs(5, 3)]
    assert a == b and len(set(a)) == 3


def test_run_streams_deterministic():
    def task(n, g):
        return EmpiricalDistribution.from_outcomes(g.integers(0, 4, size=n))

    x = run_streams(task, 1000, 3, 4)
    y = run_streams(task, 1000, 3, 4)
    assert x.counts == y.counts and x.total == 1000


def test_csv_format():
    d = EmpiricalDistribution.from_outcomes(np.array([3, 3, 10]))
    lines = d.to_csv(bits=8).split("\r\n")
    assert lines[0] == "outcome_hex,count,frequency"
    assert lines[1].startswith("03,2,")
    assert merge_all([d, d]).total == 6


def test_sigma_helpers():
    assert binomial_sigma(0.5, 100) == 0.05
    assert within_sigma(0.52, 0.5, 100)
    assert not within_sigma(0.8, 0.5, 100)
    assert below_with_slack(0.6, 0.5, 100)
    assert not below_with_slack(0.9, 0.5, 100)
