import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from quartlab import enumeration as en
from quartlab.errors import BudgetExceeded


def test_stream_small():
    assert list(en.enumerate_representable(100)) == [4, 19, 34, 49, 64, 84, 99]
    assert list(en.enumerate_representable(4)) == [4]
    assert list(en.enumerate_representable(3)) == []


@pytest.mark.parametrize("limit", [4, 50, 1000, 20000, 100000])
def test_stream_matches_oracle(limit):
    assert en.representable_array(limit).tolist() == oracles.representable(limit)


@pytest.mark.parametrize("window", [1, 7, 1000, 65536])
def test_windowed_equals_bitmap(window):
    full = en.representable_array(300000)
    assert np.array_equal(en.representable_array(300000, window=window if window > 1 else 97), full)


def test_threads_do_not_change_stream():
    assert np.array_equal(en.representable_array(10 ** 6, threads=4), en.representable_array(10 ** 6))


def test_gap_report():
    rep = en.gap_statistics(100)
    assert rep.max_gap == 20 and rep.max_gap_location == 84 and rep.count == 7
    rep = en.gap_statistics(4)
    assert rep.max_gap == 0 and rep.count == 1


def test_gap_histogram_consistency():
    rep = en.gap_statistics(10 ** 6, window=12345)
    assert sum(g * c for g, c in rep.histogram.items()) + rep.smallest == rep.largest <= 10 ** 6
    assert rep.count == sum(rep.histogram.values()) + 1
    assert rep.to_record() == en.gap_statistics(10 ** 6).to_record()


def test_kprime_examples():
    # 64, 84, 99 are the only sums in (50, 100], so 47 values are empty
    assert en.count_empty_intervals(100, 1) == 47 == oracles.kprime(100, 1)
    assert en.count_empty_intervals(8, 8) == 0
    assert en.count_empty_intervals(200, 100) == 0


@pytest.mark.parametrize("N,Y", [(500, 1), (500, 7.5), (1000, 20), (3000, 33), (2000, 1.0001)])
def test_kprime_oracle(N, Y):
    assert en.count_empty_intervals(N, Y) == oracles.kprime(N, Y)


@settings(max_examples=20, deadline=None)
@given(st.integers(8, 5000), st.floats(1, 200), st.floats(1, 200))
def test_kprime_monotone_in_Y(N, Y1, Y2):
    a, b = sorted((Y1, Y2))
    assert en.count_empty_intervals(N, b) <= en.count_empty_intervals(N, a)


def test_kgamma():
    assert en.count_empty_intervals_gamma(4, 0.5) == 3
    assert en.count_empty_intervals_gamma(1000, 1.0) == 3
    assert en.count_empty_intervals_gamma(1000, 0.3) == oracles.kgamma(1000, 0.3)


@pytest.mark.parametrize("N,g,gp", [(10 ** 5, 0.4, 0.3), (10 ** 6, 0.3, 0.26), (2 * 10 ** 5, 0.5, 0.45)])
def test_dyadic_bound(N, g, gp):
    bound, N0 = en.dyadic_bound(N, g, gp)
    assert en.count_empty_intervals_gamma(N, g) <= bound


def test_iroot4_exhaustive():
    n = np.arange(0, 10 ** 6, dtype=np.int64)
    x = en.iroot4_array(n)
    assert np.all(x ** 4 <= n) and np.all((x + 1) ** 4 > n)


@given(st.integers(0, 2 ** 128))
def test_iroot4_big(n):
    x = en.iroot4(n)
    assert x ** 4 <= n < (x + 1) ** 4


@given(st.integers(0, 2 ** 62 - 1))
def test_iroot4_array_matches(n):
    assert int(en.iroot4_array(np.array([n]))[0]) == en.iroot4(n)


def test_greedy_examples():
    g = en.greedy_approx(10 ** 6)
    assert g.x == (31, 16, 10, 5) and g.remainder == 318
    assert en.greedy_approx(4).x == (1, 1, 1, 1)
    g = en.greedy_approx(2)
    assert g.x == (1, 1, 0, 0) and g.remainder == 0
    with pytest.raises(ValueError):
        en.greedy_approx(0)


@given(st.integers(1, 2 ** 128))
def test_greedy_invariants(n):
    g = en.greedy_approx(n)
    assert n == sum(x ** 4 for x in g.x) + g.remainder
    assert g.remainder >= 0
    assert list(g.x) == sorted(g.x, reverse=True)
    prev = n
    for x, rem in zip(g.x, g.remainders):
        assert rem <= 4 * prev ** 0.75 + 1
        prev = rem
    assert (g.x, g.remainder) == oracles.greedy(n)


def test_budget_error():
    with pytest.raises(BudgetExceeded):
        next(en.iter_windows(2 ** 62))
