import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from quartlab import weyl
from quartlab.errors import BudgetExceeded
from quartlab.params import Parameters, TorusPoint


def test_ranges():
    assert weyl.x_range(8).lattice().tolist() == [5, 6, 7, 8]
    assert weyl.x_range(6.6).lattice().tolist() == [4, 5, 6]
    assert weyl.y_range(2).lattice().tolist() == [0, 1]
    assert weyl.y_range(2.5).lattice().tolist() == [0, 1, 2]
    assert weyl.z_range(2).lattice().tolist() == list(range(2, 17))
    with pytest.raises(ValueError):
        weyl.RangeSpec(3, 3)


@given(st.fractions(-100, 100), st.fractions(0, 100))
def test_range_count(lo, width):
    if width == 0:
        return
    r = weyl.RangeSpec(lo, lo + width)
    assert r.count == math.floor(lo + width) - math.floor(lo)


def test_f_examples():
    assert weyl.weyl_f(0, 8) == 4
    assert weyl.weyl_f(Fraction(1, 2), 2) == 1
    assert abs(weyl.weyl_f(0.1, 4) - oracles.weyl_f(0.1, 4)) < 1e-12
    with pytest.raises(ValueError):
        weyl.weyl_f(0, 1.5)


def test_g_examples():
    assert weyl.weyl_g(0, 5) == 5
    assert abs(weyl.weyl_g(Fraction(1, 2), 4)) < 1e-15
    assert abs(weyl.weyl_g(Fraction(1, 3), 3)) < 1e-15
    with pytest.raises(ValueError):
        weyl.weyl_g(0, 0.5)


def test_nu_examples():
    # 15 terms z = 2..16; the sum is 0.905181..., not 0.94039
    v = weyl.mollified_nu(0, 2)
    assert v.real == pytest.approx(oracles.nu(0, 2).real, rel=1e-14)
    assert v.real == pytest.approx(0.905181621134385, rel=1e-12)
    for X in (8, 16, 32):
        assert abs(weyl.mollified_nu(0, X) - X / 2) < 1
    with pytest.raises(BudgetExceeded):
        weyl.mollified_nu(np.linspace(0, 1, 100), 64, budget=10 ** 8)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1))
def test_nu_triangle(a):
    assert abs(weyl.mollified_nu(a, 6)) <= weyl.mollified_nu(0, 6).real + 1e-12


def test_H_examples():
    # h = 1: x in {5, 6, 7}; h = 2: x in {5, 6}
    assert weyl.diff_sum_H(0, 8, 2) == 5
    assert weyl.diff_sum_H(0.3, 8, 0) == 0
    assert abs(weyl.diff_sum_H(0.37, 8, 2) - oracles.diff_H(0.37, 8, 2)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10 ** 6), st.integers(2, 10 ** 6), st.sampled_from([4, 7.5, 13, 40]))
def test_sums_vs_oracle_rational(a, q, X):
    alpha = Fraction(a % q, q)
    assert abs(weyl.weyl_f(alpha, X) - oracles.weyl_f(alpha, X)) < 1e-11
    assert abs(weyl.weyl_g(alpha, X) - oracles.weyl_g(alpha, X)) < 1e-11
    assert abs(weyl.diff_sum_H(alpha, X, 3) - oracles.diff_H(alpha, X, 3)) < 1e-11


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.sampled_from([4, 9, 40, 300]))
def test_sums_vs_oracle_float(alpha, X):
    assert abs(weyl.weyl_f(alpha, X) - oracles.weyl_f(alpha, X)) < 1e-10
    assert abs(weyl.weyl_g(alpha, X) - oracles.weyl_g(alpha, X)) < 1e-10


@given(st.floats(0, 1), st.lists(st.integers(0, 2 ** 50 - 1), min_size=1, max_size=20))
def test_float_phases_exact(alpha, vals):
    ph = weyl.phases(alpha, np.array(vals))
    exact = [(Fraction(alpha) * v) % 1 for v in vals]
    for p, e in zip(ph, exact):
        d = abs(p - float(e))
        assert min(d, 1 - d) < 1e-15


@given(st.fractions(0, 1, max_denominator=10 ** 12), st.lists(st.integers(0, 2 ** 62), min_size=1, max_size=10))
def test_rational_phases_exact(alpha, vals):
    ph = weyl.phases(alpha, np.array(vals, dtype=np.int64))
    for p, v in zip(ph, vals):
        assert p == pytest.approx(float((alpha * v) % 1), abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1))
def test_conjugate_symmetry(a):
    for fn, arg in ((weyl.weyl_f, 12), (weyl.weyl_g, 9.5), (weyl.mollified_nu, 4)):
        tol = 1e-12 * 200
        assert abs(fn(1 - a, arg) - np.conj(fn(a, arg))) < tol
    assert abs(weyl.diff_sum_H(1 - a, 12, 3) - np.conj(weyl.diff_sum_H(a, 12, 3))) < 1e-10


def test_vectorised_matches_scalar():
    a = np.linspace(0, 1, 37)
    v = weyl.weyl_f(a, 20)
    assert np.array_equal(v, np.array([weyl.weyl_f(float(t), 20) for t in a]))
    assert weyl.weyl_f(TorusPoint(0.25), 20) == weyl.weyl_f(0.25, 20)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-9, 1 - 1e-9), st.floats(1, 500))
def test_g_bound(a, Y):
    g = abs(weyl.weyl_g(a, Y))
    d = min(a, 1 - a)
    assert g * 2 * d <= 1 + 1e-9
    assert g <= weyl.y_range(Y).count + 1e-9


def test_count_r():
    assert weyl.count_r(0, 8) == 4
    assert weyl.count_r(671, 8) == 1
    assert weyl.count_r(1, 8) == 0
    table = weyl.r_table(8)
    assert table[671] == 1 and table[-671] == 1


@pytest.mark.parametrize("X", [4, 8, 11.5, 16])
def test_r_laws(X):
    t = weyl.r_table(X)
    c = weyl.x_range(X).count
    assert sum(t.values()) == c * c
    for n, m in t.items():
        assert t[-n] == m
        assert n == 0 or abs(n) > X ** 3 / 2
        assert m == oracles.r(n, X)


def test_r_prime():
    P = Parameters(12, 6.6, 4.5, 4.5, 2)
    t = weyl.r_prime_table(P)
    for n in list(t)[:50]:
        assert t[n] == oracles.r_prime(n, 12, 6.6)
        assert n > 12 ** 3 / 2 and n <= 15 / 16 * 12 ** 4
    assert weyl.count_r_prime(0, P) == 0
    assert sum(t.values()) == weyl.diff_sum_H(0, P.P1, P.h_bound(1)).real


def test_rho():
    P = Parameters(2, 2, 2, 2, 1)
    tab = weyl.rho_table(P)
    assert tab(0) == pytest.approx(oracles.rho(0, 2, 2, 2), rel=1e-12)
    assert tab(7) == pytest.approx(oracles.rho(7, 2, 2, 2), rel=1e-12)
    for n in range(-tab.span, tab.span + 1):
        assert tab(n) == tab(-n)
    assert weyl.count_rho(3 * 16 + 1, P) == 0
    with pytest.raises(BudgetExceeded):
        weyl.rho_table(Parameters(200, 200, 200, 200, 1))


def test_weyl_H_envelope_shape():
    assert weyl.weyl_H_envelope(16, 2, 1) > weyl.weyl_H_envelope(16, 2, 7)
