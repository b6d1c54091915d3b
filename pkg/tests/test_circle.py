import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from quartlab import circle, weyl
from quartlab.errors import BudgetExceeded
from quartlab.params import Parameters, choose_parameters

TINY = Parameters(4, 4, 4, 4, 2)
TUP = (4, 4, 4, 4, 2)


@pytest.mark.parametrize("n,expected", [(499, 4), (324, 1), (500, 4), (100, 0), (2000, 0)])
def test_R_grid(n, expected):
    res = circle.integral_R(TINY, None, n)
    assert abs(res.value - expected) < 1e-9
    assert oracles.R(n, TUP) == expected


def test_nyquist_doubling():
    f = circle.R_factors(TINY)
    M = circle.grid_size(f, 499)
    a = circle.fourier_coefficient(f, 499, M=M).value
    b = circle.fourier_coefficient(f, 499, M=2 * M).value
    assert abs(a - b) < 1e-9 and round(a.real) == round(b.real) == 4
    with pytest.raises(BudgetExceeded):
        circle.fourier_coefficient(f, 499, M=16)
    with pytest.raises(BudgetExceeded):
        circle.grid_values(f, 2 ** 30)


def test_S_T_against_loops():
    assert round(circle.integral_S(TINY).value.real) == circle.count_S(TINY) == oracles.S(TUP) == 140
    assert round(circle.integral_T(TINY).value.real) == circle.count_T(TINY) == oracles.T(TUP) == 30
    P = Parameters(6, 5, 4, 3.5, 3)
    tup = (6, 5, 4, 3.5, 3)
    for j in (1, 2, 3):
        assert circle.count_S(P, j) == oracles.S(tup, j)
        assert circle.count_T(P, j) == oracles.T(tup, j)
        assert abs(circle.integral_T(P, None, j).value - circle.count_T(P, j)) < 1e-6


def test_U_closed_form():
    P = Parameters(3, 3, 3, 3, 2.5)
    for n in (200, 230, 260):
        v = circle.integral_U(P, None, n).value.real
        assert v == pytest.approx(oracles.U(n, (3, 3, 3, 3, 2.5)), rel=1e-9)


def test_arc_measures_and_disjointness():
    P = choose_parameters(2 ** 24, "13/50")
    for j in (1, 2, 3):
        part = circle.build_arcs(j, P)
        assert part.total_measure() == 1
        assert part.disjoint()
        assert part.major.measure() == circle.major_measure(j, P)
        assert circle.check_disjointness_inequality(j, P)


def test_j1_annulus():
    P = choose_parameters(2 ** 24, "13/50")
    part = circle.build_arcs(1, P)
    inner = Fraction(1, 8) / Fraction(P.P2) ** 3
    assert not part.central.contains(inner / 2)
    assert part.inner.contains(inner / 2)
    assert str(circle.classify_alpha(inner / 2, 1, P)) == "A(2,0)"


def test_classify_examples():
    P = choose_parameters(2 ** 24, "13/50")
    assert str(circle.classify_alpha(0, 2, P)) == "central"
    lab = circle.classify_alpha(Fraction(1, 2), 2, P)
    assert lab.piece == "major" and lab.q == 2
    assert circle.classify_alpha(math.sqrt(2) - 1 + 1e-3, 3, P).piece in ("minor", "major")
    far = Fraction(1, 2) + 3 * circle.major_radius(2, P)
    assert circle.classify_alpha(far, 2, P).piece != "central"


@settings(max_examples=200, deadline=None)
@given(st.fractions(0, 1, max_denominator=10 ** 6), st.sampled_from([1, 2, 3]))
def test_classify_consistent_with_partition(a, j):
    P = choose_parameters(2 ** 20, "13/50")
    part = circle.build_arcs(j, P)
    lab = circle.classify_alpha(a, j, P)
    sets = {"central": part.central, "major": part.major, "minor": part.minor}
    if lab.piece == "A(2,0)":
        assert part.inner.contains(a)
    else:
        assert sets[lab.piece].contains(a)


def test_arc_validation():
    with pytest.raises(ValueError):
        circle.Arc(4, 2, Fraction(1, 100))
    with pytest.raises(ValueError):
        circle.Arc(3, 1, Fraction(0))
    assert circle.Arc(1, 0, Fraction(1, 10)).intervals() == [(0, Fraction(1, 10)), (Fraction(9, 10), 1)]
    assert circle.euler_phi(12) == 4 and circle.euler_phi(97) == 96


def test_restricted_integrals():
    A0, A1 = circle.A_set(1, 0, TINY), circle.A_set(1, 1, TINY)
    s1 = circle.integral_S(TINY, A1)
    s0 = circle.integral_S(TINY, A0)
    assert s1.converged and s0.converged
    assert abs(s0.value + s1.value - 140) < 1e-6
    spec = circle.integral_S(TINY, A1, method="spectral")
    assert abs(spec.value - s1.value) < 1e-6


def test_spectral_vs_extended_precision():
    M, c = circle.grid_coefficients(circle.abs2(circle.Factor("f", 6)))
    coeffs = {m: round(c[m % M].real) for m in range(-1296, 1297) if abs(c[m % M]) > 0.5}
    lo, hi = Fraction(1, 7), Fraction(2, 7)
    got = circle.integrate_spectral(coeffs, [(lo, hi)])
    assert abs(got - oracles.interval_integral(coeffs, lo, hi)) < 1e-12


def test_VW_identity():
    # premise 4 P2^4 < (1/2 - 1/16) P1^4 holds for these values
    P = Parameters(12, 6.6, 4.5, 4.5, 2)
    V = circle.integral_V(P).value.real
    W = circle.integral_W(P).value.real
    rhs = P.Y ** 2 * weyl.count_r(0, P.P1) * weyl.rho_table(P)(0)
    assert V - 2 * W == pytest.approx(rhs, rel=1e-9)


def test_diagonal_lower_bound():
    for P in (TINY, Parameters(6, 5, 4, 3.5, 3)):
        for j in (1, 2, 3, 4):
            assert circle.count_S(P, j) >= circle.count_diagonal(P, j)


def test_integrate_panels_polynomial():
    val, err, panels, ok = circle.integrate_panels(lambda a: np.exp(2j * np.pi * 3 * a), [(0.0, 0.25)])
    assert abs(val - (np.exp(1.5j * np.pi) - 1) / (6j * np.pi)) < 1e-12 and ok
