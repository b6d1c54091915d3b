import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quartlab.params import (CONSTANTS, EXPONENTS, GAMMA0, GAMMA1, Constants, Parameters, TorusPoint,
                             choose_parameters, format_rational, gamma0_general, parse_rational,
                             schedule_exponents, torus_distance, torus_distance_exact)


def test_gamma0_values():
    assert gamma0_general(4, 4) == Fraction(4059, 16384) == GAMMA0
    assert gamma0_general(3, 3) == Fraction(17, 108)


@pytest.mark.parametrize("k", [3, 4, 5, 9])
def test_gamma0_single_term(k):
    assert gamma0_general(1, k) == 1 - Fraction(1, k)


def test_gamma0_rejects():
    with pytest.raises(ValueError):
        gamma0_general(4, 2)
    with pytest.raises(ValueError):
        gamma0_general(0, 4)


@given(st.integers(1, 12), st.integers(3, 8))
def test_gamma0_decreasing_in_h(h, k):
    assert gamma0_general(h + 1, k) < gamma0_general(h, k)


def test_complement_identity():
    assert gamma0_general(4, 4) + Fraction(12325, 16384) == 1
    assert 1 - GAMMA0 == sum(EXPONENTS) / 4


def test_schedule_is_geometric():
    assert schedule_exponents() == list(EXPONENTS)
    for a, b in zip(EXPONENTS, EXPONENTS[1:]):
        assert b / a == Fraction(13, 16)


def test_constants():
    assert CONSTANTS.c_16 == CONSTANTS.c_half ** 4
    with pytest.raises(ValueError):
        Constants(c_16=Fraction(1, 8))


def test_choose_parameters_2_32():
    P = choose_parameters(2 ** 32, Fraction(1, 4))
    assert P.P1 == pytest.approx(256, rel=1e-14)
    assert P.P2 == pytest.approx(2 ** 6.5, rel=1e-12)
    assert P.P3 == pytest.approx(2 ** (2704 / 512), rel=1e-12)
    # 2^(8*2197/4096) is 19.5760...; the often-quoted 19.562 is a misprint
    assert P.P4 == pytest.approx(2 ** (8 * 2197 / 4096), rel=1e-12)
    assert P.P4 == pytest.approx(19.5760, abs=1e-4)
    assert P.Y == pytest.approx(256, rel=1e-14)
    for j in range(3):
        assert P.P[j + 1] == pytest.approx(P.P[j] ** (13 / 16), rel=1e-12)


def test_choose_parameters_small():
    P = choose_parameters(16, Fraction(1, 4))
    assert P.P1 == pytest.approx(2)
    assert P.P2 == pytest.approx(2 ** (13 / 16))
    assert P.N == 16


def test_choose_parameters_warns_and_rejects():
    with pytest.warns(UserWarning):
        choose_parameters(2 ** 20, Fraction(1, 10))
    with pytest.raises(ValueError):
        choose_parameters(0, Fraction(1, 4))


@given(st.floats(1.0, 1e12), st.fractions(Fraction(4060, 16384), GAMMA1))
def test_choose_parameters_range_invariant(N, gamma):
    P = choose_parameters(N, gamma)
    for j in range(3):
        assert P.P[j] ** 0.75 * (1 - 1e-12) <= P.P[j + 1] <= P.P[j] * (1 + 1e-12)


def test_parameters_validation():
    with pytest.raises(ValueError):
        Parameters(8, 2, 2, 2, 1)
    with pytest.raises(ValueError):
        Parameters(4, 4, 4, 4, 0.5)
    P = Parameters(1, 1, 1, 1, 1, check=False)
    assert P.N == 1


def test_parameters_record_roundtrip():
    P = choose_parameters(2 ** 20, "13/50")
    assert Parameters.from_record(P.to_record()) == P


def test_parse_rational():
    assert parse_rational("3/4") == (Fraction(3, 4), True)
    assert parse_rational("7") == (Fraction(7), True)
    assert parse_rational("0.26") == (Fraction(13, 50), False)
    for bad in ("1/0", "a/b", "", "1/2/3"):
        with pytest.raises(ValueError):
            parse_rational(bad)
    assert format_rational(Fraction(6, 8)) == "3/4"


@pytest.mark.parametrize("a,d", [(0.75, 0.25), (0, 0), (0.5, 0.5), (1.25, 0.25), (-0.1, 0.1)])
def test_torus_distance(a, d):
    assert torus_distance(a) == pytest.approx(d)


@given(st.fractions(0, 1))
def test_torus_distance_symmetric(a):
    assert torus_distance_exact(a) == torus_distance_exact(1 - a)
    assert 0 <= torus_distance_exact(a) <= Fraction(1, 2)
    assert TorusPoint(a + 3).value == a - math.floor(a)
