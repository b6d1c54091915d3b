"""Exponential sums f, g, nu, H and the counting functions r, r', rho.

Phases ``alpha * v`` are reduced modulo 1 before the complex exponential is
taken: exactly in integer arithmetic for rational ``alpha``, and for floats
by splitting both factors so that every partial product is exact.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded
from .params import CONSTANTS, Parameters, TorusPoint

TERM_BUDGET = 10 ** 9
# float phases use a 25/25-bit split of the integer factor
_EXACT_FLOAT_LIMIT = 2 ** 50
_SPLIT = 2 ** 25
_VELTKAMP = float(2 ** 27 + 1)
_ROW_BLOCK = 2 ** 22


@dataclass(frozen=True)
class RangeSpec:
    """Integers ``x`` with ``lower < x <= upper``."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lower", Fraction(self.lower))
        object.__setattr__(self, "upper", Fraction(self.upper))
        if not self.lower < self.upper:
            raise ValueError("need lower < upper")

    @property
    def first(self) -> int:
        return math.floor(self.lower) + 1

    @property
    def last(self) -> int:
        return math.floor(self.upper)

    @property
    def count(self) -> int:
        return max(0, self.last - self.first + 1)

    def lattice(self) -> np.ndarray:
        return np.arange(self.first, self.last + 1, dtype=np.int64)


def x_range(X) -> RangeSpec:
    X = Fraction(X)
    return RangeSpec(CONSTANTS.c_half * X, X)


def y_range(Y) -> RangeSpec:
    """``0 <= y < Y`` written as an open-closed range."""
    return RangeSpec(-1, math.ceil(Fraction(Y)) - 1)


def z_range(X) -> RangeSpec:
    X4 = Fraction(X) ** 4
    return RangeSpec(CONSTANTS.c_16 * X4, X4)


def _as_alpha(alpha):
    if isinstance(alpha, TorusPoint):
        return alpha.value
    return alpha


def _float_phases(alpha: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``alpha[:, None] * v[None, :] mod 1`` with every partial product exact."""
    a = np.asarray(alpha, dtype=np.float64).reshape(-1, 1)
    c = _VELTKAMP * a
    ah = c - (c - a)
    al = a - ah
    vl_i = v % _SPLIT
    vh = (v - vl_i).astype(np.float64)
    vl = vl_i.astype(np.float64)
    out = np.zeros((a.shape[0], v.shape[0]))
    for p in (ah * vh, ah * vl, al * vh, al * vl):
        out += p - np.floor(p)
    return out - np.floor(out)


def _rational_phases(alpha: Fraction, v: np.ndarray) -> np.ndarray:
    num, den = alpha.numerator % alpha.denominator, alpha.denominator
    if den < 2 ** 31:
        return ((v % den) * num % den).astype(np.float64) / den
    r = [(num * int(t)) % den for t in v.tolist()]
    return np.array([float(Fraction(t, den)) for t in r])


def phases(alpha, values) -> np.ndarray:
    """Fractional parts of ``alpha * values`` in ``[0, 1)``.

    ``alpha`` may be a Fraction (exact), a float, or a float array (one row
    per point).
    """
    alpha = _as_alpha(alpha)
    v = np.asarray(values, dtype=np.int64)
    if isinstance(alpha, Fraction):
        return _rational_phases(alpha, v)
    if v.size and (np.max(np.abs(v)) >= _EXACT_FLOAT_LIMIT):
        if np.ndim(alpha) == 0:
            return _rational_phases(Fraction(float(alpha)), v)
        return np.array([_rational_phases(Fraction(float(a)), v) for a in np.ravel(alpha)])
    out = _float_phases(alpha, v)
    return out[0] if np.ndim(alpha) == 0 else out


def _e(ph: np.ndarray) -> np.ndarray:
    c = ph - np.round(ph)
    return np.exp(2j * np.pi * c)


def expsum(alpha, values, weights=None):
    """``sum_v w_v e(alpha v)``; vectorised over an array of float ``alpha``.

    Rows are summed pairwise in ascending order of ``values``; splitting the
    alpha array into blocks never changes any row.
    """
    alpha = _as_alpha(alpha)
    v = np.asarray(values, dtype=np.int64)
    w = None if weights is None else np.asarray(weights, dtype=np.float64)
    if isinstance(alpha, Fraction) or np.ndim(alpha) == 0:
        t = _e(phases(alpha, v))
        if w is not None:
            t = t * w
        return complex(np.sum(t))
    a = np.asarray(alpha, dtype=np.float64).ravel()
    out = np.empty(a.size, dtype=np.complex128)
    step = max(1, _ROW_BLOCK // max(1, v.size))
    for i in range(0, a.size, step):
        t = _e(phases(a[i:i + step], v))
        if w is not None:
            t = t * w
        out[i:i + step] = np.sum(t, axis=1)
    return out


# --- spectra: (frequencies, weights) of each trigonometric polynomial ---

def f_spectrum(X):
    x = x_range(X).lattice()
    return x ** 4, np.ones(x.size)


def g_spectrum(Y):
    y = y_range(Y).lattice()
    return y, np.ones(y.size)


def nu_weights(z: np.ndarray) -> np.ndarray:
    return 0.25 * np.power(z.astype(np.float64), -0.75)


def nu_spectrum(X, budget: int = TERM_BUDGET):
    zr = z_range(X)
    if zr.count > budget:
        raise BudgetExceeded("nu terms", zr.count, budget)
    z = zr.lattice()
    return z, nu_weights(z)


def H_spectrum(X, Z):
    """``(x+h)**4 - x**4`` over ``1 <= h <= Z``, ``X/2 < x <= X - h``."""
    xr = x_range(X)
    vals = []
    for h in range(1, math.floor(Fraction(Z)) + 1):
        x = np.arange(xr.first, xr.last - h + 1, dtype=np.int64)
        if x.size == 0:
            break
        vals.append((x + h) ** 4 - x ** 4)
    v = np.concatenate(vals) if vals else np.zeros(0, dtype=np.int64)
    return v, np.ones(v.size)


def weyl_f(alpha, X):
    """``f(alpha, X) = sum_{X/2 < x <= X} e(alpha x^4)``."""
    if X < 2:
        raise ValueError("X must be at least 2")
    v, _ = f_spectrum(X)
    return expsum(alpha, v)


def weyl_g(alpha, Y):
    """``g(alpha, Y) = sum_{0 <= y < Y} e(alpha y)`` by the geometric closed form."""
    if Y < 1:
        raise ValueError("Y must be at least 1")
    alpha = _as_alpha(alpha)
    L = y_range(Y).count
    scalar = isinstance(alpha, Fraction) or np.ndim(alpha) == 0
    ph = phases(alpha if scalar else np.asarray(alpha, dtype=np.float64).ravel(), np.array([1, L]))
    ph = np.atleast_2d(ph)
    p1 = ph[:, 0] - np.round(ph[:, 0])
    pL = ph[:, 1] - np.round(ph[:, 1])
    # below this g equals L to double precision, and sin(pi t) may underflow
    zero = np.abs(p1) * L < 1e-200
    # e(t) - 1 = 2i sin(pi t) e(t/2), with t centred in [-1/2, 1/2]
    den = np.where(zero, 1.0, np.sin(np.pi * p1)) * np.exp(1j * np.pi * p1)
    num = np.sin(np.pi * pL) * np.exp(1j * np.pi * pL)
    out = np.where(zero, complex(L), num / np.where(zero, 1.0, den))
    return complex(out[0]) if scalar else out


def mollified_nu(alpha, X, budget: int = TERM_BUDGET):
    """``nu(alpha, X) = sum_{X^4/16 < z <= X^4} z^(-3/4)/4 e(alpha z)``."""
    if X < 2:
        raise ValueError("X must be at least 2")
    z, w = nu_spectrum(X, budget)
    npts = 1 if (isinstance(_as_alpha(alpha), Fraction) or np.ndim(_as_alpha(alpha)) == 0) else np.size(alpha)
    if z.size * npts > budget:
        raise BudgetExceeded("nu terms", z.size * npts, budget)
    return expsum(alpha, z, w)


def diff_sum_H(alpha, X, Z):
    """``H(alpha, X, Z)``, the exponential sum over the difference polynomial."""
    if X < 2:
        raise ValueError("X must be at least 2")
    if Z < 0:
        raise ValueError("Z must be non-negative")
    v, _ = H_spectrum(X, Z)
    if v.size == 0:
        return 0j if np.ndim(_as_alpha(alpha)) == 0 or isinstance(_as_alpha(alpha), Fraction) else np.zeros(np.size(alpha), complex)
    return expsum(alpha, v)


def weyl_H_envelope(X, Z, q) -> float:
    """Shape ``X Z (1/X + 1/q + q/(X^3 Z))^(1/4)`` of the Weyl-differencing bound."""
    return X * Z * (1 / X + 1 / q + q / (X ** 3 * Z)) ** 0.25


# --- counting functions ---

def r_table(X) -> Counter:
    """``n -> #{(x, x') : x'^4 - x^4 = n}`` over the range ``X/2 < x, x' <= X``."""
    p = x_range(X).lattice() ** 4
    d = (p[None, :] - p[:, None]).ravel()
    vals, cnts = np.unique(d, return_counts=True)
    return Counter(dict(zip(vals.tolist(), cnts.tolist())))


def count_r(n: int, X) -> int:
    p = set((x_range(X).lattice() ** 4).tolist())
    return sum(1 for a in p if a + n in p)


def r_prime_table(P: Parameters, j: int = 1) -> Counter:
    """``n -> #{(h, x) : (x+h)^4 - x^4 = n}`` with ``1 <= h <= c_h P_j^-3 P_{j+1}^4`` and ``P_j/2 < x, x+h <= P_j``."""
    v, _ = H_spectrum(P.P[j - 1], P.h_bound(j))
    vals, cnts = np.unique(v, return_counts=True)
    return Counter(dict(zip(vals.tolist(), cnts.tolist())))


def count_r_prime(n: int, P: Parameters, j: int = 1) -> int:
    if n <= 0:
        return 0
    return r_prime_table(P, j).get(n, 0)


@dataclass
class RhoTable:
    """``rho(n)`` for ``n`` in ``[-span, span]``, stored at index ``n + span``."""

    span: int
    values: np.ndarray

    def __call__(self, n: int) -> float:
        if abs(n) > self.span:
            return 0.0
        return float(self.values[n + self.span])


def _weighted_sum_density(Ps, budget):
    """Weighted count of ``z_2 + ... + z_k = s`` as ``(offset, density)``."""
    off, dens, work = 0, np.ones(1), 0
    for X in Ps:
        zr = z_range(X)
        work += dens.size * zr.count
        if work > budget:
            raise BudgetExceeded("rho terms", work, budget)
        w = nu_weights(zr.lattice())
        dens = np.convolve(dens, w)
        off += zr.first
    return off, dens


def rho_table(P: Parameters, budget: int = TERM_BUDGET) -> RhoTable:
    _, F = _weighted_sum_density(P.P[1:], budget)
    if F.size * F.size > budget:
        raise BudgetExceeded("rho terms", F.size * F.size, budget)
    # rho(n) = sum_s F(s) F(s - n); the offsets cancel
    vals = np.correlate(F, F, mode="full")
    span = F.size - 1
    # exact symmetry rho(n) = rho(-n)
    vals = 0.5 * (vals + vals[::-1])
    return RhoTable(span, vals)


def count_rho(n: int, P: Parameters, budget: int = TERM_BUDGET) -> float:
    """Weighted count ``4^-6 sum (z2 z2' z3 z3' z4 z4')^(-3/4)`` over ``sum z - sum z' = n``."""
    if abs(n) > 3 * P.P2 ** 4:
        return 0.0
    return rho_table(P, budget)(n)
