"""Exact constants, the diminishing-range parameter schedule and torus geometry."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

# Exponent of P_j relative to P, in units of 1/4096.
EXPONENTS = (Fraction(4096, 4096), Fraction(3328, 4096), Fraction(2704, 4096), Fraction(2197, 4096))
THETA4 = Fraction(13, 16)
GAMMA0 = Fraction(4059, 16384)
GAMMA1 = Fraction(4992, 16384)


@dataclass(frozen=True)
class Constants:
    """Range and radius factors shared by every count and integral."""

    c_half: Fraction = Fraction(1, 2)
    c_16: Fraction = Fraction(1, 16)
    c_8: Fraction = Fraction(1, 8)
    c_h: Fraction = Fraction(32)

    def __post_init__(self):
        if self.c_16 != self.c_half ** 4:
            raise ValueError("c_16 must equal c_half**4")
        for v in (self.c_half, self.c_16, self.c_8, self.c_h):
            if v <= 0:
                raise ValueError("constants must be positive")


CONSTANTS = Constants()


def parse_rational(text) -> tuple[Fraction, bool]:
    """Parse ``"a/b"``, an integer or a decimal string.

    Returns ``(value, exact)``; ``exact`` is False for decimal input, which
    callers echo into reports as an inexact flag.
    """
    if isinstance(text, Fraction):
        return text, True
    if isinstance(text, int):
        return Fraction(text), True
    if isinstance(text, float):
        return Fraction(text), False
    s = str(text).strip()
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            num, den = int(num), int(den)
            if den == 0:
                raise ZeroDivisionError
            return Fraction(num, den), True
        try:
            return Fraction(int(s)), True
        except ValueError:
            return Fraction(s), False
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"malformed rational: {text!r}") from None


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def gamma0_general(h: int, k: int) -> Fraction:
    """Exponent ``1 - (1/k) * sum_{i<h} theta_k**i`` with ``theta_k = 1 - 1/k + 1/(k 2^(k-2))``."""
    if k < 3:
        raise ValueError("k must be at least 3")
    if h < 1:
        raise ValueError("h must be at least 1")
    theta = 1 - Fraction(1, k) + Fraction(1, k * 2 ** (k - 2))
    return 1 - Fraction(1, k) * sum(theta ** i for i in range(h))


@dataclass(frozen=True)
class Parameters:
    """Range bounds ``(P1, P2, P3, P4, Y)`` plus the context value ``N = floor(P1**4)``."""

    P1: float
    P2: float
    P3: float
    P4: float
    Y: float
    N: int = field(default=-1)
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.N == -1:
            object.__setattr__(self, "N", math.floor(self.P1 ** 4))
        if not self.check:
            return
        Ps = self.P
        if min(Ps) <= 0:
            raise ValueError("range bounds must be positive")
        if self.Y < 1:
            raise ValueError("Y must be at least 1")
        for j in range(3):
            lo = Ps[j] ** 0.75
            # one ulp of slack: P_{j+1} = P_j**(13/16) is computed in floating point
            if not (lo * (1 - 1e-12) <= Ps[j + 1] <= Ps[j] * (1 + 1e-12)):
                raise ValueError(f"need P{j + 1}^(3/4) <= P{j + 2} <= P{j + 1}")

    @property
    def P(self) -> tuple[float, float, float, float]:
        return (self.P1, self.P2, self.P3, self.P4)

    def h_bound(self, j: int = 1, constants: Constants = CONSTANTS) -> float:
        """Shift bound ``c_h * P_j**-3 * P_{j+1}**4`` of the j-th difference sum."""
        Pj, Pn = self.P[j - 1], self.P[j]
        return float(constants.c_h) * Pn ** 4 / Pj ** 3

    def to_record(self) -> dict:
        return {
            "P1": repr(float(self.P1)),
            "P2": repr(float(self.P2)),
            "P3": repr(float(self.P3)),
            "P4": repr(float(self.P4)),
            "Y": repr(float(self.Y)),
            "N": str(self.N),
        }

    @classmethod
    def from_record(cls, rec: dict, check: bool = True) -> "Parameters":
        return cls(
            float(rec["P1"]), float(rec["P2"]), float(rec["P3"]), float(rec["P4"]),
            float(rec["Y"]), int(rec.get("N", -1)), check=check,
        )


def choose_parameters(N, gamma) -> Parameters:
    """Parameters with ``P1 = N**(1/4)``, ``P_{j+1} = P_j**(13/16)`` and ``Y = N**gamma``."""
    if N <= 0:
        raise ValueError("N must be positive")
    gamma = gamma if isinstance(gamma, Fraction) else parse_rational(gamma)[0]
    if not (GAMMA0 < gamma <= GAMMA1):
        warnings.warn(f"gamma={gamma} outside ({GAMMA0}, {GAMMA1}]", stacklevel=2)
    P = float(N) ** 0.25
    Ps = [P ** float(e) for e in EXPONENTS]
    Y = float(N) ** float(gamma)
    return Parameters(*Ps, Y=Y, N=math.floor(N))


def schedule_exponents(h: int = 4) -> list[Fraction]:
    """Exponents of P_j relative to P: ``THETA4**j`` for ``j < h``."""
    return [THETA4 ** j for j in range(h)]


@dataclass(frozen=True)
class TorusPoint:
    value: float

    def __post_init__(self):
        v = self.value
        if isinstance(v, Fraction):
            v = v - math.floor(v)
        else:
            v = float(v) % 1.0
        object.__setattr__(self, "value", v)

    @property
    def norm(self) -> float:
        return torus_distance(self.value)


def torus_distance(alpha) -> float:
    """Distance of ``alpha`` from the nearest integer."""
    if isinstance(alpha, TorusPoint):
        alpha = alpha.value
    if isinstance(alpha, Fraction):
        r = alpha - math.floor(alpha)
        return float(min(r, 1 - r))
    a = float(alpha) % 1.0
    return min(a, 1.0 - a)


def torus_distance_exact(alpha: Fraction) -> Fraction:
    r = alpha - math.floor(alpha)
    return min(r, 1 - r)
