"""Torus integration of trigonometric polynomials, arc partitions, and the integrals R, U, S, T, V, W.

Full-torus integrals are uniform-grid averages on ``M`` points with ``M``
above the integrand's bandwidth, which makes them exact Fourier
coefficients.  Integrals over arc sets use adaptive Gauss-Legendre panels,
or alternatively the closed-form integral of each Fourier mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import weyl
from .errors import BudgetExceeded
from .params import CONSTANTS, Parameters

GRID_BUDGET = 2 ** 24
DEFAULT_RTOL = 1e-8


# --- factors ---------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    """One exponential-sum factor of an integrand: ``kind`` in {f, g, nu, H}."""

    kind: str
    X: float = 0.0
    Z: float = 0.0
    conj: bool = False

    def spectrum(self):
        if self.kind == "f":
            v, w = weyl.f_spectrum(self.X)
        elif self.kind == "g":
            v, w = weyl.g_spectrum(self.X)
        elif self.kind == "nu":
            v, w = weyl.nu_spectrum(self.X)
        elif self.kind == "H":
            v, w = weyl.H_spectrum(self.X, self.Z)
        else:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        return (-v, w) if self.conj else (v, w)

    def bar(self) -> "Factor":
        return Factor(self.kind, self.X, self.Z, not self.conj)

    def evaluate(self, alpha: np.ndarray) -> np.ndarray:
        v, w = self.spectrum()
        if v.size == 0:
            return np.zeros(np.size(alpha), dtype=complex)
        if self.kind == "g" and not self.conj:
            return weyl.weyl_g(np.asarray(alpha, dtype=float), self.X)
        return weyl.expsum(np.asarray(alpha, dtype=float), v, None if self.kind != "nu" else w)

    def describe(self) -> str:
        s = f"{self.kind}(X={self.X!r}" + (f", Z={self.Z!r})" if self.kind == "H" else ")")
        return "conj " + s if self.conj else s


def abs2(*factors: Factor) -> list[Factor]:
    """Factors of ``|prod factors|^2``."""
    return list(factors) + [f.bar() for f in factors]


def f_(P: Parameters, j: int) -> Factor:
    return Factor("f", P.P[j - 1])


def nu_(P: Parameters, j: int) -> Factor:
    return Factor("nu", P.P[j - 1])


def g_(P: Parameters) -> Factor:
    return Factor("g", P.Y)


def H_(P: Parameters, j: int) -> Factor:
    return Factor("H", P.P[j - 1], P.h_bound(j))


def bandwidth(factors) -> tuple[int, int]:
    lo = hi = 0
    for fac in factors:
        v, _ = fac.spectrum()
        if v.size:
            lo += int(v.min())
            hi += int(v.max())
    return lo, hi


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length()) if n > 1 else 1


def grid_size(factors, n: int = 0, all_modes: bool = False) -> int:
    lo, hi = bandwidth(factors)
    need = max(abs(lo - n), abs(hi - n)) + 1
    if all_modes:
        need = max(need, hi - lo + 1)
    return next_pow2(need + 1)


def grid_values(factors, M: int, budget: int = GRID_BUDGET) -> np.ndarray:
    """Values of ``prod factors`` at ``k/M`` for ``k = 0..M-1``, via the FFT of each spectrum."""
    if M > budget:
        raise BudgetExceeded("grid points", M, budget)
    out = np.ones(M, dtype=np.complex128)
    for fac in factors:
        v, w = fac.spectrum()
        a = np.bincount(np.mod(v, M), weights=w, minlength=M).astype(np.complex128)
        out *= np.fft.ifft(a) * M
    return out


def grid_coefficients(factors, M: int | None = None, budget: int = GRID_BUDGET):
    """All Fourier coefficients of ``prod factors`` as ``(M, c)`` with ``c[m mod M]``."""
    if M is None:
        M = grid_size(factors, all_modes=True)
    vals = grid_values(factors, M, budget)
    return M, np.fft.fft(vals) / M


@dataclass
class IntegralResult:
    value: complex
    error: float
    method: str
    grid_size: int = 0
    panels: int = 0
    converged: bool = True

    def to_record(self) -> dict:
        return {
            "re": repr(float(self.value.real)),
            "im": repr(float(self.value.imag)),
            "error_estimate": repr(float(self.error)),
            "method": self.method,
            "grid_size": self.grid_size,
            "panels": self.panels,
            "converged": self.converged,
        }


# --- arcs ------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    """``{alpha : ||alpha - a/q|| <= radius}``."""

    q: int
    a: int
    radius: Fraction

    def __post_init__(self):
        if self.q < 1 or not (0 <= self.a < self.q) or math.gcd(self.a, self.q) != 1:
            raise ValueError("need q >= 1, 0 <= a < q, gcd(a, q) = 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def center(self) -> Fraction:
        return Fraction(self.a, self.q)

    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        lo, hi = self.center - self.radius, self.center + self.radius
        if hi - lo >= 1:
            return [(Fraction(0), Fraction(1))]
        if lo < 0:
            return [(Fraction(0), hi), (lo + 1, Fraction(1))]
        if hi > 1:
            return [(Fraction(0), hi - 1), (lo, Fraction(1))]
        return [(lo, hi)]


@dataclass
class ArcSet:
    """A finite union of closed intervals in ``[0, 1]`` with exact endpoints."""

    label: str
    intervals: list = field(default_factory=list)
    arcs: list = field(default_factory=list)

    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def sorted_intervals(self):
        return sorted(self.intervals)

    def contains(self, alpha) -> bool:
        a = Fraction(alpha) if not isinstance(alpha, Fraction) else alpha
        a -= math.floor(a)
        return any(lo <= a <= hi for lo, hi in self.intervals)

    def float_intervals(self):
        return [(float(lo), float(hi)) for lo, hi in self.sorted_intervals() if hi > lo]


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(float(x))


def major_radius(j: int, P: Parameters) -> Fraction:
    """``P_j P_{j+1}^-4``: the arc around ``a/q`` has radius this divided by ``q``."""
    return _as_fraction(P.P[j - 1]) / _as_fraction(P.P[j]) ** 4


def central_pieces(j: int, P: Parameters) -> list[tuple[Fraction, Fraction]]:
    r = min(major_radius(j, P), Fraction(1, 2))
    if j == 1:
        inner = CONSTANTS.c_8 / _as_fraction(P.P2) ** 3
        if inner >= r:
            return []
        return [(inner, r), (1 - r, 1 - inner)]
    return [(Fraction(0), r), (1 - r, Fraction(1))]


def iter_major_arcs(j: int, P: Parameters):
    """Lazily yield the arcs ``M_j(q, a)`` for ``2 <= q <= P_j``, ``gcd(a, q) = 1``."""
    r = major_radius(j, P)
    for q in range(2, math.floor(P.P[j - 1]) + 1):
        rq = r / q
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                yield Arc(q, a, rq)


def euler_phi(q: int) -> int:
    result, n, p = q, q, 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1
    if n > 1:
        result -= result // n
    return result


def major_measure(j: int, P: Parameters) -> Fraction:
    """``sum_q phi(q) * 2 * radius(q)`` without materialising the arcs."""
    r = major_radius(j, P)
    return sum((euler_phi(q) * 2 * r / q for q in range(2, math.floor(P.P[j - 1]) + 1)), Fraction(0))


def _complement(universe, pieces):
    """``universe`` minus ``pieces``; both are lists of intervals in [0, 1]."""
    out = []
    cuts = sorted(pieces)
    for ulo, uhi in sorted(universe):
        cur = ulo
        for lo, hi in cuts:
            if hi <= cur or lo >= uhi:
                continue
            if lo > cur:
                out.append((cur, lo))
            cur = max(cur, hi)
        if cur < uhi:
            out.append((cur, uhi))
    return out


def A_set(j: int, i: int, P: Parameters) -> ArcSet:
    """``A_j^0 = {||alpha|| <= c_8 P_j^-3}`` (i = 0) or its complement (i = 1)."""
    r = min(CONSTANTS.c_8 / _as_fraction(P.P[j - 1]) ** 3, Fraction(1, 2))
    inner = [(Fraction(0), r), (1 - r, Fraction(1))]
    if i == 0:
        return ArcSet(f"A({j},0)", inner)
    return ArcSet(f"A({j},1)", _complement([(Fraction(0), Fraction(1))], inner))


@dataclass
class Partition:
    j: int
    central: ArcSet
    major: ArcSet
    minor: ArcSet
    inner: ArcSet | None = None

    def pieces(self):
        out = [self.central, self.major, self.minor]
        return out + ([self.inner] if self.inner is not None else [])

    def total_measure(self) -> Fraction:
        return sum((p.measure() for p in self.pieces()), Fraction(0))

    def disjoint(self) -> bool:
        """Consecutive sorted intervals never overlap (shared endpoints allowed)."""
        ivs = sorted(iv for p in self.pieces() for iv in p.intervals if iv[1] > iv[0])
        return all(ivs[k][1] <= ivs[k + 1][0] for k in range(len(ivs) - 1))

    def major_disjoint(self) -> bool:
        ivs = sorted(self.major.intervals + self.central.intervals)
        return all(ivs[k][1] <= ivs[k + 1][0] for k in range(len(ivs) - 1))

    def summary(self) -> dict:
        rec = {
            "j": self.j,
            "central_measure": _fr(self.central.measure()),
            "major_measure": _fr(self.major.measure()),
            "minor_measure": _fr(self.minor.measure()),
            "major_arcs": len(self.major.arcs),
            "total_measure": _fr(self.total_measure()),
            "disjoint": self.disjoint(),
        }
        if self.inner is not None:
            rec["inner_measure"] = _fr(self.inner.measure())
        return rec


def _fr(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def build_arcs(j: int, P: Parameters) -> Partition:
    """Central arc, major arcs (q >= 2) and minor arcs of the j-th partition.

    For j = 1 the pieces partition ``A_2^1`` and ``A_2^0`` is returned as ``inner``.
    """
    if j not in (1, 2, 3):
        raise ValueError("j must be 1, 2 or 3")
    if P.P[j - 1] < 2:
        raise ValueError("need P_j >= 2")
    arcs = list(iter_major_arcs(j, P))
    major = ArcSet(f"major({j})", [iv for arc in arcs for iv in arc.intervals()], arcs)
    central = ArcSet(f"central({j})", central_pieces(j, P))
    if j == 1:
        inner = A_set(2, 0, P)
        universe = A_set(2, 1, P).intervals
    else:
        inner = None
        universe = [(Fraction(0), Fraction(1))]
    minor = ArcSet(f"minor({j})", _complement(universe, central.intervals + major.intervals))
    return Partition(j, central, major, minor, inner)


def check_disjointness_inequality(j: int, P: Parameters) -> bool:
    """``1/(q P_j) >= radius/q + radius/Q`` for all ``q <= Q <= P_j``, exactly."""
    Pj = _as_fraction(P.P[j - 1])
    r = major_radius(j, P)
    Qmax = math.floor(P.P[j - 1])
    return all(1 / (q * Pj) >= r / q + r / Q for q in range(1, Qmax + 1) for Q in range(q, Qmax + 1))


@dataclass(frozen=True)
class ArcLabel:
    piece: str
    q: int | None = None
    a: int | None = None

    def __str__(self):
        if self.piece == "major":
            return f"major(q={self.q},a={self.a})"
        return self.piece


def classify_alpha(alpha, j: int, P: Parameters) -> ArcLabel:
    """Which piece of the j-th partition contains ``alpha``."""
    a = _as_fraction(alpha.value if hasattr(alpha, "value") else alpha)
    a -= math.floor(a)
    dist0 = min(a, 1 - a)
    if j == 1 and dist0 <= CONSTANTS.c_8 / _as_fraction(P.P2) ** 3:
        return ArcLabel("A(2,0)")
    if any(lo <= a <= hi for lo, hi in central_pieces(j, P)):
        return ArcLabel("central")
    r = major_radius(j, P)
    for q in range(2, math.floor(P.P[j - 1]) + 1):
        c = round(a * q)
        if math.gcd(c % q, q) == 1 and abs(a - Fraction(c, q)) <= r / q:
            return ArcLabel("major", q, c % q)
    return ArcLabel("minor")


def named_arcset(name: str, j: int, P: Parameters) -> ArcSet | None:
    """``full``, ``central``, ``major``, ``minor``, ``A0`` or ``A1``; None for the full torus."""
    if name == "full":
        return None
    if name in ("A0", "A1"):
        return A_set(j, int(name[1]), P)
    part = build_arcs(j, P)
    return {"central": part.central, "major": part.major, "minor": part.minor}[name]


# --- quadrature ------------------------------------------------------------

@lru_cache(maxsize=8)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def integrate_panels(func, intervals, rtol: float = DEFAULT_RTOL, atol: float = 1e-12,
                     order: int = 24, max_width: float | None = None, max_panels: int = 200000):
    """Adaptive Gauss-Legendre: each panel is accepted when its value agrees with the sum over its halves.

    Returns ``(value, error_estimate, panels, converged)``.
    """
    x, w = _gauss(order)
    stack = []
    for lo, hi in intervals:
        if hi <= lo:
            continue
        k = 1 if not max_width else max(1, math.ceil((hi - lo) / max_width))
        edges = np.linspace(lo, hi, k + 1)
        stack.extend(zip(edges[:-1].tolist(), edges[1:].tolist()))

    def panel(lo, hi):
        h = 0.5 * (hi - lo)
        return h * np.dot(w, func(lo + h * (x + 1)))

    pending = [(lo, hi, panel(lo, hi)) for lo, hi in stack]
    total, err, done, converged = 0j, 0.0, 0, True
    scale = abs(sum(p[2] for p in pending)) or 1.0
    while pending:
        lo, hi, whole = pending.pop()
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        diff = abs(left + right - whole)
        tol = max(atol, rtol * scale) * (hi - lo)
        if diff <= tol or done + len(pending) >= max_panels or hi - lo < 1e-15:
            if diff > tol:
                converged = False
            total += left + right
            err += diff
            done += 2
        else:
            pending.append((lo, mid, left))
            pending.append((mid, hi, right))
    return complex(total), float(err), done, converged


def integrate_spectral(coeffs: dict, intervals) -> complex:
    """``int over intervals of sum_m c_m e(m alpha)``, each mode integrated in closed form."""
    m = np.array(list(coeffs.keys()), dtype=np.int64)
    c = np.array(list(coeffs.values()), dtype=np.complex128)
    total = 0j
    nz = m != 0
    for lo, hi in intervals:
        lo_f, hi_f = Fraction(lo), Fraction(hi)
        total += complex(c[~nz].sum()) * float(hi_f - lo_f)
        if nz.any():
            mm = m[nz]
            eh = np.exp(2j * np.pi * weyl.phases(hi_f, mm))
            el = np.exp(2j * np.pi * weyl.phases(lo_f, mm))
            total += complex(np.sum(c[nz] * (eh - el) / (2j * np.pi * mm)))
    return total


def _integrand(factors, n):
    def func(alpha):
        alpha = np.asarray(alpha, dtype=float)
        out = np.ones(alpha.size, dtype=complex)
        for fac in factors:
            out *= fac.evaluate(alpha)
        if n:
            out *= weyl.expsum(alpha, np.array([-n], dtype=np.int64))
        return out
    return func


def fourier_coefficient(factors, n: int = 0, restriction: ArcSet | None = None, M: int | None = None,
                        method: str = "quadrature", rtol: float = DEFAULT_RTOL,
                        budget: int = GRID_BUDGET) -> IntegralResult:
    """``int_B e(-n alpha) prod factors d alpha``; ``restriction=None`` is the full torus."""
    factors = list(factors)
    if restriction is None:
        if M is None:
            M = grid_size(factors, n)
        lo, hi = bandwidth(factors)
        if M <= max(abs(lo - n), abs(hi - n)):
            raise BudgetExceeded("grid below bandwidth", max(abs(lo - n), abs(hi - n)) + 1, M)
        vals = grid_values(factors, M, budget)
        k = np.arange(M, dtype=np.int64)
        tw = np.exp(-2j * np.pi * ((k * (n % M)) % M) / M)
        return IntegralResult(complex(np.sum(vals * tw) / M), 0.0, "grid", grid_size=M)
    if method == "spectral":
        Mfull, c = grid_coefficients(factors, budget=budget)
        lo, hi = bandwidth(factors)
        ms = np.arange(lo, hi + 1, dtype=np.int64)
        cm = c[np.mod(ms, Mfull)]
        keep = np.abs(cm) > 1e-9 * (np.abs(cm).max() if cm.size else 1)
        coeffs = dict(zip((ms[keep] - n).tolist(), cm[keep].tolist()))
        val = integrate_spectral(coeffs, restriction.sorted_intervals())
        return IntegralResult(val, 0.0, "spectral", grid_size=Mfull)
    lo, hi = bandwidth(factors)
    width = 2.0 / max(1, hi - lo + abs(n))
    val, err, panels, ok = integrate_panels(_integrand(factors, n), restriction.float_intervals(),
                                            rtol=rtol, max_width=width)
    return IntegralResult(val, err, "quadrature", panels=panels, converged=ok)


# --- the integrals ----------------------------------------------------------

def R_factors(P: Parameters):
    return [f_(P, 1), f_(P, 2), f_(P, 3), f_(P, 4), g_(P)]


def U_factors(P: Parameters):
    return [nu_(P, 1), nu_(P, 2), nu_(P, 3), nu_(P, 4)]


def S_factors(P: Parameters, j: int = 1):
    return abs2(*[f_(P, i) for i in range(j, 5)], g_(P))


def T_factors(P: Parameters, j: int = 1):
    return [H_(P, j)] + abs2(*[f_(P, i) for i in range(j + 1, 5)], g_(P))


def V_factors(P: Parameters):
    return abs2(f_(P, 1), nu_(P, 2), nu_(P, 3), nu_(P, 4))


def W_factors(P: Parameters):
    return [H_(P, 1)] + abs2(nu_(P, 2), nu_(P, 3), nu_(P, 4))


def integral_R(P: Parameters, B: ArcSet | None = None, n: int = 0, **kw) -> IntegralResult:
    return fourier_coefficient(R_factors(P), n, B, **kw)


def integral_U(P: Parameters, B: ArcSet | None = None, n: int = 0, **kw) -> IntegralResult:
    res = fourier_coefficient(U_factors(P), n, B, **kw)
    res.value *= P.Y
    res.error *= P.Y
    return res


def integral_S(P: Parameters, B: ArcSet | None = None, j: int = 1, **kw) -> IntegralResult:
    return fourier_coefficient(S_factors(P, j), 0, B, **kw)


def integral_T(P: Parameters, B: ArcSet | None = None, j: int = 1, **kw) -> IntegralResult:
    return fourier_coefficient(T_factors(P, j), 0, B, **kw)


def integral_V(P: Parameters, B: ArcSet | None = None, **kw) -> IntegralResult:
    res = fourier_coefficient(V_factors(P), 0, B, **kw)
    res.value *= P.Y ** 2
    res.error *= P.Y ** 2
    return res


def integral_W(P: Parameters, B: ArcSet | None = None, **kw) -> IntegralResult:
    res = fourier_coefficient(W_factors(P), 0, B, **kw)
    res.value *= P.Y ** 2
    res.error *= P.Y ** 2
    return res


INTEGRALS = {"R": integral_R, "U": integral_U, "S": integral_S, "T": integral_T,
             "V": integral_V, "W": integral_W}


# --- arithmetic closed forms -----------------------------------------------

def _sum_histogram(P: Parameters, j: int):
    """Multiplicities of ``x_j^4 + ... + x_4^4 + y`` as ``(values, counts)``."""
    s = np.zeros(1, dtype=np.int64)
    for i in range(j, 5):
        p = weyl.x_range(P.P[i - 1]).lattice() ** 4
        s = (s[:, None] + p[None, :]).ravel()
    y = weyl.y_range(P.Y).lattice()
    s = (s[:, None] + y[None, :]).ravel()
    return np.unique(s, return_counts=True)


def count_S(P: Parameters, j: int = 1) -> int:
    """Solutions of ``x_j^4 + .. + x_4^4 + y = x_j'^4 + .. + x_4'^4 + y'`` in the ranges."""
    _, cnt = _sum_histogram(P, j)
    return int(np.sum(cnt * cnt))


def count_T(P: Parameters, j: int = 1) -> int:
    """Solutions with ``x_j' = x_j + h``, ``1 <= h <= c_h P_j^-3 P_{j+1}^4``."""
    rp = weyl.r_prime_table(P, j)
    vals, cnt = _sum_histogram(P, j + 1) if j < 4 else (np.zeros(1, np.int64), np.ones(1, np.int64))
    lookup = dict(zip(vals.tolist(), cnt.tolist()))
    total = 0
    # (x+h)^4 - x^4 = s - s' with s, s' sums over the remaining variables
    for d, m in rp.items():
        for v, c in lookup.items():
            c2 = lookup.get(v - d)
            if c2:
                total += m * c * c2
    return total


def count_diagonal(P: Parameters, j: int = 1) -> int:
    """Diagonal solutions: ``y count * prod_{i >= j} x_i count``."""
    out = weyl.y_range(P.Y).count
    for i in range(j, 5):
        out *= weyl.x_range(P.P[i - 1]).count
    return out
