"""Exact intersection calculus on compact Kahler surfaces.

Everything here runs on :class:`fractions.Fraction`; no floating point value
is ever produced.  A class in H^{1,1} is a coefficient vector over a declared
basis, paired through a symmetric rational Gram matrix.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


def as_rational(value) -> Fraction:
    """Parse ints, Fractions or "p/q" strings into a reduced Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            den_i = int(den)
            if den_i == 0:
                raise ZeroDivisionError(f"zero denominator in {value!r}")
            return Fraction(int(num), den_i)
        return Fraction(text)
    if isinstance(value, float):
        # floats are accepted only when they are exact binary values
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


class LatticeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceLattice:
    basis_names: tuple[str, ...]
    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.basis_names)
        if len(self.gram) != n or any(len(row) != n for row in self.gram):
            raise ValueError("gram matrix must be square and match the basis")
        for i in range(n):
            for j in range(i):
                if self.gram[i][j] != self.gram[j][i]:
                    raise ValueError("gram matrix must be symmetric")

    @classmethod
    def from_rows(cls, names: Sequence[str], rows) -> "SurfaceLattice":
        gram = tuple(tuple(as_rational(v) for v in row) for row in rows)
        return cls(tuple(names), gram)

    @property
    def rank(self) -> int:
        return len(self.basis_names)

    def cls(self, *coeffs) -> "LatticeClass":
        return LatticeClass(self, tuple(as_rational(c) for c in coeffs))

    def zero(self) -> "LatticeClass":
        return LatticeClass(self, (Fraction(0),) * self.rank)

    def basis(self, name: str) -> "LatticeClass":
        idx = self.basis_names.index(name)
        return LatticeClass(self, tuple(Fraction(int(i == idx)) for i in range(self.rank)))


# Sigma x CP^1: A = [pt x CP^1] (Poincare dual of the fibre class c1(L)), B = c1(O(1))
PRODUCT = SurfaceLattice(("A", "B"), ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0))))
CP2 = SurfaceLattice(("H",), ((Fraction(1),),))


@dataclass(frozen=True)
class LatticeClass:
    lattice: SurfaceLattice
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.lattice.rank:
            raise ValueError("coefficient vector does not match lattice rank")

    def _check(self, other: "LatticeClass"):
        if self.lattice != other.lattice:
            raise LatticeMismatch("classes live on different lattices")

    def __add__(self, other: "LatticeClass") -> "LatticeClass":
        self._check(other)
        return LatticeClass(self.lattice, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "LatticeClass") -> "LatticeClass":
        self._check(other)
        return LatticeClass(self.lattice, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "LatticeClass":
        return LatticeClass(self.lattice, tuple(-a for a in self.coeffs))

    def scale(self, k) -> "LatticeClass":
        k = as_rational(k)
        return LatticeClass(self.lattice, tuple(k * a for a in self.coeffs))

    __rmul__ = scale

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def __mul__(self, other):
        if isinstance(other, LatticeClass):
            return pair(self, other)
        return self.scale(other)

    def to_json(self) -> list[str]:
        return [format_rational(a) for a in self.coeffs]


def pair(a: LatticeClass, b: LatticeClass) -> Fraction:
    """Intersection number a . b = a^T G b."""
    if a.lattice != b.lattice:
        raise LatticeMismatch("cannot pair classes from different lattices")
    g = a.lattice.gram
    total = Fraction(0)
    for i, ai in enumerate(a.coeffs):
        if ai == 0:
            continue
        for j, bj in enumerate(b.coeffs):
            if bj:
                total += ai * g[i][j] * bj
    return total


@dataclass(frozen=True)
class SheafChern:
    """Chern character (ch0, ch1, ch2) of a sheaf on a surface."""

    rank: Fraction
    ch1: LatticeClass
    ch2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "rank", as_rational(self.rank))
        object.__setattr__(self, "ch2", as_rational(self.ch2))
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")

    def __add__(self, other: "SheafChern") -> "SheafChern":
        return SheafChern(self.rank + other.rank, self.ch1 + other.ch1, self.ch2 + other.ch2)

    def __sub__(self, other: "SheafChern") -> "SheafChern":
        # Chern-level quotient; may have negative rank if misused
        return SheafChern._raw(self.rank - other.rank, self.ch1 - other.ch1, self.ch2 - other.ch2)

    @classmethod
    def _raw(cls, rank, ch1, ch2):
        obj = object.__new__(cls)
        object.__setattr__(obj, "rank", rank)
        object.__setattr__(obj, "ch1", ch1)
        object.__setattr__(obj, "ch2", ch2)
        return obj

    def is_zero(self) -> bool:
        return self.rank == 0 and self.ch1.is_zero() and self.ch2 == 0

    @classmethod
    def line_bundle(cls, c1: LatticeClass) -> "SheafChern":
        return cls(Fraction(1), c1, pair(c1, c1) / 2)

    def to_json(self) -> dict:
        return {"rank": format_rational(self.rank), "ch1": self.ch1.to_json(), "ch2": format_rational(self.ch2)}


def direct_sum(*sheaves: SheafChern) -> SheafChern:
    out = sheaves[0]
    for s in sheaves[1:]:
        out = out + s
    return out


def positivity_check(E: SheafChern, omega: LatticeClass) -> tuple[bool, bool]:
    """(ch2 > 0, [omega].ch1 > 0)."""
    return E.ch2 > 0, pair(omega, E.ch1) > 0


def j_constant(E: SheafChern, omega: LatticeClass) -> Fraction:
    """The constant c = [omega].ch1 / (2 ch2) of the J-equation on a surface."""
    if E.ch2 <= 0:
        raise ValueError("j_constant needs ch2 > 0")
    return pair(omega, E.ch1) / (2 * E.ch2)


class Stability(enum.Enum):
    STRICT = "STRICT"
    EQUALITY = "EQUALITY"
    VIOLATED = "VIOLATED"


def j_stability_margin(S: SheafChern, E: SheafChern, omega: LatticeClass) -> Fraction:
    return pair(omega, S.ch1) * E.ch2 - S.ch2 * pair(omega, E.ch1)


def j_stability_test(S: SheafChern, E: SheafChern, omega: LatticeClass) -> Stability:
    """Classify ([w].ch1 S) ch2 E - ch2 S ([w].ch1 E) by sign.

    Strictness is reported for every rank; restricting it to rank-one
    subsheaves of rank-two bundles is left to the caller.
    """
    if S.rank <= 0:
        raise ValueError("subsheaf must have positive rank")
    margin = j_stability_margin(S, E, omega)
    if margin > 0:
        return Stability.STRICT
    if margin == 0:
        return Stability.EQUALITY
    return Stability.VIOLATED


# ----------------------------------------------------------------------------
# polynomials in k with rational coefficients, lowest degree first

def _trim(c: list[Fraction]) -> tuple[Fraction, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _trim(out)


def poly_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _trim([Fraction(x) for x in out])


def poly_eval(a: Sequence[Fraction], k) -> Fraction:
    k = as_rational(k)
    total = Fraction(0)
    for coef in reversed(a):
        total = total * k + coef
    return total


@dataclass(frozen=True)
class TwistPolynomial:
    """Chern character of S (x) L^k as polynomials in k."""

    rank: Fraction
    ch1_coeffs: tuple[LatticeClass, LatticeClass]
    ch2_coeffs: tuple[Fraction, Fraction, Fraction]

    def at(self, k) -> SheafChern:
        k = as_rational(k)
        ch1 = self.ch1_coeffs[0] + self.ch1_coeffs[1].scale(k)
        ch2 = self.ch2_coeffs[0] + self.ch2_coeffs[1] * k + self.ch2_coeffs[2] * k * k
        return SheafChern(self.rank, ch1, ch2)

    def omega_ch1(self, omega: LatticeClass) -> tuple[Fraction, ...]:
        return _trim([pair(omega, self.ch1_coeffs[0]), pair(omega, self.ch1_coeffs[1])])

    def ch2_poly(self) -> tuple[Fraction, ...]:
        return _trim(list(self.ch2_coeffs))


def twist(S: SheafChern, L: LatticeClass) -> TwistPolynomial:
    LL = pair(L, L)
    return TwistPolynomial(
        rank=S.rank,
        ch1_coeffs=(S.ch1, L.scale(S.rank)),
        ch2_coeffs=(S.ch2, pair(S.ch1, L), S.rank * LL / 2),
    )


def eta_class(omega: LatticeClass, L: LatticeClass) -> LatticeClass:
    """eta = 2([w].c1(L)) c1(L) - c1(L)^2 [w]."""
    wl = pair(omega, L)
    if wl <= 0:
        raise ValueError("eta_class needs [omega].c1(L) > 0")
    return L.scale(2 * wl) - omega.scale(pair(L, L))


def mumford_slope(S: SheafChern, eta: LatticeClass) -> Fraction:
    if S.rank <= 0:
        raise ValueError("slope needs positive rank")
    return pair(S.ch1, eta) / S.rank


@dataclass(frozen=True)
class AsymptoticSlope:
    numerator: tuple[Fraction, ...]    # ch2(S (x) L^k) in k
    denominator: tuple[Fraction, ...]  # [w].ch1(S (x) L^k) in k
    leading: Fraction                  # coefficient of k
    constant: Fraction                 # coefficient of k^0

    def __call__(self, k) -> Fraction:
        den = poly_eval(self.denominator, k)
        if den == 0:
            raise ZeroDivisionError(f"[omega].ch1 vanishes at k={k}")
        return poly_eval(self.numerator, k) / den


def asymptotic_j_slope(S: SheafChern, omega: LatticeClass, L: LatticeClass) -> AsymptoticSlope:
    """phi_k(S) = ch2(S(x)L^k) / [w].ch1(S(x)L^k) with its two leading terms at large k."""
    wl = pair(omega, L)
    LL = pair(L, L)
    if wl <= 0 or LL <= 0:
        raise ValueError("need [omega].c1(L) > 0 and c1(L)^2 > 0")
    tp = twist(S, L)
    den = tp.omega_ch1(omega)
    if not den:
        raise ZeroDivisionError("denominator polynomial is identically zero")
    num = tp.ch2_poly()
    if S.rank > 0:
        leading = LL / (2 * wl)
        constant = mumford_slope(S, eta_class(omega, L)) / (2 * wl * wl)
    else:
        # torsion-like data: read the expansion off the exact ratio instead
        leading, constant = _laurent_top_two(num, den)
    return AsymptoticSlope(num, den, leading, constant)


def _laurent_top_two(num, den) -> tuple[Fraction, Fraction]:
    # coefficients of k^1 and k^0 in num/den for large k
    dn, dd = len(num) - 1, len(den) - 1
    if dn - dd > 1:
        raise ValueError("slope grows faster than linearly")
    q = {}
    rem = list(num)
    lead = den[-1]
    for p in range(dn - dd, -1, -1):
        if p + dd >= len(rem):
            q[p] = Fraction(0)
            continue
        coef = rem[p + dd] / lead
        q[p] = coef
        for i, d in enumerate(den):
            rem[p + i] -= coef * d
    return q.get(1, Fraction(0)), q.get(0, Fraction(0))


def c_k_expansion(E: SheafChern, omega: LatticeClass, L: LatticeClass) -> tuple[Fraction, Fraction]:
    """Coefficients of k^-1 and k^-2 in c_k = 1 / (2 phi_k(E))."""
    wl = pair(omega, L)
    LL = pair(L, L)
    mu = mumford_slope(E, eta_class(omega, L))
    return wl / LL, -mu / (LL * LL)


class LargeK(enum.Enum):
    LEQ_LARGE_K = "LEQ_LARGE_K"
    GT_LARGE_K = "GT_LARGE_K"
    EQUAL = "EQUAL"


INFINITE_ORDER = None


@dataclass(frozen=True)
class Comparison:
    verdict: LargeK
    discrepancy_order: int | None  # None when the difference vanishes identically
    difference_numerator: tuple[Fraction, ...]


def asymptotic_compare(S: SheafChern, E: SheafChern, omega: LatticeClass, L: LatticeClass) -> Comparison:
    """Sign of phi_k(E) - phi_k(S) for all large k and the order of discrepancy.

    The order is the leading power of e in the expansion in e, e^2 = 1/k.
    """
    if S.rank <= 0:
        raise ValueError("subsheaf must have positive rank")
    ts, te = twist(S, L), twist(E, L)
    ds, de = ts.omega_ch1(omega), te.omega_ch1(omega)
    ns, ne = ts.ch2_poly(), te.ch2_poly()
    # phi_E - phi_S = (nE dS - nS dE) / (dE dS); dE dS > 0 for k >> 0
    diff = poly_sub(poly_mul(ne, ds), poly_mul(ns, de))
    if not diff:
        return Comparison(LargeK.EQUAL, INFINITE_ORDER, diff)
    den_degree = len(poly_mul(ds, de)) - 1
    top = diff[-1]
    verdict = LargeK.LEQ_LARGE_K if top > 0 else LargeK.GT_LARGE_K
    # diff / den ~ k^(deg diff - deg den) = e^(2 (deg den - deg diff))
    order = 2 * (den_degree - (len(diff) - 1))
    return Comparison(verdict, order, diff)


def quotient(E: SheafChern, S: SheafChern) -> SheafChern:
    return E - S


def see_saw_terms(S: SheafChern, E: SheafChern, omega: LatticeClass, L: LatticeClass, k) -> tuple[Fraction, Fraction]:
    Q = quotient(E, S)
    phi_e = asymptotic_j_slope_value(E, omega, L, k)
    out = []
    for part in (S, Q):
        tp = twist(part, L)
        weight = poly_eval(tp.omega_ch1(omega), k)
        if part.is_zero():
            out.append(Fraction(0))
            continue
        if weight <= 0:
            raise ValueError(f"nonpositive [omega].ch1 at k={k}")
        out.append(weight * (phi_e - poly_eval(tp.ch2_poly(), k) / weight))
    return out[0], out[1]


def asymptotic_j_slope_value(S: SheafChern, omega: LatticeClass, L: LatticeClass, k) -> Fraction:
    tp = twist(S, L)
    den = poly_eval(tp.omega_ch1(omega), k)
    if den <= 0:
        raise ValueError(f"nonpositive [omega].ch1 at k={k}")
    return poly_eval(tp.ch2_poly(), k) / den


def see_saw_check(S: SheafChern, E: SheafChern, omega: LatticeClass, L: LatticeClass, k_samples: Iterable[int]) -> bool:
    """Check the weighted sub/quotient slope identity exactly at every sample."""
    for k in k_samples:
        a, b = see_saw_terms(S, E, omega, L, k)
        if a + b != 0:
            return False
    return True


class CurveStatus(enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    UNVERIFIED = "UNVERIFIED"


@dataclass(frozen=True)
class CurveReport:
    eta: LatticeClass
    pairings: tuple[Fraction, ...]
    status: CurveStatus


def eta_curve_test(omega: LatticeClass, L: LatticeClass, curves: Sequence[LatticeClass]) -> CurveReport:
    """Strict positivity eta.Y > 0 on the supplied curve classes only."""
    eta = eta_class(omega, L)
    values = tuple(pair(eta, y) for y in curves)
    if not values:
        status = CurveStatus.UNVERIFIED
    elif all(v > 0 for v in values):
        status = CurveStatus.PASS
    else:
        status = CurveStatus.FAIL
    return CurveReport(eta, values, status)
