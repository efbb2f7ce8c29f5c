"""Closed-form analysis of vortex-bundle parameters (r1, r2, s).

The vortex bundle lives on Sigma x CP^1 with omega = s A + B in the
:data:`~jflow.lattice.PRODUCT` lattice (A = c1(L), B = c1(O(1))).  Chern
data, c and alpha are exact rationals; only comparisons against the
irrational kappa0 go through a verified rational enclosure.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from . import lattice as lat
from .lattice import PRODUCT, SheafChern, as_rational


def _cubic(k):
    return k**3 - 2 * k**2 - 28 * k - 72


@functools.lru_cache(maxsize=None)
def kappa0() -> float:
    """Positive root of k^3 - 2k^2 - 28k - 72."""
    return brentq(_cubic, 7.0, 8.0, xtol=1e-15, rtol=1e-15, maxiter=200)


def kappa0_radical() -> float:
    """Closed radical form of kappa0, used only as a cross-check."""
    s3 = math.sqrt(3.0)
    return float((2.0 + np.cbrt(1232.0 - 528.0 * s3) + 2.0 * np.cbrt(22.0 * (7.0 + 3.0 * s3))) / 3.0)


ENCLOSURE_HALF_WIDTH = Fraction(1, 2 * 10**12)


@functools.lru_cache(maxsize=None)
def kappa0_enclosure() -> tuple[Fraction, Fraction]:
    """Rational (lo, hi) with hi - lo = 1e-12 and a verified sign change of the cubic."""
    mid = Fraction(kappa0()).limit_denominator(10**15)
    lo, hi = mid - ENCLOSURE_HALF_WIDTH, mid + ENCLOSURE_HALF_WIDTH
    if not (_cubic(lo) < 0 < _cubic(hi)):
        raise ArithmeticError("kappa0 enclosure failed to bracket the root")
    return lo, hi


@dataclass(frozen=True)
class VortexParams:
    r1: int
    r2: int
    s: Fraction

    def __post_init__(self):
        object.__setattr__(self, "s", as_rational(self.s))
        if int(self.r1) != self.r1 or int(self.r2) != self.r2:
            raise ValueError("r1, r2 must be integers")
        if self.r1 < 1 or self.r2 < 1:
            raise ValueError("r1, r2 must be positive")
        if self.s <= 0:
            raise ValueError("s must be positive")

    @property
    def omega(self) -> lat.LatticeClass:
        return PRODUCT.cls(self.s, 1)


def vortex_bundle(p: VortexParams) -> tuple[SheafChern, SheafChern, SheafChern]:
    """(E, S1, S2): the bundle and its two line-bundle summands on PRODUCT.

    S1 = pi1*((r1+1)L) (x) pi2*(r2 O(2)) is the holomorphic subbundle.
    """
    s1 = SheafChern.line_bundle(PRODUCT.cls(p.r1 + 1, 2 * p.r2))
    s2 = SheafChern.line_bundle(PRODUCT.cls(p.r1, 2 * p.r2 + 2))
    return s1 + s2, s1, s2


@dataclass(frozen=True)
class VortexChern:
    ch1: lat.LatticeClass
    omega_ch1: Fraction
    ch2: Fraction
    c: Fraction


def vortex_chern(p: VortexParams) -> VortexChern:
    r1, r2, s = p.r1, p.r2, p.s
    ch1 = PRODUCT.cls(2 * r1 + 1, 2 * (2 * r2 + 1))
    omega_ch1 = 2 * r1 + 1 + 2 * s * (2 * r2 + 1)
    ch2 = Fraction(2 * (r1 + 1) * r2 + 2 * r1 * (r2 + 1))
    c = omega_ch1 / (2 * ch2)
    # the same numbers through the lattice, as a consistency guard
    E, _, _ = vortex_bundle(p)
    assert E.ch1 == ch1 and E.ch2 == ch2
    assert lat.pair(p.omega, E.ch1) == omega_ch1
    assert omega_ch1 > 0 and ch2 > 0 and c > 0
    return VortexChern(ch1, omega_ch1, ch2, c)


def j_constant(p: VortexParams) -> Fraction:
    r1, r2, s = p.r1, p.r2, p.s
    return (2 * r1 + 1 + 2 * s * (2 * r2 + 1)) / (4 * (r1 + 1) * r2 + 4 * r1 * (r2 + 1))


class Tri(enum.Enum):
    YES = "YES"
    NO = "NO"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class Window:
    r1: int
    r2: int
    lower: float
    upper: Fraction
    lower_enclosure: tuple[Fraction, Fraction]

    @property
    def empty(self) -> bool:
        return self.lower_enclosure[0] >= self.upper

    @property
    def enclosure_width(self) -> Fraction:
        return self.lower_enclosure[1] - self.lower_enclosure[0]

    def contains(self, s) -> Tri:
        s = as_rational(s)
        lo, hi = self.lower_enclosure
        if s >= self.upper or s <= lo:
            return Tri.NO
        if s > hi:
            return Tri.YES
        return Tri.UNDECIDED


def _lower_bound(r1: int, r2: int, kappa):
    return ((2 * r1 + 1) * kappa + 4 * r1) / (2 * (4 * r2 - kappa) * (2 * r2 + 1))


def admissible_window(r1: int, r2: int) -> Window:
    """Open s-interval of the existence theorem for vortex bundles.

    The lower bound is increasing in kappa (for kappa < 4 r2), so the kappa0
    enclosure maps to an enclosure of the lower bound.
    """
    if r2 < 2:
        raise ValueError("admissible window requires r2 >= 2 (hypothesis of the existence theorem)")
    if r1 < 1:
        raise ValueError("r1 must be positive")
    klo, khi = kappa0_enclosure()
    enc = (_lower_bound(r1, r2, klo), _lower_bound(r1, r2, khi))
    upper = Fraction(r1 * (r1 + 1), 2 * r2 * (r2 + 1))
    return Window(r1, r2, float(_lower_bound(r1, r2, kappa0())), upper, enc)


def smallest_nonempty_r1(r2: int, r1_max: int = 200) -> int | None:
    for r1 in range(1, r1_max + 1):
        if not admissible_window(r1, r2).empty:
            return r1
    return None


@dataclass(frozen=True)
class AlphaCheck:
    alpha: Fraction
    alpha_gt_1: bool
    roots: tuple[Fraction, Fraction]
    by_roots: bool

    @property
    def agree(self) -> bool:
        return self.alpha_gt_1 == self.by_roots


def alpha_value(p: VortexParams) -> Fraction:
    c = j_constant(p)
    prod = (4 * c * p.r2 - 1 + 4 * c) * (4 * c * p.r2 - 1)
    if prod == 0:
        raise ZeroDivisionError("alpha undefined: 4 c r2 = 1")
    return 2 * p.s / prod


def g_poly(p: VortexParams, s=None) -> Fraction:
    """G(s) = ((r1+1)r2 + r1(r2+1))^2 (2s - (4cr2-1+4c)(4cr2-1)), expanded."""
    r1, r2 = p.r1, p.r2
    s = p.s if s is None else as_rational(s)
    a = r1 * (r1 + 1)
    b = r2 * (r2 + 1)
    m = (2 * r2 + 1) ** 2
    return -4 * b * m * s * s + 2 * (a * m - b) * s + a


def alpha_check(p: VortexParams) -> AlphaCheck:
    """alpha > 1, computed directly and by locating s between the roots of G.

    The root comparison is equivalent to alpha > 1 only where
    (4cr2-1)(4cr2-1+4c) > 0; 4cr2-1+4c is always positive, and 4cr2 > 1
    holds exactly when s > r1 / (2 r2 (2 r2 + 1)).
    """
    r1, r2, s = p.r1, p.r2, p.s
    roots = (Fraction(-1, 2 * (2 * r2 + 1) ** 2), Fraction(r1 * (r1 + 1), 2 * r2 * (r2 + 1)))
    product_positive = s > Fraction(r1, 2 * r2 * (2 * r2 + 1))
    by_roots = product_positive and roots[0] < s < roots[1]
    alpha = alpha_value(p)
    return AlphaCheck(alpha, alpha > 1, roots, by_roots)


@dataclass(frozen=True)
class KappaCheck:
    margin: float           # 4 c r2 - 1 - kappa0 c
    direct: Tri
    by_window: Tri

    @property
    def value(self) -> bool:
        if self.direct is Tri.UNDECIDED:
            raise ArithmeticError("kappa condition undecided at enclosure resolution")
        return self.direct is Tri.YES

    @property
    def agree(self) -> bool:
        return self.direct == self.by_window


def kappa_condition(p: VortexParams) -> KappaCheck:
    """4 c r2 - 1 > kappa0 c, evaluated directly and via the window's lower bound."""
    c = j_constant(p)
    klo, khi = kappa0_enclosure()
    # margin is decreasing in kappa since c > 0
    m_hi = 4 * c * p.r2 - 1 - klo * c
    m_lo = 4 * c * p.r2 - 1 - khi * c
    if m_lo > 0:
        direct = Tri.YES
    elif m_hi <= 0:
        direct = Tri.NO
    else:
        direct = Tri.UNDECIDED
    r1, r2, s = p.r1, p.r2, p.s
    if 4 * r2 <= khi:
        by_window = Tri.NO if 4 * r2 < klo else Tri.UNDECIDED
    else:
        lo = _lower_bound(r1, r2, klo)
        hi = _lower_bound(r1, r2, khi)
        by_window = Tri.YES if s > hi else (Tri.NO if s <= lo else Tri.UNDECIDED)
    margin = float(4 * c * p.r2 - 1) - kappa0() * float(c)
    return KappaCheck(margin, direct, by_window)


@dataclass(frozen=True)
class GriffithClass:
    coeff_L: Fraction
    coeff_O1: Fraction

    @property
    def positive(self) -> bool:
        return self.coeff_L > 0 and self.coeff_O1 > 0


def griffith_class_positivity(p: VortexParams) -> GriffithClass:
    """Coefficients of 2 ch2 (c c1(E) - [omega]) in the basis (c1(L), c1(O(1)))."""
    r1, r2, s = p.r1, p.r2, p.s
    out = GriffithClass(4 * r1 * r1 + 4 * r1 + 2 * s + 1, 2 * (8 * r2 * r2 * s + 8 * r2 * s + 2 * s + 1))
    assert out.positive
    return out


def griffith_class_via_lattice(p: VortexParams) -> lat.LatticeClass:
    E, _, _ = vortex_bundle(p)
    c = lat.j_constant(E, p.omega)
    return (E.ch1.scale(c) - p.omega).scale(2 * E.ch2)


def distinguished_margin(p: VortexParams) -> Fraction:
    """J-stability margin of the subbundle S1 inside E."""
    E, s1, _ = vortex_bundle(p)
    return lat.j_stability_margin(s1, E, p.omega)


def check_report(p: VortexParams) -> dict:
    """All predicate results for one parameter triple, JSON-ready."""
    ch = vortex_chern(p)
    E, s1, _ = vortex_bundle(p)
    out = {
        "r1": p.r1,
        "r2": p.r2,
        "s": lat.format_rational(p.s),
        "ch2": lat.format_rational(ch.ch2),
        "omega_ch1": lat.format_rational(ch.omega_ch1),
        "c": lat.format_rational(ch.c),
        "kappa0": kappa0(),
    }
    try:
        a = alpha_check(p)
        out["alpha"] = lat.format_rational(a.alpha)
        out["alpha_gt_1"] = a.alpha_gt_1
        out["alpha_routes_agree"] = a.agree
    except ZeroDivisionError:
        out["alpha"] = None
        out["alpha_gt_1"] = False
        out["alpha_routes_agree"] = True
    k = kappa_condition(p)
    out["kappa_condition"] = k.direct.value
    out["kappa_margin"] = k.margin
    out["kappa_routes_agree"] = k.agree
    g = griffith_class_positivity(p)
    out["griffith_class"] = [lat.format_rational(g.coeff_L), lat.format_rational(g.coeff_O1)]
    out["j_stability_S1"] = lat.j_stability_test(s1, E, p.omega).value
    if p.r2 >= 2:
        w = admissible_window(p.r1, p.r2)
        out["window"] = None if w.empty else [w.lower, float(w.upper)]
        out["in_window"] = w.contains(p.s).value
    else:
        out["window"] = None
        out["in_window"] = Tri.NO.value
    return out
