import random
import time
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jflow import lattice as lat
from jflow import vortexcfg as vc
from jflow.vortexcfg import Tri, VortexParams


def cubic(k):
    return k**3 - 2 * k**2 - 28 * k - 72


# frozen oracle: real root of the cubic from the companion matrix
KAPPA_ORACLE = max(r.real for r in np.roots([1, -2, -28, -72]) if abs(r.imag) < 1e-12)


def oracle_window(r1, r2, kappa=KAPPA_ORACLE):
    lower = ((2 * r1 + 1) * kappa + 4 * r1) / (2 * (4 * r2 - kappa) * (2 * r2 + 1))
    upper = r1 * (r1 + 1) / (2 * r2 * (r2 + 1))
    return lower, upper


def test_kappa0_value_and_residual():
    k = vc.kappa0()
    assert round(k, 4) == 7.2405
    assert abs(cubic(k)) < 1e-10
    assert abs(k - vc.kappa0_radical()) < 1e-10
    assert abs(k - KAPPA_ORACLE) < 1e-12
    assert cubic(7) == -23 and cubic(8) == 88


def test_kappa0_enclosure():
    lo, hi = vc.kappa0_enclosure()
    assert hi - lo <= F(1, 10**12)
    assert cubic(lo) < 0 < cubic(hi)
    assert lo < vc.kappa0() < hi


def test_vortex_chern_examples():
    ch = vc.vortex_chern(VortexParams(7, 3, F(11, 5)))
    assert (ch.ch2, ch.omega_ch1, ch.c) == (104, F(229, 5), F(229, 1040))
    assert ch.ch1 == lat.PRODUCT.cls(15, 14)
    for s in (F(1, 3), F(2), F(17, 4)):
        ch = vc.vortex_chern(VortexParams(1, 1, s))
        assert ch.ch2 == 8 and ch.omega_ch1 == 3 + 6 * s


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60), st.fractions(min_value=F(1, 50), max_value=100, max_denominator=50))
def test_c_positive(r1, r2, s):
    ch = vc.vortex_chern(VortexParams(r1, r2, s))
    assert ch.c > 0 and ch.ch2 > 0 and ch.omega_ch1 > 0
    assert ch.ch2 == 2 * (r1 + 1) * r2 + 2 * r1 * (r2 + 1)
    assert ch.omega_ch1 == 2 * r1 + 1 + 2 * s * (2 * r2 + 1)


def test_vortex_params_validation():
    with pytest.raises(ValueError):
        VortexParams(0, 3, 1)
    with pytest.raises(ValueError):
        VortexParams(7, 3, 0)


def test_window_examples():
    w = vc.admissible_window(7, 3)
    lo, hi = oracle_window(7, 3)
    assert not w.empty
    assert abs(w.lower - lo) < 1e-12 and round(w.lower, 4) == 2.0502
    assert w.upper == F(7, 3)
    assert w.enclosure_width < 1e-6
    w = vc.admissible_window(3, 2)
    assert w.empty and w.upper == 1 and w.lower > 8.25
    with pytest.raises(ValueError, match="r2"):
        vc.admissible_window(5, 1)


def test_window_three_valued_membership():
    w = vc.admissible_window(7, 3)
    assert w.contains(F(11, 5)) is Tri.YES
    assert w.contains(F(205, 100)) is Tri.NO
    assert w.contains(F(7, 3)) is Tri.NO
    lo, hi = w.lower_enclosure
    assert w.contains((lo + hi) / 2) is Tri.UNDECIDED


def test_smallest_nonempty_r1_matches_brute_force():
    t0 = time.perf_counter()
    got = vc.smallest_nonempty_r1(2)
    elapsed = time.perf_counter() - t0
    brute = next(r1 for r1 in range(1, 41) if oracle_window(r1, 2)[0] < oracle_window(r1, 2)[1])
    assert got == brute == 29
    for r1 in range(1, 41):
        assert vc.admissible_window(r1, 2).empty == (r1 < 29)
    assert elapsed < 1.0


def test_alpha_examples():
    p = VortexParams(7, 3, F(11, 5))
    a = vc.alpha_check(p)
    assert a.alpha == F(18590, 17507) and a.alpha_gt_1 and a.agree
    a = vc.alpha_check(VortexParams(7, 3, F(7, 3)))
    assert a.alpha == 1 and not a.alpha_gt_1 and a.agree
    a = vc.alpha_check(VortexParams(7, 3, F(5, 2)))
    assert a.alpha < 1 and a.agree
    r2 = 3
    assert a.roots[0] == F(-1, 2 * (2 * r2 + 1) ** 2) and a.roots[1] == F(7, 3)


def test_kappa_examples():
    p = VortexParams(7, 3, F(11, 5))
    k = vc.kappa_condition(p)
    c = float(vc.vortex_chern(p).c)
    assert abs((4 * c * 3 - 1) - 1.6423) < 1e-4 and abs(vc.kappa0() * c - 1.5943) < 1e-4
    assert k.value and k.agree
    k = vc.kappa_condition(VortexParams(7, 3, F(205, 100)))
    assert not k.value and k.agree
    # monotone in s: holds for every sample above the bound
    for s in (F(21, 10), F(3), F(10), F(1000)):
        assert vc.kappa_condition(VortexParams(7, 3, s)).value


def test_griffith_class_examples():
    g = vc.griffith_class_positivity(VortexParams(7, 3, F(11, 5)))
    assert g.coeff_L == F(1147, 5)
    assert g.coeff_O1 == 2 * (8 * 9 * F(11, 5) + 8 * 3 * F(11, 5) + F(22, 5) + 1) == F(2166, 5)
    assert g.positive
    g = vc.griffith_class_positivity(VortexParams(1, 1, 1))
    assert (g.coeff_L, g.coeff_O1) == (11, 38)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.fractions(min_value=F(1, 30), max_value=50, max_denominator=30))
def test_griffith_class_always_positive_and_lattice_route(r1, r2, s):
    p = VortexParams(r1, r2, s)
    g = vc.griffith_class_positivity(p)
    assert g.positive
    cls = vc.griffith_class_via_lattice(p)
    assert cls == lat.PRODUCT.cls(g.coeff_L, g.coeff_O1)


def admissible_triples():
    out = []
    for r2 in (2, 3, 4):
        for r1 in range(1, 60):
            w = vc.admissible_window(r1, r2)
            if w.empty:
                continue
            lo, hi = w.lower_enclosure[1], w.upper
            for j in (1, 2, 3):
                out.append(VortexParams(r1, r2, lo + (hi - lo) * F(j, 4)))
    return out


def test_admissible_grid_properties():
    triples = admissible_triples()
    assert len(triples) >= 50
    for p in triples:
        E, S1, _ = vc.vortex_bundle(p)
        assert vc.alpha_check(p).alpha_gt_1
        assert vc.kappa_condition(p).value
        assert lat.j_stability_test(S1, E, p.omega) is lat.Stability.STRICT
        assert vc.distinguished_margin(p) > 0


def test_route_agreement_random():
    rng = random.Random(20240613)
    for _ in range(1000):
        p = VortexParams(rng.randint(1, 40), rng.randint(1, 12), F(rng.randint(1, 4000), rng.randint(1, 400)))
        try:
            a = vc.alpha_check(p)
        except ZeroDivisionError:
            a = None
        assert a is None or a.agree
        assert vc.kappa_condition(p).agree


def test_check_report_is_json_ready():
    import json

    rep = vc.check_report(VortexParams(7, 3, F(11, 5)))
    assert json.loads(json.dumps(rep)) == rep
    assert rep["in_window"] == "YES" and rep["c"] == "229/1040"


def test_kappa0_fast():
    t0 = time.perf_counter()
    vc.kappa0.__wrapped__()  # uncached
    assert time.perf_counter() - t0 < 1e-3
