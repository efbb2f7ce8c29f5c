"""Small-volume dHYM residuals for the reduced vortex bundle on a surface.

For n = 2 the charge is Z_eps = -2 ch2 + 2 i eps [w].ch1 + eps^2 [w]^2 ch0 and
the phase Theta_eps = atan2(Im Z, Re Z) sits just below pi for small eps.

Invariant curvature data is multiplied in a small algebra: diagonal slots
are combinations a sigma + b tau of the two Kahler forms, and the only
nonzero product of off-diagonal slots is the mu ^ mubar pairing, which
contributes -W sigma tau to each diagonal entry of F^2.  That sign is fixed
by requiring the eps -> 0 limit to reproduce the J-equation components, and
:func:`calibrate` refuses to proceed if it does not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import lattice as lat
from .lattice import SheafChern, as_rational
from .vortexsolve import (
    STATE_DTYPE,
    Problem,
    ReducedCurvature,
    compute_q,
    compute_W,
    hfs_fs_residuals,
    positivity_quantities,
    reduce_laplacian,
)


class PhaseUndefined(ZeroDivisionError):
    code = "PHASE_UNDEFINED"


class SimplenessFailure(RuntimeError):
    code = "SIMPLENESS_FAILURE"


class Inconclusive(RuntimeError):
    code = "INCONCLUSIVE"


@dataclass(frozen=True)
class PhaseData:
    re_coeffs: tuple[Fraction, Fraction, Fraction]  # Re Z = sum re_k eps^k
    im_coeffs: tuple[Fraction, Fraction, Fraction]

    def Z(self, eps) -> complex:
        e = float(eps)
        re = sum(float(c) * e**k for k, c in enumerate(self.re_coeffs))
        im = sum(float(c) * e**k for k, c in enumerate(self.im_coeffs))
        return complex(re, im)

    def Z_exact(self, eps) -> tuple[Fraction, Fraction]:
        e = as_rational(eps)
        return (sum(c * e**k for k, c in enumerate(self.re_coeffs)),
                sum(c * e**k for k, c in enumerate(self.im_coeffs)))

    def theta(self, eps) -> float:
        z = self.Z(eps)
        if z == 0:
            raise PhaseUndefined(f"Z vanishes at eps={eps}")
        return math.atan2(z.imag, z.real)


def z_epsilon(E: SheafChern, omega: lat.LatticeClass) -> PhaseData:
    """Coefficients of n!/k! i^(n-k) eps^k [w]^k ch_{n-k} for n = 2."""
    ww = lat.pair(omega, omega)
    wc = lat.pair(omega, E.ch1)
    return PhaseData((-2 * E.ch2, Fraction(0), ww * E.rank), (Fraction(0), 2 * wc, Fraction(0)))


def phase_for(problem: Problem) -> PhaseData:
    from .vortexcfg import vortex_bundle

    E, _, _ = vortex_bundle(problem.params)
    return z_epsilon(E, problem.params.omega)


# ---------------------------------------------------------------------------
# invariant algebra


@dataclass(frozen=True)
class Diag:
    """a sigma + b tau, fieldwise."""

    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class InvariantMatrix:
    """2x2 matrix of (1,1)-forms: diagonal Diag slots plus an off-diagonal mu coefficient.

    F_12 = m mu and F_21 = m mubar with |m|^2 = W.
    """

    d1: Diag
    d2: Diag
    W: np.ndarray

    # mu ^ mubar contributes PAIRING_SIGN * W sigma tau to each diagonal entry
    PAIRING_SIGN = -1


def wedge_diag(x: Diag, y: Diag) -> np.ndarray:
    """sigma tau coefficient of x ^ y (sigma^2 = tau^2 = 0)."""
    return x.a * y.b + x.b * y.a


def square(F: InvariantMatrix, pairing_sign: int | None = None):
    """(F^2) as (diag11, diag22, offdiag12, offdiag21) in sigma tau units.

    Off-diagonal entries are d_i ^ mu terms, which vanish because
    sigma ^ mu = tau ^ mu = 0 by bidegree.
    """
    sgn = F.PAIRING_SIGN if pairing_sign is None else pairing_sign
    f11 = wedge_diag(F.d1, F.d1) + sgn * F.W
    f22 = wedge_diag(F.d2, F.d2) + sgn * F.W
    zero = np.zeros_like(f11)
    return f11, f22, zero, zero


def curvature_matrix(curv: ReducedCurvature, problem: Problem) -> tuple[InvariantMatrix, Diag]:
    r1, r2, s = problem.r1, problem.r2, problem.s
    d1 = Diag(curv.Fh_hat + curv.Ff_hat + r1, 2 * r2 + curv.q)
    d2 = Diag(curv.Ff_hat + r1, 2 * r2 + 2 - curv.q)
    one = np.ones_like(curv.q)
    omega = Diag(s * one, one)
    return InvariantMatrix(d1, d2, curv.W), omega


def _components(curv, problem, cos_t, sin_over_2eps, eps, pairing_sign=None):
    F, omega = curvature_matrix(curv, problem)
    f11, f22, o12, o21 = square(F, pairing_sign)
    ww = wedge_diag(omega, omega)
    out = []
    for d, f in ((F.d1, f11), (F.d2, f22)):
        wd = wedge_diag(omega, d)
        # diagonal of M^2 = eps^2 w^2 + 2 i eps w F - F^2, weighted by e^{-i Theta}/(2 eps)
        out.append(cos_t * wd - sin_over_2eps * (eps * eps * ww - f))
    offdiag_zero = bool(np.all(o12 == 0) and np.all(o21 == 0))
    return out[0], out[1], offdiag_zero


def reduced_dhym_residual(curv: ReducedCurvature, problem: Problem, eps: float, calibrated: bool = True):
    """(res1, res2, offdiag_zero) of (1/(2 eps)) Im(e^{-i Theta} (eps w Id + i F)^2)."""
    if calibrated:
        calibrate(curv, problem)
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    th = phase_for(problem).theta(eps)
    return _components(curv, problem, math.cos(th), math.sin(th) / (2 * eps), eps)


def calibration_limit(curv, problem, pairing_sign=None):
    """eps -> 0 limit: cos Theta -> -1, sin Theta / (2 eps) -> c."""
    return _components(curv, problem, -1.0, problem.c, 0.0, pairing_sign)


def calibrate(curv: ReducedCurvature, problem: Problem) -> int:
    """Check that exactly one pairing sign reproduces the J-equation components."""
    j1, j2 = hfs_fs_residuals(curv, problem)
    scale = 1.0 + float(np.max(np.abs(curv.W)))
    good = []
    for sgn in (-1, 1):
        l1, l2, _ = calibration_limit(curv, problem, sgn)
        err = max(float(np.max(np.abs(l1 - j1))), float(np.max(np.abs(l2 - j2))))
        if err <= 1e-12 * scale * 100:
            good.append(sgn)
    if good != [InvariantMatrix.PAIRING_SIGN]:
        raise RuntimeError(f"invariant algebra sign table is not calibrated (matching signs: {good})")
    return good[0]


def residual_sup(curv, problem, eps) -> float:
    r1, r2, _ = reduced_dhym_residual(curv, problem, eps, calibrated=False)
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def j_floor(curv, problem) -> float:
    j1, j2 = hfs_fs_residuals(curv, problem)
    return float(max(np.max(np.abs(j1)), np.max(np.abs(j2))))


@dataclass(frozen=True)
class ScalingFit:
    eps: np.ndarray
    residuals: np.ndarray
    used: np.ndarray
    slope: float
    floor: float


def fit_slope(eps, values) -> float:
    return float(np.polyfit(np.log(eps), np.log(values), 1)[0])


def scaling_fit(curv, problem, eps_list, floor: float | None = None) -> ScalingFit:
    eps = np.asarray(sorted(eps_list), dtype=float)
    if np.any(eps > 1) or np.any(eps <= 0):
        raise ValueError("eps values must lie in (0, 1]")
    if math.log10(eps[-1] / eps[0]) < 1.5:
        raise ValueError("eps_list must span at least 1.5 decades")
    calibrate(curv, problem)
    floor = j_floor(curv, problem) if floor is None else floor
    if floor >= 1e-6:
        raise Inconclusive(f"J-residual floor {floor:.3g} is not below 1e-6")
    res = np.array([residual_sup(curv, problem, e) for e in eps])
    used = res >= 10 * floor
    if used.sum() < 2:
        raise Inconclusive("fewer than two residuals above ten times the floor")
    return ScalingFit(eps, res, used, fit_slope(eps[used], res[used]), floor)


# ---------------------------------------------------------------------------
# one Newton step in the invariant metric variables (psi, rho)


def curvature_from_fields(psi, rho, problem: Problem) -> ReducedCurvature:
    grid = problem.grid
    return ReducedCurvature(
        x=grid.x,
        psi=psi,
        q=compute_q(psi, problem),
        Fh_hat=1.0 + reduce_laplacian(psi, grid),
        Ff_hat=reduce_laplacian(rho, grid),
        W=compute_W(psi, problem),
        rho=rho,
    )


def _stacked(psi, rho, problem, eps):
    r1, r2, _ = reduced_dhym_residual(curvature_from_fields(psi, rho, problem), problem, eps, calibrated=False)
    return np.concatenate([r1, r2])


def dhym_jacobian(psi, rho, problem: Problem, eps: float, step: float = 1e-7) -> sp.csr_matrix:
    """Finite-difference Jacobian of the stacked residual in (psi, rho).

    Each residual entry depends on the unknowns in cells i-1..i+1 only, so
    three colours per field recover every column from six central differences.
    """
    N = problem.N
    psi = np.asarray(psi, dtype=STATE_DTYPE)
    rho = np.asarray(rho, dtype=STATE_DTYPE)
    rows, cols, vals = [], [], []
    idx = np.arange(N)
    for field in (0, 1):
        for colour in range(3):
            mask = (idx % 3) == colour
            dv = np.where(mask, step, 0.0).astype(STATE_DTYPE)
            if field == 0:
                plus, minus = _stacked(psi + dv, rho, problem, eps), _stacked(psi - dv, rho, problem, eps)
            else:
                plus, minus = _stacked(psi, rho + dv, problem, eps), _stacked(psi, rho - dv, problem, eps)
            diff = np.asarray((plus - minus) / (2 * step), dtype=float)
            for block in (0, 1):
                for off in (-1, 0, 1):
                    i = idx
                    j = idx + off
                    ok = (j >= 0) & (j < N)
                    ok &= (j % 3) == colour
                    rows.append(block * N + i[ok])
                    cols.append(field * N + j[ok])
                    vals.append(diff[block * N + i[ok]])
    rows, cols, vals = (np.concatenate(a) for a in (rows, cols, vals))
    return sp.csr_matrix((vals, (rows, cols)), shape=(2 * N, 2 * N))


@dataclass(frozen=True)
class NewtonResult:
    psi: np.ndarray
    rho: np.ndarray
    curv: ReducedCurvature
    pre: float
    post: float
    multiplier: float

    @property
    def ratio(self) -> float:
        return self.post / self.pre if self.pre > 0 else 0.0


def newton_correction(curv: ReducedCurvature, problem: Problem, eps: float) -> NewtonResult:
    """One linear solve for (d psi, d rho) against the reduced dHYM residual.

    rho is only defined up to a constant, so the linearisation has a
    one-dimensional kernel.  It is removed with a bordered system: the
    correction to rho has zero mean and a scalar multiplier absorbs the part
    of the residual outside the range.
    """
    N = problem.N
    psi = np.asarray(curv.psi, dtype=STATE_DTYPE)
    rho = np.asarray(curv.rho, dtype=STATE_DTYPE)
    calibrate(curv, problem)
    r = _stacked(psi, rho, problem, eps)
    pre = float(np.max(np.abs(r)))
    if pre == 0.0:
        return NewtonResult(psi, rho, curv, 0.0, 0.0, 0.0)
    J = dhym_jacobian(psi, rho, problem, eps)
    gauge = np.concatenate([np.zeros(N), np.ones(N)]) / N
    border = np.concatenate([np.zeros(N), np.ones(N)])
    A = sp.bmat([[J, sp.csr_matrix(border[:, None])], [sp.csr_matrix(gauge[None, :]), None]], format="csc")
    rhs = np.concatenate([-np.asarray(r, dtype=float), [0.0]])
    with np.errstate(all="ignore"):
        try:
            sol = spla.spsolve(A, rhs)
        except RuntimeError as exc:  # singular factorisation
            raise SimplenessFailure(str(exc)) from None
    if not np.all(np.isfinite(sol)) or np.max(np.abs(A @ sol - rhs)) > 1e-6 * max(1.0, np.max(np.abs(rhs))):
        raise SimplenessFailure("linearised dHYM system is singular beyond the gauge direction")
    dpsi, drho, lam = sol[:N], sol[N:2 * N], sol[-1]
    psi2, rho2 = psi + dpsi, rho + drho
    post = float(np.max(np.abs(_stacked(psi2, rho2, problem, eps))))
    return NewtonResult(psi2, rho2, curvature_from_fields(psi2, rho2, problem), pre, post, float(lam))


def linearized_rank(curv, problem, eps, tol: float = 1e-9) -> int:
    """Numerical rank of the dense Jacobian (small grids only)."""
    J = dhym_jacobian(curv.psi, curv.rho, problem, eps).toarray()
    sv = np.linalg.svd(J, compute_uv=False)
    return int(np.sum(sv > tol * sv[0]))


# ---------------------------------------------------------------------------
# positivity and branch checks


def dhym_positivity(curv: ReducedCurvature, problem: Problem, eps: float) -> dict[str, np.ndarray]:
    """Reduced dHYM positivity quantities at eps.

    The dHYM form equals -2 eps cos(Theta) times the J-positivity form with c
    replaced by c_eps = -tan(Theta) / (2 eps), which tends to c.
    """
    th = phase_for(problem).theta(eps)
    c_eps = -math.tan(th) / (2 * eps)
    scale = -2 * eps * math.cos(th)
    return {k: scale * v for k, v in positivity_quantities(curv, problem, c=c_eps).items()}


def positivity_threshold(curv, problem, eps_list) -> float | None:
    """Largest eps in the list below which every sample matches the J-positivity signs."""
    ref = {k: np.sign(v) for k, v in positivity_quantities(curv, problem).items()}
    best = None
    for e in sorted(eps_list):
        th = phase_for(problem).theta(e)
        d = dhym_positivity(curv, problem, e)
        want = np.sign(-math.cos(th))
        ok = all(np.array_equal(np.sign(d[k]), want * ref[k]) for k in ref)
        if not ok:
            break
        best = e
    return best


def branch_continuous(phase: PhaseData, eps_list) -> bool:
    eps = sorted(eps_list)
    thetas = [phase.theta(e) for e in eps]
    return all(abs(b - a) < math.pi / 2 for a, b in zip(thetas, thetas[1:]))


def synthetic_j_solution(problem: Problem, seed: int = 0) -> ReducedCurvature:
    """Fields satisfying both reduced J-equation components to rounding.

    q and W are smooth positive profiles; the diagonal curvatures are then
    solved pointwise from the two components.
    """
    rng = np.random.default_rng(seed)
    c, s, r1, r2 = problem.c, problem.s, problem.r1, problem.r2
    x = problem.grid.x
    q = problem.lambda2 * x * (1.0 + 0.1 * rng.uniform() * np.sin(np.pi * x))
    W = problem.lambda2 * (1 - x) * (1.0 + 0.1 * rng.uniform() * np.cos(np.pi * x)) ** 2
    A = (c * W + 2 * r2 * s + s * q) / (2 * c * (2 * r2 + q) - 1)
    B = (c * W + (2 * r2 + 2) * s - s * q) / (2 * c * (2 * r2 + 2 - q) - 1)
    Fh = A - B
    Ff = B - r1
    zero = np.zeros_like(x)
    return ReducedCurvature(x=x, psi=zero, q=q, Fh_hat=Fh, Ff_hat=Ff, W=W, rho=zero)
