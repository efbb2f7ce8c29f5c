"""Exact checks for the Fubini-Study metric on the tangent bundle of CP^n.

Everything is evaluated at the origin of an affine chart, where the curvature
of the induced metric is

    (F)_{ab} = delta_{ab} omega + (i/2pi) dz^a ^ dzbar^b,
    omega    = sum_k (i/2pi) dz^k ^ dzbar^k.

A matrix of (p,p)-forms is stored sparsely: for each matrix slot (a, b), a map
from index tuples (I, J) to the rational coefficient of
prod_k (i/2pi) dz^{I_k} ^ dzbar^{J_k}.  Such products only depend on the
ordering of I and J through the two permutation signs, so every key is kept
with I and J sorted.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import numpy as np

MAX_N = 4

Key = tuple[tuple[int, ...], tuple[int, ...]]


def _sort_sign(seq: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """(sign, sorted) for a sequence of distinct indices; sign 0 on repeats."""
    if len(set(seq)) != len(seq):
        return 0, seq
    inversions = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])
    return (-1 if inversions % 2 else 1), tuple(sorted(seq))


def _check_n(n: int):
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must lie in 1..{MAX_N}")


@dataclass
class MatrixFormPoly:
    n: int
    rank: int
    degree: int
    entries: dict[tuple[int, int], dict[Key, Fraction]] = field(default_factory=dict)

    def coeff(self, a: int, b: int, key: Key) -> Fraction:
        return self.entries.get((a, b), {}).get(key, Fraction(0))

    def add_term(self, a: int, b: int, I, J, value):
        sI, I = _sort_sign(tuple(I))
        sJ, J = _sort_sign(tuple(J))
        if sI * sJ == 0 or value == 0:
            return
        slot = self.entries.setdefault((a, b), {})
        v = slot.get((I, J), Fraction(0)) + sI * sJ * Fraction(value)
        if v:
            slot[(I, J)] = v
        else:
            slot.pop((I, J), None)

    def is_zero(self) -> bool:
        return not any(self.entries.values())

    def __sub__(self, other: "MatrixFormPoly") -> "MatrixFormPoly":
        out = self.scale(1)
        for (a, b), slot in other.entries.items():
            for (I, J), v in slot.items():
                out.add_term(a, b, I, J, -v)
        return out

    def scale(self, k) -> "MatrixFormPoly":
        k = Fraction(k)
        out = MatrixFormPoly(self.n, self.rank, self.degree)
        for (a, b), slot in self.entries.items():
            for (I, J), v in slot.items():
                out.add_term(a, b, I, J, k * v)
        return out

    def top_coefficients(self) -> list[list[Fraction]]:
        """Matrix of coefficients of the volume element prod_k (i/2pi) dz^k dzbar^k."""
        if self.degree != self.n:
            raise ValueError("not a top-degree form")
        top = (tuple(range(self.n)), tuple(range(self.n)))
        return [[self.coeff(a, b, top) for b in range(self.rank)] for a in range(self.rank)]

    def trace(self) -> "MatrixFormPoly":
        out = MatrixFormPoly(self.n, 1, self.degree)
        for a in range(self.rank):
            for (I, J), v in self.entries.get((a, a), {}).items():
                out.add_term(0, 0, I, J, v)
        return out


def identity(n: int, rank: int) -> MatrixFormPoly:
    out = MatrixFormPoly(n, rank, 0)
    for a in range(rank):
        out.add_term(a, a, (), (), 1)
    return out


def omega_form(n: int, rank: int = 1) -> MatrixFormPoly:
    """omega_FS times the identity matrix."""
    out = MatrixFormPoly(n, rank, 1)
    for a in range(rank):
        for k in range(n):
            out.add_term(a, a, (k,), (k,), 1)
    return out


def wedge(A: MatrixFormPoly, B: MatrixFormPoly) -> MatrixFormPoly:
    """Matrix product with the exterior product on the form parts."""
    if A.n != B.n or A.rank != B.rank:
        raise ValueError("incompatible operands")
    if A.degree + B.degree > A.n:
        raise ValueError("degree overflow")
    out = MatrixFormPoly(A.n, A.rank, A.degree + B.degree)
    for (a, b), slot_a in A.entries.items():
        for c in range(A.rank):
            slot_b = B.entries.get((b, c))
            if not slot_b:
                continue
            for (I1, J1), v1 in slot_a.items():
                for (I2, J2), v2 in slot_b.items():
                    out.add_term(a, c, I1 + I2, J1 + J2, v1 * v2)
    return out


def power(A: MatrixFormPoly, k: int) -> MatrixFormPoly:
    out = identity(A.n, A.rank)
    for _ in range(k):
        out = wedge(out, A)
    return out


@dataclass(frozen=True)
class CurvatureTensor:
    n: int
    F: tuple  # F[a][b][i][j]

    def as_form(self) -> MatrixFormPoly:
        out = MatrixFormPoly(self.n, self.n, 1)
        for a, b, i, j in itertools.product(range(self.n), repeat=4):
            out.add_term(a, b, (i,), (j,), self.F[a][b][i][j])
        return out

    def hermitian(self) -> bool:
        r = range(self.n)
        return all(self.F[a][b][i][j] == self.F[b][a][j][i] for a in r for b in r for i in r for j in r)


def fs_curvature(n: int) -> CurvatureTensor:
    _check_n(n)
    r = range(n)
    F = tuple(
        tuple(
            tuple(tuple(Fraction(int(i == j and a == b) + int(i == a and j == b)) for j in r) for i in r)
            for b in r
        )
        for a in r
    )
    return CurvatureTensor(n, F)


def chern_invariants(n: int) -> tuple[Fraction, Fraction]:
    """(n ch_n, [omega].ch_{n-1}) of T'CP^n from its Chern classes.

    Works in Q[H]/(H^{n+1}) with int H^n = 1, c_k = binom(n+1, k) H^k, and
    power sums from Newton's identities; ch_0 is the rank n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    e = [Fraction(comb(n + 1, k)) for k in range(n + 1)]  # coefficient of H^k
    p = [Fraction(n)]
    for k in range(1, n + 1):
        total = (-1) ** (k - 1) * k * e[k]
        for i in range(1, k):
            total += (-1) ** (k - 1 + i) * e[k - i] * p[i]
        p.append(total)
    ch = [p[k] / factorial(k) for k in range(n + 1)]
    return n * ch[n], ch[n - 1]


def chern_invariants_by_curvature(n: int) -> tuple[Fraction, Fraction]:
    """Same pair from tr(F^k)/k! at the origin; FS is homogeneous and int omega^n = 1."""
    _check_n(n)
    F = fs_curvature(n).as_form()
    vol = factorial(n)  # omega^n = n! * volume element

    def integral(form: MatrixFormPoly) -> Fraction:
        return form.top_coefficients()[0][0] / vol

    chn = integral(power(F, n).trace()) / factorial(n)
    ch_prev = wedge(omega_form(n), power(F, n - 1).trace())
    return n * chn, integral(ch_prev) / factorial(n - 1)


def j_constant(n: int) -> Fraction:
    ncn, wcn = chern_invariants(n)
    return wcn / ncn


@dataclass(frozen=True)
class JResidualReport:
    n: int
    c: Fraction
    residual_zero: bool
    Fn_factor: Fraction | None         # F^n = factor * omega^n * Id, None if not scalar
    omega_Fn1_factor: Fraction | None  # omega Id F^{n-1} = factor * omega^n * Id
    residual: MatrixFormPoly

    @property
    def expected_factor(self) -> Fraction:
        return 1 + Fraction(1, self.n)


def _scalar_factor(M: MatrixFormPoly) -> Fraction | None:
    """f with M = f omega^n Id, or None."""
    top = M.top_coefficients()
    d = top[0][0]
    for a in range(M.rank):
        for b in range(M.rank):
            if top[a][b] != (d if a == b else 0):
                return None
    # all non-top keys vanish automatically for a top-degree form
    return d / factorial(M.n)


def j_residual(n: int) -> JResidualReport:
    """c F^n - omega Id F^{n-1} for the FS metric, in exact arithmetic."""
    _check_n(n)
    F = fs_curvature(n).as_form()
    Fn = power(F, n)
    rhs = wedge(omega_form(n, n), power(F, n - 1))
    c = j_constant(n)
    res = Fn.scale(c) - rhs
    return JResidualReport(n, c, res.is_zero(), _scalar_factor(Fn), _scalar_factor(rhs), res)


# ---------------------------------------------------------------------------
# n = 2 positivity

# variable order for a_{ab,m}, indices 1-based as in the displayed form
GRAM_LABELS = [(a, b, m) for a in (1, 2) for b in (1, 2) for m in (1, 2)]


def _idx(a, b, m) -> int:
    return GRAM_LABELS.index((a, b, m))


def gram_matrix_exact() -> list[list[Fraction]]:
    """Hermitian (here real symmetric) matrix of the quadratic form Q(a) = a^* G a."""
    G = [[Fraction(0)] * 8 for _ in range(8)]

    def sq(v):
        G[v][v] += 1

    def cross(u, v):
        # -2 Re a_u conj(a_v)
        G[u][v] -= 1
        G[v][u] -= 1

    for lab in GRAM_LABELS:
        sq(_idx(*lab))
    for al in (1, 2):
        sq(_idx(1, al, 2))
        sq(_idx(2, al, 1))
        cross(_idx(2, al, 2), _idx(1, al, 1))
        sq(_idx(al, 1, 2))
        sq(_idx(al, 2, 1))
        cross(_idx(al, 1, 2), _idx(al, 2, 1))
    return G


def quadratic_form(a: dict[tuple[int, int, int], complex]) -> complex:
    """Q(a) evaluated term by term from its definition (independent of the matrix)."""
    g = lambda *k: a.get(k, 0)
    total = sum(abs(g(*lab)) ** 2 for lab in GRAM_LABELS)
    for al in (1, 2):
        total += abs(g(1, al, 2)) ** 2 + abs(g(2, al, 1)) ** 2
        total -= 2 * (g(2, al, 2) * np.conj(g(1, al, 1))).real
        total += abs(g(al, 1, 2)) ** 2 + abs(g(al, 2, 1)) ** 2
        total -= 2 * (g(al, 1, 2) * np.conj(g(al, 2, 1))).real
    return total


def _exact_rank(M: list[list[Fraction]]) -> int:
    A = [row[:] for row in M]
    rank, rows, cols = 0, len(A), len(A[0])
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if A[r][col] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(rows):
            if r != rank and A[r][col] != 0:
                f = A[r][col] / A[rank][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class GramReport:
    gram: np.ndarray
    min_eig: float
    max_eig: float
    normalized_min_eig: float
    real_rank: int
    eig_residual: float


def realify(G: np.ndarray) -> np.ndarray:
    """16x16 real form of a Hermitian 8x8 matrix acting on (Re a, Im a)."""
    return np.block([[G.real, -G.imag], [G.imag, G.real]])


def j_positivity_gram() -> GramReport:
    Gq = gram_matrix_exact()
    G = np.array([[float(v) for v in row] for row in Gq], dtype=complex)
    R = realify(G)
    w, V = np.linalg.eigh(R)
    resid = float(np.max(np.abs(R @ V - V * w)))
    if resid > 1e-12:
        raise ArithmeticError(f"eigensolver residual {resid:.3g} above 1e-12")
    Rq = [[Fraction(v) for v in row] for row in (np.block([[np.array(Gq, dtype=object), np.zeros((8, 8), dtype=object)],
                                                           [np.zeros((8, 8), dtype=object), np.array(Gq, dtype=object)]]))]
    return GramReport(G, float(w[0]), float(w[-1]), float(w[0] / w[-1]), _exact_rank(Rq), resid)


@dataclass(frozen=True)
class GriffithReport:
    spectra: list[np.ndarray]
    min_eig: float
    trace_margin: float

    @property
    def positive(self) -> bool:
        return self.min_eig > 0 and self.trace_margin > 0


def griffith_block(xi: np.ndarray) -> tuple[np.ndarray, float]:
    """(A, D): curvature and omega evaluated on (xi, conj xi) at the origin, n = 2."""
    xi = np.asarray(xi, dtype=complex)
    A = np.vdot(xi, xi).real * np.eye(2) + np.outer(xi, xi.conj())
    return A, float(np.vdot(xi, xi).real)


def griffith_from_positivity(seed: int = 0) -> GriffithReport:
    """2cA - D Id > 0 for the standard direction and a random unitary image."""
    c = float(j_constant(2))
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    U, _ = np.linalg.qr(Z)
    spectra, margins = [], []
    for xi in (np.array([1.0, 0.0]), U @ np.array([1.0, 0.0])):
        A, D = griffith_block(xi)
        spectra.append(np.linalg.eigvalsh(2 * c * A - D * np.eye(2)))
        margins.append(c * np.trace(A).real - D)
    return GriffithReport(spectra, float(min(s.min() for s in spectra)), float(min(margins)))


def griffith_block_exact() -> list[list[Fraction]]:
    """2cA - D Id for the standard direction, from the curvature tensor."""
    F = fs_curvature(2).F
    c = j_constant(2)
    return [[2 * c * F[a][b][0][0] - int(a == b) for b in range(2)] for a in range(2)]


def report(n: int) -> dict:
    jr = j_residual(n)
    ncn, wcn = chern_invariants(n)
    out = {
        "n": n,
        "j_residual_zero": jr.residual_zero,
        "c": f"{jr.c.numerator}/{jr.c.denominator}",
        "factor": None if jr.Fn_factor is None else f"{jr.Fn_factor.numerator}/{jr.Fn_factor.denominator}",
        "omega_side_factor": None if jr.omega_Fn1_factor is None else
        f"{jr.omega_Fn1_factor.numerator}/{jr.omega_Fn1_factor.denominator}",
        "invariant": f"{ncn.numerator}/{ncn.denominator}" if ncn.denominator != 1 else str(ncn.numerator),
        "omega_invariant": f"{wcn.numerator}/{wcn.denominator}" if wcn.denominator != 1 else str(wcn.numerator),
    }
    if n == 2:
        g = j_positivity_gram()
        out["gram_min_eig"] = g.min_eig
        out["gram_real_rank"] = g.real_rank
        out["griffith_positive"] = griffith_from_positivity().positive
    return out
