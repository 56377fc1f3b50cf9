"""Jacobian syzygies AR(f), computed one degree at a time.

AR(f)_q is the kernel of (r_0..r_n) -> sum r_i f_i on S_q^{n+1}.  Minimal
generators are found degreewise: in degree q the new generators are kernel
vectors completing a basis of the part generated by earlier generators
multiplied by monomials.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Sequence

from .forms import nform_coordinates, nform_from_vector, wedge_df_matrix
from .linalg import Arithmetic, SparseMat, independent_columns, kernel_basis, matrix_rank
from .poly import Poly, monomials, partials

log = logging.getLogger(__name__)

SyzVector = tuple[Poly, ...]


@dataclass(frozen=True)
class SyzygyGens:
    gens: tuple[SyzVector, ...]
    degrees: tuple[int, ...]
    degree_bound: int
    free: bool = False  # True when Saito's criterion stopped the search early

    def __len__(self) -> int:
        return len(self.gens)

    def upto(self, q: int) -> list[tuple[SyzVector, int]]:
        return [(g, e) for g, e in zip(self.gens, self.degrees) if e <= q]

    def covers(self, q: int) -> bool:
        """True when every generator of degree <= q is known."""
        return self.free or q <= self.degree_bound


@dataclass(frozen=True)
class FreenessReport:
    is_free: bool
    exponents: tuple[int, ...]
    determinant_scale: Fraction
    reason: str = ""


def primitive_vector(v: Sequence) -> list[int]:
    den = reduce(lcm, (Fraction(x).denominator for x in v if x), 1)
    ints = [int(Fraction(x) * den) for x in v]
    g = reduce(gcd, ints, 0) or 1
    lead = next((x for x in ints if x), 1)
    if lead < 0:
        g = -g
    return [x // g for x in ints]


def relation_matrix(f: Poly, q: int) -> SparseMat:
    """Matrix of r -> sum r_i f_i on S_q^{n+1}; its kernel is AR(f)_q."""
    return wedge_df_matrix(f, q + f.nvars - 1)


def ar_slice(f: Poly, q: int, arith: Arithmetic = Arithmetic()) -> list[SyzVector]:
    """A basis of AR(f)_q."""
    if q < 0:
        return []
    n = f.nvars - 1
    A = relation_matrix(f, q)
    mode = "exact" if arith.exact else "modular"
    return [nform_from_vector(primitive_vector(v), q + n, n)
            for v in kernel_basis(A, mode, seed=arith.seed)]


def ar_dim(f: Poly, q: int, arith: Arithmetic = Arithmetic()) -> int:
    if q < 0:
        return 0
    A = relation_matrix(f, q)
    return A.cols - matrix_rank(A, arith).rank


def is_syzygy(f: Poly, r: Sequence[Poly], fi: Sequence[Poly] | None = None) -> bool:
    fi = partials(f) if fi is None else fi
    total = Poly(f.nvars)
    for ri, g in zip(r, fi):
        total = total + ri * g
    return total.is_zero()


def koszul_syzygies(f: Poly) -> list[SyzVector]:
    fi = partials(f)
    zero = Poly(f.nvars)
    out = []
    for i in range(f.nvars):
        for j in range(i + 1, f.nvars):
            r = [zero] * f.nvars
            r[i] = fi[j]
            r[j] = -fi[i]
            out.append(tuple(r))
    return out


def _multiples(gens: Sequence[tuple[SyzVector, int]], q: int, n: int) -> list[dict[int, object]]:
    """Coordinates of m * g for every generator g and monomial m of degree q - deg g."""
    cols = []
    for g, e in gens:
        for mono in monomials(q - e, n + 1):
            cols.append(nform_coordinates([r.mul_monomial(mono) for r in g], q + n))
    return cols


def generated_dim(gens: Sequence[tuple[SyzVector, int]], q: int, n: int,
                  arith: Arithmetic = Arithmetic()) -> int:
    """Dimension in degree q of the submodule spanned by ``gens``."""
    cols = _multiples([(g, e) for g, e in gens if e <= q], q, n)
    if not cols:
        return 0
    rows = (n + 1) * len(monomials(q, n + 1))
    return matrix_rank(SparseMat.from_columns(rows, cols), arith).rank


def minimal_generators(f: Poly, degree_bound: int, arith: Arithmetic = Arithmetic(),
                       stop_when_free: bool = True) -> SyzygyGens:
    """Minimal homogeneous generators of AR(f) of degree <= degree_bound.

    With ``stop_when_free`` the search ends as soon as n generators pass
    Saito's criterion: they then form a basis and no further generators exist.
    """
    n = f.nvars - 1
    found: list[tuple[SyzVector, int]] = []
    mode = "exact" if arith.exact else "modular"
    for q in range(degree_bound + 1):
        sub = arith.reseed(q)
        A = relation_matrix(f, q)
        dim_ar = A.cols - matrix_rank(A, sub).rank
        if dim_ar == 0:
            continue
        old = _multiples(found, q, n)
        dim_old = generated_dim(found, q, n, sub) if old else 0
        new = dim_ar - dim_old
        log.debug("AR(f)_%d: dim %d, generated by lower degrees %d", q, dim_ar, dim_old)
        if new <= 0:
            continue
        kernel = kernel_basis(A, mode, seed=sub.seed)
        length = A.cols
        dense_old = []
        for col in old:
            v = [0] * length
            for i, x in col.items():
                v[i] = x
            dense_old.append(v)
        picks = independent_columns(dense_old + kernel, length, len(dense_old), sub)
        if len(picks) != new:
            raise ArithmeticError(f"degree {q}: expected {new} new generators, selected {len(picks)}")
        for j in picks:
            g = nform_from_vector(primitive_vector(kernel[j - len(dense_old)]), q + n, n)
            found.append((g, q))
        if stop_when_free and len(found) == n:
            gens = SyzygyGens(tuple(g for g, _ in found), tuple(e for _, e in found), q)
            if saito_check(f, gens).is_free:
                return SyzygyGens(gens.gens, gens.degrees, degree_bound, free=True)
    return SyzygyGens(tuple(g for g, _ in found), tuple(e for _, e in found), degree_bound)


# ---------------------------------------------------------------------------
# freeness

def poly_det(matrix: Sequence[Sequence[Poly]]) -> Poly:
    """Division-free determinant by Laplace expansion along rows, memoized on column sets."""
    size = len(matrix)
    nvars = matrix[0][0].nvars
    memo: dict[tuple[int, frozenset], Poly] = {}

    def minor(row: int, cols: frozenset) -> Poly:
        if row == size:
            return Poly.constant(nvars, 1)
        key = (row, cols)
        if key in memo:
            return memo[key]
        total = Poly(nvars)
        for pos, c in enumerate(sorted(cols)):
            a = matrix[row][c]
            if a.is_zero():
                continue
            term = a * minor(row + 1, cols - {c})
            total = total + term if pos % 2 == 0 else total - term
        memo[key] = total
        return total

    return minor(0, frozenset(range(size)))


def saito_matrix(f: Poly, gens: SyzygyGens) -> list[list[Poly]]:
    first = [Poly.variable(f.nvars, i) for i in range(f.nvars)]
    return [first] + [list(g) for g in gens.gens]


def saito_check(f: Poly, gens: SyzygyGens) -> FreenessReport:
    """Saito's criterion: det [x; r^(1); ...; r^(n)] = c f with c != 0."""
    n = f.nvars - 1
    exps = tuple(gens.degrees)
    if len(gens) != n:
        return FreenessReport(False, (), Fraction(0), f"{len(gens)} generators, need {n}")
    det = poly_det(saito_matrix(f, gens))
    if det.is_zero():
        return FreenessReport(False, (), Fraction(0), "determinant vanishes")
    mono, lead = f.leading_term()
    c = Fraction(det.terms.get(mono, 0)) / Fraction(lead)
    if c == 0 or det != f * c:
        return FreenessReport(False, (), Fraction(0), "determinant is not a multiple of f")
    return FreenessReport(True, exps, c, "Saito determinant is a nonzero multiple of f")


def poincare_free(exponents: Sequence[int]) -> tuple[list[int], int]:
    """Coefficients of prod (1 + d_j t) and its value at t = -1."""
    coeffs = [1]
    for e in exponents:
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i] += c
            nxt[i + 1] += c * e
        coeffs = nxt
    chi = sum(c * (-1) ** i for i, c in enumerate(coeffs))
    return coeffs, chi
