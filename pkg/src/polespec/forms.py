"""Graded pieces of polynomial n-forms and (n+1)-forms on Q^{n+1}.

An n-form is stored by its n+1 coefficient polynomials r_i, where r_i
multiplies (-1)^i dx_0 ^ ... ^ (dx_i omitted) ^ ... ^ dx_n.  With that
sign convention folded into the basis,

    df ^ omega(r) = (sum_i r_i f_i)  dx_0 ^ ... ^ dx_n
    d omega(r)    = (sum_i dr_i/dx_i) dx_0 ^ ... ^ dx_n

Each dx_j counts 1 in the grading, so an n-form of graded degree Q has
coefficients of degree Q - n and a top form of graded degree Q has a
coefficient of degree Q - n - 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .linalg import SparseMat
from .poly import Monomial, Poly, partials, slice_basis


class FormKind(Enum):
    NFORM = "nform"
    TOPFORM = "topform"


@dataclass(frozen=True)
class NForm:
    coeffs: tuple[Poly, ...]
    graded_degree: int

    def __post_init__(self):
        n = len(self.coeffs) - 1
        for r in self.coeffs:
            if not r.is_zero() and r.homogeneous_degree != self.graded_degree - n:
                raise ValueError("n-form component has the wrong degree")

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(r.is_zero() for r in self.coeffs)

    def __add__(self, other: "NForm") -> "NForm":
        if other.graded_degree != self.graded_degree:
            raise ValueError("graded degrees differ")
        return NForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.graded_degree)

    def scale(self, c) -> "NForm":
        return NForm(tuple(r * c for r in self.coeffs), self.graded_degree)

    def mul_monomial(self, mono: Monomial) -> "NForm":
        return NForm(tuple(r.mul_monomial(mono) for r in self.coeffs),
                     self.graded_degree + sum(mono))


@dataclass(frozen=True)
class TopForm:
    coeff: Poly
    graded_degree: int

    def __post_init__(self):
        n = self.coeff.nvars - 1
        if not self.coeff.is_zero() and self.coeff.homogeneous_degree != self.graded_degree - n - 1:
            raise ValueError("top form coefficient has the wrong degree")

    def is_zero(self) -> bool:
        return self.coeff.is_zero()

    def coordinates(self) -> dict[int, object]:
        """Sparse coordinates in the monomial basis of its slice."""
        n = self.coeff.nvars - 1
        idx = slice_basis(self.graded_degree - n - 1, n).index
        return {idx[m]: c for m, c in self.coeff.terms.items()}


def omega_of(r: Sequence[Poly], q: int) -> NForm:
    """The n-form attached to a vector of degree-q polynomials."""
    for ri in r:
        if not ri.is_zero() and ri.homogeneous_degree != q:
            raise ValueError(f"all components must be homogeneous of degree {q}")
    return NForm(tuple(r), q + len(r) - 1)


def wedge_df(f: Poly, eta: NForm, fi: Sequence[Poly] | None = None) -> TopForm:
    fi = partials(f) if fi is None else fi
    d = f.homogeneous_degree
    total = Poly(f.nvars)
    for ri, g in zip(eta.coeffs, fi):
        if not ri.is_zero():
            total = total + ri * g
    return TopForm(total, eta.graded_degree + d)


def ext_d(eta: NForm) -> TopForm:
    total = Poly(len(eta.coeffs))
    for i, ri in enumerate(eta.coeffs):
        total = total + ri.diff(i)
    return TopForm(total, eta.graded_degree)


@dataclass(frozen=True)
class FormSliceBasis:
    kind: FormKind
    graded_degree: int
    n: int
    basis: tuple

    def __len__(self) -> int:
        return len(self.basis)

    def element(self, pos: int):
        """The basis form at position ``pos``."""
        nvars = self.n + 1
        if self.kind is FormKind.TOPFORM:
            return TopForm(Poly.monomial(self.basis[pos]), self.graded_degree)
        i, mono = self.basis[pos]
        coeffs = [Poly(nvars)] * nvars
        coeffs[i] = Poly.monomial(mono)
        return NForm(tuple(coeffs), self.graded_degree)


def form_slice_basis(kind: FormKind, Q: int, n: int) -> FormSliceBasis:
    """Ordered monomial basis of the n-forms or top forms of graded degree Q.

    n-form basis elements are (component index, monomial), component-major.
    """
    if kind is FormKind.TOPFORM:
        return FormSliceBasis(kind, Q, n, slice_basis(Q - n - 1, n).basis)
    monos = slice_basis(Q - n, n).basis
    return FormSliceBasis(kind, Q, n, tuple((i, m) for i in range(n + 1) for m in monos))


# ---------------------------------------------------------------------------
# matrices of the two operators on slice bases

def wedge_df_matrix(f: Poly, Q: int, fi: Sequence[Poly] | None = None) -> SparseMat:
    """Matrix of df ^ : Omega^n_Q -> Omega^{n+1}_{Q+d} on the slice bases."""
    n = f.nvars - 1
    d = f.homogeneous_degree
    fi = partials(f) if fi is None else fi
    dom = form_slice_basis(FormKind.NFORM, Q, n)
    rows = len(form_slice_basis(FormKind.TOPFORM, Q + d, n))
    idx = slice_basis(Q + d - n - 1, n).index
    cols = []
    for i, mono in dom.basis:
        cols.append({idx[m]: c for m, c in fi[i].mul_monomial(mono).terms.items()})
    return SparseMat.from_columns(rows, cols)


def ext_d_matrix(Q: int, n: int) -> SparseMat:
    """Matrix of d : Omega^n_Q -> Omega^{n+1}_Q (the divergence of the r_i)."""
    dom = form_slice_basis(FormKind.NFORM, Q, n)
    rows = len(form_slice_basis(FormKind.TOPFORM, Q, n))
    idx = slice_basis(Q - n - 1, n).index
    cols = []
    for i, mono in dom.basis:
        e = mono[i]
        if e:
            m = list(mono)
            m[i] -= 1
            cols.append({idx[tuple(m)]: e})
        else:
            cols.append({})
    return SparseMat.from_columns(rows, cols)


def nform_coordinates(r: Sequence[Poly], Q: int) -> dict[int, object]:
    """Coordinates of omega(r) in the n-form slice of graded degree Q."""
    n = len(r) - 1
    idx = slice_basis(Q - n, n).index
    size = len(idx)
    out = {}
    for i, ri in enumerate(r):
        for m, c in ri.terms.items():
            out[i * size + idx[m]] = c
    return out


def nform_from_vector(v: Sequence, Q: int, n: int) -> tuple[Poly, ...]:
    """Inverse of nform_coordinates for a dense coordinate vector."""
    basis = form_slice_basis(FormKind.NFORM, Q, n).basis
    comps: list[dict] = [{} for _ in range(n + 1)]
    for (i, mono), c in zip(basis, v):
        if c:
            comps[i][mono] = c
    return tuple(Poly(n + 1, c) for c in comps)
