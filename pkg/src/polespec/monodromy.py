"""From an E_2 page to spectra, eigenspace dimensions and Alexander polynomials.

Eigenvalues are never formed numerically.  The eigenvalue exp(-2 pi i k/d)
is carried as the integer k, and its order d' = d / gcd(d, k) decides which
cyclotomic factor Phi_{d'} it belongs to.
"""
from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd
from typing import Mapping, Sequence

import flint

from .spectral import E2Page

CERTIFIED = "certified"
CONJECTURAL = "conjectural"
FAILED = "failed"
CONJECTURE_NOTE = "conjectural (assumes E_2 degeneration in the computed range)"


class GaloisViolation(ArithmeticError):
    """Eigenvalues of the same order received different multiplicities."""


class InconsistentInput(ValueError):
    pass


class IncompletePage(ValueError):
    pass


# ---------------------------------------------------------------------------
# cyclotomic products

def totient(m: int) -> int:
    return flint.fmpz_poly.cyclotomic(m).degree()


def divisors(m: int) -> list[int]:
    return [a for a in range(1, m + 1) if m % a == 0]


@dataclass(frozen=True)
class CyclotomicPoly:
    """prod_m Phi_m^{e_m}; zero exponents are dropped."""
    factors: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(m): int(e) for m, e in self.factors.items() if e}
        if any(m < 1 for m in clean):
            raise ValueError("cyclotomic orders are positive")
        if any(e < 0 for e in clean.values()):
            raise ValueError("exponents of a polynomial are non-negative")
        object.__setattr__(self, "factors", dict(sorted(clean.items())))

    @classmethod
    def one(cls) -> "CyclotomicPoly":
        return cls({})

    def __eq__(self, other) -> bool:
        return isinstance(other, CyclotomicPoly) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(tuple(self.factors.items()))

    def exponent(self, m: int) -> int:
        return self.factors.get(m, 0)

    @property
    def degree(self) -> int:
        return sum(e * totient(m) for m, e in self.factors.items())

    def to_poly(self) -> flint.fmpz_poly:
        out = flint.fmpz_poly([1])
        for m, e in self.factors.items():
            out *= flint.fmpz_poly.cyclotomic(m) ** e
        return out

    @classmethod
    def from_poly(cls, p: flint.fmpz_poly) -> "CyclotomicPoly":
        """Split a monic product of cyclotomic polynomials into its factors."""
        p = flint.fmpz_poly(p)
        if p == 0:
            raise ValueError("zero polynomial")
        out: dict[int, int] = {}
        m = 1
        while p.degree() > 0:
            if totient(m) > p.degree():
                raise ValueError("not a product of cyclotomic polynomials")
            phi = flint.fmpz_poly.cyclotomic(m)
            while True:
                q, r = divmod(p, phi)
                if r != 0:
                    break
                p = q
                out[m] = out.get(m, 0) + 1
            m += 1
        if p != 1:
            raise ValueError("not a monic product of cyclotomic polynomials")
        return cls(out)

    def to_text(self) -> str:
        if not self.factors:
            return "1"
        parts = []
        for m, e in self.factors.items():
            parts.append(f"Phi_{m}" if e == 1 else f"Phi_{m}^{e}")
        return " * ".join(parts)

    def to_json(self) -> dict[str, int]:
        return {str(m): e for m, e in self.factors.items()}

    @classmethod
    def parse(cls, text: str) -> "CyclotomicPoly":
        """Read ``Phi_1^9*Phi_3``, ``Phi1^9 Phi3`` or ``1:9,3:1``; ``1`` is the unit."""
        text = text.strip()
        if text in ("", "1"):
            return cls.one()
        if ":" in text:
            out: dict[int, int] = defaultdict(int)
            for item in text.split(","):
                m, e = item.split(":")
                out[int(m)] += int(e)
            return cls(dict(out))
        found = re.findall(r"Phi_?\{?(\d+)\}?(?:\^\{?(\d+)\}?)?", text)
        rest = re.sub(r"Phi_?\{?(\d+)\}?(?:\^\{?(\d+)\}?)?|[\s*.·]", "", text)
        if not found or rest:
            raise ValueError(f"cannot read cyclotomic product {text!r}")
        out = defaultdict(int)
        for m, e in found:
            out[int(m)] += int(e) if e else 1
        return cls(dict(out))


def t_d_minus_one(d: int, power: int = 1) -> dict[int, int]:
    """Signed exponents of (t^d - 1)^power = prod_{c | d} Phi_c^power."""
    return {c: power for c in divisors(d)}


# ---------------------------------------------------------------------------
# spectrum

@dataclass(frozen=True)
class PoleSpectrum:
    d: int
    entries: Mapping[int, int]  # Q -> multiplicity of t^{Q/d}

    def __post_init__(self):
        if any(v < 0 for v in self.entries.values()):
            raise ValueError("negative multiplicity")
        object.__setattr__(self, "entries", {Q: v for Q, v in sorted(self.entries.items()) if v})

    def alpha(self, Q: int) -> Fraction:
        return Fraction(Q, self.d)

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def coefficients(self, Qs: Sequence[int]) -> list[int]:
        return [self.entries.get(Q, 0) for Q in Qs]

    def to_text(self) -> str:
        if not self.entries:
            return "0"
        terms = []
        for Q, m in self.entries.items():
            coef = "" if m == 1 else str(m)
            terms.append(f"{coef}t^{{{Q}/{self.d}}}")
        return " + ".join(terms)

    def to_json(self) -> list[dict]:
        return [{"Q": Q, "alpha": f"{Q}/{self.d}", "mult": m} for Q, m in self.entries.items()]


def _top_q(page: E2Page) -> int:
    if page.mode.mode == "curve":
        raise ValueError("a curve-mode page holds E_2^{1,0}, not the top cohomology cells")
    return page.n if page.mode.mode == "general" else 1


def counted(page: E2Page, q: int, k: int) -> bool:
    """Whether cell (q, k) can contribute to H^n(F)_lambda.

    E_infinity^{n-q,q}(f)_k vanishes for q > top - delta_{k,d}, where top is n
    in general mode and 1 for arrangements and free locally quasi-homogeneous
    divisors.
    """
    return q <= _top_q(page) - (k == page.d)


def spectrum_from_page(page: E2Page) -> PoleSpectrum:
    entries = {}
    for (q, k), cell in page.cells.items():
        if cell.dim and counted(page, q, k):
            entries[cell.Q] = cell.dim
    return PoleSpectrum(page.d, entries)


def eigen_dims(page: E2Page, k: int) -> int:
    """dim H^n(F)_lambda for lambda = exp(-2 pi i k/d), if f is top-computable."""
    return sum(c.dim for (q, kk), c in page.cells.items() if kk == k and counted(page, q, k))


def missing_cells(page: E2Page) -> list[tuple[int, int]]:
    return [(q, k) for q, k in page.mode.cells()
            if counted(page, q, k) and (q, k) not in page.cells]


# ---------------------------------------------------------------------------
# Alexander polynomials

@dataclass(frozen=True)
class GaloisCert:
    """Multiplicities grouped by eigenvalue order."""
    by_order: Mapping[int, dict[int, int]]  # order -> {k: multiplicity}
    constant: bool

    def to_json(self) -> dict:
        return {"galois_constant": self.constant,
                "by_order": {str(o): {str(k): v for k, v in ks.items()}
                             for o, ks in self.by_order.items()}}


def _assemble(d: int, mult: Mapping[int, int]) -> tuple[CyclotomicPoly, GaloisCert]:
    groups: dict[int, dict[int, int]] = defaultdict(dict)
    for k in range(1, d + 1):
        groups[d // gcd(d, k)][k] = mult[k]
    bad = {o: ks for o, ks in groups.items() if len(set(ks.values())) > 1}
    cert = GaloisCert(dict(sorted(groups.items())), not bad)
    if bad:
        raise GaloisViolation("inconsistent eigenspace dimensions; E_2 != E_infinity or "
                              f"computation bug: {dict(sorted(bad.items()))}")
    return CyclotomicPoly({o: next(iter(ks.values())) for o, ks in groups.items()}), cert


def alexander_top(page: E2Page) -> tuple[CyclotomicPoly, GaloisCert]:
    """Delta^n from the eigenspace dimensions, checking Galois constancy."""
    gaps = missing_cells(page)
    if gaps:
        raise IncompletePage(f"page lacks cells {gaps[:5]}{'...' if len(gaps) > 5 else ''}")
    return _assemble(page.d, {k: eigen_dims(page, k) for k in range(1, page.d + 1)})


def alexander_curve(page: E2Page) -> tuple[CyclotomicPoly, GaloisCert]:
    """Delta^1 of a plane curve from the dims of E_2^{1,0}(f)_k, k = 1..d.

    m(lambda_k) = E(k) + E(d - k) for 1 <= k < d and m(1) = E(d).
    """
    if page.mode.mode != "curve":
        raise ValueError("alexander_curve needs a curve-mode page")
    d = page.d
    gaps = [k for k in range(1, d + 1) if (0, k) not in page.cells]
    if gaps:
        raise IncompletePage(f"curve page lacks k = {gaps}")
    E = {k: page.dim(0, k) for k in range(1, d + 1)}
    mult = {k: E[k] + E[d - k] for k in range(1, d)}
    mult[d] = E[d]
    return _assemble(d, mult)


def euler_solve(deltas: Sequence[CyclotomicPoly | None], chi: int, d: int) -> CyclotomicPoly:
    """Fill the single missing Delta^j in prod_j (Delta^j)^{(-1)^j} = (t^d - 1)^chi."""
    holes = [j for j, x in enumerate(deltas) if x is None]
    if len(holes) != 1:
        raise InconsistentInput(f"exactly one Alexander polynomial must be missing, got {len(holes)}")
    miss = holes[0]
    target = t_d_minus_one(d, chi)
    orders = set(target)
    for x in deltas:
        if x is not None:
            orders |= set(x.factors)
    out = {}
    for c in orders:
        known = sum((-1) ** j * x.exponent(c) for j, x in enumerate(deltas) if x is not None)
        e = (-1) ** miss * (target.get(c, 0) - known)
        if e < 0:
            raise InconsistentInput(f"Delta^{miss} would need exponent {e} on Phi_{c}")
        out[c] = e
    return CyclotomicPoly(out)


def euler_residual(deltas: Sequence[CyclotomicPoly], chi: int, d: int) -> dict[int, int]:
    """Exponent-wise difference between both sides of the Euler identity (empty when it holds)."""
    target = t_d_minus_one(d, chi)
    orders = set(target).union(*(x.factors for x in deltas))
    res = {}
    for c in sorted(orders):
        lhs = sum((-1) ** j * x.exponent(c) for j, x in enumerate(deltas))
        if lhs != target.get(c, 0):
            res[c] = lhs - target.get(c, 0)
    return res


# ---------------------------------------------------------------------------
# top-computability

@dataclass(frozen=True)
class TopComputabilityCert:
    k: int
    m: int
    status: str
    source: str | None
    e2_sum: int
    external: int | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {"k": self.k, "m": self.m, "status": self.status, "source": self.source,
                "e2_sum": self.e2_sum, "external": self.external, "note": self.note}


def _m_needed(page: E2Page, k: int) -> int:
    """Smallest m >= 1 with every counted nonzero cell of column k at q <= m - delta_{k,d}."""
    delta = int(k == page.d)
    tops = [q + delta for q in range(_top_q(page) + 1)
            if counted(page, q, k) and page.dim(q, k)]
    return max([1] + tops)


def topcomputability_check(page: E2Page, bn: int | None = None, bn_lower: int | None = None,
                           eig: Mapping[int, int] | None = None, chi: int | None = None,
                           nonresonant: Sequence[int] = (), smooth: bool = False
                           ) -> list[TopComputabilityCert]:
    """Compare the E_2 column sums with external knowledge of H^n(F).

    Since dim E_2 >= dim E_infinity cellwise, each column sum bounds
    dim H^n(F)_lambda from above; equality with an external value certifies
    the column.  ``bn_lower`` is a lower bound on b_n(F): when it meets the E_2
    total, the bracket closes and every column is certified.
    """
    d = page.d
    sums = {k: eigen_dims(page, k) for k in range(1, d + 1)}
    total = sum(sums.values())
    mode = page.mode.mode
    out = []

    if mode == "general":
        if bn is not None and bn > total:
            raise InconsistentInput(f"b_n = {bn} exceeds the E_2 bound {total}")
        if bn_lower is not None and bn_lower > total:
            raise InconsistentInput(f"lower bound {bn_lower} exceeds the E_2 bound {total}")
        for k in range(1, d + 1):
            m = _m_needed(page, k)
            if eig is not None and k in eig:
                if eig[k] > sums[k]:
                    raise InconsistentInput(f"dim H^n(F)_lambda = {eig[k]} exceeds E_2 sum {sums[k]} at k={k}")
                ok = eig[k] == sums[k]
                out.append(TopComputabilityCert(k, m, CERTIFIED if ok else FAILED, "external-betti",
                                                sums[k], eig[k], "" if ok else "strict inequality"))
            elif smooth:
                out.append(TopComputabilityCert(k, page.n, CERTIFIED, "smooth", sums[k]))
            elif bn is not None:
                ok = bn == total
                out.append(TopComputabilityCert(k, m, CERTIFIED if ok else FAILED, "external-betti",
                                                sums[k], None,
                                                f"b_n = {bn}, E_2 total {total}"
                                                + ("" if ok else ": strict inequality")))
            elif bn_lower is not None and bn_lower == total:
                out.append(TopComputabilityCert(k, m, CERTIFIED, "inequality-met", sums[k], None,
                                                f"b_n >= {bn_lower} = E_2 total"))
            else:
                out.append(TopComputabilityCert(k, m, CONJECTURAL, None, sums[k], None, CONJECTURE_NOTE))
        return out

    if nonresonant and chi is None:
        raise InconsistentInput("non-resonant columns need |chi(M)|")
    for k in range(1, d + 1):
        if k in nonresonant:
            target = abs(chi)
            if target > sums[k]:
                raise InconsistentInput(f"|chi(M)| = {target} exceeds E_2 sum {sums[k]} at k={k}")
            ok = target == sums[k]
            out.append(TopComputabilityCert(k, 1, CERTIFIED if ok else FAILED, "nonresonant-input",
                                            sums[k], target, "" if ok else "strict inequality"))
        else:
            out.append(TopComputabilityCert(k, 1, CONJECTURAL, None, sums[k], None, CONJECTURE_NOTE))
    return out


def strict_inequality(certs: Sequence[TopComputabilityCert]) -> bool:
    return any(c.status == FAILED for c in certs)


# ---------------------------------------------------------------------------
# smooth oracle and symmetry

def smooth_mu(n: int, d: int, a: int) -> int:
    """Coefficient of t^a in (1 + t + ... + t^{d-2})^{n+1}.

    The raw coefficient is returned, so smooth_mu(n, d, 0) = 1; in the top
    cohomology of the Milnor fiber only 1 <= a <= (n+1)(d-2) occurs.
    """
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    if a < 0 or a > (n + 1) * (d - 2):
        return 0
    # inclusion-exclusion on (1 - t^{d-1})^{n+1} (1 - t)^{-(n+1)}
    total = 0
    for i in range(n + 2):
        rest = a - i * (d - 1)
        if rest < 0:
            break
        total += (-1) ** i * comb(n + 1, i) * comb(rest + n, n)
    return total


def smooth_page_dims(n: int, d: int) -> dict[tuple[int, int], int]:
    """Nonzero dims of E_2^{n-q,q}(f)_k for a smooth f: mu(q d + k - n - 1).

    The raw coefficient mu(0) = 1 is kept: it sits in the cell (0, d) when
    d = n + 1 and accounts for part of H^n(F)_1 = H^n(M).
    """
    out = {}
    for q in range(n + 1):
        for k in range(1, d + 1):
            mu = smooth_mu(n, d, q * d + k - n - 1)
            if mu:
                out[(q, k)] = mu
    return out


@dataclass(frozen=True)
class SymmetryReport:
    symmetric: bool
    mismatches: tuple[tuple[int, int, int], ...]  # (Q, mult at Q, mult at 2d - Q)


def symmetry_report(spectrum: PoleSpectrum) -> SymmetryReport:
    """Compare the coefficients of t^alpha and t^(2 - alpha) for alpha != 1."""
    d = spectrum.d
    bad = []
    Qs = sorted(set(spectrum.entries) | {2 * d - Q for Q in spectrum.entries})
    for Q in Qs:
        if Q >= d:
            continue
        a, b = spectrum.entries.get(Q, 0), spectrum.entries.get(2 * d - Q, 0)
        if a != b:
            bad.append((Q, a, b))
    return SymmetryReport(not bad, tuple(bad))
