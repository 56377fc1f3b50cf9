"""Sparse exact-rational polynomials in n+1 variables.

Coefficients are stored as ``int`` when integral and as ``Fraction``
otherwise, so integer inputs never pay for rational arithmetic.  Monomials
are exponent tuples; the global order is graded-lexicographic with
x0 > x1 > ... > xn.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import flint

Monomial = tuple[int, ...]
Rational = int | Fraction


class ParseError(ValueError):
    """Syntax or semantic error in polynomial text, with a character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NotReducedError(ValueError):
    pass


def _norm(c: Rational) -> Rational:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def as_rational(c) -> Rational:
    if isinstance(c, int):
        return c
    return _norm(Fraction(c))


class Poly:
    """Immutable sparse polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: dict[Monomial, Rational] | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for mono, c in terms.items():
                if c != 0:
                    if len(mono) != nvars:
                        raise ValueError(f"monomial {mono} has wrong arity for {nvars} variables")
                    clean[mono] = _norm(c)
        self.terms: dict[Monomial, Rational] = clean
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: Rational) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def monomial(cls, mono: Monomial, c: Rational = 1) -> "Poly":
        return cls(len(mono), {tuple(mono): c})

    @property
    def n(self) -> int:
        return self.nvars - 1

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int | None:
        """Total degree, or None for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(m) for m in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {sum(m) for m in self.terms}
        return len(degs) <= 1

    @property
    def homogeneous_degree(self) -> int | None:
        """Degree if homogeneous and nonzero, else None."""
        degs = {sum(m) for m in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def sorted_terms(self) -> list[tuple[Monomial, Rational]]:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def leading_term(self) -> tuple[Monomial, Rational]:
        return self.sorted_terms()[0]

    # arithmetic
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different rings")
            return other
        return Poly.constant(self.nvars, as_rational(other))

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = as_rational(other)
            if c == 0:
                return Poly(self.nvars)
            return Poly(self.nvars, {m: v * c for m, v in self.terms.items()})
        other = self._coerce(other)
        out: dict[Monomial, Rational] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        c = as_rational(other)
        return self * (Fraction(1) / c)

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise ValueError("negative exponent")
        result = Poly.constant(self.nvars, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def mul_monomial(self, mono: Monomial, c: Rational = 1) -> "Poly":
        return Poly(self.nvars, {tuple(a + b for a, b in zip(m, mono)): v * c
                                 for m, v in self.terms.items()})

    def diff(self, i: int) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = list(m)
                mm[i] = e - 1
                out[tuple(mm)] = c * e
        return Poly(self.nvars, out)

    def evaluate(self, point: Sequence[Rational]) -> Rational:
        total: Rational = 0
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e:
                    v = v * x ** e
            total += v
        return _norm(total)

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Compose: replace variable i by ``images[i]`` (all in a common ring)."""
        target = images[0].nvars
        powers: list[dict[int, Poly]] = [{0: Poly.constant(target, 1)} for _ in images]

        def power(i: int, e: int) -> Poly:
            cache = powers[i]
            if e not in cache:
                cache[e] = power(i, e - 1) * images[i]
            return cache[e]

        acc: dict[Monomial, Rational] = {}
        for m, c in self.terms.items():
            term = Poly.constant(target, c)
            for i, e in enumerate(m):
                if e:
                    term = term * power(i, e)
            for mm, v in term.terms.items():
                acc[mm] = acc.get(mm, 0) + v
        return Poly(target, acc)

    def content_scale(self) -> Fraction:
        """Positive rational c with c*self integral and primitive."""
        if not self.terms:
            return Fraction(1)
        den = 1
        for c in self.terms.values():
            if isinstance(c, Fraction):
                den = den * c.denominator // _gcd(den, c.denominator)
        g = 0
        for c in self.terms.values():
            g = _gcd(g, int(c * den))
        return Fraction(den, g)

    def primitive(self) -> "Poly":
        return self * self.content_scale()

    # comparisons
    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __reduce__(self):
        return (Poly, (self.nvars, self.terms))

    def to_text(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names else default_names(self.nvars)
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            for name, e in zip(names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = f"{mag}*" + "*".join(factors)
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"Poly({self.to_text()!r}, nvars={self.nvars})"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def default_names(nvars: int) -> list[str]:
    if nvars <= 4:
        return ["x", "y", "z", "w"][:nvars] if nvars > 1 else ["x"]
    return [f"x{i}" for i in range(nvars)]


# ---------------------------------------------------------------------------
# graded slices

@lru_cache(maxsize=None)
def monomials(m: int, nvars: int) -> tuple[Monomial, ...]:
    """All exponent tuples of total degree m, in decreasing lex order."""
    if m < 0:
        return ()
    if nvars == 1:
        return ((m,),)
    out = []
    for e0 in range(m, -1, -1):
        for rest in monomials(m - e0, nvars - 1):
            out.append((e0,) + rest)
    return tuple(out)


def slice_dim(m: int, n: int) -> int:
    """dim S_m for S = Q[x_0..x_n]."""
    if m < 0:
        return 0
    return comb(m + n, n)


@dataclass(frozen=True)
class SliceBasis:
    m: int
    n: int
    basis: tuple[Monomial, ...]
    index: dict[Monomial, int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.basis)


@lru_cache(maxsize=256)
def slice_basis(m: int, n: int) -> SliceBasis:
    basis = monomials(m, n + 1)
    return SliceBasis(m, n, basis, {mono: i for i, mono in enumerate(basis)})


# ---------------------------------------------------------------------------
# calculus

def partials(f: Poly) -> list[Poly]:
    return [f.diff(i) for i in range(f.nvars)]


def euler_defect(f: Poly) -> Poly:
    """sum x_i f_i - d f; zero exactly when f is homogeneous of degree d."""
    d = f.homogeneous_degree or 0
    total = Poly(f.nvars)
    for i, fi in enumerate(partials(f)):
        total = total + Poly.variable(f.nvars, i) * fi
    return total - f * d


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if mt is None or mt.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                             len(text) - len(text[pos:].lstrip()))
        kind = mt.lastgroup
        tokens.append((kind, mt.group(kind), mt.start(kind)))
        pos = mt.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    # expr   := ['+'|'-'] term (('+'|'-') term)*
    # term   := factor (('*'|'/') factor)*
    # factor := atom [('^'|'**') ['-'] integer]
    # atom   := integer | identifier | '(' expr ')' | ('+'|'-') factor
    def __init__(self, text: str, names: Sequence[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = {name: k for k, name in enumerate(names)}
        self.nvars = len(names)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Poly:
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return p

    def expr(self) -> Poly:
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, _ = self.take()
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Poly:
        p = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            q = self.factor()
            if op == "*":
                p = p * q
            else:
                if q.is_zero():
                    raise ParseError("division by zero", pos)
                if q.degree != 0:
                    raise ParseError("division by a non-constant", pos)
                p = p / q.terms[(0,) * self.nvars]
        return p

    def factor(self) -> Poly:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val in ("^", "**"):
            self.take()
            kind, val, pos = self.take()
            if kind == "op" and val == "-":
                raise ParseError("negative exponent", pos)
            if kind != "num":
                raise ParseError("exponent must be a non-negative integer", pos)
            return base ** int(val)
        return base

    def atom(self) -> Poly:
        kind, val, pos = self.take()
        if kind == "num":
            return Poly.constant(self.nvars, int(val))
        if kind == "id":
            if val not in self.names:
                raise ParseError(f"unknown identifier {val!r}", pos)
            return Poly.variable(self.nvars, self.names[val])
        if kind == "op" and val == "(":
            p = self.expr()
            kind2, val2, pos2 = self.take()
            if val2 != ")":
                raise ParseError("expected ')'", pos2)
            return p
        if kind == "op" and val in ("-", "+"):
            p = self.factor()
            return -p if val == "-" else p
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {val!r}", pos)


def parse_poly(text: str, variable_names: Sequence[str]) -> Poly:
    """Parse and expand ``text`` into a Poly over the named variables.

    >>> parse_poly("x*y*(x+y)", "xyz").homogeneous_degree
    3
    """
    names = list(variable_names)
    if len(set(names)) != len(names):
        raise ValueError("duplicate variable names")
    return _Parser(text, names).parse()


# ---------------------------------------------------------------------------
# reducedness and generic sections

def _random_rational(rng: random.Random) -> Fraction:
    num = rng.randint(-99, 99)
    den = rng.randint(1, 99)
    return Fraction(num, den)


def _restrict_to_line(f: Poly, p: Sequence[int], q: Sequence[int]) -> flint.fmpq_poly:
    lin = [flint.fmpq_poly([a, b]) for a, b in zip(p, q)]
    total = flint.fmpq_poly([])
    for m, c in f.terms.items():
        term = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) if isinstance(c, Fraction) else c])
        for li, e in zip(lin, m):
            if e:
                term = term * li ** e
        total = total + term
    return total


def squarefree_probabilistic(f: Poly, seed: int = 0, tries: int = 3, max_retries: int = 20) -> bool:
    """One-sided squarefreeness test by restriction to random lines.

    Returns True as soon as one restriction to a line is a squarefree
    univariate polynomial of full degree (which proves f reduced).  False
    means every tried line showed a repeated root.
    """
    d = f.homogeneous_degree
    if d is None:
        raise ValueError("f must be homogeneous and nonzero")
    if d <= 1:
        return True
    rng = random.Random(seed)
    attempts = 0
    good = 0
    while good < tries:
        attempts += 1
        if attempts > max_retries:
            raise RuntimeError("could not find a non-degenerate line restriction")
        p = [rng.randint(-99, 99) for _ in range(f.nvars)]
        q = [rng.randint(-99, 99) for _ in range(f.nvars)]
        g = _restrict_to_line(f, p, q)
        if g.degree() != d:
            continue
        good += 1
        if g.gcd(g.derivative()).degree() == 0:
            return True
    return False


def restrict_generic_hyperplane(f: Poly, seed: int = 0,
                                coefficients: Sequence[Rational] | None = None,
                                check_reduced: bool = True) -> Poly:
    """Substitute x_n := c_0 x_0 + ... + c_{n-1} x_{n-1}.

    The section lives in n variables.  Random coefficients are seeded
    rationals with numerator and denominator bounded by 99.
    """
    if f.nvars < 3:
        raise ValueError("need at least three variables to take a hyperplane section")
    m = f.nvars - 1
    if coefficients is None:
        rng = random.Random(seed)
        coefficients = [_random_rational(rng) for _ in range(m)]
    if len(coefficients) != m:
        raise ValueError(f"expected {m} coefficients")
    images = [Poly.variable(m, i) for i in range(m)]
    last = Poly(m, {tuple(1 if j == i else 0 for j in range(m)): as_rational(c)
                    for i, c in enumerate(coefficients)})
    images.append(last)
    g = f.substitute(images)
    if check_reduced:
        if g.is_zero() or g.homogeneous_degree != f.homogeneous_degree:
            raise NotReducedError("hyperplane section dropped degree")
        if not squarefree_probabilistic(g, seed=seed):
            raise NotReducedError("hyperplane section is not reduced; retry with a fresh seed")
    return g


def generic_section(f: Poly, seed: int = 0, retries: int = 10) -> Poly:
    """restrict_generic_hyperplane with bounded reseeding."""
    last: Exception | None = None
    for attempt in range(retries):
        try:
            return restrict_generic_hyperplane(f, seed=seed + 7919 * attempt)
        except NotReducedError as exc:
            last = exc
    raise NotReducedError(f"no reduced section found after {retries} seeds") from last


def linear_product(forms: Iterable[Sequence[int]]) -> Poly:
    """Product of linear forms given by coefficient vectors."""
    forms = list(forms)
    nvars = len(forms[0])
    out = Poly.constant(nvars, 1)
    for coeffs in forms:
        out = out * Poly(nvars, {tuple(1 if j == i else 0 for j in range(nvars)): c
                                 for i, c in enumerate(coeffs)})
    return out
