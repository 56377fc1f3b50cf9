"""Exact sparse rank and kernel computations over Q.

Two independent routes:

* modular: reduce mod random word-size primes, eliminate sparsely while
  fill-in stays low and let FLINT's ``nmod_mat`` finish the dense rest.  Ranks mod p never exceed the rational rank, so the
  maximum over primes is kept and agreement of two primes is required.
* exact: sparse fraction-free elimination over Z written here, with
  Markowitz-style pivoting (sparsest column first, ties to lowest index).

Kernels found mod p are lifted to Q by rational reconstruction and always
re-verified exactly.
"""
from __future__ import annotations

import heapq
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from pathlib import Path
from typing import Iterable, Sequence

import flint

log = logging.getLogger(__name__)

CERTIFIED = "certified"
PROBABILISTIC = "probabilistic"
# density above which sparse elimination mod p hands over to dense FLINT rank
DENSE_SWITCH = 0.05


class BadPrime(ArithmeticError):
    pass


class RankDisagreement(ArithmeticError):
    pass


class KernelLiftError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SparseMat:
    rows: int
    cols: int
    entries: dict[tuple[int, int], int | Fraction] = field(default_factory=dict)

    def __post_init__(self):
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError(f"entry ({r}, {c}) outside {self.rows}x{self.cols}")
            if v == 0:
                raise ValueError("stored zero entry")

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[dict[int, int | Fraction]]) -> "SparseMat":
        entries = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v != 0:
                    entries[(i, j)] = v
        return cls(rows, len(columns), entries)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence]) -> "SparseMat":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        entries = {(i, j): _q(v) for i, row in enumerate(data) for j, v in enumerate(row) if v != 0}
        return cls(rows, cols, entries)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_dense(self) -> list[list]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def row_dicts(self) -> list[dict[int, int | Fraction]]:
        rows: list[dict] = [{} for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            rows[i][j] = v
        return rows

    def transpose(self) -> "SparseMat":
        return SparseMat(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def hstack(self, other: "SparseMat") -> "SparseMat":
        if other.rows != self.rows:
            raise ValueError("row counts differ")
        entries = dict(self.entries)
        entries.update({(i, j + self.cols): v for (i, j), v in other.entries.items()})
        return SparseMat(self.rows, self.cols + other.cols, entries)

    def apply(self, v: Sequence) -> list:
        out: list = [0] * self.rows
        for (i, j), a in self.entries.items():
            if v[j]:
                out[i] += a * v[j]
        return out


def _q(v) -> int | Fraction:
    if isinstance(v, int):
        return v
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else v


@dataclass(frozen=True)
class RankReport:
    rank: int
    method: str
    confidence: str
    primes: tuple[int, ...] = ()

    def weakest(self, other: "RankReport") -> str:
        return combine_confidence(self.confidence, other.confidence)


def combine_confidence(*tags: str) -> str:
    return PROBABILISTIC if PROBABILISTIC in tags else CERTIFIED


# ---------------------------------------------------------------------------
# modular route

def random_prime(rng: random.Random, low: int = 1 << 30, high: int = 1 << 31) -> int:
    x = rng.randrange(low, high) | 1
    while not flint.fmpz(x).is_prime():
        x += 2
        if x >= high:
            x = low + 1
    return x


def to_nmod(m: SparseMat, p: int) -> flint.nmod_mat:
    M = flint.nmod_mat(m.rows, m.cols, p)
    for (i, j), v in m.entries.items():
        if isinstance(v, Fraction):
            den = v.denominator % p
            if den == 0:
                raise BadPrime(p)
            M[i, j] = v.numerator * pow(den, -1, p) % p
        else:
            M[i, j] = v % p
    return M


def _reduce_mod_p(m: SparseMat, p: int) -> tuple[dict[int, dict[int, int]], dict[int, set[int]]]:
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for (i, j), v in m.entries.items():
        if isinstance(v, Fraction):
            den = v.denominator % p
            if den == 0:
                raise BadPrime(p)
            v = v.numerator * pow(den, -1, p) % p
        else:
            v = v % p
        if v:
            rows.setdefault(i, {})[j] = v
            cols.setdefault(j, set()).add(i)
    return rows, cols


def sparse_eliminate_mod_p(m: SparseMat, p: int, dense_switch: float = DENSE_SWITCH
                           ) -> tuple[int, flint.nmod_mat | None]:
    """Sparse elimination mod p with Markowitz pivots until the rest turns dense.

    Pivots are taken in the sparsest remaining column, on its shortest row.
    Once the remaining block has density above ``dense_switch`` it is handed
    back as a dense matrix.  Returns (pivots found, remaining block or None);
    the rank mod p is the pivot count plus the rank of the block.
    """
    rows, cols = _reduce_mod_p(m, p)
    heap = [(len(s), j) for j, s in cols.items()]
    heapq.heapify(heap)
    pivots = 0
    while heap:
        cnt, j = heapq.heappop(heap)
        s = cols.get(j)
        if s is None:
            continue
        if len(s) != cnt:
            heapq.heappush(heap, (len(s), j))
            continue
        if cnt == 0:
            del cols[j]
            continue
        piv = min(s, key=lambda i: (len(rows[i]), i))
        prow = rows.pop(piv)
        pivots += 1
        inv = pow(prow[j], -1, p)
        for c in prow:
            cols[c].discard(piv)
        del cols[j]
        for i in s:
            r = rows[i]
            a = r.pop(j) * inv % p
            for c, v in prow.items():
                if c == j:
                    continue
                w = (r.get(c, 0) - a * v) % p
                if w:
                    if c not in r:
                        cols[c].add(i)
                    r[c] = w
                elif c in r:
                    del r[c]
                    cols[c].discard(i)
            if not r:
                del rows[i]
        for c in prow:
            if c in cols:
                heapq.heappush(heap, (len(cols[c]), c))
        if pivots % 64 == 0 and rows:
            nnz = sum(len(r) for r in rows.values())
            live = sum(1 for c in cols.values() if c)
            if nnz > dense_switch * len(rows) * max(live, 1):
                break
    live_cols = sorted(c for c, s in cols.items() if s)
    if not rows or not live_cols:
        return pivots, None
    where = {c: k for k, c in enumerate(live_cols)}
    M = flint.nmod_mat(len(rows), len(live_cols), p)
    for a, i in enumerate(sorted(rows)):
        for c, v in rows[i].items():
            M[a, where[c]] = v
    return pivots, M


def rank_mod_p(m: SparseMat, p: int) -> int:
    if m.rows == 0 or m.cols == 0 or not m.entries:
        return 0
    pivots, rest = sparse_eliminate_mod_p(m, p)
    return pivots + (rest.rank() if rest is not None else 0)


def rank_modular(m: SparseMat, prime_count: int = 2, seed: int = 0,
                 max_primes: int = 5, escalate: bool = True) -> RankReport:
    """Rank as the maximum of ranks mod random primes.

    Needs ``prime_count`` primes agreeing on the maximum; on disagreement
    more primes are drawn, then the exact route takes over.
    """
    if m.rows == 0 or m.cols == 0 or not m.entries:
        return RankReport(0, "modular", CERTIFIED)
    rng = random.Random(seed)
    ranks: list[tuple[int, int]] = []
    redraws = 0
    while len(ranks) < max_primes:
        p = random_prime(rng)
        try:
            r = rank_mod_p(m, p)
        except BadPrime:
            redraws += 1
            if redraws > 20:
                break
            continue
        ranks.append((p, r))
        best = max(r for _, r in ranks)
        if best == min(m.rows, m.cols):
            # full rank mod p is full rank over Q
            return RankReport(best, "modular", CERTIFIED, tuple(p for p, _ in ranks))
        agreeing = [p for p, r in ranks if r == best]
        if len(ranks) >= prime_count and len(agreeing) >= max(prime_count, 1):
            return RankReport(best, "modular", PROBABILISTIC, tuple(p for p, _ in ranks))
    if escalate:
        log.warning("modular ranks disagree %s; escalating to exact elimination", ranks)
        return rank_exact(m)
    raise RankDisagreement(f"mod-p ranks disagree: {ranks}")


def rref_mod_p(m: SparseMat, p: int) -> tuple[list[int], list[list[int]]]:
    """Pivot columns and the nonzero rows of the reduced echelon form mod p."""
    if m.rows == 0 or m.cols == 0 or not m.entries:
        return [], []
    R, rank = to_nmod(m, p).rref()
    table = R.tolist()
    pivots = []
    rows = []
    for i in range(rank):
        row = [int(x) for x in table[i]]
        j = next(k for k, x in enumerate(row) if x)
        pivots.append(j)
        rows.append(row)
    return pivots, rows


def pivot_columns_modular(m: SparseMat, p: int) -> list[int]:
    return rref_mod_p(m, p)[0]


def rational_reconstruct(a: int, mod: int) -> Fraction | None:
    """Smallest-height fraction u/v with u = a v (mod ``mod``), if one exists."""
    bound = isqrt(mod // 2)
    r0, r1 = mod, a % mod
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or gcd(s1, mod) != 1:
        return None
    return Fraction(r1, s1)


def _kernel_mod_p(m: SparseMat, p: int) -> tuple[list[int], list[list[int]]]:
    """Free columns and the matching kernel vectors mod p (1 on the free column)."""
    pivots, rows = rref_mod_p(m, p)
    pivset = set(pivots)
    free = [j for j in range(m.cols) if j not in pivset]
    vecs = []
    for j in free:
        v = [0] * m.cols
        v[j] = 1
        for pc, row in zip(pivots, rows):
            if row[j]:
                v[pc] = (-row[j]) % p
        vecs.append(v)
    return free, vecs


def _crt(a1: int, m1: int, a2: int, m2: int) -> int:
    t = (a2 - a1) * pow(m1, -1, m2) % m2
    return a1 + m1 * t


def is_kernel_vector(m: SparseMat, v: Sequence) -> bool:
    return not any(m.apply(v))


def _kernel_lift(m: SparseMat, seed: int, max_primes: int) -> list[list]:
    rng = random.Random(seed)
    free_ref: list[int] | None = None
    residues: list[list[int]] = []
    modulus = 1
    used = 0
    while used < max_primes:
        p = random_prime(rng)
        try:
            free, vecs = _kernel_mod_p(m, p)
        except BadPrime:
            continue
        used += 1
        if free_ref is None or len(free) < len(free_ref) or (len(free) == len(free_ref) and free != free_ref):
            # unlucky primes inflate the kernel or move pivots; restart the CRT
            free_ref, residues, modulus = free, vecs, p
        elif len(free) > len(free_ref):
            continue
        else:
            residues = [[_crt(a, modulus, b, p) for a, b in zip(va, vb)]
                        for va, vb in zip(residues, vecs)]
            modulus *= p
        lifted = []
        for v in residues:
            w = [rational_reconstruct(a, modulus) for a in v]
            if any(x is None for x in w):
                break
            w = [_q(x) for x in w]
            if not is_kernel_vector(m, w):
                break
            lifted.append(w)
        else:
            return lifted
    raise KernelLiftError("rational reconstruction did not verify")


def kernel_basis(m: SparseMat, mode: str = "modular", seed: int = 0,
                 max_primes: int = 4) -> list[list[int | Fraction]]:
    """Vectors spanning ker(m); every returned v satisfies m v = 0 exactly."""
    if m.cols == 0:
        return []
    if not m.entries:
        return [[1 if i == j else 0 for i in range(m.cols)] for j in range(m.cols)]
    if mode == "modular":
        try:
            return _kernel_lift(m, seed, max_primes)
        except KernelLiftError:
            log.warning("modular kernel lift failed; falling back to exact elimination")
    elif mode != "exact":
        raise ValueError(f"unknown kernel mode {mode!r}")
    return _kernel_exact(m)


# ---------------------------------------------------------------------------
# exact route

def _integer_row(row: dict[int, int | Fraction]) -> dict[int, int]:
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = den * v.denominator // gcd(den, v.denominator)
    out = {j: int(v * den) for j, v in row.items()}
    return _primitive(out)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {j: v // g for j, v in row.items()}
    return row


def _eliminate(rows: list[dict[int, int]], gauss_jordan: bool) -> list[tuple[int, int]]:
    """In-place fraction-free elimination; returns (pivot column, pivot row) pairs.

    Pivot choice: the column with the fewest entries among not-yet-pivoted
    rows, then the shortest row in it; ties go to the lowest index.
    """
    col_active: dict[int, set[int]] = {}
    col_done: dict[int, set[int]] = {}
    done: set[int] = set()
    for i, row in enumerate(rows):
        for j in row:
            col_active.setdefault(j, set()).add(i)
    pivots = []
    while True:
        best = None
        for c, s in col_active.items():
            if s and (best is None or (len(s), c) < best):
                best = (len(s), c)
        if best is None:
            break
        c = best[1]
        r = min(col_active[c], key=lambda i: (len(rows[i]), i))
        prow = rows[r]
        for j in prow:
            col_active[j].discard(r)
            col_done.setdefault(j, set()).add(r)
        done.add(r)
        pc = prow[c]
        targets = list(col_active[c])
        if gauss_jordan:
            targets += [i for i in col_done[c] if i != r]
        for i in targets:
            row = rows[i]
            a = row[c]
            g = gcd(pc, a)
            mp, ma = pc // g, a // g
            new = {j: v * mp for j, v in row.items()}
            for j, v in prow.items():
                w = new.get(j, 0) - v * ma
                if w:
                    new[j] = w
                else:
                    new.pop(j, None)
            new = _primitive(new)
            sets = col_done if i in done else col_active
            for j in row:
                if j not in new:
                    sets[j].discard(i)
            for j in new:
                if j not in row:
                    sets.setdefault(j, set()).add(i)
            rows[i] = new
        pivots.append((c, r))
    return pivots


def rank_exact(m: SparseMat) -> RankReport:
    rows = [_integer_row(r) for r in m.row_dicts() if r]
    pivots = _eliminate(rows, gauss_jordan=False)
    return RankReport(len(pivots), "exact", CERTIFIED)


def _kernel_exact(m: SparseMat) -> list[list[int | Fraction]]:
    rows = [_integer_row(r) for r in m.row_dicts() if r]
    pivots = _eliminate(rows, gauss_jordan=True)
    pivot_cols = {c for c, _ in pivots}
    out = []
    for j in range(m.cols):
        if j in pivot_cols:
            continue
        v: list[int | Fraction] = [0] * m.cols
        v[j] = 1
        for c, r in pivots:
            row = rows[r]
            if j in row:
                v[c] = _q(Fraction(-row[j], row[c]))
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# front door

@dataclass(frozen=True)
class Arithmetic:
    """How ranks are computed: ``exact=True`` or ``prime_count`` random primes."""
    exact: bool = False
    prime_count: int = 2
    seed: int = 0

    def reseed(self, *salt: int) -> "Arithmetic":
        s = self.seed
        for x in salt:
            s = (s * 1000003 + x + 17) % (1 << 61)
        return Arithmetic(self.exact, self.prime_count, s)


def matrix_rank(m: SparseMat, arith: Arithmetic = Arithmetic()) -> RankReport:
    if arith.exact:
        return rank_exact(m)
    return rank_modular(m, arith.prime_count, arith.seed)


# ---------------------------------------------------------------------------
# triplet dump

def write_triplets(m: SparseMat, path: str | Path) -> None:
    """``rows cols nnz`` header, then one ``row col num/den`` line per entry."""
    lines = [f"{m.rows} {m.cols} {m.nnz}"]
    for (i, j), v in sorted(m.entries.items()):
        v = Fraction(v)
        lines.append(f"{i} {j} {v.numerator}/{v.denominator}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_triplets(path: str | Path) -> SparseMat:
    it = iter(Path(path).read_text().split("\n"))
    rows, cols, nnz = (int(x) for x in next(it).split())
    entries = {}
    for line in it:
        if not line.strip():
            continue
        i, j, v = line.split()
        entries[(int(i), int(j))] = _q(Fraction(v))
    if len(entries) != nnz:
        raise ValueError(f"expected {nnz} entries, read {len(entries)}")
    return SparseMat(rows, cols, entries)


def independent_columns(vectors: Iterable[Sequence], length: int, start: int,
                        arith: Arithmetic = Arithmetic()) -> list[int]:
    """Indices (>= start) of vectors that extend the span of all earlier ones.

    Column order is respected: the result is the set of pivot columns of the
    matrix whose columns are ``vectors``, restricted to positions >= start.
    """
    cols = [{i: _q(x) for i, x in enumerate(v) if x} for v in vectors]
    m = SparseMat.from_columns(length, cols)
    if arith.exact:
        return [j for j in _pivot_columns_exact(m) if j >= start]
    rng = random.Random(arith.seed)
    runs = []
    for _ in range(max(arith.prime_count, 1)):
        while True:
            p = random_prime(rng)
            try:
                runs.append(pivot_columns_modular(m, p))
                break
            except BadPrime:
                continue
    best = max(runs, key=len)
    return [j for j in best if j >= start]


def _pivot_columns_exact(m: SparseMat) -> list[int]:
    """Column-order pivots: greedy insertion of columns into an echelon basis."""
    basis: dict[int, dict[int, Fraction]] = {}
    pivots = []
    for j, col in enumerate(_columns(m)):
        v = {i: Fraction(x) for i, x in col.items()}
        for lead in sorted(basis):
            if lead in v:
                b = basis[lead]
                factor = v[lead] / b[lead]
                for i, x in b.items():
                    w = v.get(i, 0) - factor * x
                    if w:
                        v[i] = w
                    else:
                        v.pop(i, None)
        if v:
            basis[min(v)] = v
            pivots.append(j)
    return pivots


def _columns(m: SparseMat) -> list[dict[int, int | Fraction]]:
    cols: list[dict] = [{} for _ in range(m.cols)]
    for (i, j), v in m.entries.items():
        cols[j][i] = v
    return cols
