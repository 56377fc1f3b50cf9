"""Second page of the pole order spectral sequence, cell by cell.

For Q = q d + k the top cell has

    dim E_2^{n-q,q}(f)_k = C(Q-1, n) - R_Q

where R_Q is the rank of d(AR(f)-forms) + df ^ Omega^n_{Q-d} inside
Omega^{n+1}_Q.  R_Q is computed either from syzygy generators (``syzygy``
backend) or from two kernel dimensions without any generators (``direct``
backend).
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .forms import FormKind, ext_d_matrix, form_slice_basis, wedge_df_matrix
from .linalg import (CERTIFIED, Arithmetic, RankReport, SparseMat, combine_confidence,
                     matrix_rank, write_triplets)
from .poly import Poly, monomials, partials, slice_basis, slice_dim
from .syzygy import SyzygyGens, minimal_generators

log = logging.getLogger(__name__)

THEORY = "set by theory: F^n H^n(F)_1 = H^n(M)"
MODES = ("arrangement", "free_lqh", "general", "curve")
BACKENDS = ("syzygy", "direct", "both")


class BackendMismatch(ArithmeticError):
    pass


class NegativeDimension(ArithmeticError):
    pass


@dataclass(frozen=True)
class ModeSpec:
    mode: str
    n: int
    d: int

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "curve" and self.n != 2:
            raise ValueError("curve mode needs a polynomial in three variables")

    @property
    def q_range(self) -> range:
        if self.mode == "general":
            return range(self.n + 1)
        if self.mode == "curve":
            return range(1)
        return range(2)

    @property
    def q_max(self) -> int:
        return {"arrangement": 2 * self.d - 1, "free_lqh": 2 * self.d,
                "general": (self.n + 1) * self.d, "curve": self.d}[self.mode]

    def theory_zero(self, q: int, k: int) -> bool:
        return self.mode == "arrangement" and q == 1 and k == self.d

    def cells(self) -> list[tuple[int, int]]:
        """(q, k) pairs in increasing Q."""
        return [(q, k) for q in self.q_range for k in range(1, self.d + 1)]


@dataclass(frozen=True)
class E2Cell:
    q: int
    k: int
    Q: int
    dim: int
    confidence: str
    ranks: dict[str, int] = field(default_factory=dict, compare=False)
    seconds: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class E2Page:
    n: int
    d: int
    mode: ModeSpec
    cells: dict[tuple[int, int], E2Cell]

    def dim(self, q: int, k: int) -> int:
        cell = self.cells.get((q, k))
        return 0 if cell is None else cell.dim

    def nonzero(self) -> dict[tuple[int, int], int]:
        return {key: c.dim for key, c in sorted(self.cells.items()) if c.dim}

    def table(self) -> str:
        ks = range(1, self.d + 1)
        width = max(4, max((len(str(c.dim)) for c in self.cells.values()), default=1) + 1)
        head = "q\\k " + "".join(f"{k:>{width}}" for k in ks)
        lines = [head]
        for q in self.mode.q_range:
            row = []
            for k in ks:
                cell = self.cells.get((q, k))
                row.append("." if cell is None else str(cell.dim))
            lines.append(f"{q:<4}" + "".join(f"{x:>{width}}" for x in row))
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# the two ways of computing R_Q

def phi_matrix(f: Poly, gens: SyzygyGens, Q: int) -> SparseMat:
    """Matrix of ((A_j), eta) -> d(sum A_j omega(r^(j))) + df ^ eta into Omega^{n+1}_Q."""
    n = f.nvars - 1
    d = f.homogeneous_degree
    idx = slice_basis(Q - n - 1, n).index
    rows = len(idx)
    cols: list[dict] = []
    for g, e in gens.upto(Q - n):
        for mono in monomials(Q - e - n, n + 1):
            acc: dict = {}
            for i, r in enumerate(g):
                for m, c in r.terms.items():
                    ei = m[i] + mono[i]
                    if ei:
                        mm = tuple(a + b - (1 if t == i else 0)
                                   for t, (a, b) in enumerate(zip(m, mono)))
                        acc[mm] = acc.get(mm, 0) + c * ei
            cols.append({idx[m]: c for m, c in acc.items() if c})
    koszul = wedge_df_matrix(f, Q - d)
    block = SparseMat.from_columns(rows, cols)
    if koszul.cols:
        block = block.hstack(koszul)
    return block


def rank_syzygy_backend(f: Poly, gens: SyzygyGens, Q: int,
                        arith: Arithmetic = Arithmetic()) -> RankReport:
    n = f.nvars - 1
    if Q - n - 1 < 0:
        return RankReport(0, "syzygy", CERTIFIED)
    if not gens.covers(Q - n):
        raise ValueError(f"generators known only up to degree {gens.degree_bound}, need {Q - n}")
    rep = matrix_rank(phi_matrix(f, gens, Q), arith)
    return RankReport(rep.rank, f"syzygy/{rep.method}", rep.confidence, rep.primes)


def _block(blocks: Sequence[Sequence[SparseMat | None]], row_sizes: Sequence[int],
           col_sizes: Sequence[int]) -> SparseMat:
    entries = {}
    r0 = 0
    for bi, row in enumerate(blocks):
        c0 = 0
        for bj, m in enumerate(row):
            if m is not None:
                for (i, j), v in m.entries.items():
                    entries[(i + r0, j + c0)] = v
            c0 += col_sizes[bj]
        r0 += row_sizes[bi]
    return SparseMat(sum(row_sizes), sum(col_sizes), entries)


def phi1_matrix(f: Poly, Q: int) -> SparseMat:
    """df ^ on Omega^n_{Q-d}; its kernel is K^1(Q)."""
    return wedge_df_matrix(f, Q - f.homogeneous_degree)


def phi2_matrix(f: Poly, Q: int) -> SparseMat:
    """(eta1, eta2) -> (df ^ eta1 + d eta2, df ^ eta2) on Omega^n_{Q-d} x Omega^n_Q."""
    n = f.nvars - 1
    d = f.homogeneous_degree
    w_low = wedge_df_matrix(f, Q - d)
    dd = ext_d_matrix(Q, n)
    w_high = wedge_df_matrix(f, Q)
    rows = [len(form_slice_basis(FormKind.TOPFORM, Q, n)),
            len(form_slice_basis(FormKind.TOPFORM, Q + d, n))]
    cols = [w_low.cols, dd.cols]
    return _block([[w_low, dd], [None, w_high]], rows, cols)


def rank_direct_backend(f: Poly, Q: int, arith: Arithmetic = Arithmetic()) -> RankReport:
    """R_Q = kappa1(Q+d) - kappa2(Q) + dim Omega^n_{Q-d}."""
    n = f.nvars - 1
    d = f.homogeneous_degree
    if Q - n - 1 < 0:
        return RankReport(0, "direct", CERTIFIED)
    m1 = phi1_matrix(f, Q + d)
    m2 = phi2_matrix(f, Q)
    r1 = matrix_rank(m1, arith.reseed(1))
    r2 = matrix_rank(m2, arith.reseed(2))
    kappa1 = m1.cols - r1.rank
    kappa2 = m2.cols - r2.rank
    rank = kappa1 - kappa2 + (n + 1) * slice_dim(Q - d - n, n)
    if rank < 0:
        raise NegativeDimension(f"direct backend produced R_{Q} = {rank}")
    return RankReport(rank, f"direct/{r1.method}", combine_confidence(r1.confidence, r2.confidence),
                      r1.primes + r2.primes)


def top_dim(Q: int, n: int) -> int:
    """dim Omega^{n+1}_Q = C(Q-1, n)."""
    return slice_dim(Q - n - 1, n)


def e2_dim(f: Poly, q: int, k: int, backend: str = "syzygy", gens: SyzygyGens | None = None,
           arith: Arithmetic = Arithmetic()) -> int:
    return _top_cell(f, q, k, backend, gens, arith).dim


def _top_cell(f: Poly, q: int, k: int, backend: str, gens: SyzygyGens | None,
              arith: Arithmetic, dump_dir: str | None = None) -> E2Cell:
    n = f.nvars - 1
    d = f.homogeneous_degree
    Q = q * d + k
    start = time.perf_counter()
    sub = arith.reseed(Q)
    reports: dict[str, RankReport] = {}
    if backend in ("syzygy", "both"):
        if gens is None:
            gens = minimal_generators(f, Q - n, arith)
        reports["syzygy"] = rank_syzygy_backend(f, gens, Q, sub)
        if dump_dir and Q - n - 1 >= 0:
            write_triplets(phi_matrix(f, gens, Q), f"{dump_dir}/phi_Q{Q}.txt")
    if backend in ("direct", "both"):
        reports["direct"] = rank_direct_backend(f, Q, sub)
        if dump_dir and Q - n - 1 >= 0:
            write_triplets(phi1_matrix(f, Q + d), f"{dump_dir}/phi1_Q{Q + d}.txt")
            write_triplets(phi2_matrix(f, Q), f"{dump_dir}/phi2_Q{Q}.txt")
    ranks = {name: rep.rank for name, rep in reports.items()}
    if len(set(ranks.values())) > 1:
        raise BackendMismatch(f"R_{Q} differs between backends: {ranks}")
    rank = next(iter(ranks.values()))
    dim = top_dim(Q, n) - rank
    if dim < 0:
        raise NegativeDimension(f"dim E2 at Q={Q} is {dim}")
    conf = combine_confidence(*(rep.confidence for rep in reports.values()))
    return E2Cell(q, k, Q, dim, conf, ranks, time.perf_counter() - start)


def curve_matrix(f: Poly, k: int) -> SparseMat:
    """r in S_{k-2}^3 -> (sum r_i f_i, div r); its kernel is E_2^{1,0}(f)_k for k <= d."""
    n = f.nvars - 1
    d = f.homogeneous_degree
    w = wedge_df_matrix(f, k)
    dd = ext_d_matrix(k, n)
    return _block([[w], [dd]], [w.rows, dd.rows], [w.cols])


def _curve_cell(f: Poly, k: int, arith: Arithmetic) -> E2Cell:
    start = time.perf_counter()
    m = curve_matrix(f, k)
    rep = matrix_rank(m, arith.reseed(k))
    return E2Cell(0, k, k, m.cols - rep.rank, rep.confidence, {"curve": rep.rank},
                  time.perf_counter() - start)


def _cell_task(args) -> E2Cell:
    f, q, k, backend, gens, arith, mode, dump_dir = args
    if mode == "curve":
        return _curve_cell(f, k, arith)
    return _top_cell(f, q, k, backend, gens, arith, dump_dir)


def compute_page(f: Poly, mode: str = "arrangement", backend: str = "syzygy",
                 arith: Arithmetic = Arithmetic(), jobs: int = 1,
                 gens: SyzygyGens | None = None, qmax: int | None = None,
                 progress: Callable[[E2Cell], None] | None = None,
                 dump_dir: str | None = None) -> E2Page:
    """Fill every (q, k) cell required by ``mode``.

    In ``curve`` mode the q = 0 row holds dim E_2^{1,0}(f)_k instead of
    the top cells; those are what the curve Alexander polynomial needs.
    """
    d = f.homogeneous_degree
    if d is None or d < 1:
        raise ValueError("f must be homogeneous of positive degree")
    n = f.nvars - 1
    spec = ModeSpec(mode, n, d)
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    top = spec.q_max if qmax is None else min(qmax, spec.q_max)
    todo = []
    cells: dict[tuple[int, int], E2Cell] = {}
    for q, k in spec.cells():
        Q = q * d + k
        if spec.theory_zero(q, k):
            cells[(q, k)] = E2Cell(q, k, Q, 0, THEORY)
            continue
        if Q > top:
            continue
        todo.append((q, k))
    if mode != "curve" and backend in ("syzygy", "both") and gens is None:
        bound = max((q * d + k for q, k in todo), default=0) - n
        gens = minimal_generators(f, max(bound, 0), arith)
    tasks = [(f, q, k, backend, gens, arith, mode, dump_dir) for q, k in todo]
    for cell in _run(tasks, jobs):
        cells[(cell.q, cell.k)] = cell
        if progress is not None:
            progress(cell)
    ordered = dict(sorted(cells.items(), key=lambda kv: (kv[1].Q, kv[0])))
    return E2Page(n, d, spec, ordered)


def _run(tasks: list, jobs: int) -> Iterable[E2Cell]:
    # pool.map preserves submission order, so cells stream out in increasing Q
    if jobs <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield _cell_task(t)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(_cell_task, tasks)
