"""Command line front end: ``polespec e2 | alexander | syzygy | freeness``.

Exit codes: 0 success, 1 usage or input error, 2 input not reduced,
3 unresolved rank disagreement, 4 invariant violation (including a mismatch
between the two rank backends), 5 Euler characteristic needed but missing,
6 Galois constancy violated.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .linalg import Arithmetic, KernelLiftError, RankDisagreement
from .monodromy import (CyclotomicPoly, GaloisViolation, IncompletePage, InconsistentInput,
                        PoleSpectrum, TopComputabilityCert, alexander_curve, alexander_top,
                        euler_residual, euler_solve, spectrum_from_page, strict_inequality,
                        symmetry_report, topcomputability_check)
from .poly import NotReducedError, ParseError, Poly, generic_section, parse_poly, squarefree_probabilistic
from .spectral import BACKENDS, MODES, BackendMismatch, E2Cell, E2Page, NegativeDimension, compute_page
from .syzygy import SyzygyGens, minimal_generators, poincare_free, saito_check

log = logging.getLogger("polespec")

EXIT_OK, EXIT_USAGE, EXIT_NOT_REDUCED, EXIT_RANK, EXIT_INVARIANT, EXIT_NO_CHI, EXIT_GALOIS = range(7)


class MissingChi(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# input files

@dataclass
class InputSpec:
    names: list[str]
    text: str
    expect: dict[str, str] = field(default_factory=dict)
    comments: list[str] = field(default_factory=list)

    def poly(self) -> Poly:
        return parse_poly(self.text, self.names)


_EXPECT = re.compile(r"^#\s*expect\s+([\w.-]+)\s*:\s*(.*)$")


def read_input(path: str | Path) -> InputSpec:
    """Parse a ``vars = ...`` / ``f = ...`` file.

    Lines starting with ``#`` are comments; ``# expect key: value`` comments
    record reference outputs and are returned in ``expect``.  An expression
    may continue on following lines that do not contain ``=``.
    """
    names: list[str] | None = None
    expr: list[str] = []
    expect: dict[str, str] = {}
    comments: list[str] = []
    current = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            current = None
            continue
        if line.startswith("#"):
            m = _EXPECT.match(line)
            if m:
                expect[m.group(1)] = m.group(2).strip()
            else:
                comments.append(line.lstrip("# "))
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            key = key.strip()
            if key == "vars":
                names = [v.strip() for v in value.split(",") if v.strip()]
                current = None
            elif key == "f":
                expr = [value.strip()]
                current = "f"
            else:
                raise ValueError(f"{path}: unknown key {key!r}")
        elif current == "f":
            expr.append(line)
        else:
            raise ValueError(f"{path}: stray line {line!r}")
    if not expr:
        raise ValueError(f"{path}: no 'f = ...' line")
    text = " ".join(expr)
    return InputSpec(names or guess_names(text), text, expect, comments)


def guess_names(text: str) -> list[str]:
    """Variables for an expression given without ``--vars``.

    Identifiers drawn from x, y, z, w give x, y, z (three or fewer used) or
    x, y, z, w.  Anything else is taken in alphabetical order.
    """
    used = set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text))
    if used <= {"x", "y", "z", "w"}:
        return ["x", "y", "z"] if "w" not in used else ["x", "y", "z", "w"]
    return sorted(used)


# ---------------------------------------------------------------------------
# configuration and results

@dataclass
class JobConfig:
    poly_text: str
    names: list[str]
    mode: str = "arrangement"
    backend: str = "syzygy"
    arith: Arithmetic = field(default_factory=Arithmetic)
    jobs: int = 1
    qmax: int | None = None
    chi: int | None = None
    bn: int | None = None
    bn_lower: int | None = None
    delta1: CyclotomicPoly | None = None
    nonresonant: tuple[int, ...] = ()
    assume_reduced: bool = False
    dump_dir: str | None = None
    json: bool = False
    quiet: bool = False
    top_only: bool = False
    max_degree: int | None = None


@dataclass
class RunResult:
    f: Poly
    page: E2Page | None = None
    spectrum: PoleSpectrum | None = None
    alexander: dict[int, CyclotomicPoly] = field(default_factory=dict)
    confidence: dict[int, str] = field(default_factory=dict)
    certificates: list[TopComputabilityCert] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    timings: dict[tuple[int, int], float] = field(default_factory=dict)

    def to_json(self, cfg: JobConfig) -> dict:
        n, d = self.f.nvars - 1, self.f.homogeneous_degree
        out: dict = {"d": d, "n": n, "mode": cfg.mode, "poly": self.f.to_text(cfg.names),
                     "vars": cfg.names}
        if self.page is not None:
            out["backend"] = cfg.backend
            out["seed"] = cfg.arith.seed
            out["arithmetic"] = "exact" if cfg.arith.exact else f"modular/{cfg.arith.prime_count}"
            out["page"] = [{"q": c.q, "k": c.k, "Q": c.Q, "dim": c.dim, "confidence": c.confidence}
                           for c in self.page.cells.values()]
        if self.spectrum is not None:
            out["spectrum"] = self.spectrum.to_json()
            out["symmetric"] = symmetry_report(self.spectrum).symmetric
        if self.alexander:
            out["alexander"] = {str(j): p.to_json() for j, p in sorted(self.alexander.items())}
            out["alexander_confidence"] = {str(j): c for j, c in sorted(self.confidence.items())}
        out["certificates"] = [c.to_json() for c in self.certificates]
        out.update(self.extra)
        if self.notes:
            out["notes"] = self.notes
        return out


# ---------------------------------------------------------------------------
# commands

def _prepare(cfg: JobConfig) -> Poly:
    f = parse_poly(cfg.poly_text, cfg.names)
    if not f.is_homogeneous() or f.is_zero():
        raise ValueError("f must be a nonzero homogeneous polynomial")
    if not cfg.assume_reduced and not squarefree_probabilistic(f, seed=cfg.arith.seed):
        raise NotReducedError("f is not reduced (a repeated factor was detected)")
    return f


def _progress(cfg: JobConfig):
    if cfg.quiet:
        return None

    def emit(cell: E2Cell) -> None:
        print(f"Q={cell.Q} q={cell.q} k={cell.k} dim={cell.dim} ms={cell.seconds * 1000:.0f}",
              file=sys.stderr, flush=True)
    return emit


def _page(f: Poly, cfg: JobConfig, mode: str | None = None) -> E2Page:
    if cfg.dump_dir:
        Path(cfg.dump_dir).mkdir(parents=True, exist_ok=True)
    return compute_page(f, mode or cfg.mode, cfg.backend, cfg.arith, cfg.jobs,
                        qmax=cfg.qmax, progress=_progress(cfg), dump_dir=cfg.dump_dir)


def cmd_e2(cfg: JobConfig) -> RunResult:
    f = _prepare(cfg)
    page = _page(f, cfg)
    res = RunResult(f, page)
    res.timings = {key: c.seconds for key, c in page.cells.items()}
    if cfg.mode == "curve":
        return res
    res.spectrum = spectrum_from_page(page)
    res.certificates = topcomputability_check(page, bn=cfg.bn, bn_lower=cfg.bn_lower,
                                              chi=cfg.chi, nonresonant=cfg.nonresonant)
    if strict_inequality(res.certificates):
        res.notes.append("strict inequality: the E_2 sums exceed the supplied external values")
    return res


def _free_chi(f: Poly, cfg: JobConfig) -> int | None:
    """chi(M) = prod (1 - d_j) for a free arrangement with exponents d_j."""
    n = f.nvars - 1
    gens = minimal_generators(f, f.homogeneous_degree - 1, cfg.arith)
    if len(gens) != n:
        return None
    rep = saito_check(f, gens)
    if not rep.is_free:
        return None
    _, chi = poincare_free(rep.exponents)
    return chi


def curve_delta1(f: Poly, cfg: JobConfig) -> CyclotomicPoly:
    """Delta^1 from a generic plane section, which has the same Delta^1."""
    g = f if f.nvars == 3 else generic_section(f, seed=cfg.arith.seed)
    while g.nvars > 3:
        g = generic_section(g, seed=cfg.arith.seed)
    page = compute_page(g, "curve", "syzygy", cfg.arith, 1)
    return alexander_curve(page)[0]


def cmd_alexander(cfg: JobConfig) -> RunResult:
    f = _prepare(cfg)
    n = f.nvars - 1
    d = f.homogeneous_degree
    res = RunResult(f)
    if cfg.mode == "curve":
        page = _page(f, cfg)
        res.page = page
        res.alexander = {0: CyclotomicPoly({1: 1}), 1: alexander_curve(page)[0]}
        res.confidence = {0: "certified", 1: "certified"}
        if cfg.chi is not None:
            res.alexander[2] = euler_solve([res.alexander[0], res.alexander[1], None], cfg.chi, d)
            res.confidence[2] = "certified"
        return res

    res = cmd_e2(cfg)
    top, galois = alexander_top(res.page)
    res.alexander[n] = top
    certified = all(c.status == "certified" for c in res.certificates)
    res.confidence[n] = "certified" if certified else "conjectural"
    res.extra["galois"] = galois.to_json()
    if cfg.top_only or n < 2:
        return res
    res.alexander[0] = CyclotomicPoly({1: 1})
    res.confidence[0] = "certified"
    if n == 2:
        res.alexander[1] = curve_delta1(f, cfg)
        res.confidence[1] = "certified"
        return _check_euler(res, cfg.chi, d)
    if n != 3:
        res.notes.append("lower Alexander polynomials are only assembled for n <= 3")
        return res
    if cfg.delta1 is not None:
        res.alexander[1] = cfg.delta1
        res.confidence[1] = "supplied"
    else:
        res.alexander[1] = curve_delta1(f, cfg)
        res.confidence[1] = "certified"
    chi = cfg.chi
    if chi is None and cfg.mode == "arrangement":
        chi = _free_chi(f, cfg)
        if chi is not None:
            res.notes.append(f"chi(M) = {chi} from the exponents of the free arrangement")
    if chi is None:
        raise MissingChi("Delta^2 needs chi(M): pass --chi, or --top-only to skip it")
    res.extra["chi"] = chi
    res.alexander[2] = euler_solve([res.alexander[0], res.alexander[1], None, top], chi, d)
    res.confidence[2] = "conjectural" if "conjectural" in res.confidence.values() else "certified"
    return res


def _check_euler(res: RunResult, chi: int | None, d: int) -> RunResult:
    if chi is not None:
        deltas = [res.alexander[j] for j in range(len(res.alexander))]
        resid = euler_residual(deltas, chi, d)
        res.extra["euler_residual"] = {str(c): e for c, e in resid.items()}
        if resid:
            raise InconsistentInput(f"Euler identity fails with chi = {chi}: {resid}")
    return res


def _syzygy_bound(f: Poly, cfg: JobConfig) -> int:
    return cfg.max_degree if cfg.max_degree is not None else 2 * f.homogeneous_degree - f.nvars


def cmd_syzygy(cfg: JobConfig) -> RunResult:
    f = _prepare(cfg)
    gens = minimal_generators(f, _syzygy_bound(f, cfg), cfg.arith, stop_when_free=True)
    res = RunResult(f)
    res.extra["syzygies"] = _gens_json(gens, cfg.names)
    return res


def cmd_freeness(cfg: JobConfig) -> RunResult:
    f = _prepare(cfg)
    n = f.nvars - 1
    bound = cfg.max_degree if cfg.max_degree is not None else f.homogeneous_degree - 1
    gens = minimal_generators(f, bound, cfg.arith, stop_when_free=True)
    res = RunResult(f)
    if gens.free:
        rep = saito_check(f, gens)
        coeffs, chi = poincare_free(rep.exponents)
        verdict = {"free": True, "exponents": list(rep.exponents), "saito_scale": str(rep.determinant_scale),
                   "poincare": coeffs, "chi": chi, "reason": rep.reason}
    elif len(gens) > n:
        verdict = {"free": False, "reason": f"{len(gens)} minimal generators in degree <= {bound}, more than {n}"}
    else:
        verdict = {"free": None, "reason": f"undecided: {len(gens)} generators up to degree {bound}"}
    verdict["degrees"] = list(gens.degrees)
    res.extra["freeness"] = verdict
    return res


def _gens_json(gens: SyzygyGens, names: Sequence[str]) -> dict:
    return {"degrees": list(gens.degrees), "degree_bound": gens.degree_bound, "free": gens.free,
            "generators": [[r.to_text(names) for r in g] for g in gens.gens]}


# ---------------------------------------------------------------------------
# text rendering

def render_text(command: str, res: RunResult, cfg: JobConfig) -> str:
    f = res.f
    lines = [f"f = {f.to_text(cfg.names)}   (n = {f.nvars - 1}, d = {f.homogeneous_degree})"]
    if res.page is not None:
        lines.append(f"mode {cfg.mode}, backend {cfg.backend}")
        label = "dim E_2^{1,0}(f)_k" if cfg.mode == "curve" else "dim E_2^{n-q,q}(f)_k"
        lines.append(label)
        lines.append(res.page.table())
    if res.spectrum is not None:
        lines.append(f"Sp_P(f) = {res.spectrum.to_text()}")
        sym = symmetry_report(res.spectrum)
        lines.append("spectrum symmetric about t^1" if sym.symmetric else
                     "spectrum not symmetric: " + ", ".join(f"Q={Q}: {a} vs {b}" for Q, a, b in sym.mismatches))
    for j, p in sorted(res.alexander.items(), reverse=True):
        lines.append(f"Delta^{j} = {p.to_text()}   [{res.confidence.get(j, '')}]")
    for c in res.certificates:
        if c.status != "conjectural" or command == "e2":
            ext = "" if c.external is None else f", external {c.external}"
            lines.append(f"k={c.k}: {c.status}" + (f" ({c.source})" if c.source else "")
                         + f", E_2 sum {c.e2_sum}{ext}, m={c.m}" + (f"; {c.note}" if c.note and c.status != "conjectural" else ""))
    if "freeness" in res.extra:
        v = res.extra["freeness"]
        if v["free"]:
            lines.append(f"free with exponents {tuple(v['exponents'])}; chi(M) = {v['chi']}")
        else:
            lines.append(("not free" if v["free"] is False else "freeness undecided") + f": {v['reason']}")
        lines.append(f"generator degrees {v['degrees']}")
    if "syzygies" in res.extra:
        s = res.extra["syzygies"]
        lines.append(f"AR(f) generator degrees {s['degrees']}" + (" (free basis)" if s["free"] else
                                                                 f" (searched up to degree {s['degree_bound']})"))
        for deg, g in zip(s["degrees"], s["generators"]):
            lines.append(f"  [{deg}] (" + ", ".join(g) + ")")
    lines.extend(f"note: {x}" for x in res.notes)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep exit code 2 for non-reduced input
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--poly", help="homogeneous polynomial, e.g. 'x*y*z*(x+y+z)'")
    src.add_argument("--input", help="file with 'vars = x,y,z,w' and 'f = <expr>' lines")
    common.add_argument("--vars", help="comma separated variable names (default: guessed)")
    common.add_argument("--mode", choices=MODES, default="arrangement")
    common.add_argument("--backend", choices=BACKENDS, default="syzygy")
    arith = common.add_mutually_exclusive_group()
    arith.add_argument("--primes", type=int, default=2, metavar="N",
                       help="agreeing random primes required per rank (default 2)")
    arith.add_argument("--exact", action="store_true", help="exact rational elimination")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--qmax", type=int, help="stop at this graded degree Q")
    common.add_argument("--chi", type=int, help="Euler characteristic of the complement M")
    common.add_argument("--bn", help="b_n(F), or a bracket LO..HI from external arguments")
    common.add_argument("--delta1", help="Delta^1 as 'Phi_1^9*Phi_3' or '1:9,3:1'")
    common.add_argument("--nonresonant", type=_int_list, default=(), metavar="K1,K2,...")
    common.add_argument("--json", action="store_true")
    common.add_argument("--dump-matrices", metavar="DIR")
    common.add_argument("--assume-reduced", action="store_true")
    common.add_argument("--quiet", action="store_true", help="no per-cell progress on stderr")
    common.add_argument("--top-only", action="store_true", help="alexander: only Delta^n")
    common.add_argument("--max-degree", type=int, help="syzygy/freeness: degree bound of the search")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="polespec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("e2", parents=[common], help="E_2 page and pole order spectrum")
    sub.add_parser("alexander", parents=[common], help="Alexander polynomials")
    sub.add_parser("syzygy", parents=[common], help="minimal generators of AR(f)")
    sub.add_parser("freeness", parents=[common], help="Saito freeness test")
    return parser


def config_from_args(args: argparse.Namespace) -> JobConfig:
    if args.input:
        spec = read_input(args.input)
        text, names = spec.text, spec.names
    else:
        text, names = args.poly, None
    if args.vars:
        names = [v.strip() for v in args.vars.split(",") if v.strip()]
    names = names or guess_names(text)
    bn = bn_lower = None
    if args.bn:
        if ".." in args.bn:
            lo, hi = args.bn.split("..")
            bn_lower = int(lo)
            if int(lo) == int(hi):
                bn = int(lo)
        else:
            bn = int(args.bn)
    return JobConfig(
        poly_text=text, names=names, mode=args.mode, backend=args.backend,
        arith=Arithmetic(exact=args.exact, prime_count=args.primes, seed=args.seed),
        jobs=args.jobs, qmax=args.qmax, chi=args.chi, bn=bn, bn_lower=bn_lower,
        delta1=CyclotomicPoly.parse(args.delta1) if args.delta1 else None,
        nonresonant=args.nonresonant, assume_reduced=args.assume_reduced,
        dump_dir=args.dump_matrices, json=args.json, quiet=args.quiet, top_only=args.top_only,
        max_degree=args.max_degree)


COMMANDS = {"e2": cmd_e2, "alexander": cmd_alexander, "syzygy": cmd_syzygy, "freeness": cmd_freeness}


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Run the CLI; returns (exit code, stdout text)."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        res = COMMANDS[args.command](cfg)
    except (ParseError, ValueError, OSError) as exc:
        if isinstance(exc, NotReducedError):
            return _fail(EXIT_NOT_REDUCED, exc)
        if isinstance(exc, (InconsistentInput, IncompletePage)):
            return _fail(EXIT_INVARIANT, exc)
        return _fail(EXIT_USAGE, exc)
    except (RankDisagreement, KernelLiftError) as exc:
        return _fail(EXIT_RANK, exc)
    except (BackendMismatch, NegativeDimension) as exc:
        return _fail(EXIT_INVARIANT, exc)
    except MissingChi as exc:
        return _fail(EXIT_NO_CHI, exc)
    except GaloisViolation as exc:
        return _fail(EXIT_GALOIS, exc)
    if cfg.json:
        return EXIT_OK, json.dumps(res.to_json(cfg), indent=2, sort_keys=True)
    return EXIT_OK, render_text(args.command, res, cfg)


def _fail(code: int, exc: Exception) -> tuple[int, str]:
    print(f"polespec: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code, ""


def main(argv: Sequence[str] | None = None) -> int:
    code, out = run(argv)
    if out:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
