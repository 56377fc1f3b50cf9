#!/usr/bin/env python3
"""Run every fixture in fixtures/ and compare with its ``# expect`` annotations.

    python3 scripts/run_corpus.py                 # all but the slow fixtures
    python3 scripts/run_corpus.py --slow --jobs 4 # include A(3,3,4) and A(2,1,4)
    python3 scripts/run_corpus.py ex56            # fixtures whose name contains ex56
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from polespec.cli import JobConfig, curve_delta1, read_input
from polespec.linalg import Arithmetic
from polespec.monodromy import (CyclotomicPoly, alexander_curve, alexander_top, euler_solve,
                                smooth_page_dims, spectrum_from_page, strict_inequality,
                                symmetry_report, topcomputability_check)
from polespec.spectral import compute_page
from polespec.syzygy import minimal_generators, poincare_free, saito_check

ROOT = Path(__file__).resolve().parent.parent
SLOW = ("ex54", "ex55")


def _pairs(text: str) -> dict:
    out = {}
    for item in text.split():
        key, val = item.split(":")
        key = tuple(int(x) for x in key.split(",")) if "," in key else int(key)
        out[key] = int(val)
    return out


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def check_fixture(path: Path, arith: Arithmetic, backend: str, jobs: int) -> list[tuple[str, bool, str]]:
    spec = read_input(path)
    exp = spec.expect
    f = spec.poly()
    n, d = f.nvars - 1, f.homogeneous_degree
    mode = exp.get("mode", "arrangement")
    results = []

    def record(name, got, want):
        results.append((name, got == want, f"got {got}, want {want}"))

    top = None
    if mode != "curve":
        page = compute_page(f, mode, backend, arith, jobs)
        if "cells" in exp:
            record("cells", page.nonzero(), _pairs(exp["cells"]))
        if exp.get("smooth") == "true":
            record("smooth mu pattern", page.nonzero(), smooth_page_dims(n, d))
        spec_ = spectrum_from_page(page)
        if "spectrum" in exp:
            record("spectrum", dict(spec_.entries), _pairs(exp["spectrum"]))
        if "symmetric" in exp:
            record("symmetric", symmetry_report(spec_).symmetric, exp["symmetric"] == "true")
        top, galois = alexander_top(page)
        record("galois constancy", galois.constant, True)
        record("spectrum mass = deg Delta^n", spec_.total, top.degree)
        if f"delta{n}" in exp:
            record(f"delta{n}", top.to_text(), CyclotomicPoly.parse(exp[f"delta{n}"]).to_text())
        if "bn" in exp and mode == "general":
            bn = exp["bn"]
            kw = {"bn_lower": int(bn.split("..")[0])} if ".." in bn else {"bn": int(bn)}
            certs = topcomputability_check(page, **kw)
            status = "strict" if strict_inequality(certs) else (
                "certified" if all(c.status == "certified" for c in certs) else "conjectural")
            record("top-computability", status, exp.get("topcomputable", "certified"))

    if "exponents" in exp or "syzygy-degrees" in exp or "free" in exp:
        gens = minimal_generators(f, 2 * d - n - 1, arith)
        if "syzygy-degrees" in exp:
            record("syzygy degrees", list(gens.degrees), _ints(exp["syzygy-degrees"]))
        if "free" in exp:
            record("free", gens.free, exp["free"] == "true")
        if "exponents" in exp:
            rep = saito_check(f, gens)
            record("exponents", list(rep.exponents), _ints(exp["exponents"]))
            if "chi" in exp:
                record("chi from exponents", poincare_free(rep.exponents)[1], int(exp["chi"]))

    cfg = JobConfig(poly_text=spec.text, names=spec.names, arith=arith)
    if "delta1" in exp:
        if mode == "curve":
            delta1 = alexander_curve(compute_page(f, "curve", "syzygy", arith))[0]
        else:
            delta1 = curve_delta1(f, cfg)
        record("delta1", delta1.to_text(), CyclotomicPoly.parse(exp["delta1"]).to_text())
        if "chi" in exp and n == 3 and top is not None and "delta2" in exp:
            d2 = euler_solve([CyclotomicPoly({1: 1}), delta1, None, top], int(exp["chi"]), d)
            record("delta2", d2.to_text(), CyclotomicPoly.parse(exp["delta2"]).to_text())
    return results


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="substrings selecting fixtures")
    ap.add_argument("--slow", action="store_true", help="include the d = 16, 18 arrangements")
    ap.add_argument("--backend", default="syzygy", choices=("syzygy", "direct", "both"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--exact", action="store_true")
    args = ap.parse_args(argv)
    arith = Arithmetic(exact=args.exact, seed=args.seed)
    failures = 0
    for path in sorted((ROOT / "fixtures").glob("*.txt")):
        if args.names and not any(s in path.name for s in args.names):
            continue
        if not args.slow and not args.names and path.name.startswith(SLOW):
            print(f"SKIP {path.name} (slow; pass --slow)")
            continue
        start = time.perf_counter()
        results = check_fixture(path, arith, args.backend, args.jobs)
        secs = time.perf_counter() - start
        for name, ok, detail in results:
            failures += not ok
            print(f"{'PASS' if ok else 'FAIL'} {path.stem}: {name}" + ("" if ok else f" ({detail})"))
        print(f"     {path.stem}: {secs:.1f}s")
    print(f"{failures} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
