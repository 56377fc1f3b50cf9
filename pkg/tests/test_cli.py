import json

import pytest

from polespec import cli
from polespec.cli import guess_names, main, read_input, run
from polespec.linalg import RankDisagreement
from polespec.monodromy import GaloisViolation

from conftest import FIXTURES

NF = "x*y*z*w*(x+y+z)*(y-z+w)"


def test_e2_json_spectrum_and_determinism():
    argv = ["e2", "--poly", NF, "--backend", "both", "--json", "--quiet", "--seed", "4"]
    code, out = run(argv)
    assert code == 0
    data = json.loads(out)
    assert [e["mult"] for e in data["spectrum"]] == [1, 2, 8, 2, 2, 2, 1]
    assert data["spectrum"][0]["alpha"] == "4/6"
    assert data["d"] == 6 and data["n"] == 3 and data["mode"] == "arrangement"
    assert data["symmetric"] is False
    assert run(argv)[1] == out


def test_progress_lines_go_to_stderr(capsys):
    assert main(["e2", "--poly", "x^3+y^3+z^3", "--mode", "general"]) == 0
    captured = capsys.readouterr()
    lines = [ln for ln in captured.err.splitlines() if ln.startswith("Q=")]
    assert len(lines) == 9
    assert all(set(tok.split("=")[0] for tok in ln.split()) == {"Q", "q", "k", "dim", "ms"} for ln in lines)
    assert "Sp_P(f)" in captured.out


def test_alexander_nonfree_with_chi():
    code, out = run(["alexander", "--poly", NF, "--chi", "-2", "--json", "--quiet"])
    data = json.loads(out)
    assert code == 0
    assert data["alexander"]["3"] == {"1": 8, "2": 2, "3": 2, "6": 2}
    assert data["alexander"]["2"] == {"1": 10}
    assert data["alexander"]["1"] == {"1": 5}
    assert data["galois"]["galois_constant"]


def test_alexander_braid_derives_chi_and_uses_delta1():
    code, out = run(["alexander", "--input", str(FIXTURES / "ex52_braid.txt"), "--delta1", "Phi_1^9",
                     "--json", "--quiet"])
    data = json.loads(out)
    assert code == 0 and data["chi"] == -6
    assert data["alexander"]["2"] == {"1": 26, "2": 2}
    assert data["alexander_confidence"]["1"] == "supplied"


def test_alexander_missing_chi_exits_5():
    code, _ = run(["alexander", "--input", str(FIXTURES / "ex58_gen.txt"), "--mode", "general", "--quiet"])
    assert code == 5
    code, out = run(["alexander", "--input", str(FIXTURES / "ex58_gen.txt"), "--mode", "general",
                     "--quiet", "--top-only", "--bn", "5"])
    assert code == 0 and "Delta^3 = Phi_1^2 * Phi_2 * Phi_4   [certified]" in out


def test_curve_mode_alexander():
    code, out = run(["alexander", "--poly", "x*y*(x+y)", "--vars", "x,y,z", "--mode", "curve",
                     "--chi", "-1", "--quiet"])
    assert code == 0
    assert "Delta^1 = Phi_1^2 * Phi_3" in out and "Delta^2 = 1" in out


def test_strict_inequality_reported():
    code, out = run(["e2", "--input", str(FIXTURES / "ex58_perturbed.txt"), "--mode", "general",
                     "--bn", "5", "--json", "--quiet"])
    data = json.loads(out)
    assert code == 0
    assert {c["status"] for c in data["certificates"]} == {"failed"}
    assert any("strict inequality" in note for note in data["notes"])


def test_bracket_closes_for_gen2():
    code, out = run(["e2", "--input", str(FIXTURES / "ex59_gen2.txt"), "--mode", "general",
                     "--bn", "4..5", "--json", "--quiet"])
    assert {(c["status"], c["source"]) for c in json.loads(out)["certificates"]} == {("certified", "inequality-met")}


def test_freeness_and_syzygy_commands():
    code, out = run(["freeness", "--input", str(FIXTURES / "ex52_braid.txt"), "--json", "--quiet"])
    v = json.loads(out)["freeness"]
    assert code == 0 and v["free"] and v["exponents"] == [2, 3, 4] and v["chi"] == -6
    code, out = run(["freeness", "--poly", NF, "--json"])
    assert json.loads(out)["freeness"]["free"] is False
    code, out = run(["syzygy", "--poly", NF, "--max-degree", "4"])
    assert code == 0 and "AR(f) generator degrees [2, 2, 3, 3, 3, 3]" in out


def test_exit_codes_for_bad_input():
    assert run(["e2", "--poly", "x^2*y*z", "--vars", "x,y,z"])[0] == 2
    assert run(["e2", "--poly", "x^2*y*z", "--vars", "x,y,z", "--assume-reduced", "--quiet"])[0] == 0
    assert run(["e2", "--poly", "x^2 + y"])[0] == 1
    assert run(["e2", "--poly", "x + q", "--vars", "x,y"])[0] == 1
    assert run(["e2", "--poly", "x*y*z", "--mode", "curve", "--vars", "x,y,z,w"])[0] == 1
    with pytest.raises(SystemExit) as exc:
        run(["e2"])
    assert exc.value.code == 1


def test_external_value_too_large_exits_4():
    code, _ = run(["e2", "--input", str(FIXTURES / "ex58_gen.txt"), "--mode", "general", "--bn", "9", "--quiet"])
    assert code == 4


def test_mapped_failures(monkeypatch):
    def raiser(exc):
        def f(*a, **k):
            raise exc
        return f

    monkeypatch.setattr(cli, "alexander_top", raiser(GaloisViolation("bad")))
    assert run(["alexander", "--poly", "x*y*z", "--quiet"])[0] == 6
    monkeypatch.setattr(cli, "compute_page", raiser(RankDisagreement("bad")))
    assert run(["e2", "--poly", "x*y*z", "--quiet"])[0] == 3


def test_backend_mismatch_exits_4(monkeypatch):
    from polespec import spectral
    real = spectral.rank_direct_backend

    def skewed(f, Q, arith):
        rep = real(f, Q, arith)
        return type(rep)(rep.rank + 1 if Q == 5 else rep.rank, rep.method, rep.confidence, rep.primes)

    monkeypatch.setattr(spectral, "rank_direct_backend", skewed)
    assert run(["e2", "--poly", NF, "--backend", "both", "--quiet"])[0] == 4


def test_input_file_parsing(tmp_path):
    p = tmp_path / "in.txt"
    p.write_text("# a comment\n# expect delta1: Phi_1\nvars = a, b, c\nf = a*b*c\n  + a^3\n")
    spec = read_input(p)
    assert spec.names == ["a", "b", "c"] and spec.text == "a*b*c + a^3"
    assert spec.expect == {"delta1": "Phi_1"} and spec.comments == ["a comment"]
    (tmp_path / "bad.txt").write_text("vars = x\ng = x\n")
    with pytest.raises(ValueError):
        read_input(tmp_path / "bad.txt")


def test_guess_names():
    assert guess_names("x*y") == ["x", "y", "z"]
    assert guess_names("x*w") == ["x", "y", "z", "w"]
    assert guess_names("b*a*c") == ["a", "b", "c"]


def test_dump_matrices(tmp_path):
    code, _ = run(["e2", "--poly", "x*y*z*(x+y+z)", "--dump-matrices", str(tmp_path / "m"), "--quiet",
                   "--backend", "both"])
    assert code == 0 and any((tmp_path / "m").iterdir())
