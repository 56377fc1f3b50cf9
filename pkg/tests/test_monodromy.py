import flint
import pytest
from hypothesis import given, strategies as st

from polespec.monodromy import (CERTIFIED, CONJECTURAL, FAILED, CyclotomicPoly, GaloisViolation,
                                IncompletePage, InconsistentInput, PoleSpectrum, alexander_curve,
                                alexander_top, eigen_dims, euler_residual, euler_solve, smooth_mu,
                                spectrum_from_page, symmetry_report, t_d_minus_one,
                                topcomputability_check, totient)
from polespec.spectral import E2Cell, E2Page, ModeSpec, compute_page

from conftest import fixture_poly

PHI1 = CyclotomicPoly({1: 1})


def make_page(mode, n, d, dims):
    spec = ModeSpec(mode, n, d)
    cells = {}
    for q, k in spec.cells():
        cells[(q, k)] = E2Cell(q, k, q * d + k, dims.get((q, k), 0), "certified")
    return E2Page(n, d, spec, cells)


NF_DIMS = {(0, 4): 1, (0, 5): 2, (0, 6): 8, (1, 1): 2, (1, 2): 2, (1, 3): 2, (1, 4): 1}


@pytest.fixture(scope="module")
def nf_page():
    return make_page("arrangement", 3, 6, NF_DIMS)


def test_spectrum_from_page(nf_page):
    sp = spectrum_from_page(nf_page)
    assert sp.coefficients(range(4, 11)) == [1, 2, 8, 2, 2, 2, 1]
    assert sp.to_text() == "t^{4/6} + 2t^{5/6} + 8t^{6/6} + 2t^{7/6} + 2t^{8/6} + 2t^{9/6} + t^{10/6}"
    assert sp.to_json()[0] == {"Q": 4, "alpha": "4/6", "mult": 1}


def test_empty_spectrum():
    sp = spectrum_from_page(make_page("arrangement", 3, 4, {}))
    assert sp.entries == {} and sp.to_text() == "0"
    assert symmetry_report(sp).symmetric


def test_eigen_dims(nf_page):
    assert eigen_dims(nf_page, 5) == 2
    assert eigen_dims(nf_page, 6) == 8
    assert eigen_dims(make_page("arrangement", 3, 6, {}), 2) == 0


def test_general_mode_drops_top_corner():
    # E_infinity^{0,n}(f)_d = 0, so the (n, d) cell never reaches H^n(F)
    page = make_page("general", 3, 4, {(0, 4): 1, (3, 4): 5, (3, 1): 2})
    assert eigen_dims(page, 4) == 1
    assert spectrum_from_page(page).entries == {4: 1, 13: 2}


def test_alexander_top(nf_page):
    poly, cert = alexander_top(nf_page)
    assert poly == CyclotomicPoly.parse("Phi_1^8 * Phi_2^2 * Phi_3^2 * Phi_6^2")
    assert cert.constant and cert.by_order[6] == {1: 2, 5: 2}
    assert poly.degree == spectrum_from_page(nf_page).total


def test_galois_violation():
    page = make_page("arrangement", 3, 6, {(1, 1): 2, (1, 5): 1})
    with pytest.raises(GaloisViolation, match="inconsistent eigenspace dimensions"):
        alexander_top(page)


def test_incomplete_page():
    page = make_page("arrangement", 3, 6, {})
    del page.cells[(1, 2)]
    with pytest.raises(IncompletePage):
        alexander_top(page)


def test_alexander_curve_three_lines():
    page = make_page("curve", 2, 3, {(0, 2): 1, (0, 3): 2})
    assert alexander_curve(page)[0] == CyclotomicPoly({1: 2, 3: 1})
    with pytest.raises(ValueError):
        alexander_curve(make_page("arrangement", 2, 3, {}))


@pytest.mark.parametrize("name", ["smooth_fermat_cubic_curve.txt", "smooth_quartic_curve.txt"])
def test_smooth_curve_has_trivial_delta1(name):
    page = compute_page(fixture_poly(name), "curve")
    assert alexander_curve(page)[0] == CyclotomicPoly.one()


def test_three_lines_against_euler_identity():
    # Delta^1 from the curve row, Delta^2 from the general page; chi(M) = -1 must balance them
    f = fixture_poly("three_concurrent_lines.txt")
    delta1 = alexander_curve(compute_page(f, "curve"))[0]
    delta2 = alexander_top(compute_page(f, "general"))[0]
    assert delta1 == CyclotomicPoly({1: 2, 3: 1})
    assert euler_residual([PHI1, delta1, delta2], -1, 3) == {}


def test_euler_solve_examples():
    d3 = CyclotomicPoly.parse("Phi_1^8 * Phi_2^2 * Phi_3^2 * Phi_6^2")
    assert euler_solve([PHI1, CyclotomicPoly({1: 5}), None, d3], -2, 6) == CyclotomicPoly({1: 10})
    braid3 = CyclotomicPoly({1: 24, 2: 8, 5: 6, 10: 6})
    assert euler_solve([PHI1, CyclotomicPoly({1: 9}), None, braid3], -6, 10) == CyclotomicPoly({1: 26, 2: 2})
    assert euler_solve([PHI1, None, CyclotomicPoly.one(), CyclotomicPoly.one()], 0, 4) == PHI1


def test_euler_solve_errors():
    with pytest.raises(InconsistentInput):
        euler_solve([PHI1, None, None], 0, 3)
    with pytest.raises(InconsistentInput):
        euler_solve([PHI1, CyclotomicPoly.one(), None], 0, 3)


@given(st.dictionaries(st.sampled_from([1, 2, 3, 4, 6, 12]), st.integers(0, 9), max_size=5),
       st.dictionaries(st.sampled_from([1, 2, 3, 4, 6, 12]), st.integers(0, 9), max_size=5),
       st.integers(-9, 0))
def test_euler_solve_resubstitutes(e1, e3, chi):
    d1, d3 = CyclotomicPoly(e1), CyclotomicPoly(e3)
    try:
        d2 = euler_solve([PHI1, d1, None, d3], chi, 12)
    except InconsistentInput:
        return
    assert euler_residual([PHI1, d1, d2, d3], chi, 12) == {}


def test_cyclotomic_helpers():
    p = CyclotomicPoly({1: 2, 3: 1})
    assert p.to_poly() == flint.fmpz_poly([-1, 1]) ** 2 * flint.fmpz_poly([1, 1, 1])
    assert CyclotomicPoly.from_poly(p.to_poly()) == p
    assert p.degree == 4 and totient(12) == 4
    assert CyclotomicPoly.parse("1:2,3:1") == CyclotomicPoly.parse("Phi1^2 Phi3") == p
    assert CyclotomicPoly.parse("1").to_text() == "1"
    assert p.to_json() == {"1": 2, "3": 1}
    assert t_d_minus_one(6, -2) == {1: -2, 2: -2, 3: -2, 6: -2}
    with pytest.raises(ValueError):
        CyclotomicPoly({2: -1})
    with pytest.raises(ValueError):
        CyclotomicPoly.parse("Phi_1^2 + 3")


@given(st.integers(1, 4), st.integers(2, 6))
def test_smooth_mu_total_mass(n, d):
    top = (n + 1) * (d - 2)
    assert sum(smooth_mu(n, d, a) for a in range(top + 2)) == (d - 1) ** (n + 1)
    assert smooth_mu(n, d, top + 1) == 0
    assert smooth_mu(n, d, top) == 1


def test_smooth_mu_values():
    assert [smooth_mu(2, 3, a) for a in range(4)] == [1, 3, 3, 1]
    assert smooth_mu(3, 4, 4) == 19


def test_symmetry_report():
    d4 = PoleSpectrum(12, dict(zip(range(4, 21), [1, 4, 10, 12, 23, 16, 20, 16, 45, 16, 20, 16, 23, 12, 10, 4, 1])))
    assert symmetry_report(d4).symmetric
    a48 = PoleSpectrum(12, {6: 3, 9: 10, 12: 21, 15: 12, 18: 9, 21: 2})
    rep = symmetry_report(a48)
    assert not rep.symmetric and (6, 3, 9) in rep.mismatches


def test_topcomputability_general():
    page = make_page("general", 3, 4, {(0, 4): 1, (1, 1): 1, (1, 2): 1, (1, 3): 1, (1, 4): 1})
    certs = topcomputability_check(page, bn=5)
    assert all(c.status == CERTIFIED and c.source == "external-betti" for c in certs)
    # at k = d the cell (1, d) needs m = 2 because of the delta_{k,d} shift
    assert [c.m for c in certs] == [1, 1, 1, 2]
    assert all(c.status == CONJECTURAL for c in topcomputability_check(page))
    low = topcomputability_check(page, bn=4)
    assert all(c.status == FAILED for c in low)
    with pytest.raises(InconsistentInput):
        topcomputability_check(page, bn=6)
    bracket = topcomputability_check(page, bn_lower=5)
    assert all(c.source == "inequality-met" for c in bracket)
    eig = topcomputability_check(page, eig={1: 1, 2: 0})
    assert [c.status for c in eig[:3]] == [CERTIFIED, FAILED, CONJECTURAL]


def test_topcomputability_nonresonant(nf_page):
    certs = topcomputability_check(nf_page, chi=-2, nonresonant=(1, 5))
    by_k = {c.k: c for c in certs}
    assert by_k[1].status == CERTIFIED and by_k[1].source == "nonresonant-input"
    assert by_k[2].status == CONJECTURAL
    with pytest.raises(InconsistentInput):
        topcomputability_check(nf_page, nonresonant=(1,))
