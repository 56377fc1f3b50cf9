import random
from fractions import Fraction

import flint
import pytest
from hypothesis import given, settings, strategies as st

from polespec.linalg import (CERTIFIED, PROBABILISTIC, Arithmetic, BadPrime, SparseMat,
                             independent_columns, kernel_basis, matrix_rank, rank_exact,
                             rank_mod_p, rank_modular, rational_reconstruct, read_triplets,
                             sparse_eliminate_mod_p, to_nmod, write_triplets)

P = 1073741827  # a 30-bit prime


@st.composite
def sparse_matrices(draw, max_dim=14, rationals=True):
    rows = draw(st.integers(1, max_dim))
    ncols = draw(st.integers(1, max_dim))
    entry = st.integers(-9, 9)
    if rationals:
        entry = st.one_of(entry, st.fractions(-3, 3, max_denominator=5))
    cols = []
    for _ in range(ncols):
        support = draw(st.lists(st.integers(0, rows - 1), max_size=4, unique=True))
        cols.append({i: draw(entry) for i in support})
    # dependent columns make the rank interesting
    for _ in range(draw(st.integers(0, 4))):
        a, b = draw(st.integers(0, ncols - 1)), draw(st.integers(0, ncols - 1))
        c = draw(st.integers(-3, 3))
        combo = dict(cols[a])
        for i, v in cols[b].items():
            combo[i] = combo.get(i, 0) + c * v
        cols.append(combo)
    return SparseMat.from_columns(rows, cols)


def fmpq_matrix(rows) -> flint.fmpq_mat:
    return flint.fmpq_mat([[flint.fmpq(Fraction(x).numerator, Fraction(x).denominator) for x in r]
                           for r in rows])


def reference_rank(m: SparseMat) -> int:
    if not m.entries:
        return 0
    return fmpq_matrix(m.to_dense()).rref()[1]


@settings(max_examples=200, deadline=None)
@given(sparse_matrices())
def test_modular_rank_agrees_with_exact(m):
    exact = rank_exact(m)
    assert exact.confidence == CERTIFIED
    assert rank_modular(m, seed=7).rank == exact.rank == reference_rank(m)


@settings(max_examples=60, deadline=None)
@given(sparse_matrices(max_dim=30, rationals=False))
def test_sparse_prepass_matches_dense_rank(m):
    expected = to_nmod(m, P).rank() if m.entries else 0
    pivots, rest = sparse_eliminate_mod_p(m, P, dense_switch=0.2)
    assert pivots + (rest.rank() if rest is not None else 0) == expected
    assert rank_mod_p(m, P) == expected


def test_sparse_prepass_hands_over_dense_block():
    rng = random.Random(5)
    dense = SparseMat.from_dense([[rng.randint(1, 50) for _ in range(120)] for _ in range(100)])
    pivots, rest = sparse_eliminate_mod_p(dense, P)
    assert rest is not None
    assert pivots + rest.rank() == to_nmod(dense, P).rank()


@settings(max_examples=60, deadline=None)
@given(sparse_matrices(), st.sampled_from(["modular", "exact"]))
def test_kernel_vectors_are_exact(m, mode):
    ker = kernel_basis(m, mode, seed=1)
    assert len(ker) == m.cols - reference_rank(m)
    for v in ker:
        assert not any(m.apply(v))
    if ker:
        assert fmpq_matrix(ker).rref()[1] == len(ker)


def test_full_rank_is_certified_and_deficient_is_probabilistic():
    full = SparseMat.from_dense([[1, 2], [3, 4], [5, 7]])
    assert rank_modular(full).confidence == CERTIFIED
    low = SparseMat.from_dense([[1, 2], [2, 4]])
    rep = rank_modular(low)
    assert rep.rank == 1 and rep.confidence == PROBABILISTIC and len(rep.primes) == 2


def test_matrix_rank_dispatch():
    m = SparseMat.from_dense([[1, 1, 0], [0, 1, 1], [1, 2, 1]])
    assert matrix_rank(m, Arithmetic(exact=True)).method.startswith("exact")
    assert matrix_rank(m).rank == matrix_rank(m, Arithmetic(exact=True)).rank == 2


def test_bad_prime_on_denominator():
    with pytest.raises(BadPrime):
        to_nmod(SparseMat.from_dense([[Fraction(1, 101)]]), 101)


@given(st.fractions(max_denominator=1000).filter(lambda x: abs(x.numerator) < 1000))
def test_rational_reconstruction_inverts_reduction(x):
    a = x.numerator * pow(x.denominator, -1, P) % P
    assert rational_reconstruct(a, P) == x


def test_independent_columns_respects_order():
    vecs = [[1, 0, 0], [2, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 3]]
    assert independent_columns(vecs, 3, 0) == [0, 2, 4]
    assert independent_columns(vecs, 3, 1, Arithmetic(exact=True)) == [2, 4]


def test_triplet_round_trip(tmp_path):
    m = SparseMat.from_dense([[0, Fraction(-2, 3)], [5, 0], [0, 0]])
    write_triplets(m, tmp_path / "m.txt")
    assert (tmp_path / "m.txt").read_text().splitlines()[0] == "3 2 2"
    assert read_triplets(tmp_path / "m.txt") == m


def test_empty_shapes():
    z = SparseMat(0, 4, {})
    assert rank_modular(z).rank == 0
    assert kernel_basis(SparseMat(2, 3, {}), "exact") == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
