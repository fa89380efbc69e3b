import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrmimo.lattice import Basis, compute_gso
from lrmimo.reduction import (
    RankGuardError,
    ReductionParams,
    bkz_reduce,
    bkz_with_stats,
    kz_reduce,
    lll_reduce,
    reduce_basis,
    successive_minima,
    svp_enumerate,
)

from oracles import (
    bkz_block_violations,
    brute_force_min,
    brute_force_minima,
    lll_violations,
    random_integer_basis,
)


# -- svp ---------------------------------------------------------------------


def test_svp_identity():
    r = svp_enumerate(Basis.from_rows(np.eye(3)))
    assert r.norm_sq == 1
    assert r.coeffs == (0, 0, 1)


def test_svp_small_examples_against_brute_force():
    b = Basis.from_rows([[2, 1], [1, 2]])
    r = svp_enumerate(b)
    assert r.norm_sq == brute_force_min(b.vectors, 4 * 4 * 5) == 2
    np.testing.assert_array_equal(r.vector, [1, -1])
    assert r.coeffs == (1, -1)

    hexa = Basis.from_rows([[2, 0], [1, math.sqrt(3)]])
    cs = np.array([(i, j) for i in range(-4, 5) for j in range(-4, 5) if i or j], dtype=float)
    pts = cs @ hexa.vectors
    oracle = float(np.min(np.einsum("ij,ij->i", pts, pts)))
    assert svp_enumerate(hexa).norm_sq == pytest.approx(oracle, rel=1e-12)
    assert oracle == pytest.approx(4.0, rel=1e-12)


def test_svp_tie_breaking_is_lexicographic():
    # six shortest vectors of norm 4 up to sign in the hexagonal lattice
    hexa = Basis.from_rows([[2, 0], [1, math.sqrt(3)]])
    assert svp_enumerate(hexa).coeffs == (0, 1)
    assert svp_enumerate(Basis.from_rows([[1, 0], [0, 1]])).coeffs == (0, 1)


def test_svp_rank_guard():
    b = Basis.from_rows(np.eye(13))
    with pytest.raises(RankGuardError, match="cap of 12"):
        svp_enumerate(b)
    assert svp_enumerate(b, max_rank=13).norm_sq == 1


def test_svp_matches_brute_force_random(rng):
    for _ in range(60):
        m = int(rng.integers(2, 6))
        b = random_integer_basis(rng, m, -10, 10)
        r = svp_enumerate(b)
        red = lll_reduce(b)
        assert abs(red.transform_det()) == 1
        assert r.norm_sq == brute_force_min(red.vectors, r.norm_sq * (1 + 1e-9))
        assert float(r.vector @ r.vector) == r.norm_sq
        np.testing.assert_array_equal(np.asarray(r.coeffs) @ b.vectors, r.vector)


# -- successive minima ----------------------------------------------------------


def test_successive_minima_examples():
    assert successive_minima(Basis.from_rows(np.eye(2)), 2).norms_sq == (1, 1)
    assert successive_minima(Basis.from_rows(np.diag([1.0, 3.0])), 2).norms_sq == (1, 9)
    b = [[2, 1], [1, 2]]
    oracle = brute_force_minima(b, 6, 2)
    assert oracle == [2.0, 5.0]
    res = successive_minima(Basis.from_rows(b), 2)
    assert list(res.norms_sq) == oracle
    assert np.linalg.matrix_rank(res.vectors) == 2


def test_successive_minima_random_against_window(rng):
    for _ in range(20):
        m = int(rng.integers(2, 4))
        b = lll_reduce(random_integer_basis(rng, m, -6, 6))
        res = successive_minima(b)
        assert list(res.norms_sq) == pytest.approx(brute_force_minima(b.vectors, 3, m), rel=1e-12)
        np.testing.assert_allclose(np.asarray(res.coeffs) @ b.vectors, res.vectors, atol=1e-9)
        assert list(res.norms_sq) == sorted(res.norms_sq)


# -- LLL -----------------------------------------------------------------------


def test_lll_identity_and_example():
    np.testing.assert_array_equal(lll_reduce(Basis.from_rows(np.eye(3))).vectors, np.eye(3))
    r = lll_reduce(Basis.from_rows([[1, 1], [0, 2]]), ReductionParams(delta=0.75))
    np.testing.assert_array_equal(r.vectors, [[1, 1], [-1, 1]])
    assert lll_violations(r, 0.75) == []


def test_lll_random_6x6(rng):
    for _ in range(1000):
        b = random_integer_basis(rng, 6)
        r = lll_reduce(b)
        assert lll_violations(r, 0.99) == []
        assert abs(r.transform_det()) == 1
        assert r.consistent()
        assert r.gram_det() == pytest.approx(b.gram_det(), rel=1e-8)


def test_params_validation():
    with pytest.raises(ValueError):
        ReductionParams(delta=0.25)
    with pytest.raises(ValueError):
        ReductionParams(delta=1.01)
    with pytest.raises(ValueError):
        ReductionParams(beta=1)
    with pytest.raises(ValueError):
        ReductionParams(max_tours=0)


# -- BKZ / KZ -----------------------------------------------------------------


def test_bkz_block_size_checked():
    b = Basis.from_rows(np.eye(3))
    with pytest.raises(ValueError, match="beta"):
        bkz_reduce(b, ReductionParams(beta=4))


def test_bkz_full_block_gives_shortest_vector(rng):
    for _ in range(30):
        m = int(rng.integers(2, 7))
        b = random_integer_basis(rng, m)
        r = bkz_reduce(b, ReductionParams(beta=m))
        assert float(r.vectors[0] @ r.vectors[0]) == pytest.approx(svp_enumerate(b).norm_sq, rel=1e-9)


def test_bkz2_on_lll_example():
    b = Basis.from_rows([[1, 1], [0, 2]])
    r = bkz_reduce(b, ReductionParams(beta=2))
    np.testing.assert_array_equal(r.vectors, lll_reduce(b).vectors)
    assert bkz_block_violations(r, 2) == []


def test_kz_fixed_point(rng):
    for _ in range(10):
        b = random_integer_basis(rng, 5)
        k = kz_reduce(b)
        again, stats = bkz_with_stats(k, ReductionParams(beta=5))
        np.testing.assert_array_equal(again.vectors, k.vectors)
        assert stats.insertions == 0 and stats.swaps == 0 and stats.tours == 1


def test_kz_examples(rng):
    np.testing.assert_array_equal(kz_reduce(Basis.from_rows(np.eye(3))).vectors, np.eye(3))
    r = kz_reduce(Basis.from_rows([[2, 1], [1, 2]]))
    assert float(r.vectors[0] @ r.vectors[0]) == 2
    for _ in range(50):
        b = Basis.from_rows(rng.standard_normal((2, 3)))
        r = kz_reduce(b)
        g = compute_gso(r)
        lam = svp_enumerate(b).norm_sq
        assert g.norms_sq[0] == pytest.approx(lam, rel=1e-9)
        assert g.norms_sq[1] == pytest.approx(b.gram_det() / lam, rel=1e-9)


@settings(max_examples=500, deadline=None)
@given(m=st.integers(2, 8), seed=st.integers(0, 2**32 - 1), gaussian=st.booleans())
def test_bkz_dominates_lll_and_meets_block_condition(m, seed, gaussian):
    rng = np.random.default_rng(seed)
    b = Basis.from_rows(rng.standard_normal((m, m))) if gaussian else random_integer_basis(rng, m)
    beta = int(rng.integers(2, m + 1))
    params = ReductionParams(beta=beta)
    l = lll_reduce(b, params)
    k = bkz_reduce(b, params)
    assert float(k.vectors[0] @ k.vectors[0]) <= float(l.vectors[0] @ l.vectors[0]) * (1 + 1e-9)
    assert bkz_block_violations(k, beta) == []
    assert lll_violations(k, 0.99) == []
    assert abs(k.transform_det()) == 1
    assert k.gram_det() == pytest.approx(b.gram_det(), rel=1e-8)


def test_reduce_basis_dispatch():
    b = Basis.from_rows([[1, 1], [0, 2]])
    for method in ("lll", "bkz", "kz", "LLL"):
        r, stats = reduce_basis(b, method)
        np.testing.assert_array_equal(r.vectors, [[1, 1], [-1, 1]])
    with pytest.raises(ValueError, match="unknown reduction"):
        reduce_basis(b, "hkz")
