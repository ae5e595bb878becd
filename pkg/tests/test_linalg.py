from __future__ import annotations

import itertools

import numpy as np
import pytest

from fziplab import linalg as la
from fziplab.gf import make_field


def span_size(F, A):
    """Number of distinct vectors in the column span, by enumeration."""
    rows, cols = A.shape
    seen = set()
    for coeffs in itertools.product(range(F.q), repeat=cols):
        v = np.zeros(rows, dtype=np.int64)
        for c, j in zip(coeffs, range(cols)):
            v = F.add(v, F.mul(np.full(rows, c, dtype=np.int64), A[:, j]))
        seen.add(tuple(int(x) for x in v))
    return len(seen)


def leibniz_det(F, A):
    n = A.shape[0]
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = 1
        for i in range(n):
            term = F.mul(term, int(A[i, perm[i]]))
        total = F.add(total, term if sign == 1 else F.neg(term))
    return total


@pytest.mark.parametrize("pn", [(2, 1), (3, 1), (2, 2)])
def test_rank_matches_span_enumeration(pn):
    F = make_field(*pn)
    rng = np.random.default_rng(0)
    for _ in range(30):
        r, c = rng.integers(1, 4, size=2)
        A = la.random_matrix(F, rng, int(r), int(c))
        assert F.q ** la.rank(F, A) == span_size(F, A)


def test_det_matches_leibniz(field, rng):
    for n in range(0, 5):
        for _ in range(5):
            A = la.random_matrix(field, rng, n, n)
            want = leibniz_det(field, A) if n else 1
            assert la.det(field, A) == want
            assert la.is_invertible(field, A) == (want != 0)


def test_inverse_and_solve(field, rng):
    for n in range(1, 6):
        A = la.random_invertible(field, rng, n)
        Ai = la.inverse(field, A)
        assert np.array_equal(la.matmul(field, A, Ai), la.identity(n))
        B = la.random_matrix(field, rng, n, 2)
        X = la.solve(field, A, B)
        assert np.array_equal(la.matmul(field, A, X), B)


def test_solve_inconsistent_returns_none(field):
    A = la.as_matrix([[1], [0]])
    B = la.as_matrix([[0], [1]])
    assert la.solve(field, A, B) is None


def test_nullspace_and_rank_nullity(field, rng):
    for _ in range(20):
        A = la.random_matrix(field, rng, int(rng.integers(1, 5)), int(rng.integers(1, 6)))
        N = la.nullspace(field, A)
        assert N.shape[1] == A.shape[1] - la.rank(field, A)
        assert not la.matmul(field, A, N).any()
        assert la.rank(field, N) == N.shape[1]


def test_rref_is_reduced(field, rng):
    A = la.random_matrix(field, rng, 4, 6)
    R, piv = la.rref(field, A)
    for i, j in enumerate(piv):
        assert R[i, j] == 1
        assert all(R[k, j] == 0 for k in range(R.shape[0]) if k != i)
    assert la.rank(field, R) == len(piv)


def test_compound_is_multiplicative(field, rng):
    A = la.random_matrix(field, rng, 4, 4)
    B = la.random_matrix(field, rng, 4, 4)
    for i in range(5):
        lhs = la.compound(field, la.matmul(field, A, B), i)
        rhs = la.matmul(field, la.compound(field, A, i), la.compound(field, B, i))
        assert np.array_equal(lhs, rhs)
    assert la.compound(field, A, 4)[0, 0] == la.det(field, A)


def test_kron_mixed_product(field, rng):
    A, B = la.random_matrix(field, rng, 2, 3), la.random_matrix(field, rng, 3, 2)
    C, D = la.random_matrix(field, rng, 3, 2), la.random_matrix(field, rng, 2, 2)
    lhs = la.matmul(field, la.kron(field, A, C), la.kron(field, B, D))
    rhs = la.kron(field, la.matmul(field, A, B), la.matmul(field, C, D))
    assert np.array_equal(lhs, rhs)


def test_frob_is_ring_map_on_matrices(field, rng):
    A, B = la.random_matrix(field, rng, 3, 3), la.random_matrix(field, rng, 3, 3)
    assert np.array_equal(la.frob(field, la.matmul(field, A, B)),
                          la.matmul(field, la.frob(field, A), la.frob(field, B)))
