import pytest
from mpmath import mp

from app.core.errors import NotPositiveDefinite
from app.services.linalg import (
    bareiss_determinant,
    cholesky_upper,
    cofactor_determinant,
    determinant,
    tridiagonal_eigen,
    tridiagonal_eigenvalues,
)


def _hilbert(size):
    return [[mp.one / (i + j + 1) for j in range(size)] for i in range(size)]


def test_small_and_large_determinants_agree():
    with mp.workprec(200):
        m3 = _hilbert(3)
        assert abs(cofactor_determinant(m3) - bareiss_determinant(m3)) < mp.mpf(10) ** -50
        # det H_4 = 1/6048000
        assert abs(determinant(_hilbert(4)) - mp.one / 6048000) < mp.mpf(10) ** -50
        assert determinant([]) == 1


def test_bareiss_pivots_past_a_zero():
    with mp.workprec(100):
        matrix = [[mp.zero, mp.one, mp.zero, mp.zero],
                  [mp.one, mp.zero, mp.zero, mp.zero],
                  [mp.zero, mp.zero, mp.mpf(2), mp.zero],
                  [mp.zero, mp.zero, mp.zero, mp.mpf(3)]]
        assert bareiss_determinant(matrix) == -6


def test_cholesky_reconstructs_the_matrix():
    with mp.workprec(200):
        matrix = _hilbert(5)
        r = cholesky_upper(matrix)
        for i in range(5):
            for j in range(5):
                value = mp.fsum(r[k][i] * r[k][j] for k in range(5))
                assert abs(value - matrix[i][j]) < mp.mpf(10) ** -50


def test_cholesky_rejects_indefinite_matrices():
    with mp.workprec(100):
        with pytest.raises(NotPositiveDefinite):
            cholesky_upper([[mp.one, mp.mpf(2)], [mp.mpf(2), mp.one]])


def test_tridiagonal_spectrum():
    # diag 2, off -1: eigenvalues 2 - 2 cos(k pi / (n + 1))
    with mp.workprec(150):
        size = 6
        values = tridiagonal_eigenvalues([mp.mpf(2)] * size, [mp.mpf(-1)] * (size - 1))
        want = sorted(2 - 2 * mp.cos(k * mp.pi / (size + 1)) for k in range(1, size + 1))
        for got, expected in zip(values, want):
            assert abs(got - expected) < mp.mpf(10) ** -35
        _, vectors = tridiagonal_eigen([mp.mpf(2)] * size, [mp.mpf(1)] * (size - 1))
        for v in vectors:
            assert abs(mp.fsum(c * c for c in v) - 1) < mp.mpf(10) ** -35


def test_cholesky_rejects_singular_matrices():
    with mp.workprec(100):
        with pytest.raises(NotPositiveDefinite):
            cholesky_upper([[mp.one, mp.one], [mp.one, mp.one]])


def test_cholesky_factor_is_upper_triangular():
    with mp.workprec(100):
        r = cholesky_upper([[mp.mpf(4), mp.mpf(2)], [mp.mpf(2), mp.mpf(5)]])
        assert r == [[2, 1], [0, 2]]
