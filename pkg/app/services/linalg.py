# File: app/services/linalg.py

"""
Dense and tridiagonal kernels on lists of mpf, used at whatever precision the
caller has entered with mp.workprec.
"""

import logging
from typing import List, Sequence, Tuple

from mpmath import mp, mpf

from app.core.errors import EigenFailure, NotPositiveDefinite

logger = logging.getLogger(__name__)

Matrix = List[List[mpf]]


def cofactor_determinant(matrix: Sequence[Sequence[mpf]]) -> mpf:
    """Explicit expansion, sizes 0 to 3."""
    size = len(matrix)
    if size == 0:
        return mp.one
    if size == 1:
        return matrix[0][0]
    if size == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    if size == 3:
        (a, b, c), (d, e, f), (g, h, i) = matrix
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    raise ValueError("cofactor expansion is limited to size 3")


def bareiss_determinant(matrix: Sequence[Sequence[mpf]]) -> mpf:
    """Fraction-free elimination with row pivoting on the largest remaining entry."""
    m = [list(row) for row in matrix]
    size = len(m)
    if size == 0:
        return mp.one
    sign = 1
    previous = mp.one
    for k in range(size - 1):
        pivot_row = max(range(k, size), key=lambda r: abs(m[r][k]))
        if m[pivot_row][k] == 0:
            return mp.zero
        if pivot_row != k:
            m[k], m[pivot_row] = m[pivot_row], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) / previous
        previous = pivot
    return sign * m[size - 1][size - 1]


def determinant(matrix: Sequence[Sequence[mpf]]) -> mpf:
    if len(matrix) <= 3:
        return cofactor_determinant(matrix)
    return bareiss_determinant(matrix)


def cholesky_upper(matrix: Sequence[Sequence[mpf]]) -> Matrix:
    """Upper-triangular R with R^T R = matrix; a non-positive pivot raises NotPositiveDefinite."""
    size = len(matrix)
    try:
        lower = mp.cholesky(mp.matrix(matrix), tol=mp.zero)
    except (ValueError, ZeroDivisionError) as exc:
        raise NotPositiveDefinite(f"the {size}x{size} moment matrix has no Cholesky factor: {exc}") from exc
    return [[lower[j, i] for j in range(size)] for i in range(size)]


# ---------------------------------------------------------------------------
# Symmetric tridiagonal eigenproblem
# ---------------------------------------------------------------------------

def _sturm_count(diag: Sequence[mpf], off: Sequence[mpf], x: mpf, tiny: mpf) -> int:
    """Number of eigenvalues below x."""
    count = 0
    q = diag[0] - x
    for i in range(len(diag)):
        if i > 0:
            q = diag[i] - x - off[i - 1] ** 2 / q
        if q == 0:
            q = -tiny
        if q < 0:
            count += 1
    return count


def tridiagonal_eigenvalues(diag: Sequence[mpf], off: Sequence[mpf]) -> List[mpf]:
    """Eigenvalues, increasing, by Sturm bisection to the working precision."""
    size = len(diag)
    if len(off) != size - 1:
        raise ValueError("off-diagonal must have one entry fewer than the diagonal")
    radius = [
        (abs(off[i - 1]) if i > 0 else 0) + (abs(off[i]) if i < size - 1 else 0)
        for i in range(size)
    ]
    lo = min(diag[i] - radius[i] for i in range(size)) - 1
    hi = max(diag[i] + radius[i] for i in range(size)) + 1
    eps = mp.eps
    tiny = eps * (abs(lo) + abs(hi))
    if _sturm_count(diag, off, lo, tiny) != 0 or _sturm_count(diag, off, hi, tiny) != size:
        raise EigenFailure("Sturm counts disagree with the Gershgorin bounds")

    values = []
    for index in range(size):
        a, b = lo, hi
        while b - a > 4 * eps * max(abs(a), abs(b), mp.one):
            middle = (a + b) / 2
            if middle == a or middle == b:
                break
            if _sturm_count(diag, off, middle, tiny) > index:
                b = middle
            else:
                a = middle
        values.append((a + b) / 2)
    if any(not y > x for x, y in zip(values, values[1:])):
        raise EigenFailure("eigenvalues of an unreduced Jacobi matrix must be simple")
    return values


def _solve_shifted(diag: Sequence[mpf], off: Sequence[mpf], shift: mpf, rhs: List[mpf], tiny: mpf) -> List[mpf]:
    """Thomas elimination for (T - shift I) v = rhs; zero pivots are nudged to `tiny`."""
    size = len(diag)
    c = [mp.zero] * size
    d = [mp.zero] * size
    pivot = diag[0] - shift
    if pivot == 0:
        pivot = tiny
    c[0] = off[0] / pivot if size > 1 else mp.zero
    d[0] = rhs[0] / pivot
    for i in range(1, size):
        pivot = diag[i] - shift - off[i - 1] * c[i - 1]
        if pivot == 0:
            pivot = tiny
        c[i] = off[i] / pivot if i < size - 1 else mp.zero
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / pivot
    v = [mp.zero] * size
    v[-1] = d[-1]
    for i in range(size - 2, -1, -1):
        v[i] = d[i] - c[i] * v[i + 1]
    return v


def tridiagonal_eigenvector(diag: Sequence[mpf], off: Sequence[mpf], value: mpf, iterations: int = 3) -> List[mpf]:
    """Unit eigenvector by inverse iteration, sign fixed so the first component is positive."""
    size = len(diag)
    tiny = mp.eps * (abs(value) + 1)
    v = [mp.one] * size
    for _ in range(iterations):
        v = _solve_shifted(diag, off, value, v, tiny)
        norm = mp.sqrt(mp.fsum(x * x for x in v))
        if norm == 0 or mp.isinf(norm) or mp.isnan(norm):
            raise EigenFailure(f"inverse iteration broke down at eigenvalue {mp.nstr(value, 8)}")
        v = [x / norm for x in v]
    if v[0] < 0:
        v = [-x for x in v]
    return v


def tridiagonal_eigen(diag: Sequence[mpf], off: Sequence[mpf]) -> Tuple[List[mpf], List[List[mpf]]]:
    values = tridiagonal_eigenvalues(diag, off)
    vectors = [tridiagonal_eigenvector(diag, off, value) for value in values]
    logger.debug(f"tridiagonal eigenproblem of size {len(diag)} solved")
    return values, vectors
