"""Dense complex LU factorization, solves and determinants.

All matrices in this package are small (system dimension times a modest
block width), so a dense LU with partial pivoting is used throughout.  The
pivot threshold eps_pivot = 1e-13 * max row norm separates a genuinely
singular elimination step, which signals a continued fraction breakdown,
from ordinary roundoff.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrix

__all__ = ["lu_factor", "solve_linear", "determinant"]

PIVOT_REL = 1e-13


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    return a


def lu_factor(a):
    """LU factorization with partial pivoting.

    Returns (lu, piv, nswaps).  Raises SingularMatrix when a pivot falls
    below eps_pivot = 1e-13 times the largest row norm of the input.
    """
    a = _as_square(a).copy()
    d = a.shape[0]
    row_norms = np.abs(a).sum(axis=1)
    eps_pivot = PIVOT_REL * max(float(row_norms.max()), 1e-300)
    piv = np.arange(d)
    nswaps = 0
    for k in range(d):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < eps_pivot:
            raise SingularMatrix(f"pivot {abs(a[p, k]):.3e} below {eps_pivot:.3e}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            piv[[k, p]] = piv[[p, k]]
            nswaps += 1
        a[k + 1 :, k] /= a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(a[k + 1 :, k], a[k, k + 1 :])
    return a, piv, nswaps


def solve_linear(a, b, return_cond: bool = False):
    """Solve a x = b for complex square a; b may carry extra columns.

    With return_cond=True also returns a cheap condition estimate, the
    ratio of the largest to the smallest pivot magnitude.
    """
    a = _as_square(a)
    b = np.asarray(b, dtype=complex)
    d = a.shape[0]
    if b.shape[0] != d:
        raise ValueError("right hand side length does not match")
    if d == 1:
        # fast path used heavily by scalar continued fractions
        a00 = a[0, 0]
        if a00 == 0:
            raise SingularMatrix("1x1 pivot vanished")
        x = b / a00
        return (x, 1.0) if return_cond else x
    if d == 2:
        a00, a01 = complex(a[0, 0]), complex(a[0, 1])
        a10, a11 = complex(a[1, 0]), complex(a[1, 1])
        eps = PIVOT_REL * max(abs(a00) + abs(a01), abs(a10) + abs(a11), 1e-300)
        if abs(a10) > abs(a00):
            a00, a01, a10, a11 = a10, a11, a00, a01
            b = b[::-1]
        if abs(a00) < eps:
            raise SingularMatrix(f"2x2 pivot {abs(a00):.3e} below {eps:.3e}")
        fac = a10 / a00
        schur = a11 - fac * a01
        if abs(schur) < eps:
            raise SingularMatrix(f"2x2 pivot {abs(schur):.3e} below {eps:.3e}")
        x1 = (b[1] - fac * b[0]) / schur
        x0 = (b[0] - a01 * x1) / a00
        x = np.stack([x0, x1])
        if return_cond:
            piv = (abs(a00), abs(schur))
            return x, float(max(piv) / min(piv))
        return x
    lu, piv, _ = lu_factor(a)
    y = b[piv].astype(complex)
    for k in range(1, d):
        y[k] -= lu[k, :k] @ y[:k]
    for k in range(d - 1, -1, -1):
        y[k] = (y[k] - lu[k, k + 1 :] @ y[k + 1 :]) / lu[k, k]
    if return_cond:
        diag = np.abs(np.diag(lu))
        cond = float(diag.max() / diag.min())
        return y, cond
    return y


def determinant(a) -> complex:
    """LU based determinant; exact product of the diagonal for triangular
    inputs, 0 for singular ones."""
    a = _as_square(a)
    d = a.shape[0]
    if d == 1:
        return complex(a[0, 0])
    lower = np.tril(a, -1)
    upper = np.triu(a, 1)
    if not np.any(lower) or not np.any(upper):
        return complex(np.prod(np.diag(a)))
    try:
        lu, _, nswaps = lu_factor(a)
    except SingularMatrix:
        return 0j
    det = complex(np.prod(np.diag(lu)))
    return -det if nswaps % 2 else det
