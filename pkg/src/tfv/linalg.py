"""Small dense least squares, for float and dual-valued matrices."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from . import ad
from .errors import NumericError


def lstsq_qr(A, b):
    """Solve ``min ||A x - b||`` by QR; returns ``(x, residual_vector)``.

    Float inputs go through LAPACK Householder QR. Object (dual) inputs use
    modified Gram-Schmidt so perturbations propagate through the solve.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    if A.dtype != object and b.dtype != object:
        Q, R = np.linalg.qr(A.astype(float))
        x = scipy.linalg.solve_triangular(R, Q.T @ b.astype(float))
        return x, b - A @ x
    return _mgs_lstsq(A, b)


def _mgs_lstsq(A, b):
    m, n = A.shape
    Q = np.array(A, dtype=object, copy=True)
    R = np.zeros((n, n), dtype=object)
    for j in range(n):
        for i in range(j):
            R[i, j] = np.dot(Q[:, i], Q[:, j])
            Q[:, j] = Q[:, j] - R[i, j] * Q[:, i]
        norm = ad.sqrt(np.dot(Q[:, j], Q[:, j]))
        if ad.primal(norm) == 0.0:
            raise NumericError("rank-deficient matrix in least squares")
        R[j, j] = norm
        Q[:, j] = Q[:, j] / norm
    y = Q.T @ b
    x = np.empty(n, dtype=object)
    for i in reversed(range(n)):
        x[i] = (y[i] - np.dot(R[i, i + 1 :], x[i + 1 :])) / R[i, i]
    x = ad.asarray(x)
    return x, b - A @ x


def solve(A, b):
    """Square solve for float or dual entries (partial pivoting on primals)."""
    A = np.asarray(A)
    b = np.asarray(b)
    if A.dtype != object and b.dtype != object:
        return np.linalg.solve(A, b)
    n = A.shape[0]
    M = np.array(A, dtype=object, copy=True)
    B = np.array(b, dtype=object, copy=True)
    for k in range(n):
        piv = k + int(np.argmax([abs(ad.primal(M[i, k])) for i in range(k, n)]))
        if ad.primal(M[piv, k]) == 0.0:
            raise NumericError("singular matrix")
        if piv != k:
            M[[k, piv]] = M[[piv, k]]
            B[[k, piv]] = B[[piv, k]]
        for i in range(k + 1, n):
            r = M[i, k] / M[k, k]
            M[i, k:] = M[i, k:] - r * M[k, k:]
            B[i] = B[i] - r * B[k]
    x = np.empty(B.shape, dtype=object)
    for i in reversed(range(n)):
        x[i] = (B[i] - M[i, i + 1 :] @ x[i + 1 :]) / M[i, i]
    return ad.asarray(x)
