"""Chart-level tensor calculus.

Conventions
-----------
* ``g[i, j]`` metric components, ``dg[k, i, j] = d_k g_ij``,
  ``ddg[l, k, i, j] = d_l d_k g_ij``.
* ``Gamma[k, i, j]`` is the Christoffel symbol with upper index ``k``.
* ``R[l, k, i, j]`` are the components of ``R(d_i, d_j) d_k = R[l, k, i, j] d_l``
  for ``R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``.
* ``N[k, i] = (nabla_{d_i} V)^k`` is the covariant Jacobian of a field.

Points, tangent vectors and one-forms are plain length-``n`` arrays of chart
components. Vector, one-form and scalar fields are callables on chart
coordinates written with :mod:`tfv.ad` functions, so they accept duals.
"""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from . import ad
from .errors import DegeneracyError, DomainError, NumericError

DEGENERACY = 1e-12


def check_point(space, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (space.dim,):
        raise DomainError(f"{space.name}: expected {space.dim} coordinates, got {p.shape}")
    if not space.contains(p):
        raise DomainError(f"{space.name}: point {p} outside chart region")
    return p


def metric_at(space, p) -> np.ndarray:
    p = check_point(space, p)
    g = ad.primal_array(space.metric(p))
    if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise NumericError(f"{space.name}: metric not symmetric at {p}")
    return 0.5 * (g + g.T)


def _embedding_jet(space, p, order: int):
    """Derivatives of the embedding up to ``order``, as float arrays indexed
    ``[a, i, j, ...]`` (ambient component first)."""
    n = space.dim
    eye = np.eye(n)
    F = lambda x: ad.asarray(space.embed(x))
    jets = []
    for k in range(1, order + 1):
        out = np.zeros((n + 1,) + (n,) * k)
        for idx in _sorted_multi_indices(n, k):
            val = ad.asarray(ad.EXACT.partial(F, p, [eye[i] for i in idx]))
            for perm in set(_perms(idx)):
                out[(slice(None),) + perm] = val
        jets.append(out)
    return jets


def _sorted_multi_indices(n, k):
    if k == 0:
        yield ()
        return
    for head in _sorted_multi_indices(n, k - 1):
        start = head[-1] if head else 0
        for i in range(start, n):
            yield head + (i,)


def _perms(idx):
    return itertools.permutations(idx)


def metric_derivatives(space, p, order: int = 1, backend=ad.EXACT):
    """Return ``(g, dg)`` or ``(g, dg, ddg)`` at ``p`` as float arrays."""
    backend = ad.get_backend(backend)
    p = check_point(space, p)
    g = metric_at(space, p)
    if space.kind == "embedded" and backend is ad.EXACT:
        eta = np.asarray(space.signature, dtype=float)
        jets = _embedding_jet(space, p, order + 1)
        F1, F2 = jets[0], jets[1]
        t = np.einsum("aik,a,aj->kij", F2, eta, F1)
        dg = t + t.transpose(0, 2, 1)
        if order == 1:
            return g, dg
        F3 = jets[2]
        a = np.einsum("aikl,a,aj->lkij", F3, eta, F1)
        b = np.einsum("aik,a,ajl->lkij", F2, eta, F2)
        ddg = a + a.transpose(0, 1, 3, 2) + b + b.transpose(0, 1, 3, 2)
        return g, dg, ddg
    metric = lambda x: ad.asarray(space.metric(x))
    dg = np.asarray(backend.jacobian(metric, p), dtype=float).transpose(2, 0, 1)
    if order == 1:
        return g, dg
    ddg = np.asarray(backend.hessian(metric, p), dtype=float).transpose(2, 3, 0, 1)
    return g, dg, ddg


def _inverse(g):
    try:
        return np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise NumericError("singular metric") from exc


def christoffel_from(g, dg) -> np.ndarray:
    ginv = _inverse(g)
    S = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    return 0.5 * np.einsum("kl,ijl->kij", ginv, S)


def christoffel_at(space, p, backend=ad.EXACT) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[k, i, j]`` at ``p``."""
    g, dg = metric_derivatives(space, p, 1, backend)
    return christoffel_from(g, dg)


def christoffel_derivative(g, dg, ddg) -> np.ndarray:
    """``dGamma[m, k, i, j] = d_m Gamma^k_ij``."""
    ginv = _inverse(g)
    S = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    dS = ddg + ddg.transpose(0, 2, 1, 3) - ddg.transpose(0, 2, 3, 1)
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
    return 0.5 * (np.einsum("mkl,ijl->mkij", dginv, S) + np.einsum("kl,mijl->mkij", ginv, dS))


def riemann_tensor(space, p, backend=ad.EXACT) -> np.ndarray:
    g, dg, ddg = metric_derivatives(space, p, 2, backend)
    G = christoffel_from(g, dg)
    dG = christoffel_derivative(g, dg, ddg)
    return (
        np.einsum("iljk->lkij", dG)
        - np.einsum("jlik->lkij", dG)
        + np.einsum("lim,mjk->lkij", G, G)
        - np.einsum("ljm,mik->lkij", G, G)
    )


def riemann(space, X, Y, Z, p, backend=ad.EXACT) -> np.ndarray:
    """``R(X, Y) Z`` at ``p`` for tangent vectors given by components."""
    R = riemann_tensor(space, p, backend)
    return np.einsum("lkij,k,i,j->l", R, Z, X, Y)


def inner(space, p, X, Y) -> float:
    return float(np.asarray(X) @ metric_at(space, p) @ np.asarray(Y))


def norm(space, p, X) -> float:
    return float(np.sqrt(max(inner(space, p, X, X), 0.0)))


def sectional_curvature(space, x, y, p, backend=ad.EXACT) -> float:
    """``<R(x,y)y, x> / (|x|^2 |y|^2 - <x,y>^2)``."""
    return sectional_from(riemann_tensor(space, p, backend), metric_at(space, p), x, y)


def sectional_from(R, g, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xx, yy, xy = x @ g @ x, y @ g @ y, x @ g @ y
    den = xx * yy - xy * xy
    if xx * yy == 0.0 or den <= DEGENERACY * xx * yy:
        raise DegeneracyError("vectors span a degenerate plane")
    Ry = np.einsum("lkij,k,i,j->l", R, y, x, y)
    return float(Ry @ g @ x / den)


def field_jacobian(V: Callable, p, backend=ad.EXACT) -> np.ndarray:
    """``J[k, i] = d_i V^k`` in chart components."""
    backend = ad.get_backend(backend)
    return np.asarray(backend.jacobian(lambda x: ad.asarray(V(x)), np.asarray(p, float)), dtype=float)


def nabla(space, V: Callable, p, backend=ad.EXACT, Gamma=None) -> np.ndarray:
    """Covariant Jacobian ``N[k, i] = d_i V^k + Gamma^k_ij V^j``."""
    p = check_point(space, p)
    if Gamma is None:
        Gamma = christoffel_at(space, p, backend)
    Vp = ad.primal_array(V(p))
    return field_jacobian(V, p, backend) + np.einsum("kij,j->ki", Gamma, Vp)


def covariant_derivative(space, X, V: Callable, p, backend=ad.EXACT) -> np.ndarray:
    """``nabla_X V`` at ``p``; ``X`` is a component array or a vector field."""
    Xp = ad.primal_array(X(p)) if callable(X) else np.asarray(X, dtype=float)
    return nabla(space, V, p, backend) @ Xp


def gradient(space, f: Callable, p, backend=ad.EXACT) -> np.ndarray:
    """Metric gradient ``g^{ij} d_j f d_i``."""
    backend = ad.get_backend(backend)
    p = check_point(space, p)
    df = np.asarray(backend.jacobian(f, p), dtype=float)
    return np.linalg.solve(metric_at(space, p), df)


def exterior_derivative(space, omega: Callable, p, backend=ad.EXACT) -> np.ndarray:
    """``d omega[i, j] = d_i omega_j - d_j omega_i``."""
    p = check_point(space, p)
    J = field_jacobian(omega, p, backend)
    return J.T - J


def flat(space, X, p) -> np.ndarray:
    return metric_at(space, p) @ np.asarray(X, dtype=float)


def sharp(space, omega, p) -> np.ndarray:
    return np.linalg.solve(metric_at(space, p), np.asarray(omega, dtype=float))


def orthonormal_frame(g) -> np.ndarray:
    """Columns ``E[:, a]`` with ``E.T @ g @ E = I`` (from the Cholesky factor)."""
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NumericError("metric not positive definite") from exc
    return np.linalg.inv(L).T


def tensor_norm(g, A) -> float:
    """Metric norm of a (1,1)-tensor ``A[k, i]``: sqrt(g_kl g^ij A^k_i A^l_j)."""
    E = orthonormal_frame(g)
    At = np.linalg.solve(E, A @ E)
    return float(np.linalg.norm(At))


def covector_norm(g, w) -> float:
    w = np.asarray(w, dtype=float)
    return float(np.sqrt(max(w @ np.linalg.solve(g, w), 0.0)))
