"""Model spaces: charts, embeddings and the embedded-submanifold machinery."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ad, tensor
from .errors import ConfigError, NumericError, PreconditionError
from .linalg import lstsq_qr

MAX_DIM = 8
TANGENCY_TOL = 1e-8


def _always(x) -> bool:
    return True


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """A chart on a Riemannian manifold.

    ``kind == "intrinsic"`` spaces carry ``metric_fn``; ``kind == "embedded"``
    spaces carry an ``embedding`` into a flat ambient space with diagonal
    ``signature`` and get the pullback metric. ``validity`` is the chart
    domain; ``sample_ok`` adds sampling margins on top of it.
    """

    name: str
    dim: int
    kind: str
    bounds: np.ndarray
    metric_fn: Callable | None = None
    embedding: Callable | None = None
    signature: tuple | None = None
    validity: Callable = _always
    sample_ok: Callable = _always
    curvature: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        chart = self.params.get("chart")
        return f"{self.name}({self.dim})" + (f"[{chart}]" if chart else "")

    def contains(self, x) -> bool:
        x = ad.primal_array(x)
        return bool(np.all(np.isfinite(x)) and self.validity(x))

    def embed(self, x):
        if self.embedding is None:
            raise PreconditionError(f"{self.name} is not an embedded space")
        return ad.asarray(self.embedding(x))

    def embedding_jacobian(self, x):
        """``J[a, i] = d_i Phi^a`` (exact; accepts duals)."""
        return ad.EXACT.jacobian(self.embed, x)

    def ambient_inner(self, a, b):
        eta = np.asarray(self.signature, dtype=float)
        return np.sum(eta * np.asarray(a) * np.asarray(b))

    def metric(self, x):
        if self.kind == "embedded":
            J = self.embedding_jacobian(x)
            eta = np.asarray(self.signature, dtype=float)
            return ad.asarray(J.T @ (eta[:, None] * J))
        return ad.asarray(self.metric_fn(x))


def _check_dim(n: int, low: int = 2):
    if not isinstance(n, (int, np.integer)) or n < low or n > MAX_DIM:
        raise ConfigError(f"dimension must be an integer in [{low}, {MAX_DIM}], got {n!r}")


def euclidean(n: int = 3) -> ModelSpace:
    _check_dim(n, 1)
    eye = np.eye(n)
    return ModelSpace(
        "euclidean", n, "intrinsic",
        bounds=np.tile([-3.0, 3.0], (n, 1)),
        metric_fn=lambda x: eye,
        curvature=0.0,
    )


def uhs(n: int = 3) -> ModelSpace:
    """Upper half-space ``x_n > 0`` with metric ``sum dx_i^2 / x_n^2``."""
    _check_dim(n)
    eye = np.eye(n)

    def metric(x):
        return eye * (1.0 / (x[n - 1] * x[n - 1]))

    bounds = np.tile([-3.0, 3.0], (n, 1))
    bounds[-1] = [0.1, 10.0]
    return ModelSpace(
        "uhs", n, "intrinsic", bounds=bounds, metric_fn=metric,
        validity=lambda x: x[n - 1] > 0, curvature=-1.0,
    )


def hyperboloid(n: int = 3) -> ModelSpace:
    """Upper sheet of ``<P,P> = -1`` in Minkowski space, as the graph
    ``x_1 = sqrt(1 + |u|^2)`` over ``u = (x_2, ..., x_{n+1})``."""
    _check_dim(n)

    def embed(u):
        return [ad.sqrt(1.0 + sum(ui * ui for ui in u))] + list(u)

    return ModelSpace(
        "hyperboloid", n, "embedded",
        bounds=np.tile([-3.0, 3.0], (n, 1)),
        embedding=embed,
        signature=(-1.0,) + (1.0,) * n,
        curvature=-1.0,
    )


def sphere(n: int = 3, chart: str = "north") -> ModelSpace:
    """Unit sphere ``S^n`` in ``R^{n+1}`` as a graph over the first ``n``
    ambient coordinates; ``x_{n+1} = +-sqrt(1 - |u|^2)``."""
    _check_dim(n)
    if chart not in ("north", "south"):
        raise ConfigError(f"sphere chart must be 'north' or 'south', got {chart!r}")
    sign = 1.0 if chart == "north" else -1.0

    def embed(u):
        return list(u) + [sign * ad.sqrt(1.0 - sum(ui * ui for ui in u))]

    return ModelSpace(
        "sphere", n, "embedded",
        bounds=np.tile([-1.0, 1.0], (n, 1)),
        embedding=embed,
        signature=(1.0,) * (n + 1),
        validity=lambda u: float(u @ u) < 1.0,
        # keep |x_{n+1}| >= 0.1, away from the equator
        sample_ok=lambda u: 1.0 - float(u @ u) >= 0.01,
        curvature=1.0,
        params={"chart": chart},
    )


def default_warp(x):
    return ad.exp(x[0])


def twisted_product(n: int = 3, warp: Callable = default_warp) -> ModelSpace:
    """``I x_lambda R^{n-1}`` with metric ``ds^2 + lambda(s, q)^2 |dq|^2``;
    chart coordinates ``(s, q_1, ..., q_{n-1})``."""
    _check_dim(n)

    def metric(x):
        lam = warp(x)
        lam2 = lam * lam
        g = np.zeros((n, n), dtype=object)
        g[:] = 0.0
        g[0, 0] = 1.0
        for i in range(1, n):
            g[i, i] = lam2
        return ad.asarray(g)

    bounds = np.tile([-3.0, 3.0], (n, 1))
    bounds[0] = [-1.0, 1.0]
    return ModelSpace(
        "twisted_product", n, "intrinsic", bounds=bounds, metric_fn=metric,
        params={"warp": warp},
    )


SPACES = {
    "euclidean": euclidean,
    "uhs": uhs,
    "hyperboloid": hyperboloid,
    "sphere": sphere,
    "twisted_product": twisted_product,
}


def make_space(name: str, n: int = 3, **kwargs) -> ModelSpace:
    try:
        ctor = SPACES[name]
    except KeyError:
        raise ConfigError(f"unknown space {name!r}; choose from {sorted(SPACES)}") from None
    return ctor(n, **kwargs)


# embedded-submanifold machinery -------------------------------------------


def _require_embedded(space):
    if space.kind != "embedded":
        raise PreconditionError(f"{space.name} is not an embedded space")


def pullback_metric(space, p) -> np.ndarray:
    """``J^T eta J`` at ``p``; raises if the Jacobian loses rank."""
    _require_embedded(space)
    p = tensor.check_point(space, p)
    J = ad.primal_array(space.embedding_jacobian(p))
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise NumericError(f"{space.label}: embedding Jacobian rank-deficient at {p}")
    return tensor.metric_at(space, p)


def normal(space, x):
    """Position vector ``Phi``: the normal of the sphere and the hyperboloid."""
    return space.embed(x)


def ambient_to_chart(space, x, A, tol: float = TANGENCY_TOL):
    """Chart components ``c`` with ``J c = A`` for a tangent ambient vector.

    Solved by QR least squares; a residual above ``tol`` (relative to ``|A|``)
    means ``A`` was not tangent and raises :class:`NumericError`.
    """
    J = space.embedding_jacobian(x)
    A = ad.asarray(A)
    c, r = lstsq_qr(J, A)
    rp = ad.primal_array(r)
    scale = max(1.0, float(np.linalg.norm(ad.primal_array(A))))
    if np.linalg.norm(rp) > tol * scale:
        raise NumericError(
            f"{space.label}: ambient vector not tangent (residual {np.linalg.norm(rp):.3e})"
        )
    return c


def project_ambient(space, x, A):
    """Tangential part ``A - <A,Phi> Phi / <Phi,Phi>`` as an ambient vector.

    This is ``A + <A,Phi> Phi`` on the hyperboloid and ``A - <A,Phi> Phi`` on
    the sphere.
    """
    _require_embedded(space)
    Phi = normal(space, x)
    A = ad.asarray(A)
    return A - (space.ambient_inner(A, Phi) / space.ambient_inner(Phi, Phi)) * Phi


def tangential_projection(space, A, p) -> np.ndarray:
    """Chart components of the tangential part of the ambient vector ``A``."""
    p = tensor.check_point(space, p)
    return ad.primal_array(ambient_to_chart(space, p, project_ambient(space, p, A)))


def pushforward(space, x, X):
    """Ambient image ``J X`` of chart components ``X``."""
    if space.kind != "embedded":
        return ad.asarray(X)
    return ad.asarray(space.embedding_jacobian(x) @ ad.asarray(X))


def gauss_consistency(space, X: Callable, Y: Callable, p, backend=ad.EXACT) -> float:
    """Residual of the Gauss formula at ``p``.

    ``|D_X (J Y) - J nabla_X Y - h(X, Y)|`` in the ambient coordinates, with
    ``h(X, Y) = -<X, Y> Phi / <Phi, Phi>``. An intrinsic (flat) space is
    treated as embedded in itself by the identity with ``h = 0``.

    ``X`` and ``Y`` return chart components (length ``n``). A field returning
    ``n + 1`` components is read as an ambient vector and must be tangent.
    """
    backend = ad.get_backend(backend)
    p = tensor.check_point(space, p)
    n = space.dim
    if space.kind != "embedded":
        if space.curvature != 0.0:
            raise PreconditionError("gauss_consistency needs an embedded or flat space")
        Xc = lambda x: ad.asarray(X(x))
        Yc = lambda x: ad.asarray(Y(x))
    else:
        Xc = _chart_field(space, X)
        Yc = _chart_field(space, Y)
    Xp = ad.primal_array(Xc(p))
    pushed_Y = lambda x: pushforward(space, x, Yc(x))
    ambient = np.asarray(backend.jacobian(pushed_Y, p), dtype=float) @ Xp
    intrinsic = ad.primal_array(pushforward(space, p, tensor.covariant_derivative(space, Xp, Yc, p, backend)))
    if space.kind == "embedded":
        Phi = ad.primal_array(normal(space, p))
        Yp = ad.primal_array(Yc(p))
        h = -(tensor.inner(space, p, Xp, Yp) / space.ambient_inner(Phi, Phi)) * Phi
    else:
        h = np.zeros(n)
    return float(np.linalg.norm(ambient - intrinsic - h))


def _chart_field(space, F):
    n = space.dim

    def chart(x):
        v = ad.asarray(F(x))
        if v.shape == (n,):
            return v
        if v.shape == (n + 1,):
            try:
                return ambient_to_chart(space, x, v)
            except NumericError as exc:
                raise PreconditionError(f"field is not tangent to {space.label}") from exc
        raise PreconditionError(f"field returned {v.shape} components on {space.label}")

    return chart


def sample_points(space, count: int, seed: int = 42, bounds=None, exclude: Callable | None = None,
                  max_tries: int = 1000) -> np.ndarray:
    """``count`` chart points drawn uniformly from ``bounds`` and filtered by
    the chart's validity, sampling margins and the optional ``exclude``
    predicate (points where it is true are rejected). Deterministic in ``seed``.
    """
    if count < 1:
        raise ConfigError("sample count must be >= 1")
    bounds = np.asarray(space.bounds if bounds is None else bounds, dtype=float)
    if bounds.shape != (space.dim, 2) or np.any(bounds[:, 0] > bounds[:, 1]):
        raise ConfigError(f"bad sampling bounds for {space.label}")
    rng = np.random.default_rng(seed)
    out = []
    batch = max(16, 2 * count)
    for _ in range(max_tries):
        cand = rng.uniform(bounds[:, 0], bounds[:, 1], size=(batch, space.dim))
        for x in cand:
            if space.contains(x) and space.sample_ok(x) and not (exclude and exclude(x)):
                out.append(x)
                if len(out) == count:
                    return np.array(out)
    raise ConfigError(f"could not draw {count} admissible points on {space.label}")
