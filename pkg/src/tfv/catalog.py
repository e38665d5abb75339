"""Closed-form fields with their expected classification.

Ambient (hyperboloid / sphere) fields are evaluated in ambient coordinates
``(x_1, ..., x_{n+1})`` and converted to chart components by the QR solve in
:func:`tfv.spaces.ambient_to_chart`, which also rejects non-tangent values.
Ambient index ``a`` in code is ``x_{a+1}`` in the usual 1-based notation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ad, spaces
from .errors import ConfigError

EXCLUSION_MARGIN = 0.05
# bound on |g| = |x_1/x_{n+1}| when sampling hyp_torqued; e^g spans e^-10..e^10
MAX_EXPONENT = 10.0


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    id: str
    space: spaces.ModelSpace
    field: Callable
    expected: dict
    expected_f: Callable | None = None
    expected_omega: Callable | None = None
    exclude: Callable | None = None
    domain_note: str = ""
    extra: dict = field(default_factory=dict)

    def sample(self, count: int, seed: int = 42, bounds=None) -> np.ndarray:
        return spaces.sample_points(self.space, count, seed, bounds=bounds, exclude=self.exclude)


def _ambient_field(space, ambient: Callable) -> Callable:
    def V(x):
        P = space.embed(x)
        return spaces.ambient_to_chart(space, x, ambient(P))

    return V


def _differential(fn: Callable) -> Callable:
    """Chart components of ``d fn`` (a one-form field; accepts duals)."""
    return lambda x: ad.EXACT.jacobian(fn, x)


def _lorentz(P, Q):
    return -P[0] * Q[0] + sum(P[a] * Q[a] for a in range(1, len(P)))


# scalar fields ---------------------------------------------------------------


def g_torqued(space) -> Callable:
    """``x_1 / x_{n+1}`` restricted to the hyperboloid."""
    return lambda x: (lambda P: P[0] / P[-1])(space.embed(x))


def f_torqued(space) -> Callable:
    """``x_2 exp(x_1 / x_{n+1})`` restricted to the hyperboloid."""
    return lambda x: (lambda P: P[1] * ad.exp(P[0] / P[-1]))(space.embed(x))


def scalar(id: str, space) -> Callable:
    """Scalar field by name.

    ``g_torqued`` and ``f_torqued`` live on the hyperboloid; ``x<i>`` is the
    i-th chart coordinate (1-based) and ``ambient_x<i>`` the i-th ambient
    coordinate of an embedded space.
    """
    if id == "g_torqued":
        _need(space, "hyperboloid", id)
        return g_torqued(space)
    if id == "f_torqued":
        _need(space, "hyperboloid", id)
        return f_torqued(space)
    if id.startswith("ambient_x") and id[9:].isdigit():
        a = int(id[9:]) - 1
        if space.kind != "embedded" or not 0 <= a <= space.dim:
            raise ConfigError(f"{id} is not an ambient coordinate of {space.label}")
        return lambda x: space.embed(x)[a]
    if id.startswith("x") and id[1:].isdigit():
        i = int(id[1:]) - 1
        if not 0 <= i < space.dim:
            raise ConfigError(f"{id} is not a chart coordinate of {space.label}")
        return lambda x: x[i]
    raise ConfigError(f"unknown scalar field {id!r}")


def _need(space, name, id):
    if space.name != name:
        raise ConfigError(f"{id} is defined on {name}, not {space.label}")


# vector fields -------------------------------------------------------------------


def uhs_en(n: int = 3) -> CatalogEntry:
    space = spaces.uhs(n)
    m = n - 1

    def V(x):
        out = [0.0] * n
        out[m] = -x[m]
        return ad.asarray(out)

    return CatalogEntry(
        "uhs_en", space, V,
        expected={"torse_forming": True, "anti_torqued": True, "proper": True},
        expected_f=lambda x: 1.0,
        expected_omega=lambda x: ad.asarray([0.0] * m + [1.0 / x[m]]),
        domain_note="all of the upper half-space",
        extra={"unit": True},
    )


def hyp_torqued(n: int = 3) -> CatalogEntry:
    """``V = e^g (P0 + <P0,Phi> Phi)`` with ``P0 = d_2`` and ``g = x_1/x_{n+1}``."""
    space = spaces.hyperboloid(n)

    def ambient(P):
        P0 = [0.0] * (n + 1)
        P0[1] = 1.0
        c = _lorentz(P0, P)
        eg = ad.exp(P[0] / P[-1])
        return [eg * (P0[a] + c * P[a]) for a in range(n + 1)]

    g = g_torqued(space)
    return CatalogEntry(
        "hyp_torqued", space, _ambient_field(space, ambient),
        expected={"torse_forming": True, "torqued": True, "proper": True},
        expected_f=f_torqued(space),
        expected_omega=_differential(g),
        # x_2 = u_1 and x_{n+1} = u_n; x_1 >= 1 > 0 and x_1 > |x_{n+1}| on the sheet
        exclude=lambda u: (
            abs(u[0]) < EXCLUSION_MARGIN
            or abs(u[-1]) < EXCLUSION_MARGIN
            or abs(ad.primal(g(u))) > MAX_EXPONENT
        ),
        domain_note=(
            "x_1 x_2 x_{n+1} != 0, x_1 != x_{n+1} (margin 0.05 on |x_2|, |x_{n+1}|);"
            " sampling also keeps |x_1/x_{n+1}| <= 10 so e^g stays in range"
        ),
    )


def hyp_antitorqued(n: int = 3) -> CatalogEntry:
    """``V = (d_{n+1} + x_{n+1} Phi) / x_{n+1}`` on the hyperboloid."""
    space = spaces.hyperboloid(n)

    def ambient(P):
        c = P[-1]
        return [(P[a] * c + (1.0 if a == n else 0.0)) / c for a in range(n + 1)]

    return CatalogEntry(
        "hyp_antitorqued", space, _ambient_field(space, ambient),
        expected={"torse_forming": True, "anti_torqued": True, "proper": True},
        expected_f=lambda x: 1.0,
        # omega = -nu = -d log|x_{n+1}|
        expected_omega=_differential(lambda x: -ad.log(abs(space.embed(x)[-1]))),
        exclude=lambda u: abs(u[-1]) < EXCLUSION_MARGIN,
        domain_note="x_{n+1} != 0 (margin 0.05)",
    )


def euclid_position(n: int = 3) -> CatalogEntry:
    return CatalogEntry(
        "euclid_position", spaces.euclidean(n), lambda x: ad.asarray(list(x)),
        expected={"torse_forming": True, "concircular": True},
        expected_f=lambda x: 1.0,
        expected_omega=lambda x: np.zeros(n),
        exclude=lambda x: float(np.linalg.norm(x)) < EXCLUSION_MARGIN,
        domain_note="R^n minus the origin (the field vanishes there)",
    )


def sphere_torse(n: int = 3, chart: str = "north") -> CatalogEntry:
    """``V = e^{-x_1} (d_1 - x_1 Phi)`` on ``S^n`` in ``R^{n+1}``.

    Expected ``f = -x_1 e^{-x_1}`` and ``omega = -dx_1``: these were derived
    by hand and confirmed against the classifier under both backends.
    """
    space = spaces.sphere(n, chart)

    def ambient(P):
        e = ad.exp(-P[0])
        return [e * ((1.0 if a == 0 else 0.0) - P[0] * P[a]) for a in range(n + 1)]

    return CatalogEntry(
        "sphere_torse", space, _ambient_field(space, ambient),
        expected={"torse_forming": True, "proper": True},
        expected_f=lambda x: -x[0] * ad.exp(-x[0]),
        expected_omega=lambda x: ad.asarray([-1.0] + [0.0] * (n - 1)),
        domain_note="chart hemisphere with |x_{n+1}| >= 0.1",
    )


def default_twist(x):
    return 1.0 + 0.25 * ad.sin(x[1])


def twisted_torqued(n: int = 3, twist: Callable = default_twist) -> CatalogEntry:
    """``V = lambda mu d_s`` with ``lambda = e^s`` and ``mu = 1 + sin(q_1)/4``."""
    space = spaces.twisted_product(n)
    warp = space.params["warp"]

    def V(x):
        out = [0.0] * n
        out[0] = warp(x) * twist(x)
        return ad.asarray(out)

    return CatalogEntry(
        "twisted_torqued", space, V,
        expected={"torse_forming": True, "torqued": True, "proper": True},
        # for lambda = lambda(s): f = lambda' mu and omega = d log mu
        expected_f=lambda x: ad.EXACT.partial(warp, x, [np.eye(n)[0]]) * twist(x),
        expected_omega=_differential(lambda x: ad.log(twist(x))),
        domain_note="I x R^{n-1}, s in [-1, 1]",
    )


def rot2d(n: int = 2) -> CatalogEntry:
    if n != 2:
        raise ConfigError("rot2d is defined on euclidean(2) only")
    return CatalogEntry(
        "rot2d", spaces.euclidean(2), lambda x: ad.asarray([-x[1], x[0]]),
        expected={"torse_forming": False},
        exclude=lambda x: float(np.linalg.norm(x)) < EXCLUSION_MARGIN,
        domain_note="R^2 minus the origin; negative control",
    )


CATALOG = {
    "uhs_en": uhs_en,
    "hyp_torqued": hyp_torqued,
    "hyp_antitorqued": hyp_antitorqued,
    "euclid_position": euclid_position,
    "sphere_torse": sphere_torse,
    "twisted_torqued": twisted_torqued,
    "rot2d": rot2d,
}


def entry(id: str, n: int | None = None, **kwargs) -> CatalogEntry:
    try:
        ctor = CATALOG[id]
    except KeyError:
        raise ConfigError(f"unknown field {id!r}; choose from {sorted(CATALOG)}") from None
    if n is None:
        return ctor(**kwargs)
    return ctor(n, **kwargs)
