"""Local identities behind the non-existence theorems on hyperbolic space.

The global statements (no proper torqued field, and no anti-torqued field
with admissible non-constant conformal scalar, on all of H^n) rest on a
topological argument that sampling cannot reach. What is checked here are the
pointwise identities that argument starts from:

* ``R(X,Y)V = <X,V>Y - <Y,V>X`` on curvature -1 models;
* torqued fields: ``d omega = 0`` and ``grad f = V + f W``;
* anti-torqued fields: ``d nu = 0`` and ``grad f = (1 - f^2) V``;
* the flow of ``T = grad f / |grad f|^2`` raises ``f`` at unit rate,
  ``f(phi_t(p)) = f(p) + t``.

Residuals are divided by ``max(1, scale)`` with ``scale`` the size of the
terms being compared, so they read as absolute errors for O(1) fields and
relative errors for large ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ad, tensor
from .classifier import Tolerances, classify_region, parallel_map
from .errors import CriticalPointError, PreconditionError

GLOBAL_NOTE = (
    "local obstruction verified; global non-existence is a topological "
    "theorem, out of numerical scope"
)


@dataclass
class ObstructionReport:
    check_id: str
    residuals: list
    max_residual: float
    tolerance: float
    passed: bool | None
    expected_negative: bool = False
    note: str = GLOBAL_NOTE
    witnesses: list = field(default_factory=list)

    def as_check(self) -> dict:
        return {
            "id": self.check_id,
            "pass": self.passed,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "expected_negative": self.expected_negative,
            "witnesses": self.witnesses,
            "note": self.note,
        }


def _report(check_id, points, residuals, tol, judged=True, expected_negative=False, note=GLOBAL_NOTE):
    residuals = [float(r) for r in residuals]
    worst = float(max(residuals))
    order = np.argsort(residuals)[::-1][:3]
    witnesses = [{"point": [float(c) for c in points[i]], "residual": residuals[i]} for i in order]
    passed = (worst < tol) if judged else None
    return ObstructionReport(check_id, residuals, worst, tol, passed, expected_negative, note, witnesses)


def _unit_random(space, p, rng):
    g = tensor.metric_at(space, p)
    v = rng.normal(size=space.dim)
    return v / np.sqrt(v @ g @ v)


def curvature_identity_check(space, V: Callable, points, pairs: int = 5, seed: int = 0,
                             tol: float = 1e-7, expect_negative: bool = False,
                             backend=ad.EXACT) -> ObstructionReport:
    """``max |R(X,Y)V - (<X,V>Y - <Y,V>X)| / max(1, |V|)`` over random unit
    ``X, Y``. Only curvature -1 spaces qualify unless ``expect_negative``."""
    if space.curvature != -1.0 and not expect_negative:
        raise PreconditionError(f"{space.label} does not have constant curvature -1")
    rng = np.random.default_rng(seed)
    points = [np.asarray(p, float) for p in points]
    draws = [[(_unit_random(space, p, rng), _unit_random(space, p, rng)) for _ in range(pairs)] for p in points]

    def one(item):
        p, xy = item
        R = tensor.riemann_tensor(space, p, backend)
        g = tensor.metric_at(space, p)
        Vp = ad.primal_array(V(p))
        worst = 0.0
        for X, Y in xy:
            lhs = np.einsum("lkij,k,i,j->l", R, Vp, X, Y)
            rhs = (X @ g @ Vp) * Y - (Y @ g @ Vp) * X
            d = lhs - rhs
            worst = max(worst, float(np.sqrt(max(d @ g @ d, 0.0))))
        return worst / max(1.0, float(np.sqrt(Vp @ g @ Vp)))

    res = parallel_map(one, list(zip(points, draws)))
    rep = _report("curvature-identity", points, res, tol, expected_negative=expect_negative,
                  note=GLOBAL_NOTE if not expect_negative else "expected negative: space is not curvature -1")
    return rep


def _require_flag(space, V, points, flag, backend):
    verdict = classify_region(space, V, points, Tolerances.for_backend(backend), backend)
    if not verdict.flags[flag]:
        raise PreconditionError(f"field is not {flag} on the sample region")
    return verdict


def _formula_agreement(entry, points, verdict, tol=1e-7):
    """Largest relative gap between classifier output and catalog formulas."""
    worst = 0.0
    for p, dec in zip(points, verdict.decompositions):
        f = float(ad.primal(entry.expected_f(p)))
        w = ad.primal_array(entry.expected_omega(p))
        worst = max(
            worst,
            abs(dec.f - f) / max(1.0, abs(f)),
            float(np.abs(dec.omega - w).max()) / max(1.0, float(np.abs(w).max())),
        )
    if worst > tol:
        raise PreconditionError(f"classifier output differs from catalog formulas by {worst:.3e}")
    return worst


def closedness_residual(space, omega: Callable, p, backend=ad.EXACT) -> float:
    """``|d omega|`` (max component) over ``max(1, |d omega|'s input scale)``."""
    dw = tensor.exterior_derivative(space, omega, p, backend)
    J = tensor.field_jacobian(omega, p, backend)
    return float(np.abs(dw).max()) / max(1.0, float(np.abs(J).max()))


def torqued_obstruction_check(space, entry, points, tol_gradient: float = 1e-6,
                              tol_closed: float = 1e-9, backend=ad.EXACT,
                              judged: bool | None = None) -> dict:
    """Residuals of ``grad f - V - f W`` and ``d omega`` for a torqued entry.

    ``f`` and ``omega`` come from the catalog's closed forms after checking
    that they agree with the classifier at every sample point. ``judged``
    defaults to True on curvature -1 spaces only; elsewhere the residuals are
    reported with ``pass = None``.
    """
    points = [np.asarray(p, float) for p in points]
    verdict = _require_flag(space, entry.field, points, "torqued", backend)
    agreement = _formula_agreement(entry, points, verdict)
    if judged is None:
        judged = space.curvature == -1.0
    note = GLOBAL_NOTE if judged else "report only: identity derived for H^n"
    f, omega, V = entry.expected_f, entry.expected_omega, entry.field

    def grad_res(p):
        g = tensor.metric_at(space, p)
        grad = tensor.gradient(space, f, p, backend)
        Vp = ad.primal_array(V(p))
        fp = float(ad.primal(f(p)))
        W = np.linalg.solve(g, ad.primal_array(omega(p)))
        d = grad - Vp - fp * W
        scale = max(1.0, *(float(np.sqrt(max(u @ g @ u, 0.0))) for u in (grad, Vp, fp * W)))
        return float(np.sqrt(max(d @ g @ d, 0.0))) / scale

    rg = parallel_map(grad_res, points)
    rc = parallel_map(lambda p: closedness_residual(space, omega, p, backend), points)
    return {
        "gradient": _report("torqued-gradient", points, rg, tol_gradient, judged, note=note),
        "closed": _report("torqued-closed", points, rc, tol_closed, judged, note=note),
        "formula_agreement": agreement,
    }


def antitorqued_obstruction_check(space, entry, points, tol: float = 1e-10,
                                  backend=ad.EXACT, judged: bool | None = None) -> dict:
    """Residuals of ``grad f - (1 - f^2) V`` and ``d nu`` with ``nu = V^flat``."""
    points = [np.asarray(p, float) for p in points]
    verdict = _require_flag(space, entry.field, points, "anti_torqued", backend)
    _formula_agreement(entry, points, verdict)
    if judged is None:
        judged = space.curvature == -1.0
    note = GLOBAL_NOTE if judged else "report only: identity derived for H^n"
    f, V = entry.expected_f, entry.field
    nu = lambda x: ad.asarray(space.metric(x) @ ad.asarray(V(x)))

    def grad_res(p):
        g = tensor.metric_at(space, p)
        grad = tensor.gradient(space, f, p, backend)
        Vp = ad.primal_array(V(p))
        fp = float(ad.primal(f(p)))
        rhs = (1.0 - fp * fp) * Vp
        d = grad - rhs
        scale = max(1.0, *(float(np.sqrt(max(u @ g @ u, 0.0))) for u in (grad, rhs)))
        return float(np.sqrt(max(d @ g @ d, 0.0))) / scale

    rg = parallel_map(grad_res, points)
    rc = parallel_map(lambda p: closedness_residual(space, nu, p, backend), points)
    return {
        "gradient": _report("anti-gradient", points, rg, tol, judged, note=note),
        "closed": _report("anti-closed", points, rc, tol, judged, note=note),
    }


@dataclass
class FlowTrace:
    start: np.ndarray
    times: np.ndarray
    points: np.ndarray
    f_values: np.ndarray
    linearity_error: float
    truncated: bool = False

    def csv(self) -> str:
        n = self.points.shape[1]
        head = ",".join(["t"] + [f"x{i + 1}" for i in range(n)] + ["f"])
        rows = [
            ",".join(repr(float(v)) for v in (t, *x, fv))
            for t, x, fv in zip(self.times, self.points, self.f_values)
        ]
        return "\n".join([head, *rows]) + "\n"


def unit_rate_field(space, f: Callable, backend=ad.EXACT) -> Callable:
    """``T = grad f / <grad f, grad f>``, so that ``T(f) = 1``."""

    def T(x):
        grad = tensor.gradient(space, f, x, backend)
        gg = tensor.inner(space, x, grad, grad)
        if np.sqrt(gg) <= 1e-8:
            raise CriticalPointError(f"gradient vanishes at {x}")
        return grad / gg

    return T


def rk4(rhs: Callable, x0, t_max: float, step: float, valid: Callable = lambda x: True):
    """Classical fourth-order Runge-Kutta for an autonomous system; returns
    ``(times, states, truncated)``. Stops early if a stage leaves ``valid``."""
    steps = int(round(t_max / step))
    h = t_max / steps
    xs = [np.asarray(x0, float)]
    ts = [0.0]
    for k in range(steps):
        x = xs[-1]
        try:
            k1 = rhs(x)
            stage = x + 0.5 * h * k1
            if not valid(stage):
                return np.array(ts), np.array(xs), True
            k2 = rhs(stage)
            stage = x + 0.5 * h * k2
            if not valid(stage):
                return np.array(ts), np.array(xs), True
            k3 = rhs(stage)
            stage = x + h * k3
            if not valid(stage):
                return np.array(ts), np.array(xs), True
            k4 = rhs(stage)
        except (ValueError, ArithmeticError) as exc:
            if isinstance(exc, CriticalPointError):
                raise
            return np.array(ts), np.array(xs), True
        nxt = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not valid(nxt):
            return np.array(ts), np.array(xs), True
        xs.append(nxt)
        ts.append((k + 1) * h)
    return np.array(ts), np.array(xs), False


def gradient_flow_check(space, f: Callable, p0, t_max: float = 0.5, step: float = 1e-3,
                        backend=ad.EXACT, exclude: Callable | None = None) -> FlowTrace:
    """Integrate ``dx/dt = T(x)`` and measure ``max_t |f(phi_t p0) - f(p0) - t|``."""
    p0 = tensor.check_point(space, p0)
    T = unit_rate_field(space, f, backend)
    valid = lambda x: space.contains(x) and not (exclude and exclude(x))
    ts, xs, truncated = rk4(T, p0, t_max, step, valid)
    fv = np.array([float(ad.primal(f(x))) for x in xs])
    err = float(np.max(np.abs(fv - fv[0] - ts)))
    return FlowTrace(p0, ts, xs, fv, err, truncated)
