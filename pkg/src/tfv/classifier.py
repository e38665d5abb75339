"""Classification into the torse-forming hierarchy.

At a point ``p`` we solve ``nabla_{e_a} V = f e_a + omega(e_a) V`` for the
``n + 1`` unknowns ``(f, omega)`` in an orthonormal frame ``e_a``: ``n^2``
equations, least squares by QR on the column-normalised design matrix. The
residual is the metric norm of ``nabla V - f Id - omega (x) V`` divided by
``n`` (the RMS over the ``n^2`` frame equations).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import ad, tensor
from .errors import ConfigError, DegeneracyError, NumericError
from .linalg import lstsq_qr

FLAGS = (
    "torse_forming", "concircular", "recurrent", "torqued",
    "anti_torqued", "proper", "parallel",
)
FIELD_ZERO = 1e-10


@dataclass(frozen=True)
class Tolerances:
    residual: float = 1e-8
    zero: float = 1e-7

    @classmethod
    def for_backend(cls, backend) -> "Tolerances":
        # central differences carry O(h^2) ~ 1e-6 relative truncation error
        if ad.get_backend(backend).name == "fd":
            return cls(residual=1e-4, zero=1e-4)
        return cls()


@dataclass(frozen=True)
class TorseDecomposition:
    f: float
    omega: np.ndarray
    residual: float
    rank_ok: bool
    scale: float
    min_singular: float
    V: np.ndarray
    nabla: np.ndarray
    g: np.ndarray


@dataclass
class ClassificationVerdict:
    flags: dict
    tolerances: Tolerances
    count: int
    failures: dict = field(default_factory=dict)
    f_min_abs: float = float("nan")
    f_max_abs: float = float("nan")
    omega_min: float = float("nan")
    omega_max: float = float("nan")
    max_residual: float = float("nan")
    f_values: list = field(default_factory=list)
    decompositions: list = field(default_factory=list)

    def matches(self, expected: dict) -> bool:
        return all(self.flags.get(k) == v for k, v in expected.items())

    def summary(self) -> dict:
        return {
            "flags": dict(self.flags),
            "count": self.count,
            "min_abs_f": self.f_min_abs,
            "max_abs_f": self.f_max_abs,
            "min_omega_norm": self.omega_min,
            "max_omega_norm": self.omega_max,
            "max_residual": self.max_residual,
            "failures": {k: [list(map(float, p)) for p in v[:5]] for k, v in self.failures.items()},
        }


def _design(V, frame):
    """Design matrix for the frame ``E`` (columns are frame vectors)."""
    n = len(V)
    Vt = np.linalg.solve(frame, V)
    A = np.zeros((n * n, n + 1))
    for a in range(n):
        rows = slice(a * n, (a + 1) * n)
        A[rows, 0] = np.eye(n)[:, a]
        A[rows, 1 + a] = Vt
    return A


def decompose_at(space, V: Callable, p, backend=ad.EXACT, frame=None) -> TorseDecomposition:
    """Best-fit ``(f, omega)`` with ``nabla_X V ~ f X + omega(X) V`` at ``p``.

    ``frame`` is an optional matrix whose columns form an orthonormal frame;
    it defaults to the one built from the Cholesky factor of the metric.
    ``omega`` is returned in chart (coordinate cobasis) components.
    """
    p = tensor.check_point(space, p)
    g, dg = tensor.metric_derivatives(space, p, 1, backend)
    Gamma = tensor.christoffel_from(g, dg)
    Vp = ad.primal_array(V(p))
    if np.sqrt(max(Vp @ g @ Vp, 0.0)) <= FIELD_ZERO:
        raise DegeneracyError(f"field vanishes at {p}")
    N = tensor.field_jacobian(V, p, backend) + np.einsum("kij,j->ki", Gamma, Vp)
    E = tensor.orthonormal_frame(g) if frame is None else np.asarray(frame, dtype=float)
    # frame components of nabla_{e_a} V, stacked by a
    Nt = np.linalg.solve(E, N @ E)
    b = Nt.T.reshape(-1)
    A = _design(Vp, E)
    colnorm = np.linalg.norm(A, axis=0)
    An = A / colnorm
    s = np.linalg.svd(An, compute_uv=False)
    rank_ok = bool(s[-1] > 1e-10)
    if not rank_ok:
        raise NumericError(f"design matrix lost rank at {p} (sigma_min={s[-1]:.3e})")
    y, _ = lstsq_qr(An, b)
    sol = y / colnorm
    f = float(sol[0])
    omega = np.linalg.solve(E.T, sol[1:])  # omega_i from omega(e_a)
    R = N - f * np.eye(len(p)) - np.outer(Vp, omega)
    scale = tensor.tensor_norm(g, N)
    residual = tensor.tensor_norm(g, R) / len(p)
    return TorseDecomposition(f, omega, residual, rank_ok, scale, float(s[-1]), Vp, N, g)


def flags_from(dec: TorseDecomposition, tol: Tolerances) -> dict:
    """Threshold the decomposition into class flags (all scale-aware)."""
    g, V, omega, f = dec.g, dec.V, dec.omega, dec.f
    scale = max(dec.scale, 1e-300)
    vnorm = np.sqrt(V @ g @ V)
    omega_norm = tensor.covector_norm(g, omega)
    nu = g @ V
    tf = dec.residual <= tol.residual * max(1.0, dec.scale)
    f_zero = abs(f) <= tol.zero * scale
    omega_zero = omega_norm * vnorm <= tol.zero * scale
    perp = abs(omega @ V) <= tol.zero * scale
    anti = tensor.covector_norm(g, omega + f * nu) * vnorm <= tol.zero * scale
    parallel = tf and f_zero and omega_zero
    proper = tf and not f_zero and not omega_zero
    return {
        "torse_forming": bool(tf),
        "concircular": bool(tf and omega_zero),
        "recurrent": bool(tf and f_zero),
        "parallel": bool(parallel),
        "proper": bool(proper),
        "torqued": bool(proper and perp),
        "anti_torqued": bool(tf and anti and not parallel),
    }


def classify_at(space, V: Callable, p, tolerances: Tolerances | None = None,
                backend=ad.EXACT) -> ClassificationVerdict:
    tol = tolerances or Tolerances.for_backend(backend)
    dec = decompose_at(space, V, p, backend)
    return _verdict([(np.asarray(p, float), dec)], tol)


def _verdict(items, tol: Tolerances) -> ClassificationVerdict:
    flags = {k: True for k in FLAGS}
    failures: dict = {}
    fs, oms, res, decs = [], [], [], []
    for p, dec in items:
        for k, v in flags_from(dec, tol).items():
            if not v:
                flags[k] = False
                failures.setdefault(k, []).append(p)
        fs.append(dec.f)
        oms.append(tensor.covector_norm(dec.g, dec.omega))
        res.append(dec.residual)
        decs.append(dec)
    af = np.abs(fs)
    return ClassificationVerdict(
        flags, tol, len(items), failures,
        float(af.min()), float(af.max()), float(min(oms)), float(max(oms)), float(max(res)),
        fs, decs,
    )


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("TFV_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Iterable, workers: int | None = None) -> list:
    """Order-preserving map; threads capped by ``TFV_THREADS``."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def classify_region(space, V: Callable, points, tolerances: Tolerances | None = None,
                    backend=ad.EXACT) -> ClassificationVerdict:
    """Conjunction of point verdicts over ``points`` (an array or iterable)."""
    points = [np.asarray(p, float) for p in points]
    if not points:
        raise ConfigError("empty sample")
    tol = tolerances or Tolerances.for_backend(backend)
    decs = parallel_map(lambda p: decompose_at(space, V, p, backend), points)
    return _verdict(list(zip(points, decs)), tol)


@dataclass(frozen=True)
class LengthReport:
    length_constant: bool
    length_min: float
    length_max: float
    max_length_differential: float
    geodesic: bool
    max_geodesic_residual: float
    max_geodesic_norm: float
    unit: bool

    @property
    def length_value(self) -> float | tuple:
        if self.length_constant:
            return 0.5 * (self.length_min + self.length_max)
        return (self.length_min, self.length_max)


def length_and_geodesic(space, V: Callable, points, tol: float = 1e-8,
                        backend=ad.EXACT) -> LengthReport:
    """Constant-length and geodesic predicates over the sample.

    ``d|V| (X) = <nabla_X V, V> / |V|`` by metric compatibility; ``geodesic``
    tests ``|nabla_V V| < tol``. Both tolerances are relative to ``max(1, .)``
    of the natural scale (``|nabla V|`` resp. ``|V|^2``-sized terms).
    """
    lengths, diffs, geos, raw = [], [], [], []
    for p in points:
        p = tensor.check_point(space, p)
        g = tensor.metric_at(space, p)
        Vp = ad.primal_array(V(p))
        N = tensor.nabla(space, V, p, backend)
        L = float(np.sqrt(Vp @ g @ Vp))
        dL = (N.T @ g @ Vp) / L
        lengths.append(L)
        diffs.append(tensor.covector_norm(g, dL) / max(1.0, tensor.tensor_norm(g, N)))
        nVV = N @ Vp
        raw.append(float(np.sqrt(max(nVV @ g @ nVV, 0.0))))
        geos.append(raw[-1] / max(1.0, L * tensor.tensor_norm(g, N)))
    lengths = np.array(lengths)
    lo, hi = float(lengths.min()), float(lengths.max())
    const = (hi - lo) < tol * max(1.0, hi) and max(diffs) < tol
    geodesic = max(geos) < tol
    unit = const and abs(0.5 * (lo + hi) - 1.0) < tol
    return LengthReport(bool(const), lo, hi, float(max(diffs)), bool(geodesic), float(max(geos)),
                        float(max(raw)), bool(unit))
