"""Forward-mode differentiation with tagged dual numbers.

A :class:`Dual` carries a value and a first-order perturbation ``a + b*eps``.
Each perturbation gets a fresh integer tag, so duals nest: the parts of a
dual may themselves be duals with *lower* tags. Nesting gives exact mixed
higher derivatives without a dedicated second-order type, and tags keep an
inner derivative from confusing itself with an outer one.

Scalar fields in this package are written against the functions exported
here (:func:`exp`, :func:`sqrt`, ...) so they accept floats, numpy arrays
and duals alike.

Two differentiation backends share one interface:

* :data:`EXACT`  -- nested duals, exact to rounding.
* :data:`FD`     -- central differences with ``h = 1e-5`` (cross-check oracle).
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

_tags = itertools.count()


def _zero(x) -> bool:
    return not isinstance(x, Dual) and x == 0


def _mk(tag: int, a, b):
    if _zero(b):
        return a
    return Dual(tag, a, b)


def _parts(x, tag: int):
    if isinstance(x, Dual) and x.tag == tag:
        return x.a, x.b
    return x, 0.0


def _tag(x) -> int:
    return x.tag if isinstance(x, Dual) else -1


def _broadcasting(op):
    """Let ``dual <op> ndarray`` act elementwise instead of nesting an array
    inside a dual."""

    def wrapped(self, other):
        if isinstance(other, np.ndarray):
            out = np.empty(other.shape, dtype=object)
            for i in np.ndindex(other.shape):
                out[i] = op(self, other[i])
            return out
        return op(self, other)

    wrapped.__name__ = op.__name__
    return wrapped


class Dual:
    """Value ``a`` plus perturbation ``b`` in the direction labelled ``tag``."""

    __slots__ = ("tag", "a", "b")
    # numpy scalars must defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, tag: int, a, b):
        self.tag = tag
        self.a = a
        self.b = b

    def __repr__(self) -> str:
        return f"Dual[{self.tag}]({self.a!r}, {self.b!r})"

    # arithmetic ---------------------------------------------------------
    @_broadcasting
    def __add__(self, other):
        t = max(self.tag, _tag(other))
        a, b = _parts(self, t)
        c, d = _parts(other, t)
        return _mk(t, a + c, b + d)

    __radd__ = __add__

    @_broadcasting
    def __sub__(self, other):
        t = max(self.tag, _tag(other))
        a, b = _parts(self, t)
        c, d = _parts(other, t)
        return _mk(t, a - c, b - d)

    @_broadcasting
    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Dual(self.tag, -self.a, -self.b)

    def __pos__(self):
        return self

    @_broadcasting
    def __mul__(self, other):
        t = max(self.tag, _tag(other))
        a, b = _parts(self, t)
        c, d = _parts(other, t)
        if _zero(d):
            return _mk(t, a * c, b * c)
        if _zero(b):
            return _mk(t, a * c, a * d)
        return _mk(t, a * c, a * d + b * c)

    __rmul__ = __mul__

    @_broadcasting
    def __truediv__(self, other):
        t = max(self.tag, _tag(other))
        a, b = _parts(self, t)
        c, d = _parts(other, t)
        q = a / c
        if _zero(d):
            return _mk(t, q, b / c)
        return _mk(t, q, (b - q * d) / c)

    @_broadcasting
    def __rtruediv__(self, other):
        if isinstance(other, Dual):
            return other.__truediv__(self)
        t = self.tag
        c, d = self.a, self.b
        q = other / c
        return _mk(t, q, -(q * d) / c)

    def __pow__(self, k):
        if isinstance(k, Dual):
            return exp(k * log(self))
        if k == 0:
            return 1.0
        if k == 1:
            return self
        if k == 2:
            return self * self
        return _mk(self.tag, self.a**k, k * self.a ** (k - 1) * self.b)

    def __rpow__(self, base):
        return exp(self * math.log(base))

    def __abs__(self):
        return -self if primal(self) < 0 else self

    # comparisons act on the primal value only
    def __lt__(self, other):
        return primal(self) < primal(other)

    def __le__(self, other):
        return primal(self) <= primal(other)

    def __gt__(self, other):
        return primal(self) > primal(other)

    def __ge__(self, other):
        return primal(self) >= primal(other)

    # numpy calls these on object arrays (np.exp(arr) -> elem.exp())
    def exp(self):
        e = exp(self.a)
        return _mk(self.tag, e, e * self.b)

    def log(self):
        return _mk(self.tag, log(self.a), self.b / self.a)

    def sqrt(self):
        s = sqrt(self.a)
        return _mk(self.tag, s, self.b / (2.0 * s))

    def sin(self):
        return _mk(self.tag, sin(self.a), cos(self.a) * self.b)

    def cos(self):
        return _mk(self.tag, cos(self.a), -sin(self.a) * self.b)


def exp(x):
    return x.exp() if isinstance(x, Dual) else np.exp(x)


def log(x):
    return x.log() if isinstance(x, Dual) else np.log(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Dual) else np.sqrt(x)


def sin(x):
    return x.sin() if isinstance(x, Dual) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Dual) else np.cos(x)


def primal(x):
    """Strip every perturbation layer and return the plain float."""
    while isinstance(x, Dual):
        x = x.a
    return x


def primal_array(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.dtype != object:
        return arr.astype(float)
    return np.vectorize(primal, otypes=[float])(arr) if arr.size else arr.astype(float)


def asarray(values) -> np.ndarray:
    """Pack a (possibly nested) sequence into a float array, or an object
    array when any entry carries a perturbation."""
    arr = np.array(values, dtype=object)
    if arr.size and any(isinstance(v, Dual) for v in arr.flat):
        return arr
    return arr.astype(float)


def _tangent(y, tag: int):
    if isinstance(y, Dual):
        if y.tag == tag:
            return y.b
        if y.tag > tag:
            # a higher perturbation leaked out of its scope; keep it
            return _mk(y.tag, _tangent(y.a, tag), _tangent(y.b, tag))
    return 0.0


def derivative(fn: Callable, x, v):
    """Directional derivative ``d/dt fn(x + t v)`` at ``t = 0``.

    ``fn`` maps a coordinate array to a scalar or an array. ``x`` may itself
    carry perturbations from an enclosing derivative.
    """
    tag = next(_tags)
    x = np.asarray(x)
    v = np.asarray(v)
    xd = np.empty(x.shape, dtype=object)
    for i in np.ndindex(x.shape):
        xd[i] = _mk(tag, x[i], v[i])
    y = fn(xd)
    if isinstance(y, np.ndarray) or isinstance(y, (list, tuple)):
        arr = np.asarray(y, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for i in np.ndindex(arr.shape):
            out[i] = _tangent(arr[i], tag)
        return asarray(out) if out.shape else out[()]
    return _tangent(y, tag)


class ExactBackend:
    """Nested forward-mode differentiation."""

    name = "exact"

    def partial(self, fn: Callable, x, directions: Sequence):
        """Mixed directional derivative of ``fn`` along each direction in turn."""
        if not directions:
            return fn(x)
        first, rest = directions[0], directions[1:]
        return derivative(lambda y: self.partial(fn, y, rest), x, first)

    def jacobian(self, fn: Callable, x) -> np.ndarray:
        """Array of shape ``out_shape + (n,)`` holding ``d fn / d x_i``."""
        n = len(x)
        eye = np.eye(n)
        cols = [asarray(self.partial(fn, x, [eye[i]])) for i in range(n)]
        return asarray(np.stack(cols, axis=-1))

    def hessian(self, fn: Callable, x) -> np.ndarray:
        """Array of shape ``out_shape + (n, n)``; symmetric by construction."""
        n = len(x)
        eye = np.eye(n)
        cols = {}
        for i in range(n):
            for j in range(i, n):
                cols[i, j] = asarray(self.partial(fn, x, [eye[i], eye[j]]))
        shape = cols[0, 0].shape
        dtype = object if any(c.dtype == object for c in cols.values()) else float
        out = np.empty(shape + (n, n), dtype=dtype)
        for (i, j), c in cols.items():
            out[..., i, j] = c
            out[..., j, i] = c
        return out


class FiniteDifferenceBackend:
    """Central differences; nests for higher orders. Float inputs only.

    ``order=4`` (default) uses the five-point stencil
    ``(8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h``; ``order=2`` the
    three-point one. Both step by ``h``.
    """

    name = "fd"

    def __init__(self, h: float = 1e-5, order: int = 4):
        if order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        self.h = h
        self.order = order

    def partial(self, fn: Callable, x, directions: Sequence):
        if not directions:
            return asarray(fn(x))
        d = np.asarray(directions[0], dtype=float)
        rest = directions[1:]
        x = np.asarray(x, dtype=float)
        h = self.h
        one = self.partial(fn, x + h * d, rest) - self.partial(fn, x - h * d, rest)
        if self.order == 2:
            return one / (2.0 * h)
        two = self.partial(fn, x + 2 * h * d, rest) - self.partial(fn, x - 2 * h * d, rest)
        return (8.0 * one - two) / (12.0 * h)

    jacobian = ExactBackend.jacobian
    hessian = ExactBackend.hessian


EXACT = ExactBackend()
FD = FiniteDifferenceBackend()

BACKENDS = {"exact": EXACT, "fd": FD}


def get_backend(backend) -> ExactBackend | FiniteDifferenceBackend:
    if isinstance(backend, str):
        return BACKENDS[backend]
    return backend
