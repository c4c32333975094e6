"""Multi-index conventions, sinc/lin kernels and the exponential sampling series.

A Mellin band-limited function on the positive orthant is stored through its
samples on the exponential lattice ``e^{k/T}``, ``k`` an integer vector.  The
series

    f(x) = sum_k f(e^{k/T}) lin_{c/T}(e^{-k} x^T)

is evaluated exactly over the finite coefficient support.  All vector
operations (``x/y``, ``log x``, ``x^c``, ``a^x``) act coordinate-wise, and
index sets are always kept in lexicographic order.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, LatticeSizeError, ParameterError

__all__ = [
    "SpaceParams",
    "LatticeFunction",
    "sinc",
    "sinc_nd",
    "lin_c",
    "eval_series",
    "lattice_indices",
    "lattice_points",
    "DEFAULT_LATTICE_CAP",
]

DEFAULT_LATTICE_CAP = 10**7

# below this |pi x| the Taylor form 1 - (pi x)^2 / 6 replaces sin(pi x)/(pi x)
_SINC_GUARD = 1e-4

# lattice coordinates within this many ulps of an integer are treated as nodes
_SNAP_ULPS = 64


@dataclass(frozen=True)
class SpaceParams:
    """Dimension ``n``, Mellin weight ``c`` and band parameter ``T``."""

    n: int
    c: tuple[float, ...]
    T: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension n must be a positive integer, got {self.n!r}")
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if c.shape == (1,) and self.n > 1:
            c = np.full(self.n, c[0])
        if c.shape != (self.n,):
            raise ParameterError(f"c must have length n={self.n}, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ParameterError("c must be finite in every coordinate")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ParameterError(f"T must be a positive real, got {self.T!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "c", tuple(float(v) for v in c))
        object.__setattr__(self, "T", float(self.T))

    @property
    def c_array(self) -> np.ndarray:
        return np.asarray(self.c, dtype=float)


def sinc(x):
    """Elementwise ``sin(pi x) / (pi x)`` with a Taylor guard near zero.

    ``sin(pi x)`` is evaluated after reduction to the nearest integer, so the
    kernel vanishes exactly at nonzero integers.
    """
    x = np.asarray(x, dtype=float)
    nearest = np.rint(x)
    sign = np.where(np.fmod(nearest, 2.0) == 0.0, 1.0, -1.0)
    y = np.pi * x
    small = np.abs(y) < _SINC_GUARD
    safe = np.where(small, 1.0, y)
    return np.where(small, 1.0 - y * y / 6.0, sign * np.sin(np.pi * (x - nearest)) / safe)


def _snap(w, T):
    """Round ``w = T log x`` to an integer when it is within rounding error of one.

    ``T log(exp(k / T))`` misses ``k`` by about ``eps (T + |k|)``; without the
    snap a node evaluation picks up far coefficients through that offset.
    """
    nearest = np.rint(w)
    close = np.abs(w - nearest) <= _SNAP_ULPS * np.finfo(float).eps * (T + np.abs(w))
    return np.where(close, nearest, w)


def sinc_nd(x):
    """Product of one-dimensional sincs over the last axis of ``x``.

    A scalar or 1-d input is read as a single point; a 2-d array of shape
    ``(m, n)`` as ``m`` points.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return float(sinc(x))
    out = np.prod(sinc(x), axis=-1)
    return float(out) if out.ndim == 0 else out


def _as_points(x, n):
    """Return ``(points, scalar_input)`` with points of shape ``(m, n)``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        if n != 1:
            raise DomainError(f"scalar point given for dimension n={n}")
        return x.reshape(1, 1), True
    if x.ndim == 1:
        if n == 1 and x.shape[0] != 1:
            return x.reshape(-1, 1), False
        if x.shape[0] != n:
            raise DomainError(f"point has length {x.shape[0]}, expected {n}")
        return x.reshape(1, n), True
    if x.ndim != 2 or x.shape[1] != n:
        raise DomainError(f"points must have shape (m, {n}), got {x.shape}")
    return x, False


def _check_positive(x):
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("all coordinates must be finite and strictly positive")


def lin_c(c, x):
    """``x^{-c} sinc(log x)`` for a positive point (or rows of points)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    pts, scalar = _as_points(x, c.shape[0])
    _check_positive(pts)
    logs = np.log(pts)
    out = np.exp(-logs @ c) * np.prod(sinc(logs), axis=1)
    return float(out[0]) if scalar else out


class LatticeFunction:
    """Finite exponential-sampling series ``k -> f(e^{k/T})``.

    Keys are stored as an ``(p, n)`` integer array in lexicographic order and
    coefficients as a complex vector; both are read-only.  An empty key set is
    the zero function.
    """

    __slots__ = ("params", "keys", "values")

    def __init__(self, params: SpaceParams, coeffs: Mapping[tuple, complex] | None = None,
                 *, keys=None, values=None):
        if coeffs is not None:
            if keys is not None or values is not None:
                raise ParameterError("pass either a coefficient map or keys/values, not both")
            items = list(coeffs.items())
            keys = [tuple(int(v) for v in np.atleast_1d(k)) for k, _ in items]
            values = [complex(v) for _, v in items]
        keys = np.asarray([] if keys is None else keys, dtype=np.int64)
        values = np.asarray([] if values is None else values, dtype=complex)
        if keys.size == 0:
            keys = keys.reshape(0, params.n)
        if keys.ndim == 1 and params.n == 1:
            keys = keys.reshape(-1, 1)
        if keys.ndim != 2 or keys.shape[1] != params.n:
            raise ParameterError(f"keys must have shape (p, {params.n}), got {keys.shape}")
        if values.shape != (keys.shape[0],):
            raise ParameterError("one coefficient per key is required")
        if not np.all(np.isfinite(values)):
            raise ParameterError("coefficients must be finite")
        order = np.lexsort(keys.T[::-1]) if keys.shape[0] else np.arange(0)
        keys = keys[order]
        values = values[order]
        if keys.shape[0] > 1 and np.any(np.all(keys[1:] == keys[:-1], axis=1)):
            raise ParameterError("duplicate multi-index in coefficient map")
        keys.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeFunction is immutable")

    @classmethod
    def zero(cls, params: SpaceParams) -> "LatticeFunction":
        return cls(params, keys=np.zeros((0, params.n), dtype=np.int64), values=[])

    @property
    def is_zero(self) -> bool:
        return self.keys.shape[0] == 0 or not np.any(self.values)

    @property
    def support_radius(self) -> int:
        """Largest sup-norm of any key (0 for the zero function)."""
        if self.keys.shape[0] == 0:
            return 0
        return int(np.max(np.abs(self.keys)))

    @property
    def coeffs(self) -> dict:
        return {tuple(int(v) for v in k): complex(z) for k, z in zip(self.keys, self.values)}

    def weighted_values(self) -> np.ndarray:
        """Coefficients times ``e^{<c,k>/T}``, the natural log-axis amplitudes."""
        c = self.params.c_array
        return self.values * np.exp(self.keys @ c / self.params.T)

    def with_values(self, values) -> "LatticeFunction":
        return LatticeFunction(self.params, keys=self.keys, values=values)

    def __call__(self, x):
        return eval_series(self, x)

    def on_log_axis(self, u):
        """``f(e^u) e^{<c,u>}`` at log-axis points ``u`` of shape (m, n)."""
        u = np.asarray(u, dtype=float).reshape(-1, self.params.n)
        out = np.zeros(u.shape[0], dtype=complex)
        if self.keys.shape[0]:
            amps = self.weighted_values()
            scaled = self.params.T * u
            for start in range(0, u.shape[0], _EVAL_CHUNK):
                block = scaled[start:start + _EVAL_CHUNK]
                kern = np.prod(sinc(block[:, None, :] - self.keys[None, :, :]), axis=2)
                out[start:start + _EVAL_CHUNK] = kern @ amps
        return out

    def __eq__(self, other):
        if not isinstance(other, LatticeFunction):
            return NotImplemented
        return (self.params == other.params and np.array_equal(self.keys, other.keys)
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.params, self.keys.tobytes(), self.values.tobytes()))

    def __repr__(self):
        return (f"LatticeFunction(n={self.params.n}, T={self.params.T}, "
                f"terms={self.keys.shape[0]}, support_radius={self.support_radius})")

    # JSON wire format

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "c": list(self.params.c),
            "T": self.params.T,
            "coeffs": [
                {"k": [int(v) for v in k], "re": float(z.real), "im": float(z.imag)}
                for k, z in zip(self.keys, self.values)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeFunction":
        try:
            params = SpaceParams(n=data["n"], c=tuple(data["c"]), T=data["T"])
            entries = data["coeffs"]
            keys = [[int(v) for v in e["k"]] for e in entries]
            values = [complex(float(e["re"]), float(e["im"])) for e in entries]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed lattice function: {exc}") from exc
        if keys:
            return cls(params, keys=keys, values=values)
        return cls.zero(params)

    @classmethod
    def from_json(cls, text: str) -> "LatticeFunction":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed lattice function: {exc}") from exc
        return cls.from_dict(data)


_EVAL_CHUNK = 4096


def eval_series(f: LatticeFunction, x, window: Iterable | None = None):
    """Evaluate the exponential sampling series of ``f`` at positive points.

    ``window`` optionally restricts the sum to a subset of multi-indices.
    Returns a complex scalar for a single point, else an array of shape (m,).
    """
    params = f.params
    pts, scalar = _as_points(x, params.n)
    _check_positive(pts)
    keys, amps = f.keys, f.weighted_values()
    if window is not None:
        wanted = {tuple(int(v) for v in np.atleast_1d(k)) for k in window}
        mask = np.array([tuple(int(v) for v in k) in wanted for k in keys], dtype=bool)
        keys, amps = keys[mask], amps[mask]
    out = np.zeros(pts.shape[0], dtype=complex)
    if keys.shape[0]:
        logs = np.log(pts)
        scaled = _snap(params.T * logs, params.T)
        prefactor = np.exp(-logs @ params.c_array)
        for start in range(0, pts.shape[0], _EVAL_CHUNK):
            block = scaled[start:start + _EVAL_CHUNK]
            kern = np.prod(sinc(block[:, None, :] - keys[None, :, :]), axis=2)
            out[start:start + _EVAL_CHUNK] = prefactor[start:start + _EVAL_CHUNK] * (kern @ amps)
    return complex(out[0]) if scalar else out


def lattice_indices(n: int, N: int, cap: int = DEFAULT_LATTICE_CAP) -> np.ndarray:
    """Integer vectors in ``[-N/2, N/2]^n``, lexicographic, shape ``(p, n)``."""
    if int(N) != N or N < 0:
        raise ParameterError(f"N must be a non-negative integer, got {N!r}")
    half = int(N) // 2
    size = (2 * half + 1) ** n
    if size > cap:
        raise LatticeSizeError(f"lattice of {size} points exceeds cap {cap}")
    axis = range(-half, half + 1)
    return np.array(list(itertools.product(axis, repeat=n)), dtype=np.int64).reshape(size, n)


def lattice_points(params: SpaceParams, N: int, cap: int = DEFAULT_LATTICE_CAP) -> np.ndarray:
    """Lattice nodes ``e^{k/T}`` for ``k`` in ``[-N/2, N/2]^n``, shape ``(p, n)``."""
    return np.exp(lattice_indices(params.n, N, cap) / params.T)
