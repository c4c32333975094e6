"""Numerical Mellin transform, its inverse, band-limit checks and kernels.

All integrals run on the log axis: with ``x = e^u`` the transform on the line
``c + it`` becomes

    M[f](c + it) = int_{R^n} f(e^u) e^{<c,u>} e^{i<t,u>} du,

a Fourier-type integral of a smooth function.  Lattice functions have a
closed-form spectrum; general callables go through composite Gauss-Legendre
on ``[-L, L]^n`` with panel doubling.
"""

from __future__ import annotations

import json
import math
import os
import string
import threading
import warnings
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import comb

from .core import LatticeFunction, SpaceParams, _as_points, _check_positive, sinc
from .errors import (
    ConvergenceError,
    CostWarning,
    DomainError,
    EdgeMassWarning,
    ParameterError,
    TailMassWarning,
)
from .quadrature import (
    QuadratureSpec,
    gauss_legendre_panels,
    integrate_panels,
    sinc_pair_integral,
)

__all__ = [
    "SpectralFunction",
    "LogAxisKernel",
    "mellin_transform",
    "inverse_mellin",
    "bandlimit_residual",
    "jackson_constant",
    "jackson_kernel",
    "fejer_kernel",
    "log_gaussian",
    "reproduce_integral",
    "inner_product_quadrature",
    "lattice_quadrature",
]

# probe grid resolution for band-limit checks
POINTS_PER_OCTAVE = 64


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """Samples of ``t -> M[f](c + it)`` on a symmetric uniform grid.

    ``values`` has shape ``(points_per_axis,) * n`` and is indexed like
    ``np.meshgrid(..., indexing="ij")`` over ``t_grid`` in every axis.
    """

    params: SpaceParams
    t_max: float
    points_per_axis: int
    values: np.ndarray

    def __post_init__(self):
        if not self.t_max > 0:
            raise ParameterError("t_max must be positive")
        if self.points_per_axis < 2:
            raise ParameterError("points_per_axis must be at least 2")
        vals = np.asarray(self.values, dtype=complex)
        expected = (self.points_per_axis,) * self.params.n
        if vals.shape != expected:
            raise ParameterError(f"values shape {vals.shape} does not match grid {expected}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def t_grid(self) -> np.ndarray:
        return np.linspace(-self.t_max, self.t_max, self.points_per_axis)

    @property
    def step(self) -> float:
        return 2.0 * self.t_max / (self.points_per_axis - 1)

    def to_dict(self) -> dict:
        flat = self.values.reshape(-1)
        return {
            "t_max": self.t_max,
            "points_per_axis": self.points_per_axis,
            "values": [[float(z.real), float(z.imag)] for z in flat],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, params: SpaceParams) -> "SpectralFunction":
        pts = int(data["points_per_axis"])
        raw = np.asarray(data["values"], dtype=float).reshape(-1, 2)
        vals = (raw[:, 0] + 1j * raw[:, 1]).reshape((pts,) * params.n)
        return cls(params, float(data["t_max"]), pts, vals)


def _contract_axes(tensor, mats):
    """Apply ``mats[i]`` (P_i x M_i) along axis i of ``tensor``."""
    n = len(mats)
    letters = string.ascii_letters
    src = letters[:n]
    out = tensor
    for i, mat in enumerate(mats):
        dst = src[:i] + letters[n + i] + src[i + 1:]
        out = np.einsum(f"{letters[n + i]}{src[i]},{src}->{dst}", mat, out)
        src = dst
    return out


def _lattice_spectrum(f: LatticeFunction, t: np.ndarray) -> np.ndarray:
    """Closed-form transform of a lattice function on the tensor grid ``t``."""
    params = f.params
    n, T = params.n, params.T
    if f.keys.shape[0] == 0:
        return np.zeros((t.shape[0],) * n, dtype=complex)
    amps = f.weighted_values() / T**n
    edge = np.pi * T
    inside = np.where(np.isclose(np.abs(t), edge, rtol=1e-12, atol=0.0), 0.5,
                      (np.abs(t) < edge).astype(float))
    phases = [inside[:, None] * np.exp(1j * np.outer(t, f.keys[:, i]) / T) for i in range(n)]
    letters = string.ascii_letters[:n]
    operands = []
    spec = []
    for i in range(n):
        operands.append(phases[i])
        spec.append(f"{letters[i]}z")
    expr = ",".join(spec) + ",z->" + letters
    return np.einsum(expr, *operands, amps)


def _default_lattice_quad(f: LatticeFunction, quad: QuadratureSpec | None) -> QuadratureSpec:
    if quad is not None:
        return quad
    T = f.params.T
    return QuadratureSpec(log_radius=f.support_radius / T + 30.0 / T)


def _eval_callable(f: Callable, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(pts), dtype=complex)
    return vals.reshape(pts.shape[0])


# log(max double) is about 709.8
_MAX_X_SPACE_RADIUS = 700.0


def _weighted_log_values(f, params: SpaceParams, u: np.ndarray) -> np.ndarray:
    """``f(e^u) e^{<c,u>}`` at log-axis points ``u`` of shape (m, n)."""
    if hasattr(f, "on_log_axis"):
        vals = np.asarray(f.on_log_axis(u), dtype=complex).reshape(u.shape[0])
        own_c = np.atleast_1d(np.asarray(getattr(f, "c", params.c), dtype=float))
        shift = params.c_array - own_c
        if np.any(shift):
            vals = vals * np.exp(u @ shift)
        return vals
    if np.max(np.abs(u), initial=0.0) > _MAX_X_SPACE_RADIUS:
        raise ParameterError("log-radius too large for an x-space callable; "
                             "supply an on_log_axis form")
    return _eval_callable(f, np.exp(u)) * np.exp(u @ params.c_array)


class LogAxisKernel:
    """Callable on positive reals that also exposes its weighted log-axis form.

    ``on_log_axis(u)`` returns ``f(e^u) e^{c u}`` directly, so quadrature can
    run far beyond the range where ``e^u`` is representable.
    """

    def __init__(self, weighted, c: float, name: str = "kernel"):
        self._weighted = weighted
        self.c = float(c)
        self.name = name

    def on_log_axis(self, u):
        u = np.asarray(u, dtype=float)
        return self._weighted(u.reshape(u.shape[0]) if u.ndim == 2 else u)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError(f"{self.name} is defined on positive reals")
        u = np.log(x)
        return np.exp(-self.c * u) * self._weighted(u)

    def __repr__(self):
        return f"LogAxisKernel({self.name}, c={self.c})"


def _transform_rule(f, params: SpaceParams, t: np.ndarray, nodes, weights):
    n = params.n
    M = nodes.shape[0]
    if M**n > 50_000_000:
        raise ConvergenceError(f"tensor grid of {M}^{n} nodes is too large")
    mesh = np.meshgrid(*([nodes] * n), indexing="ij")
    u = np.stack([m.ravel() for m in mesh], axis=1)
    vals = _weighted_log_values(f, params, u).reshape((M,) * n)
    mat = np.exp(1j * np.outer(t, nodes)) * weights[None, :]
    return _contract_axes(vals, [mat] * n)


def _tail_probe(f, params: SpaceParams, L: float) -> float:
    n = params.n
    probes = []
    for i in range(n):
        for s in (-1.0, 1.0):
            u = np.zeros(n)
            u[i] = s * L
            probes.append(u)
    corners = np.array(np.meshgrid(*([[-L, L]] * n), indexing="ij")).reshape(n, -1).T
    u = np.vstack([np.array(probes), corners])
    return float(np.max(np.abs(_weighted_log_values(f, params, u))))


def mellin_transform(f, params: SpaceParams, t_max: float, points_per_axis: int,
                     quad: QuadratureSpec | None = None, method: str = "auto") -> SpectralFunction:
    """Sample ``M[f](c + it)`` on the grid ``linspace(-t_max, t_max, points_per_axis)^n``.

    ``f`` is a LatticeFunction or a vectorised callable taking points of shape
    ``(m, n)``.  With ``method="auto"`` a lattice function uses its exact
    spectrum; ``method="quadrature"`` forces panel quadrature on the series.
    """
    if method not in ("auto", "quadrature", "exact"):
        raise ParameterError(f"unknown method {method!r}")
    t = np.linspace(-t_max, t_max, points_per_axis)
    if isinstance(f, LatticeFunction):
        if f.params != params:
            raise ParameterError("lattice function lives in a different space")
        if method in ("auto", "exact"):
            return SpectralFunction(params, float(t_max), int(points_per_axis),
                                    _lattice_spectrum(f, t))
        quad = _default_lattice_quad(f, quad)
    elif method == "exact":
        raise ParameterError("exact spectrum is only available for lattice functions")
    quad = quad or QuadratureSpec()
    if params.n > 2:
        warnings.warn(f"tensor quadrature in dimension {params.n} is expensive", CostWarning,
                      stacklevel=2)
    L = quad.log_radius
    probe = _tail_probe(f, params, L)
    if probe > quad.refinement_tol:
        warnings.warn(f"integrand magnitude {probe:.3g} at log-radius {L} exceeds tolerance",
                      TailMassWarning, stacklevel=2)
    rule = partial(_transform_rule, f, params, t)
    vals, _ = integrate_panels(rule, -L, L, quad)
    return SpectralFunction(params, float(t_max), int(points_per_axis), vals)


def inverse_mellin(F: SpectralFunction, x):
    """Trapezoid-rule inverse ``(2 pi)^{-n} int F(c+it) x^{-c-it} dt``."""
    params = F.params
    n = params.n
    pts, scalar = _as_points(x, n)
    _check_positive(pts)
    vals = F.values
    peak = np.max(np.abs(vals), initial=0.0)
    if peak > 0:
        outer = np.ones(vals.shape, dtype=bool)
        outer[(slice(1, -1),) * n] = False
        if np.max(np.abs(vals[outer])) > 1e-6 * peak:
            warnings.warn("spectral mass at the grid edge; the transform may be truncated",
                          EdgeMassWarning, stacklevel=2)
    t = F.t_grid
    w = np.full(t.shape[0], F.step)
    w[0] = w[-1] = 0.5 * F.step
    logs = np.log(pts)
    out = np.empty(pts.shape[0], dtype=complex)
    for j, u in enumerate(logs):
        mats = [(w * np.exp(-1j * t * u[i]))[None, :] for i in range(n)]
        out[j] = _contract_axes(vals, mats).reshape(()) * np.exp(-u @ params.c_array)
    out /= (2.0 * np.pi) ** n
    return complex(out[0]) if scalar else out


def bandlimit_residual(f, params: SpaceParams, T_test: float,
                       quad: QuadratureSpec | None = None, method: str = "auto") -> float:
    """Spectral magnitude beyond ``T_test`` relative to the overall peak.

    The grid spans ``[-2 T_test, 2 T_test]^n`` at ``T_test / 64`` spacing; the
    probe region is ``T_test < |t|_inf <= 2 T_test``.
    """
    if not T_test > 0:
        raise ParameterError("T_test must be positive")
    points = 4 * POINTS_PER_OCTAVE + 1
    spec = mellin_transform(f, params, 2.0 * T_test, points, quad, method)
    mags = np.abs(spec.values)
    peak = float(np.max(mags))
    if peak == 0.0:
        return 0.0
    t = spec.t_grid
    grids = np.meshgrid(*([np.abs(t)] * params.n), indexing="ij")
    sup = np.max(np.stack(grids), axis=0)
    probe = sup > T_test * (1.0 + 1e-9)
    return float(np.max(mags[probe]) / peak)


# --- kernel gallery -------------------------------------------------------

_JACKSON_LOCK = threading.Lock()
_JACKSON_MEMO: dict[tuple[float, int], float] = {}
_CACHE_ENV = "MELLIN_SAMPLER_CACHE"


def _sinc_power_integral(k: int, quad: QuadratureSpec) -> float:
    """``int_R (sin s / s)^{2k} ds`` by Gauss-Legendre on [0, S] plus exact tail."""
    S = 64.0 * np.pi

    def rule(nodes, weights):
        s = np.where(nodes == 0.0, 1.0, nodes)
        vals = np.where(nodes == 0.0, 1.0, np.sin(s) / s) ** (2 * k)
        return vals @ weights

    head, _ = integrate_panels(rule, 0.0, S, quad, panels=256)
    # sin^{2k} = 4^{-k} [C(2k,k) + 2 sum_j (-1)^j C(2k,k-j) cos(2js)]
    tail = comb(2 * k, k, exact=True) * S ** (1 - 2 * k) / (2 * k - 1)
    for j in range(1, k + 1):
        osc, _ = integrate.quad(lambda s: s ** (-2 * k), S, np.inf, weight="cos", wvar=2.0 * j,
                                epsabs=1e-15, limlst=200)
        tail += 2.0 * (-1) ** j * comb(2 * k, k - j, exact=True) * osc
    tail /= 4.0**k
    return 2.0 * (float(head) + tail)


def _cache_file() -> Path | None:
    root = os.environ.get(_CACHE_ENV)
    return Path(root) / "jackson_constants.json" if root else None


def jackson_constant(alpha: float, k: int, quad: QuadratureSpec | None = None) -> float:
    """Normalising constant ``C_{alpha,k}`` of the Mellin-Jackson kernel.

    Computed once per ``(alpha, k)`` and memoised in-process; if the
    ``MELLIN_SAMPLER_CACHE`` directory is set the value is also persisted there.
    """
    if not alpha >= 1:
        raise ParameterError("alpha must be at least 1")
    if int(k) != k or k < 1:
        raise ParameterError("k must be a positive integer")
    key = (float(alpha), int(k))
    with _JACKSON_LOCK:
        if key in _JACKSON_MEMO:
            return _JACKSON_MEMO[key]
        path = _cache_file()
        label = f"alpha={key[0]!r},k={key[1]}"
        stored = {}
        if path is not None and path.exists():
            try:
                stored = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError):
                stored = {}
        if label in stored:
            value = float(stored[label])
        else:
            quad = quad or QuadratureSpec(refinement_tol=1e-13)
            # u = 2 alpha k s maps sinc^{2k}(u / (2 alpha k pi)) to (sin s / s)^{2k}
            value = 1.0 / (2.0 * alpha * k * _sinc_power_integral(int(k), quad))
            if path is not None:
                stored[label] = value
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".tmp")
                tmp.write_text(json.dumps(stored, indent=1, sort_keys=True))
                tmp.replace(path)
        _JACKSON_MEMO[key] = value
        return value


def jackson_kernel(alpha: float, k: int, c: float) -> LogAxisKernel:
    """Mellin-Jackson kernel ``x -> C x^{-c} sinc^{2k}(log x / (2 alpha k pi))``."""
    const = jackson_constant(alpha, k)
    scale = 2.0 * alpha * k * np.pi
    return LogAxisKernel(lambda u: const * sinc(u / scale) ** (2 * k), c,
                         f"Jackson(alpha={alpha}, k={k})")


def fejer_kernel(rho: float, c: float) -> LogAxisKernel:
    """Mellin-Fejer kernel ``x -> (rho / 2 pi) x^{-c} sinc^2(rho log sqrt(x) / pi)``."""
    if not rho > 0:
        raise ParameterError("rho must be positive")
    return LogAxisKernel(lambda u: rho / (2.0 * np.pi) * sinc(rho * 0.5 * u / np.pi) ** 2, c,
                         f"Fejer(rho={rho})")


def log_gaussian(c) -> Callable:
    """``x -> x^{-c} exp(-|log x|^2)``: a Gaussian on the log axis, not band-limited."""
    c = np.atleast_1d(np.asarray(c, dtype=float))

    def g(x):
        pts = np.asarray(x, dtype=float)
        if pts.ndim == 1 and c.shape[0] == 1:
            pts = pts.reshape(-1, 1)
        u = np.log(pts)
        return np.exp(-u @ c - np.sum(u * u, axis=-1))

    return g


# --- quadrature oracles for lattice functions -------------------------------

def _axis_windows(centres_per_axis, margin: float):
    return [(float(np.min(cs)) - margin, float(np.max(cs)) + margin) for cs in centres_per_axis]


def reproduce_integral(f: LatticeFunction, x, quad: QuadratureSpec | None = None,
                       margin_steps: float = 10.0):
    """Evaluate the reproducing integral ``T^n int f(y) lin_{c/T}((x/y)^T) dy/y``.

    In log coordinates the integrand factors over axes into shifted sinc
    pairs; each factor is integrated over the support plus ``margin_steps``
    lattice steps by Gauss-Legendre and completed with the exact half-line
    tails.  Agrees with ``eval_series`` up to quadrature error.
    """
    params = f.params
    pts, scalar = _as_points(x, params.n)
    _check_positive(pts)
    nodes_per_panel = (quad or QuadratureSpec()).nodes_per_panel
    out = np.zeros(pts.shape[0], dtype=complex)
    if f.keys.shape[0]:
        logs = np.log(pts)
        targets = params.T * logs
        amps = f.weighted_values()
        for j in range(pts.shape[0]):
            factor = np.ones(f.keys.shape[0])
            for i in range(params.n):
                ki = f.keys[:, i].astype(float)
                lo = min(ki.min(), targets[j, i]) - margin_steps
                hi = max(ki.max(), targets[j, i]) + margin_steps
                factor *= sinc_pair_integral(ki, targets[j, i], lo, hi,
                                             nodes_per_panel=nodes_per_panel)
            out[j] = np.exp(-logs[j] @ params.c_array) * (amps @ factor)
    return complex(out[0]) if scalar else out


def _pair_gram(fk: np.ndarray, gk: np.ndarray, lo: float, hi: float, tails: bool,
               nodes_per_panel: int) -> np.ndarray:
    uf, inv_f = np.unique(fk, return_inverse=True)
    ug, inv_g = np.unique(gk, return_inverse=True)
    small = sinc_pair_integral(uf[:, None].astype(float), ug[None, :].astype(float), lo, hi,
                               nodes_per_panel=nodes_per_panel, tails=tails)
    return small[np.ix_(inv_f, inv_g)]


def inner_product_quadrature(f: LatticeFunction, g: LatticeFunction,
                             margin_steps: float = 30.0, tails: bool = True,
                             quad: QuadratureSpec | None = None) -> complex:
    """``<f, g>`` in ``X_c^2`` by log-axis quadrature.

    The window covers both supports plus ``margin_steps`` lattice steps per
    axis; ``tails=True`` adds the exact contribution from outside the window
    so the result approximates the whole-line integral.
    """
    if f.params != g.params:
        raise ParameterError("inner product needs functions in the same space")
    params = f.params
    if f.keys.shape[0] == 0 or g.keys.shape[0] == 0:
        return 0j
    nodes_per_panel = (quad or QuadratureSpec()).nodes_per_panel
    gram = np.ones((f.keys.shape[0], g.keys.shape[0]))
    for i in range(params.n):
        fk, gk = f.keys[:, i], g.keys[:, i]
        lo = float(min(fk.min(), gk.min())) - margin_steps
        hi = float(max(fk.max(), gk.max())) + margin_steps
        gram *= _pair_gram(fk, gk, lo, hi, tails, nodes_per_panel)
    value = f.weighted_values() @ gram @ np.conj(g.weighted_values())
    return complex(value) / params.T**params.n


def lattice_quadrature(f: LatticeFunction, box, quad: QuadratureSpec | None = None) -> float:
    """``int_box |f(e^u)|^2 e^{2<c,u>} du`` over a finite log-axis box.

    ``box`` is a sequence of ``(lo, hi)`` pairs in u-coordinates.  Each axis
    factor is a Gauss-Legendre Gram matrix of shifted sincs, refined by panel
    doubling until the quadratic form settles.
    """
    params = f.params
    quad = quad or QuadratureSpec()
    if f.keys.shape[0] == 0:
        return 0.0
    T = params.T
    amps = f.weighted_values()
    uniq = [np.unique(f.keys[:, i]) for i in range(params.n)]
    inv = [np.searchsorted(uniq[i], f.keys[:, i]) for i in range(params.n)]

    def energy(panels):
        gram = np.ones((f.keys.shape[0], f.keys.shape[0]))
        for i, (lo, hi) in enumerate(box):
            nodes, weights = gauss_legendre_panels(T * lo, T * hi, panels, quad.nodes_per_panel)
            basis = sinc(nodes[:, None] - uniq[i][None, :].astype(float))
            small = (basis * weights[:, None]).T @ basis
            gram *= small[np.ix_(inv[i], inv[i])]
        return float(np.real(amps @ gram @ np.conj(amps))) / T**params.n

    width = max(hi - lo for lo, hi in box) * T
    panels = max(quad.panel_count, int(math.ceil(2.0 * width)))
    prev = energy(panels)
    for _ in range(quad.max_refinements):
        panels *= 2
        cur = energy(panels)
        if abs(cur - prev) < quad.refinement_tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise ConvergenceError("cube-energy quadrature did not converge")
