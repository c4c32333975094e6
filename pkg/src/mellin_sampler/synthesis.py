"""Random band-limited functions, Parseval norms, truncation and concentration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import LatticeFunction, SpaceParams, lattice_indices
from .errors import (
    ConcentrationError,
    LatticeSizeError,
    NormOverflowError,
    ParameterError,
    RejectionExhaustedError,
)
from .mellin import inner_product_quadrature, lattice_quadrature
from .quadrature import QuadratureSpec
from .rng import substream

__all__ = [
    "ConcentrationCube",
    "SynthesisProfile",
    "ConcentrationReport",
    "norm_parseval",
    "norm_quadrature",
    "random_band_function",
    "truncate_to_BN",
    "truncation_error_bound",
    "min_N_for_error",
    "concentration",
    "sup_error_on_cube",
    "cube_probe_grid",
]

# stream tag for coefficient draws
_SYNTH_STREAM = 1


@dataclass(frozen=True)
class ConcentrationCube:
    """The cube ``C_R = [1/R, R]^n``."""

    R: float
    n: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 1):
            raise ParameterError(f"R must exceed 1, got {self.R!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError("n must be a positive integer")

    @property
    def volume(self) -> float:
        return ((self.R**2 - 1.0) / self.R) ** self.n

    @property
    def log_box(self):
        half = math.log(self.R)
        return [(-half, half)] * self.n


@dataclass(frozen=True)
class SynthesisProfile:
    """How random coefficients are drawn.

    ``decay`` is ``"flat"`` or ``"geometric"``; the latter multiplies the
    coefficient at ``k`` by ``q ** |k|_inf``.
    """

    seed: int = 0
    support_half_width: int = 3
    decay: str = "flat"
    q: float | None = None
    target_delta: float | None = None
    max_rejections: int = 100

    def __post_init__(self):
        if int(self.support_half_width) != self.support_half_width or self.support_half_width < 1:
            raise ParameterError("support_half_width must be a positive integer")
        if self.decay not in ("flat", "geometric"):
            raise ParameterError(f"unknown decay {self.decay!r}")
        if self.decay == "geometric" and not (self.q is not None and 0 < self.q < 1):
            raise ParameterError("geometric decay needs 0 < q < 1")
        if self.target_delta is not None and not 0 < self.target_delta < 1:
            raise ParameterError("target_delta must lie in (0, 1)")
        if self.max_rejections < 1:
            raise ParameterError("max_rejections must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ConcentrationReport:
    cube_energy: float
    total_norm_sq: float
    delta: float
    R: float
    quad: QuadratureSpec

    def to_dict(self) -> dict:
        return {
            "cube_energy": self.cube_energy,
            "total_norm_sq": self.total_norm_sq,
            "delta": self.delta,
            "R": self.R,
            "quad": self.quad.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def norm_parseval(f: LatticeFunction) -> float:
    """``sqrt(T^{-n} sum_k |f(e^{k/T})|^2 e^{2<c,k>/T})``."""
    if f.keys.shape[0] == 0:
        return 0.0
    params = f.params
    logw = 2.0 * (f.keys @ params.c_array) / params.T
    with np.errstate(over="ignore"):
        terms = np.abs(f.values) ** 2 * np.exp(logw)
    if not np.all(np.isfinite(terms)):
        raise NormOverflowError("weighted Parseval term overflows double precision")
    order = np.argsort(np.max(np.abs(f.keys), axis=1), kind="stable")
    total = math.fsum(terms[order].tolist()) / params.T**params.n
    return math.sqrt(total)


def norm_quadrature(f: LatticeFunction, margin_steps: float = 30.0, tails: bool = True,
                    quad: QuadratureSpec | None = None) -> float:
    """Squared ``X_c^2`` norm by log-axis quadrature (independent of Parseval)."""
    return float(np.real(inner_product_quadrature(f, f, margin_steps, tails, quad)))


def random_band_function(params: SpaceParams, profile: SynthesisProfile,
                         cube: ConcentrationCube | None = None,
                         quad: QuadratureSpec | None = None) -> LatticeFunction:
    """Draw a unit-norm lattice function supported on ``[-K, K]^n``.

    Real and imaginary parts are i.i.d. standard normal before decay and
    rescaling.  With ``target_delta`` and a cube, draws are repeated until the
    measured delta is at most the target.
    """
    keys = lattice_indices(params.n, 2 * profile.support_half_width)
    radius = np.max(np.abs(keys), axis=1)
    scale = np.ones(keys.shape[0]) if profile.decay == "flat" else profile.q ** radius
    want_delta = profile.target_delta is not None and cube is not None
    best = math.inf
    for attempt in range(profile.max_rejections):
        rng = substream(profile.seed, _SYNTH_STREAM, attempt)
        draws = rng.standard_normal((keys.shape[0], 2))
        f = LatticeFunction(params, keys=keys, values=scale * (draws[:, 0] + 1j * draws[:, 1]))
        f = f.with_values(f.values / norm_parseval(f))
        if not want_delta:
            return f
        delta = concentration(f, cube, quad).delta
        if delta <= profile.target_delta:
            return f
        best = min(best, delta)
    raise RejectionExhaustedError(
        f"no draw reached delta <= {profile.target_delta} in {profile.max_rejections} attempts "
        f"(best {best:.6g})", best)


def truncate_to_BN(f: LatticeFunction, N: int) -> LatticeFunction:
    """Drop coefficients outside ``[-N/2, N/2]^n``."""
    if int(N) != N or N < 0:
        raise ParameterError("N must be a non-negative integer")
    if f.keys.shape[0] == 0:
        return f
    keep = np.all(np.abs(f.keys) <= N / 2.0, axis=1)
    return LatticeFunction(f.params, keys=f.keys[keep].reshape(-1, f.params.n),
                           values=f.values[keep])


def truncation_error_bound(N: int, params: SpaceParams, cube: ConcentrationCube,
                           norm: float) -> float:
    """Sup-norm bound on ``x^c |f - f_N|`` over the cube; ``inf`` when inapplicable."""
    if norm < 0:
        raise ParameterError("norm must be non-negative")
    n, T = params.n, params.T
    gap = N - 2.0 * T * math.log(cube.R)
    if gap <= 0:
        return math.inf
    if norm == 0:
        return 0.0
    return T ** (n / 2.0) * norm * (4.0 / (math.pi**2 * gap)) ** (n / 2.0)


def min_N_for_error(epsilon: float, params: SpaceParams, cube: ConcentrationCube,
                    cap: int = 10**9) -> int:
    """Least integer ``N > 4 T pi^-2 eps^{-2/n} + 2 T log R``."""
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    n, T = params.n, params.T
    threshold = 4.0 * T / math.pi**2 * epsilon ** (-2.0 / n) + 2.0 * T * math.log(cube.R)
    if not math.isfinite(threshold) or threshold >= cap:
        raise LatticeSizeError(f"required N exceeds cap {cap}")
    return math.floor(threshold) + 1


def concentration(f: LatticeFunction, cube: ConcentrationCube,
                  quad: QuadratureSpec | None = None) -> ConcentrationReport:
    """Fraction ``delta`` of the ``X_c^2`` energy lying outside the cube."""
    quad = quad or QuadratureSpec(refinement_tol=1e-12)
    if cube.n != f.params.n:
        raise ParameterError("cube and function dimensions differ")
    total = norm_parseval(f) ** 2
    if total == 0:
        raise ParameterError("concentration of the zero function is undefined")
    inside = lattice_quadrature(f, cube.log_box, quad)
    delta = 1.0 - inside / total
    slack = 1e-9
    if delta < -slack or delta > 1.0 + slack:
        raise ConcentrationError(f"measured delta {delta!r} outside [0, 1]")
    delta = min(max(delta, 0.0), 1.0)
    inside = min(max(inside, 0.0), total)
    return ConcentrationReport(inside, total, delta, cube.R, quad)


def cube_probe_grid(cube: ConcentrationCube, points_per_axis: int = 257) -> np.ndarray:
    """Log-equispaced tensor grid on the cube, shape ``(points**n, n)``."""
    axis = np.exp(np.linspace(-math.log(cube.R), math.log(cube.R), points_per_axis))
    mesh = np.meshgrid(*([axis] * cube.n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sup_error_on_cube(f: LatticeFunction, g: LatticeFunction, cube: ConcentrationCube,
                      points_per_axis: int = 257) -> float:
    """Probe-grid estimate of ``sup_{C_R} x^c |f(x) - g(x)|``."""
    pts = cube_probe_grid(cube, points_per_axis)
    diff = f(pts) - g(pts)
    weight = np.exp(np.log(pts) @ f.params.c_array)
    return float(np.max(np.abs(diff) * weight))
