"""Uniform random sampling on C_R, Z statistics and frame-inequality checks."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binomtest

from .bounds import main_theorem_constants
from .core import LatticeFunction, SpaceParams
from .errors import DomainError, MellinSamplerError, ParameterError
from .quadrature import QuadratureSpec
from .rng import derive_seed, substream
from .synthesis import (
    ConcentrationCube,
    SynthesisProfile,
    concentration,
    norm_parseval,
    random_band_function,
    sup_error_on_cube,
)

__all__ = [
    "SamplePointSet",
    "FrameCheckResult",
    "TrialRecord",
    "MonteCarloReport",
    "ZStatistics",
    "draw_uniform",
    "z_variable",
    "empirical_frame",
    "frame_constants",
    "check_inequality",
    "monte_carlo_experiment",
    "z_statistics",
    "wilson_interval",
    "CSV_COLUMNS",
]

_POINT_STREAM = 2
_TRIAL_FUNCTION = 3
_TRIAL_POINTS = 4

CSV_COLUMNS = ("trial", "seed", "delta", "empirical_weighted", "lower_paper", "upper_paper",
               "lower_sharp", "upper_sharp", "pass_paper", "pass_sharp")


@dataclass(frozen=True, eq=False)
class SamplePointSet:
    points: np.ndarray
    seed: int
    R: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ParameterError("points must have shape (r, n) with r >= 1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def r(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]


def draw_uniform(r: int, cube: ConcentrationCube, seed: int, stream: int = 0) -> SamplePointSet:
    """``r`` Lebesgue-uniform points on ``[1/R, R]^n``.

    Coordinates come from the Philox stream keyed by ``(seed, stream)`` in
    row-major order, so point ``j`` is fixed by ``(seed, stream, j)`` and a
    larger ``r`` extends a smaller draw.
    """
    if int(r) != r or r < 1:
        raise ParameterError("r must be a positive integer")
    rng = substream(seed, _POINT_STREAM, stream)
    u = rng.random((int(r), cube.n))
    lo = 1.0 / cube.R
    pts = lo + (cube.R - lo) * u
    return SamplePointSet(np.minimum(pts, cube.R), int(seed), cube.R)


def _weights(pts: np.ndarray, c) -> tuple[np.ndarray, np.ndarray]:
    """``x^{2c}`` and ``x^{2c-1}`` with multi-index conventions."""
    logs = np.log(pts)
    c = np.atleast_1d(np.asarray(c, dtype=float))
    w2c = np.exp(2.0 * logs @ c)
    return w2c, w2c * np.exp(-np.sum(logs, axis=1))


def _values(f: Callable, pts: np.ndarray) -> np.ndarray:
    return np.asarray(f(pts), dtype=complex).reshape(pts.shape[0])


def z_variable(f: Callable, x, c, cube: ConcentrationCube, cube_energy: float):
    """``|f(x)|^2 x^{2c-1} - cube_energy / vol(C_R)`` at each sample point."""
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 1 and pts.shape[0] == cube.n
    pts = pts.reshape(-1, cube.n)
    if np.any(pts < 1.0 / cube.R * (1 - 1e-12)) or np.any(pts > cube.R * (1 + 1e-12)):
        raise DomainError("sample point outside C_R")
    _, dens = _weights(pts, c)
    z = np.abs(_values(f, pts)) ** 2 * dens - cube_energy / cube.volume
    return float(z[0]) if scalar else z


def empirical_frame(f: Callable, pts: SamplePointSet, c) -> tuple[float, float]:
    """Sample means of ``|f|^2 x^{2c}`` and ``|f|^2 x^{2c-1}``."""
    vals = np.abs(_values(f, pts.points)) ** 2
    w2c, dens = _weights(pts.points, c)
    weighted = math.fsum((vals * w2c).tolist()) / pts.r
    density = math.fsum((vals * dens).tolist()) / pts.r
    return weighted, density


@dataclass(frozen=True)
class FrameCheckResult:
    empirical_weighted: float
    empirical_density: float
    lower_paper: float
    upper_paper: float
    lower_sharp: float
    upper_sharp: float
    pass_paper: bool
    pass_sharp: bool
    event_lower: float
    event_upper: float
    pass_event: bool
    norm_sq: float


def frame_constants(mu: float, delta: float, R: float, n: int) -> dict:
    """Frame constants (per unit ``||f||^2``), original and sharp readings."""
    if not 0 < mu < 1 - delta:
        raise ParameterError(f"mu must lie in (0, 1 - delta) = (0, {1 - delta}), got {mu}")
    denom = (R * R - 1.0) ** n
    return {
        "lower_paper": R ** (n - 1) * (1 - delta - mu) / denom,
        "upper_paper": R ** (n + 1) * (1 + mu) / denom,
        "lower_sharp": (1 - delta - mu) / denom,
        "upper_sharp": R ** (2 * n) * (1 + mu) / denom,
    }


def check_inequality(f: LatticeFunction, pts: SamplePointSet, mu: float, delta_measured: float,
                     cube: ConcentrationCube) -> FrameCheckResult:
    """Test the sampled frame inequality under both constant readings.

    The event check compares the density mean with
    ``(cube_energy +/- mu ||f||^2) / vol(C_R)``, using
    ``cube_energy = (1 - delta) ||f||^2``.
    """
    n = f.params.n
    consts = frame_constants(mu, delta_measured, cube.R, n)
    norm_sq = norm_parseval(f) ** 2
    weighted, density = empirical_frame(f, pts, f.params.c)
    lp, up = consts["lower_paper"] * norm_sq, consts["upper_paper"] * norm_sq
    ls, us = consts["lower_sharp"] * norm_sq, consts["upper_sharp"] * norm_sq
    centre = (1.0 - delta_measured) * norm_sq / cube.volume
    spread = mu * norm_sq / cube.volume
    return FrameCheckResult(
        empirical_weighted=weighted,
        empirical_density=density,
        lower_paper=lp,
        upper_paper=up,
        lower_sharp=ls,
        upper_sharp=us,
        pass_paper=bool(lp <= weighted <= up),
        pass_sharp=bool(ls <= weighted <= us),
        event_lower=centre - spread,
        event_upper=centre + spread,
        pass_event=bool(abs(density - centre) <= spread),
        norm_sq=norm_sq,
    )


def wilson_interval(failures: int, trials: int) -> tuple[float, float]:
    ci = binomtest(int(failures), int(trials)).proportion_ci(0.95, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    delta: float
    result: FrameCheckResult

    def csv_row(self) -> list[str]:
        r = self.result
        return [str(self.trial), str(self.seed), _fmt(self.delta), _fmt(r.empirical_weighted),
                _fmt(r.lower_paper), _fmt(r.upper_paper), _fmt(r.lower_sharp),
                _fmt(r.upper_sharp), str(r.pass_paper).lower(), str(r.pass_sharp).lower()]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class MonteCarloReport:
    params: SpaceParams
    R: float
    profile: SynthesisProfile
    mu: float
    r: int
    trials: int
    seed: int
    variant: str
    failures_paper: int
    failures_sharp: int
    failures_event: int
    failure_rate_ci: tuple[float, float]
    failure_rate_ci_paper: tuple[float, float]
    log_theoretical_bound: float
    records: tuple[TrialRecord, ...] = field(repr=False)

    @property
    def theoretical_bound(self) -> float:
        """Raw failure bound ``2 exp(log beta - r alpha)``; may exceed 1 or be inf."""
        return math.exp(self.log_theoretical_bound) if self.log_theoretical_bound < 709 else math.inf

    @property
    def vacuous(self) -> bool:
        return self.log_theoretical_bound >= 0.0

    @property
    def trial_seeds(self) -> list[int]:
        return [rec.seed for rec in self.records]

    def to_dict(self) -> dict:
        raw = self.theoretical_bound
        return {
            "parameters": {
                "n": self.params.n, "c": list(self.params.c), "T": self.params.T, "R": self.R,
                "mu": self.mu, "r": self.r, "trials": self.trials, "seed": self.seed,
                "variant": self.variant, "profile": asdict(self.profile),
            },
            "failures_paper": self.failures_paper,
            "failures_sharp": self.failures_sharp,
            "failures_event": self.failures_event,
            "failure_rate_sharp": self.failures_sharp / self.trials,
            "failure_rate_ci": list(self.failure_rate_ci),
            "failure_rate_ci_paper": list(self.failure_rate_ci_paper),
            "log_theoretical_bound": self.log_theoretical_bound,
            "theoretical_bound": raw if math.isfinite(raw) else None,
            "theoretical_bound_clamped": min(raw, 1.0),
            "vacuous": self.vacuous,
            "trial_seeds": [str(s) for s in self.trial_seeds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in self.records:
            writer.writerow(rec.csv_row())
        return buf.getvalue()


def monte_carlo_experiment(params: SpaceParams, cube: ConcentrationCube,
                           profile: SynthesisProfile, mu: float, r: int, trials: int, seed: int,
                           reuse_function: bool = False, variant: str = "paper",
                           threads: int = 1, quad: QuadratureSpec | None = None
                           ) -> MonteCarloReport:
    """Tally frame-inequality failures over independent trials.

    Trial ``t`` synthesises its function from ``derive_seed(seed, ., t)`` (or
    reuses one function when ``reuse_function``) and draws its points from
    the stream keyed by its own seed, so results do not depend on
    ``threads``.
    """
    if int(trials) != trials or trials < 1:
        raise ParameterError("trials must be a positive integer")
    if profile.target_delta is not None and not 0 < mu < 1 - profile.target_delta:
        raise ParameterError("mu must lie in (0, 1 - target_delta)")
    shared = None
    if reuse_function:
        prof = replace(profile, seed=derive_seed(seed, _TRIAL_FUNCTION, 0))
        shared = random_band_function(params, prof, cube, quad)
        shared_delta = concentration(shared, cube, quad).delta

    def run(trial: int) -> TrialRecord:
        trial_seed = derive_seed(seed, _TRIAL_POINTS, trial)
        try:
            if shared is None:
                prof = replace(profile, seed=derive_seed(seed, _TRIAL_FUNCTION, trial))
                f = random_band_function(params, prof, cube, quad)
                delta = concentration(f, cube, quad).delta
            else:
                f, delta = shared, shared_delta
            pts = draw_uniform(r, cube, trial_seed)
            result = check_inequality(f, pts, mu, delta, cube)
        except MellinSamplerError as exc:
            exc.trial = trial
            exc.trial_seed = trial_seed
            raise
        return TrialRecord(trial, trial_seed, delta, result)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = tuple(pool.map(run, range(trials)))
    else:
        records = tuple(run(t) for t in range(trials))

    fail_paper = sum(not rec.result.pass_paper for rec in records)
    fail_sharp = sum(not rec.result.pass_sharp for rec in records)
    fail_event = sum(not rec.result.pass_event for rec in records)
    consts = main_theorem_constants(mu, params.T, cube.R, params.n, variant)
    log_bound = math.log(2.0) + consts.log_beta - r * consts.alpha
    return MonteCarloReport(
        params=params, R=cube.R, profile=profile, mu=mu, r=int(r), trials=int(trials),
        seed=int(seed), variant=variant, failures_paper=fail_paper, failures_sharp=fail_sharp,
        failures_event=fail_event, failure_rate_ci=wilson_interval(fail_sharp, trials),
        failure_rate_ci_paper=wilson_interval(fail_paper, trials),
        log_theoretical_bound=log_bound, records=records,
    )


@dataclass(frozen=True)
class ZStatistics:
    mean: float
    std_error: float
    empirical_var: float
    var_std_error: float
    sup_abs: float
    var_bound: float
    sup_bound: float
    lipschitz_lhs: float | None = None
    lipschitz_rhs: float | None = None


def z_statistics(f: LatticeFunction, pts: SamplePointSet, cube: ConcentrationCube,
                 g: LatticeFunction | None = None, cube_energy: float | None = None,
                 quad: QuadratureSpec | None = None, probe_points: int = 257) -> ZStatistics:
    """Empirical moments of ``Z_j(f)`` and, with ``g``, the Lipschitz probe.

    The Lipschitz probe compares ``max_j |Z_j(f) - Z_j(g)|`` with
    ``2 R^n sup_{C_R} x^c |f - g|`` (sup over a log-equispaced probe grid).
    """
    n = f.params.n
    c = f.params.c
    if cube_energy is None:
        rep = concentration(f, cube, quad)
        cube_energy = rep.cube_energy
    z = z_variable(f, pts.points, c, cube, cube_energy)
    m = z.shape[0]
    var = float(np.var(z, ddof=1)) if m > 1 else 0.0
    # large-sample standard error of the sample variance
    fourth = float(np.mean((z - np.mean(z)) ** 4))
    stats = dict(
        mean=float(np.mean(z)),
        std_error=math.sqrt(var / m),
        empirical_var=var,
        var_std_error=math.sqrt(max(fourth - var * var, 0.0) / m),
        sup_abs=float(np.max(np.abs(z))),
        var_bound=cube.R ** (2 * n) / (cube.R**2 - 1.0) ** n,
        sup_bound=cube.R**n,
    )
    if g is not None:
        g_energy = concentration(g, cube, quad).cube_energy
        zg = z_variable(g, pts.points, c, cube, g_energy)
        stats["lipschitz_lhs"] = float(np.max(np.abs(z - zg)))
        stats["lipschitz_rhs"] = 2.0 * cube.R**n * sup_error_on_cube(f, g, cube, probe_points)
    return ZStatistics(**stats)
