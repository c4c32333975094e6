"""Closed-form constants and probability bounds for random sampling on C_R.

Two readings of the dimension bound are supported through ``variant``:

``"paper"``
    the original reading, whose leading term carries ``2^{n(n/2+2)}``;
``"corrected"``
    the bound obtained by requiring truncation error ``eps/2``, which gives
    ``2^{n(2/n+2)}`` instead.  The two agree at ``n = 2``.

Probability bounds are kept in log space; ``beta`` overflows double precision
for small ``mu``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import ParameterError

__all__ = [
    "VARIANTS",
    "bernstein_tail",
    "dimension_bound",
    "covering_log_bound",
    "log_prob_est_failure_bound",
    "prob_est_failure_bound",
    "TheoremConstants",
    "main_theorem_constants",
    "MinSamples",
    "min_samples",
    "BoundOutputs",
    "evaluate_bounds",
]

VARIANTS = ("paper", "corrected")


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ParameterError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _check_space(T: float, R: float, n: int) -> None:
    if not T > 0:
        raise ParameterError("T must be positive")
    if not R > 1:
        raise ParameterError("R must exceed 1")
    if int(n) != n or n < 1:
        raise ParameterError("n must be a positive integer")


def _log2_power(n: int, variant: str) -> float:
    """Exponent of 2 in the leading term of the dimension bound."""
    _check_variant(variant)
    return n * (n / 2.0 + 2.0) if variant == "paper" else n * (2.0 / n + 2.0)


def bernstein_tail(lam: float, r: int, sigma_sq: float, M: float) -> float:
    """``2 exp(-lam^2 / (2 r sigma^2 + 2 M lam / 3))``; values >= 1 are vacuous."""
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    if sigma_sq < 0 or not M > 0 or r < 1:
        raise ParameterError("need sigma^2 >= 0, M > 0 and r >= 1")
    return 2.0 * math.exp(-lam * lam / (2.0 * r * sigma_sq + 2.0 * M * lam / 3.0))


def dimension_bound(epsilon: float, T: float, R: float, n: int, variant: str = "paper") -> float:
    """Upper bound ``d_eps`` on the dimension of the truncated lattice space."""
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    _check_space(T, R, n)
    lead = T**n * 2.0 ** _log2_power(n, variant) * math.pi ** (-2 * n) / epsilon**2
    return 2.0**n * (lead + (2.0 * T * math.log(R) + 1.0) ** n)


def covering_log_bound(epsilon: float, T: float, R: float, n: int,
                       variant: str = "paper") -> float:
    """Natural log of the covering-number bound ``exp(d_eps log(16/eps))``."""
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    if epsilon >= 16:
        return 0.0
    return dimension_bound(epsilon, T, R, n, variant) * math.log(16.0 / epsilon)


def _bernstein_rate(epsilon: float, R: float, n: int) -> float:
    vol = (R * R - 1.0) ** n
    return 3.0 * epsilon**2 * vol / (4.0 * R**n * (6.0 * R**n + epsilon * vol))


def log_prob_est_failure_bound(epsilon: float, r: int, T: float, R: float, n: int,
                               variant: str = "paper") -> float:
    """Log of the uniform deviation bound for ``sup_f |mean Z_j(f)| >= eps``."""
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    if int(r) != r or r < 1:
        raise ParameterError("r must be a positive integer")
    _check_space(T, R, n)
    lead = (16.0 * T**n * math.pi ** (-2 * n) * R ** (2 * n) * 2.0 ** _log2_power(n, variant)
            / epsilon**2)
    d = 2.0**n * (lead + (2.0 * T * math.log(R) + 1.0) ** n)
    return math.log(2.0) + d * math.log(64.0 * R**n / epsilon) - r * _bernstein_rate(epsilon, R, n)


def prob_est_failure_bound(epsilon: float, r: int, T: float, R: float, n: int,
                           variant: str = "paper") -> float:
    """The same bound exponentiated; ``inf`` when it overflows."""
    log_value = log_prob_est_failure_bound(epsilon, r, T, R, n, variant)
    return math.exp(log_value) if log_value < 709.0 else math.inf


@dataclass(frozen=True)
class TheoremConstants:
    alpha: float
    log_beta: float

    def log_failure(self, r: int) -> float:
        return math.log(2.0) + self.log_beta - r * self.alpha


def main_theorem_constants(mu: float, T: float, R: float, n: int,
                           variant: str = "paper") -> TheoremConstants:
    """Rate ``alpha`` and ``log beta`` of the sampling-inequality failure bound."""
    if not mu > 0:
        raise ParameterError("mu must be positive")
    _check_space(T, R, n)
    vol = (R * R - 1.0) ** n
    alpha = 3.0 * mu * mu / (4.0 * vol * (6.0 + mu))
    lead = 16.0 * math.pi ** (-2 * n) * T**n * vol**2 * 2.0 ** _log2_power(n, variant) / mu**2
    log_beta = 2.0**n * (lead + (2.0 * T * math.log(R) + 1.0) ** n) * math.log(64.0 * vol / mu)
    return TheoremConstants(alpha, log_beta)


@dataclass(frozen=True)
class MinSamples:
    r: int
    r_remark: int


def min_samples(mu: float, T: float, R: float, n: int, target_failure: float,
                variant: str = "paper") -> MinSamples:
    """Least ``r`` with ``2 exp(log beta - r alpha) <= target_failure``.

    Also returns the cruder threshold ``ceil(log beta / alpha) + 1``.
    """
    if not 0 < target_failure < 1:
        raise ParameterError("target_failure must lie in (0, 1)")
    k = main_theorem_constants(mu, T, R, n, variant)
    goal = math.log(target_failure)
    r = max(1, math.ceil((k.log_beta + math.log(2.0 / target_failure)) / k.alpha))
    # settle floating-point rounding at the boundary
    while k.log_failure(r) > goal:
        r += 1
    while r > 1 and k.log_failure(r - 1) <= goal:
        r -= 1
    return MinSamples(r=r, r_remark=math.ceil(k.log_beta / k.alpha) + 1)


@dataclass(frozen=True)
class BoundOutputs:
    n: int
    T: float
    R: float
    epsilon: float
    mu: float
    r: int
    target_failure: float
    variant: str
    d_eps: float
    log_covering: float
    log_prob_est: float
    alpha: float
    log_beta: float
    log_failure_bound: float
    failure_bound_raw: float
    failure_bound: float
    vacuous: bool
    min_r: int | None
    min_r_remark: int | None

    def to_dict(self) -> dict:
        out = asdict(self)
        if not math.isfinite(out["failure_bound_raw"]):
            out["failure_bound_raw"] = None
        return out


def evaluate_bounds(n: int, T: float, R: float, epsilon: float, mu: float, r: int,
                    target_failure: float, variant: str = "paper") -> BoundOutputs:
    """Every bound for one parameter point."""
    k = main_theorem_constants(mu, T, R, n, variant)
    log_fail = k.log_failure(r)
    raw = math.exp(log_fail) if log_fail < 709.0 else math.inf
    ms = min_samples(mu, T, R, n, target_failure, variant)
    return BoundOutputs(
        n=int(n), T=float(T), R=float(R), epsilon=float(epsilon), mu=float(mu), r=int(r),
        target_failure=float(target_failure), variant=variant,
        d_eps=dimension_bound(epsilon, T, R, n, variant),
        log_covering=covering_log_bound(epsilon, T, R, n, variant),
        log_prob_est=log_prob_est_failure_bound(epsilon, r, T, R, n, variant),
        alpha=k.alpha, log_beta=k.log_beta, log_failure_bound=log_fail,
        failure_bound_raw=raw, failure_bound=min(raw, 1.0), vacuous=log_fail >= 0.0,
        min_r=ms.r, min_r_remark=ms.r_remark,
    )
