"""Log-axis quadrature: composite Gauss-Legendre panels and sinc-pair integrals.

Every Mellin-side integral is computed after the substitution ``x = e^u``.
For lattice functions the integrands factor into products of shifted sincs,
so whole-line integrals reduce to the one-dimensional pair integral

    I(a, b) = int_R sinc(w - a) sinc(w - b) dw.

``sinc_pair_integral`` evaluates it as Gauss-Legendre over a finite window
plus the two half-line tails in closed form (sine/cosine integrals), without
using the convolution identity ``I(a, b) = sinc(a - b)`` that tests check it
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import sici

from .errors import ConvergenceError, ParameterError
from .core import sinc

__all__ = [
    "QuadratureSpec",
    "gauss_legendre_panels",
    "integrate_panels",
    "sinc_pair_integral",
    "sinc_gram",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre settings.

    ``log_radius`` is the half-width L of the log-axis box ``[-L, L]^n``;
    ``panel_count`` is the initial number of panels per axis, doubled on each
    refinement until successive results differ by less than ``refinement_tol``.
    """

    panel_count: int = 64
    log_radius: float = 40.0
    refinement_tol: float = 1e-9
    max_refinements: int = 10
    nodes_per_panel: int = 16

    def __post_init__(self):
        if self.panel_count < 1 or int(self.panel_count) != self.panel_count:
            raise ParameterError("panel_count must be a positive integer")
        if not self.log_radius > 0:
            raise ParameterError("log_radius must be positive")
        if not self.refinement_tol > 0:
            raise ParameterError("refinement_tol must be positive")
        if self.max_refinements < 1:
            raise ParameterError("max_refinements must be positive")
        if self.nodes_per_panel < 2:
            raise ParameterError("nodes_per_panel must be at least 2")

    def to_dict(self) -> dict:
        return {
            "panel_count": self.panel_count,
            "log_radius": self.log_radius,
            "refinement_tol": self.refinement_tol,
            "max_refinements": self.max_refinements,
            "nodes_per_panel": self.nodes_per_panel,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuadratureSpec":
        unknown = set(data) - set(cls().to_dict())
        if unknown:
            raise ParameterError(f"unknown quadrature keys: {sorted(unknown)}")
        return cls(**data)


@lru_cache(maxsize=32)
def _leggauss(m: int):
    nodes, weights = np.polynomial.legendre.leggauss(m)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre_panels(lo: float, hi: float, panels: int, nodes_per_panel: int = 16):
    """Nodes and weights of the composite rule on ``[lo, hi]``."""
    x, w = _leggauss(nodes_per_panel)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_panels(rule, lo, hi, quad: QuadratureSpec, panels: int | None = None):
    """Refine ``rule(nodes, weights)`` by panel doubling until it settles.

    ``rule`` returns a scalar or array; convergence is judged in sup norm.
    Returns ``(value, panels_used)``.
    """
    panels = quad.panel_count if panels is None else panels
    prev = np.asarray(rule(*gauss_legendre_panels(lo, hi, panels, quad.nodes_per_panel)))
    for _ in range(quad.max_refinements):
        panels *= 2
        cur = np.asarray(rule(*gauss_legendre_panels(lo, hi, panels, quad.nodes_per_panel)))
        if np.max(np.abs(cur - prev), initial=0.0) < quad.refinement_tol:
            return cur, panels
        prev = cur
    raise ConvergenceError(
        f"quadrature on [{lo}, {hi}] not converged after {quad.max_refinements} refinements"
    )


# Closed-form tails.  For h > max(a, b):
#   int_h^inf sinc(w-a) sinc(w-b) dw
#     = 1/(2 pi^2) [cos(pi(a-b)) E - cos(theta) C - sin(theta) S],  theta = pi(a+b)
# with E = int dw/((w-a)(w-b)), C/S the same with cos(2 pi w)/sin(2 pi w).


def _one_pole(h, a):
    """int_h^inf cos(2 pi w)/(w-a) dw and the sine analogue."""
    z = 2.0 * np.pi * (h - a)
    si, ci = sici(z)
    cs, sn = np.cos(2.0 * np.pi * a), np.sin(2.0 * np.pi * a)
    rest = 0.5 * np.pi - si
    pc = -cs * ci - sn * rest
    ps = cs * rest - sn * ci
    return pc, ps


def _right_tail(a, b, h):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    d = a - b
    same = np.abs(d) < 1e-8
    pca, psa = _one_pole(h, a)
    pcb, psb = _one_pole(h, b)
    safe_d = np.where(same, 1.0, d)
    e_diff = np.log1p(d / (h - a)) / safe_d
    c_diff = (pca - pcb) / safe_d
    s_diff = (psa - psb) / safe_d
    mid = 0.5 * (a + b)
    # double-pole limits, by parts
    e_same = 1.0 / (h - mid)
    pcm, psm = _one_pole(h, mid)
    c_same = np.cos(2.0 * np.pi * h) / (h - mid) - 2.0 * np.pi * psm
    s_same = np.sin(2.0 * np.pi * h) / (h - mid) + 2.0 * np.pi * pcm
    E = np.where(same, e_same, e_diff)
    C = np.where(same, c_same, c_diff)
    S = np.where(same, s_same, s_diff)
    theta = np.pi * (a + b)
    return (np.cos(np.pi * d) * E - np.cos(theta) * C - np.sin(theta) * S) / (2.0 * np.pi**2)


def sinc_pair_integral(a, b, lo: float, hi: float, panels_per_unit: int = 4,
                       nodes_per_panel: int = 16, tails: bool = True):
    """``int sinc(w-a) sinc(w-b) dw`` over the line (or over ``[lo, hi]``).

    ``a`` and ``b`` broadcast against each other and must lie strictly inside
    ``[lo, hi]`` when ``tails`` is set.  The window part uses composite
    Gauss-Legendre with ``panels_per_unit`` panels per unit length.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if tails and (np.any(np.maximum(a, b) >= hi) or np.any(np.minimum(a, b) <= lo)):
        raise ParameterError("pair centres must lie strictly inside the window")
    panels = max(1, int(math.ceil((hi - lo) * panels_per_unit)))
    nodes, weights = gauss_legendre_panels(lo, hi, panels, nodes_per_panel)
    a_flat, b_flat = np.broadcast_arrays(a, b)
    shape = a_flat.shape
    a_flat, b_flat = a_flat.ravel(), b_flat.ravel()
    out = np.empty(a_flat.shape[0])
    chunk = max(1, 2_000_000 // max(1, nodes.shape[0]))
    for s in range(0, a_flat.shape[0], chunk):
        sa = sinc(nodes[None, :] - a_flat[s:s + chunk, None])
        sb = sinc(nodes[None, :] - b_flat[s:s + chunk, None])
        out[s:s + chunk] = (sa * sb) @ weights
    if tails:
        out += _right_tail(a_flat, b_flat, hi)
        out += _right_tail(-a_flat, -b_flat, -lo)
    return out.reshape(shape)


def sinc_gram(points, lo: float, hi: float, tails: bool = True, panels_per_unit: int = 4,
              nodes_per_panel: int = 16) -> np.ndarray:
    """Matrix of pair integrals ``I(p_i, p_j)`` for 1-d centres ``points``."""
    p = np.asarray(points, dtype=float)
    return sinc_pair_integral(p[:, None], p[None, :], lo, hi, panels_per_unit,
                              nodes_per_panel, tails)
