import json
import math
import warnings

import numpy as np
import pytest

from mellin_sampler import mellin
from mellin_sampler.core import LatticeFunction, SpaceParams, eval_series
from mellin_sampler.errors import EdgeMassWarning, ParameterError, TailMassWarning
from mellin_sampler.mellin import (
    SpectralFunction,
    bandlimit_residual,
    fejer_kernel,
    inner_product_quadrature,
    inverse_mellin,
    jackson_constant,
    jackson_kernel,
    lattice_quadrature,
    log_gaussian,
    mellin_transform,
    reproduce_integral,
)
from mellin_sampler.quadrature import QuadratureSpec, gauss_legendre_panels

from conftest import random_lattice

WIDE = QuadratureSpec(panel_count=256, log_radius=2000.0, refinement_tol=1e-6)


def test_single_coefficient_spectrum_is_box():
    p = SpaceParams(1, 0.0, 1.0)
    f = LatticeFunction(p, {(0,): 1.0})
    F = mellin_transform(f, p, 2 * math.pi, 5)
    # grid -2pi, -pi, 0, pi, 2pi: half value on the band edge
    np.testing.assert_allclose(F.values, [0, 0.5, 1.0, 0.5, 0], atol=1e-15)


def test_exact_spectrum_agrees_with_quadrature_inside_band():
    p = SpaceParams(1, 0.3, 2.0)
    f = random_lattice(p, 3, seed=11)
    exact = mellin_transform(f, p, math.pi, 33, method="exact").values
    quad = QuadratureSpec(log_radius=100.0, panel_count=400)
    numeric = mellin_transform(f, p, math.pi, 33, quad, method="quadrature").values
    assert np.max(np.abs(exact - numeric)) / np.max(np.abs(exact)) < 5e-3


def test_two_dimensional_spectrum_factorises():
    p = SpaceParams(2, (0.0, 0.0), 1.0)
    f = LatticeFunction(p, {(1, 0): 1.0})
    F = mellin_transform(f, p, 1.0, 3)
    t = F.t_grid
    expected = np.exp(1j * t)[:, None] * np.ones(3)[None, :]
    np.testing.assert_allclose(F.values, expected, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2])
def test_inverse_recovers_lattice_function(n):
    p = SpaceParams(n, 0.3 if n == 1 else (0.3, -0.1), 2.0)
    f = random_lattice(p, 2, seed=5)
    # the band edge falls on the grid, so this is the trapezoid rule on the band
    F = mellin_transform(f, p, 2 * math.pi * p.T, 1025)
    x = np.exp(np.random.default_rng(1).uniform(-1.5, 1.5, (6, n)))
    np.testing.assert_allclose(inverse_mellin(F, x), f(x), atol=5e-4)


def test_inverse_warns_on_truncated_spectrum():
    p = SpaceParams(1, 0.0, 1.0)
    f = random_lattice(p, 2, seed=3)
    F = mellin_transform(f, p, 1.0, 33)
    with pytest.warns(EdgeMassWarning):
        inverse_mellin(F, 1.0)


def test_spectral_function_json_round_trip():
    p = SpaceParams(2, (0.1, 0.1), 1.0)
    f = random_lattice(p, 1, seed=2)
    F = mellin_transform(f, p, 2.0, 7)
    G = SpectralFunction.from_dict(json.loads(F.to_json()), p)
    np.testing.assert_array_equal(F.values, G.values)
    with pytest.raises(ParameterError):
        SpectralFunction(p, 1.0, 3, np.zeros((3,)))


def test_method_validation():
    p = SpaceParams(1, 0.0, 1.0)
    with pytest.raises(ParameterError):
        mellin_transform(log_gaussian(0.0), p, 1.0, 5, method="exact")
    with pytest.raises(ParameterError):
        mellin_transform(log_gaussian(0.0), p, 1.0, 5, method="fft")
    other = LatticeFunction(SpaceParams(1, 0.5, 1.0), {(0,): 1.0})
    with pytest.raises(ParameterError):
        mellin_transform(other, p, 1.0, 5)


def test_log_gaussian_transform_is_gaussian():
    # int e^{-u^2} e^{itu} du = sqrt(pi) e^{-t^2/4}
    p = SpaceParams(1, 0.7, 1.0)
    F = mellin_transform(log_gaussian(0.7), p, 4.0, 9, QuadratureSpec(log_radius=12.0))
    t = F.t_grid
    np.testing.assert_allclose(F.values, math.sqrt(math.pi) * np.exp(-t * t / 4), atol=1e-12)


def test_x_space_callable_rejects_huge_log_radius():
    p = SpaceParams(1, 0.0, 1.0)
    with pytest.raises(ParameterError):
        mellin_transform(log_gaussian(0.0), p, 1.0, 5, QuadratureSpec(log_radius=800.0))


def test_tail_mass_warning_for_short_window():
    p = SpaceParams(1, 0.0, 1.0)
    with pytest.warns(TailMassWarning):
        mellin_transform(fejer_kernel(1.0, 0.0), p, 1.0, 5, QuadratureSpec(log_radius=5.0))


def test_jackson_constant_matches_closed_form(vectors):
    ints = vectors["misc"]["sinc_power_integrals"]
    for k in range(1, 6):
        for alpha in (1.0, 2.5):
            expected = 1.0 / (2 * alpha * k * float(ints[str(k)]))
            assert jackson_constant(alpha, k) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ParameterError):
        jackson_constant(0.5, 1)


def test_jackson_constant_disk_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("MELLIN_SAMPLER_CACHE", str(tmp_path))
    monkeypatch.setattr(mellin, "_JACKSON_MEMO", {})
    value = jackson_constant(3.0, 2)
    stored = json.loads((tmp_path / "jackson_constants.json").read_text())
    assert stored == {"alpha=3.0,k=2": value}
    monkeypatch.setattr(mellin, "_JACKSON_MEMO", {})
    (tmp_path / "jackson_constants.json").write_text(json.dumps({"alpha=3.0,k=2": 42.0}))
    assert jackson_constant(3.0, 2) == 42.0


def test_jackson_with_k1_is_fejer():
    u = np.linspace(-30, 30, 61) + 0.1
    np.testing.assert_allclose(jackson_kernel(2.0, 1, 0.0).on_log_axis(u),
                               fejer_kernel(0.5, 0.0).on_log_axis(u), rtol=1e-12)


def test_kernels_are_normalised():
    p = SpaceParams(1, 0.0, 1.0)
    for kern in (jackson_kernel(1.0, 2, 0.0), fejer_kernel(1.0, 0.0)):
        F = mellin_transform(kern, p, 0.5, 3, WIDE)
        assert abs(F.values[1] - 1.0) < 1e-3


def test_kernel_x_space_call_consistent():
    k = jackson_kernel(1.0, 2, 0.4)
    x = np.array([0.5, 1.0, 3.0])
    np.testing.assert_allclose(k(x), x**-0.4 * k.on_log_axis(np.log(x)), rtol=1e-14)


def test_bandlimit_residuals_small_for_fejer_large_for_gaussian():
    p = SpaceParams(1, 0.0, 1.0)
    assert bandlimit_residual(fejer_kernel(1.0, 0.0), p, 1.0, WIDE) < 1e-3
    assert bandlimit_residual(log_gaussian(0.0), p, 1.0, QuadratureSpec(log_radius=12.0)) > 1e-2


def test_bandlimit_residual_of_lattice_function():
    p = SpaceParams(1, 0.2, 2.0)
    f = random_lattice(p, 3, seed=8)
    assert bandlimit_residual(f, p, math.pi * p.T) == 0.0
    assert bandlimit_residual(f, p, 0.5 * math.pi * p.T) > 1e-2
    assert bandlimit_residual(LatticeFunction.zero(p), p, 1.0) == 0.0


@pytest.mark.parametrize("n", [1, 2])
def test_reproduce_integral_matches_series(n):
    p = SpaceParams(n, 0.25 if n == 1 else (0.25, -0.5), 1.5)
    f = random_lattice(p, 2, seed=21)
    x = np.exp(np.random.default_rng(0).uniform(-3, 3, (5, n)))
    np.testing.assert_allclose(reproduce_integral(f, x), eval_series(f, x), atol=1e-10)


def test_orthonormality_by_quadrature():
    p = SpaceParams(1, 0.4, 2.0)
    for j, k in [(0, 0), (0, 1), (3, -2), (5, 5)]:
        fj = LatticeFunction(p, {(j,): 1.0})
        fk = LatticeFunction(p, {(k,): 1.0})
        val = p.T * math.exp(-0.4 * (j + k) / p.T) * inner_product_quadrature(fj, fk)
        assert abs(val - (j == k)) < 1e-12


def test_lattice_quadrature_matches_direct_node_sum():
    p = SpaceParams(1, 0.3, 2.0)
    f = random_lattice(p, 3, seed=4)
    quad = QuadratureSpec(panel_count=32, refinement_tol=1e-13)
    got = lattice_quadrature(f, [(-1.0, 1.5)], quad)
    nodes, weights = gauss_legendre_panels(-1.0, 1.5, 4096, 16)
    direct = (np.abs(f(np.exp(nodes))) ** 2 * np.exp(2 * 0.3 * nodes)) @ weights
    assert got == pytest.approx(direct, rel=1e-10)
