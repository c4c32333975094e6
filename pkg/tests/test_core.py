import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mellin_sampler.core import (
    LatticeFunction,
    SpaceParams,
    eval_series,
    lattice_indices,
    lattice_points,
    lin_c,
    sinc,
    sinc_nd,
)
from mellin_sampler.errors import DomainError, LatticeSizeError, ParameterError

from conftest import random_lattice


def test_space_params_broadcasts_scalar_c():
    p = SpaceParams(3, 0.5, 2)
    assert p.c == (0.5, 0.5, 0.5)
    assert p.T == 2.0


@pytest.mark.parametrize("kw", [dict(n=0, c=0.0, T=1.0), dict(n=1, c=0.0, T=0.0),
                                dict(n=2, c=(1.0, 2.0, 3.0), T=1.0),
                                dict(n=1, c=float("nan"), T=1.0)])
def test_space_params_rejects_bad_input(kw):
    with pytest.raises(ParameterError):
        SpaceParams(**kw)


def test_sinc_values_and_guard():
    assert sinc(0.0) == 1.0
    assert abs(sinc(1e-9) - 1.0) < 1e-16
    np.testing.assert_allclose(sinc(np.array([1.0, 2.0, -3.0])), 0.0, atol=1e-16)
    assert sinc(0.5) == pytest.approx(2 / math.pi, rel=1e-15)
    x = np.linspace(-5, 5, 101) + 1e-3
    np.testing.assert_allclose(sinc(x), np.sinc(x), rtol=1e-14, atol=1e-16)


def test_sinc_nd_product():
    assert sinc_nd(np.array([0.5, 0.5])) == pytest.approx((2 / math.pi) ** 2)
    out = sinc_nd(np.array([[0.0, 0.0], [1.0, 0.0]]))
    np.testing.assert_allclose(out, [1.0, 0.0], atol=1e-16)


def test_lin_c_at_one_and_nodes():
    assert lin_c(0.3, 1.0) == 1.0
    assert abs(lin_c(0.0, math.e)) < 1e-16
    x = 2.0
    assert lin_c(0.5, x) == pytest.approx(x**-0.5 * np.sinc(math.log(x)), rel=1e-14)
    with pytest.raises(DomainError):
        lin_c(0.0, -1.0)


def test_lattice_indices_order_and_size():
    keys = lattice_indices(2, 2)
    assert keys.shape == (9, 2)
    assert keys[0].tolist() == [-1, -1] and keys[-1].tolist() == [1, 1]
    assert lattice_indices(1, 0).tolist() == [[0]]
    assert lattice_indices(1, 3).ravel().tolist() == [-1, 0, 1]
    with pytest.raises(LatticeSizeError):
        lattice_indices(5, 100, cap=1000)
    pts = lattice_points(SpaceParams(1, 0.0, 2.0), 2)
    np.testing.assert_allclose(pts.ravel(), np.exp([-0.5, 0.0, 0.5]))


def test_lattice_function_sorted_and_immutable():
    p = SpaceParams(2, 0.0, 1.0)
    f = LatticeFunction(p, {(1, 0): 2.0, (-1, 3): 1.0, (0, 0): 1j})
    assert f.keys.tolist() == [[-1, 3], [0, 0], [1, 0]]
    with pytest.raises(AttributeError):
        f.values = None
    with pytest.raises(ValueError):
        f.values[0] = 3.0
    with pytest.raises(ParameterError):
        LatticeFunction(p, keys=[[0, 0], [0, 0]], values=[1.0, 2.0])
    with pytest.raises(ParameterError):
        LatticeFunction(p, keys=[[0, 0]], values=[np.inf])


def test_zero_function():
    p = SpaceParams(2, (0.1, 0.2), 1.5)
    z = LatticeFunction.zero(p)
    assert z.is_zero and z.support_radius == 0
    assert eval_series(z, np.array([[1.0, 2.0], [3.0, 4.0]])).tolist() == [0, 0]


def test_single_coefficient_is_lin_kernel():
    p = SpaceParams(1, 0.4, 1.0)
    f = LatticeFunction(p, {(0,): 1.0})
    x = np.array([0.3, 1.0, 2.5, 7.0])
    np.testing.assert_allclose(eval_series(f, x), lin_c(0.4, x), rtol=1e-14)


@pytest.mark.parametrize("T", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("n", [1, 2])
def test_interpolation_at_lattice_nodes(T, n):
    p = SpaceParams(n, 0.3 if n == 1 else (0.3, -0.7), T)
    f = random_lattice(p, 3, seed=n)
    np.testing.assert_allclose(f(np.exp(f.keys / T)), f.values, atol=1e-13)


def test_window_restricts_terms():
    p = SpaceParams(1, 0.0, 1.0)
    f = LatticeFunction(p, {(0,): 1.0, (2,): 5.0})
    x = math.exp(2.0)
    assert eval_series(f, x, window=[(0,)]) == pytest.approx(0.0, abs=1e-15)
    assert eval_series(f, x, window=[2]) == pytest.approx(5.0)


def test_on_log_axis_matches_series():
    p = SpaceParams(2, (0.5, -0.25), 2.0)
    f = random_lattice(p, 2, seed=4)
    u = np.random.default_rng(0).uniform(-2, 2, (20, 2))
    weighted = f(np.exp(u)) * np.exp(u @ p.c_array)
    np.testing.assert_allclose(f.on_log_axis(u), weighted, rtol=1e-12, atol=1e-14)


def test_point_shape_handling():
    p2 = SpaceParams(2, 0.0, 1.0)
    f = LatticeFunction(p2, {(0, 0): 1.0})
    assert isinstance(f(np.array([1.0, 1.0])), complex)
    with pytest.raises(DomainError):
        f(np.array([1.0, 1.0, 1.0]))
    with pytest.raises(DomainError):
        f(np.array([[1.0, 0.0]]))
    with pytest.raises(DomainError):
        f(2.0)


def test_json_round_trip_and_errors():
    p = SpaceParams(2, (0.1, 0.2), 1.5)
    f = random_lattice(p, 2, seed=9)
    g = LatticeFunction.from_json(f.to_json())
    assert g == f and hash(g) == hash(f)
    data = json.loads(f.to_json())
    assert set(data) == {"n", "c", "T", "coeffs"}
    for bad in ['{"n": 1}', "not json", '{"n": 1, "c": [0], "T": 1, "coeffs": [{"k": [0]}]}']:
        with pytest.raises(ParameterError):
            LatticeFunction.from_json(bad)
    z = LatticeFunction.zero(p)
    assert LatticeFunction.from_json(z.to_json()) == z


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=9),
       st.floats(0.2, 5.0), st.floats(-2.0, 2.0))
def test_interpolation_property(vals, T, c):
    p = SpaceParams(1, c, T)
    keys = np.arange(len(vals)) - len(vals) // 2
    f = LatticeFunction(p, keys=keys, values=vals)
    scale = max(1.0, max(abs(v) for v in vals))
    assert np.max(np.abs(f(np.exp(f.keys / T)) - f.values)) <= 1e-12 * scale


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3.0, 3.0), st.floats(0.3, 4.0))
def test_series_is_linear(seed, lam, T):
    p = SpaceParams(1, 0.2, T)
    f = random_lattice(p, 2, seed)
    g = random_lattice(p, 2, seed + 1)
    h = f.with_values(f.values + lam * g.values)
    x = np.exp(np.linspace(-3, 3, 17))
    np.testing.assert_allclose(h(x), f(x) + lam * g(x), rtol=1e-10, atol=1e-10)


def test_sinc_exact_zero_at_large_integers():
    k = np.arange(1.0, 2000.0)
    assert np.all(sinc(k) == 0.0) and np.all(sinc(-k) == 0.0)


def test_node_evaluation_with_wide_dynamic_range():
    # weighted amplitudes span e^{+-26}; leakage through rounded nodes would show up
    p = SpaceParams(1, 0.98, 1.0)
    f = random_lattice(p, 13, seed=51)
    np.testing.assert_allclose(f(np.exp(f.keys / p.T)), f.values, atol=1e-13)


def test_pointwise_bound_scales_with_sqrt_T():
    from mellin_sampler.synthesis import norm_parseval

    # one coefficient: f(1) = 1 while ||f|| = T^{-1/2}
    for T in (0.25, 1.0, 4.0):
        f = LatticeFunction(SpaceParams(1, 0.0, T), {(0,): 1.0})
        assert abs(f(1.0)) == pytest.approx(math.sqrt(T) * norm_parseval(f))
    f = LatticeFunction(SpaceParams(1, 0.0, 4.0), {(0,): 1.0})
    assert abs(f(1.0)) > norm_parseval(f)  # a T-free unit bound fails for T > 1
