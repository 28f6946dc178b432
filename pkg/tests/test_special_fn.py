import math

import numpy as np
import pytest

from satprobe.errors import DomainError
from satprobe.special_fn import lambert_w0, wright_omega, wright_omega_derivative

OMEGA_CONSTANT = 0.5671432904097838


def test_omega_constant():
    assert wright_omega(0.0) == pytest.approx(OMEGA_CONSTANT, rel=1e-14)


def test_omega_at_one_is_one():
    assert wright_omega(1.0) == pytest.approx(1.0, abs=1e-15)


def test_scalar_in_float_out():
    assert isinstance(wright_omega(0.3), float)
    assert isinstance(wright_omega_derivative(0.3), float)


def test_array_shape_preserved():
    x = np.linspace(-3, 3, 12).reshape(3, 4)
    assert wright_omega(x).shape == (3, 4)


def test_residual_on_wide_random_sample(rng):
    x = rng.uniform(-700.0, 700.0, size=1_000_000)
    w = wright_omega(x)
    assert np.all(w > 0)
    residual = np.abs(w + np.log(w) - x)
    assert np.all(residual <= 1e-10 * np.maximum(1.0, np.abs(x)))


@pytest.mark.parametrize("x", [-2.0, -1.999999, 2.0, 2.000001, -50.0, 50.0, 1e5])
def test_regime_boundaries(x):
    w = wright_omega(x)
    assert abs(w + math.log(w) - x) <= 1e-12 * max(1.0, abs(x)) * 10


def test_underflow_region_is_exp():
    assert wright_omega(-800.0) == math.exp(-800.0)
    assert wright_omega(-1000.0) == 0.0


def test_positive_infinity():
    assert wright_omega(math.inf) == math.inf


def test_nan_rejected():
    with pytest.raises(DomainError):
        wright_omega(float("nan"))


def test_inverse_of_w_plus_log_w():
    w = np.logspace(-8, 8, 200)
    np.testing.assert_allclose(wright_omega(w + np.log(w)), w, rtol=1e-10)


def test_monotone_increasing():
    x = np.linspace(-30, 30, 5001)
    assert np.all(np.diff(wright_omega(x)) > 0)


def test_derivative_matches_finite_difference():
    x = np.array([-5.0, -1.0, 0.0, 0.7, 3.0, 20.0])
    h = 1e-4
    numeric = (wright_omega(x + h) - wright_omega(x - h)) / (2 * h)
    np.testing.assert_allclose(wright_omega_derivative(x), numeric, rtol=1e-6)


def test_agrees_with_lambert_w_of_exp():
    x = np.linspace(-10, 10, 201)
    np.testing.assert_allclose(wright_omega(x), lambert_w0(np.exp(x)), rtol=1e-10)


def test_lambert_branch_point():
    assert lambert_w0(-math.exp(-1.0)) == -1.0


def test_lambert_known_values():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, rel=1e-14)


def test_lambert_below_branch_point_rejected():
    with pytest.raises(DomainError):
        lambert_w0(-0.5)


def test_polished_to_rounding_level(rng):
    kappa = rng.uniform(1e-3, 100.0, 500)
    np.testing.assert_allclose(wright_omega(np.log(kappa) + kappa), kappa, rtol=1e-14)
