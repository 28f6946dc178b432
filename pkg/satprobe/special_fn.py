# special_fn.py
# -*- coding: utf-8 -*-
"""
Real-line Wright Omega and principal-branch Lambert W.

``wright_omega(x)`` solves w + ln(w) = x for w > 0. Every transmission formula
in satprobe goes through it, so it is vectorised over numpy arrays and checked
against its own residual rather than against iterate deltas.
"""

import logging
from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import lambertw

from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

RealOrArray = Union[float, np.ndarray]

# Below this argument w == exp(x) to double precision (w*(1 - w) with w < 1e-304).
UNDERFLOW_X = -700.0
# Series around x = 1 is used on [-2, 2]; outside, the exp / log asymptotes.
SERIES_LO = -2.0
SERIES_HI = 2.0

RESIDUAL_RTOL = 1e-12
MAX_HALLEY_ITER = 50

INV_E = float(np.exp(-1.0))


def _as_output(values: np.ndarray, scalar: bool) -> RealOrArray:
    return float(values) if scalar else values


# ---------------------------------------------------------------------------
# Wright Omega
# ---------------------------------------------------------------------------

def _initial_guess(x: np.ndarray) -> np.ndarray:
    """Regime-wise starting point for the Halley iteration."""
    guess = np.empty_like(x)

    low = x < SERIES_LO
    high = x > SERIES_HI
    mid = ~(low | high)

    guess[low] = np.exp(x[low])

    t = x[mid] - 1.0
    guess[mid] = (
        1.0
        + t / 2.0
        + t**2 / 16.0
        - t**3 / 192.0
        - t**4 / 3072.0
        + 13.0 * t**5 / 61440.0
    )

    xh = x[high]
    log_xh = np.log(xh)
    guess[high] = xh - log_xh + log_xh / xh
    return guess


def wright_omega(x: ArrayLike) -> RealOrArray:
    """
    Wright Omega function on the real line.

    :param x: Real scalar or array. NaN is rejected.
    :return: w > 0 with w + ln(w) = x (same shape as ``x``).
    :raises DomainError: If any element is NaN.
    """
    x_arr = np.array(x, dtype=float, copy=True)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)

    if np.isnan(x_arr).any():
        raise DomainError("wright_omega is undefined for NaN input")

    omega = np.empty_like(x_arr)

    pos_inf = np.isposinf(x_arr)
    tiny = (x_arr < UNDERFLOW_X) & ~pos_inf
    work = ~(pos_inf | tiny)

    omega[pos_inf] = np.inf
    with np.errstate(under="ignore"):
        omega[tiny] = np.exp(x_arr[tiny])

    if work.any():
        omega[work] = _halley(x_arr[work])

    return _as_output(omega if not scalar else omega[0], scalar)


def _halley_step(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    One Halley update on f(w) = w + ln(w) - x.

    The Newton step is d = f * w / (1 + w); Halley divides it by
    1 + d / (2 w (1 + w)).
    """
    residual = w + np.log(w) - x
    newton = residual * w / (1.0 + w)
    updated = w - newton / (1.0 + newton / (2.0 * w * (1.0 + w)))
    # keep the iterate on the positive half-line
    return np.where(updated > 0.0, updated, 0.5 * w)


def _halley(x: np.ndarray) -> np.ndarray:
    """
    Iterate Halley until the residual is within tolerance, then take one more
    step so the result sits at the conditioning limit of the input.
    """
    w = _initial_guess(x)
    tol = RESIDUAL_RTOL * np.maximum(1.0, np.abs(x))

    for _ in range(MAX_HALLEY_ITER):
        residual = w + np.log(w) - x
        todo = np.abs(residual) > tol
        if not todo.any():
            return _halley_step(w, x)
        w[todo] = _halley_step(w[todo], x[todo])

    residual = w + np.log(w) - x
    worst = int(np.argmax(np.abs(residual) / tol))
    if np.abs(residual[worst]) > 100.0 * tol[worst]:
        raise ConvergenceError(
            "wright_omega did not converge",
            {"x": float(x[worst]), "residual": float(residual[worst])},
        )
    logger.debug("wright_omega stopped at residual %.3e for x=%.6g", residual[worst], x[worst])
    return w


def wright_omega_derivative(x: ArrayLike) -> RealOrArray:
    """
    d/dx of the Wright Omega function, w / (1 + w).

    :param x: Real scalar or array.
    :return: Values in (0, 1).
    """
    omega = np.asarray(wright_omega(x), dtype=float)
    result = omega / (1.0 + omega)
    # w -> inf gives inf/inf
    result = np.where(np.isposinf(omega), 1.0, result)
    return _as_output(result, np.ndim(x) == 0)


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------

def lambert_w0(x: ArrayLike) -> RealOrArray:
    """
    Principal branch of the Lambert W function for real x >= -1/e.

    :param x: Real scalar or array.
    :return: W with W * exp(W) = x.
    :raises DomainError: If any element is below -1/e or NaN.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.isnan(x_arr).any():
        raise DomainError("lambert_w0 is undefined for NaN input")
    if (x_arr < -INV_E).any():
        raise DomainError(f"lambert_w0 requires x >= -1/e, got min {float(x_arr.min())!r}")

    values = np.real(lambertw(x_arr, 0))
    # the branch point comes back as -1 +/- rounding noise in the imaginary part
    values = np.where(x_arr == -INV_E, -1.0, values)
    return _as_output(values, x_arr.ndim == 0)
