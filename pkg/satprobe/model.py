# model.py
# -*- coding: utf-8 -*-
"""
Saturable-sample transmission physics.

All formulas are written in the dimensionless pair (kappa, aL):

    kappa = 2 <n_in> / n_s          (input intensity in units of n_s / 2)
    aL    = absorption coefficient * sample length

Physical units (W/cm^2, photons/cm^2/s, nm, cm, s) are converted at the edges
through ``SampleSpec``, ``ProbeSpec`` and the unit helpers at the bottom.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import constants

from .errors import DomainError, InconsistentMeasurementError
from .special_fn import wright_omega

logger = logging.getLogger(__name__)

RealOrArray = Union[float, np.ndarray]

PLANCK = constants.h  # 6.62607015e-34 J s, exact
SPEED_OF_LIGHT = constants.c  # 2.99792458e8 m/s, exact

# n_s used when a sample carries no saturation data: <n_in> is then counted in
# units of n_s / 2, i.e. <n_in> == kappa.
DIMENSIONLESS_N_S = 2.0
# Relative tolerance for reconciling macroscopic and microscopic saturation data.
CONSISTENCY_RTOL = 1e-9
# Squeezed probes count as bright once <n_in> >= BRIGHT_FACTOR * R^2.
BRIGHT_FACTOR = 100.0


class SaturationUnit(str, Enum):
    """Unit tag carried by a saturation intensity."""

    PHOTONS = "photons"  # photons / cm^2 / s, or a plain photon number
    W_PER_CM2 = "W/cm2"


class ProbeKind(str, Enum):
    COHERENT = "coherent"
    FOCK = "fock"
    AMPLITUDE_SQUEEZED = "amplitude_squeezed"


def squeezing_factor(r_db: float) -> float:
    """Output noise relative to shot noise for R dB of amplitude squeezing."""
    if r_db < 0 or math.isnan(r_db):
        raise DomainError(f"squeezing must be >= 0 dB, got {r_db!r}")
    return 10.0 ** (-r_db / 10.0)


def probe_input_variance(kind: ProbeKind, mean_photons: float, squeezing_db: float = 0.0) -> float:
    """Var(n_in) of a probe family carrying <n_in> = ``mean_photons``."""
    kind = ProbeKind(kind)
    if kind is ProbeKind.COHERENT:
        return mean_photons
    if kind is ProbeKind.FOCK:
        return 0.0
    return mean_photons * squeezing_factor(squeezing_db)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    """
    A homogeneous saturable absorber.

    Either give ``absorption_coefficient`` and (optionally) ``n_s`` directly, or
    the microscopic ``sigma`` / ``tau`` / ``n_t``. Microscopic data wins and must
    agree with any macroscopic value to ``CONSISTENCY_RTOL``.

    :param absorption_coefficient: a [cm^-1], >= 0.
    :param length: L [cm], > 0.
    :param n_s: Saturation intensity, unit given by ``n_s_unit``.
    :param n_s_unit: Unit tag of ``n_s``.
    :param sigma: Absorption cross-section [cm^2].
    :param tau: Excited-state lifetime [s].
    :param n_t: Absorber density [cm^-3].
    """

    absorption_coefficient: Optional[float] = None
    length: float = 1.0
    n_s: Optional[float] = None
    n_s_unit: SaturationUnit = SaturationUnit.PHOTONS
    sigma: Optional[float] = None
    tau: Optional[float] = None
    n_t: Optional[float] = None

    def __post_init__(self) -> None:
        if not (self.length > 0 and math.isfinite(self.length)):
            raise DomainError(f"sample length must be positive and finite, got {self.length!r}")

        a = self.absorption_coefficient
        n_s = self.n_s
        unit = SaturationUnit(self.n_s_unit)

        if self.sigma is not None or self.tau is not None or self.n_t is not None:
            if self.sigma is None or not self.sigma > 0:
                raise DomainError("microscopic saturation requires sigma > 0")
            if self.n_t is not None:
                if not self.n_t > 0:
                    raise DomainError("n_t must be positive")
                a_micro = self.n_t * self.sigma
                if a is not None and not _close(a, a_micro):
                    raise DomainError(f"absorption_coefficient {a} disagrees with n_t*sigma = {a_micro}")
                a = a_micro
            if self.tau is not None:
                if not self.tau > 0:
                    raise DomainError("tau must be positive")
                n_s_micro = 1.0 / (self.sigma * self.tau)
                if n_s is not None:
                    if unit is not SaturationUnit.PHOTONS:
                        raise DomainError("n_s in W/cm2 cannot be reconciled with sigma/tau; give photon units")
                    if not _close(n_s, n_s_micro):
                        raise DomainError(f"n_s {n_s} disagrees with 1/(sigma*tau) = {n_s_micro}")
                n_s = n_s_micro
                unit = SaturationUnit.PHOTONS

        if a is None:
            raise DomainError("absorption_coefficient (or n_t with sigma) is required")
        if not a >= 0:
            raise DomainError(f"absorption_coefficient must be >= 0, got {a!r}")
        if n_s is not None and not n_s > 0:
            raise DomainError(f"n_s must be positive, got {n_s!r}")
        if not math.isfinite(a * self.length):
            raise DomainError("a*L must be finite")

        object.__setattr__(self, "absorption_coefficient", float(a))
        object.__setattr__(self, "n_s", None if n_s is None else float(n_s))
        object.__setattr__(self, "n_s_unit", unit)

    @property
    def a_l(self) -> float:
        """Optical depth a*L."""
        return self.absorption_coefficient * self.length

    @property
    def photon_scale(self) -> float:
        """<n_in> per unit kappa: n_s/2 for photon-unit samples, 1 otherwise."""
        if self.n_s is not None and self.n_s_unit is SaturationUnit.PHOTONS:
            return self.n_s / 2.0
        return 1.0

    def with_length(self, length: float) -> "SampleSpec":
        return replace(self, length=length)

    def with_absorption(self, absorption_coefficient: float) -> "SampleSpec":
        return replace(self, absorption_coefficient=absorption_coefficient, n_t=None)


@dataclass(frozen=True)
class ProbeSpec:
    """
    Single-mode probe state.

    :param kind: State family.
    :param mean_photons: <n_in> > 0, in the same units as ``n_s``.
    :param n_s: Saturation intensity used to derive kappa.
    :param squeezing_db: R >= 0, amplitude-squeezed probes only.
    :param wavelength_nm: Optional, for unit conversion.
    """

    kind: ProbeKind
    mean_photons: float
    n_s: float = DIMENSIONLESS_N_S
    squeezing_db: float = 0.0
    wavelength_nm: Optional[float] = None
    bright_regime: bool = field(init=False)

    def __post_init__(self) -> None:
        kind = ProbeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not self.mean_photons > 0:
            raise DomainError(f"mean_photons must be positive, got {self.mean_photons!r}")
        if not self.n_s > 0:
            raise DomainError(f"n_s must be positive, got {self.n_s!r}")
        if self.squeezing_db < 0:
            raise DomainError(f"squeezing must be >= 0 dB, got {self.squeezing_db!r}")
        if kind is not ProbeKind.AMPLITUDE_SQUEEZED and self.squeezing_db != 0:
            raise DomainError("squeezing_db is only meaningful for amplitude-squeezed probes")
        if self.wavelength_nm is not None and not self.wavelength_nm > 0:
            raise DomainError("wavelength_nm must be positive")

        bright = self.mean_photons >= BRIGHT_FACTOR * self.squeezing_db**2
        object.__setattr__(self, "bright_regime", bool(bright))
        if kind is ProbeKind.AMPLITUDE_SQUEEZED and not bright:
            logger.warning(
                "Squeezed probe with <n_in>=%g is outside the bright regime (R=%g dB)",
                self.mean_photons,
                self.squeezing_db,
            )

    @classmethod
    def from_kappa(
        cls,
        kind: ProbeKind,
        kappa: float,
        n_s: float = DIMENSIONLESS_N_S,
        **kwargs,
    ) -> "ProbeSpec":
        """Build a probe from its scaled intensity; <n_in> = kappa * n_s / 2."""
        if not kappa > 0:
            raise DomainError(f"kappa must be positive, got {kappa!r}")
        return cls(kind=kind, mean_photons=kappa * n_s / 2.0, n_s=n_s, **kwargs)

    @property
    def kappa(self) -> float:
        return 2.0 * self.mean_photons / self.n_s

    @property
    def input_variance(self) -> float:
        """Var(n_in) of the probe family."""
        return probe_input_variance(self.kind, self.mean_photons, self.squeezing_db)


def _close(x: float, y: float, rtol: float = CONSISTENCY_RTOL) -> bool:
    return abs(x - y) <= rtol * max(abs(x), abs(y))


# ---------------------------------------------------------------------------
# Forward model
# ---------------------------------------------------------------------------

def _check_kappa_al(kappa: np.ndarray, a_l: np.ndarray) -> None:
    if np.isnan(kappa).any() or np.isnan(a_l).any():
        raise DomainError("transmission inputs must not be NaN")
    if (kappa <= 0).any():
        raise DomainError("kappa must be positive")
    if (a_l < 0).any():
        raise DomainError("aL must be >= 0")
    if not np.isfinite(kappa).all():
        raise DomainError("kappa must be finite")


def transmission(kappa: ArrayLike, a_l: ArrayLike) -> RealOrArray:
    """
    Steady-state transmission of a saturable sample.

    eta = W(ln kappa + kappa - aL) / kappa, with W the Wright Omega function.

    :param kappa: Scaled input intensity, > 0.
    :param a_l: Optical depth, >= 0.
    :return: eta in (0, 1]; exactly 1 where aL == 0.
    """
    k = np.asarray(kappa, dtype=float)
    x = np.asarray(a_l, dtype=float)
    _check_kappa_al(k, x)

    omega = np.asarray(wright_omega(np.log(k) + k - x), dtype=float)
    eta = np.minimum(omega / k, 1.0)
    eta = np.where(x == 0.0, 1.0, eta)
    if eta.ndim == 0:
        return float(eta)
    return eta


def transmission_derivative_a(kappa: ArrayLike, a_l: ArrayLike, length: ArrayLike) -> RealOrArray:
    """
    d eta / d a = -L eta / (1 + eta kappa).

    :param kappa: Scaled input intensity, > 0.
    :param a_l: Optical depth, >= 0.
    :param length: Sample length L [cm].
    """
    k = np.asarray(kappa, dtype=float)
    eta = np.asarray(transmission(k, a_l), dtype=float)
    result = -np.asarray(length, dtype=float) * eta / (1.0 + eta * k)
    return float(result) if result.ndim == 0 else result


def transmission_derivative_length(kappa: ArrayLike, a_l: ArrayLike, a: ArrayLike) -> RealOrArray:
    """d eta / d L = -a eta / (1 + eta kappa); a and L enter only through aL."""
    return transmission_derivative_a(kappa, a_l, a)


def intensity_profile(
    kappa_in: float,
    a: float,
    z_grid: Sequence[float],
    length: Optional[float] = None,
) -> np.ndarray:
    """
    Relative intensity N(z) / N(0) along the sample.

    :param kappa_in: Scaled intensity at the input face.
    :param a: Absorption coefficient [cm^-1].
    :param z_grid: Ascending positions [cm] inside [0, length].
    :param length: Sample length; defaults to the last grid point.
    :raises DomainError: If the grid is not ascending or leaves [0, length].
    """
    z = np.asarray(z_grid, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise DomainError("z_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(z) < 0):
        raise DomainError("z_grid must be ascending")
    upper = float(z[-1]) if length is None else float(length)
    if z[0] < 0 or z[-1] > upper:
        raise DomainError(f"z_grid must lie within [0, {upper}]")
    if a < 0:
        raise DomainError("absorption coefficient must be >= 0")
    return np.asarray(transmission(np.full_like(z, kappa_in), a * z), dtype=float)


def intensity_gradient(n: ArrayLike, a: float, n_s: float) -> RealOrArray:
    """
    dN/dz = -a N / (1 + 2 N / n_s), the law ``intensity_profile`` integrates.

    :param n: Local intensity N(z).
    :param a: Absorption coefficient.
    :param n_s: Saturation intensity, same unit as ``n``.
    """
    n_arr = np.asarray(n, dtype=float)
    result = -a * n_arr / (1.0 + 2.0 * n_arr / n_s)
    return float(result) if result.ndim == 0 else result


def steady_state_populations(kappa_local: ArrayLike) -> Tuple[RealOrArray, RealOrArray]:
    """
    Ground and excited fractions n0/n_t, n1/n_t at local scaled intensity.

    With kappa_z = 2 N(z) / n_s the rate equations give
    n0 = (kappa_z/2 + 1) / (kappa_z + 1) and n1 = (kappa_z/2) / (kappa_z + 1).
    """
    k = np.asarray(kappa_local, dtype=float)
    if (k < 0).any():
        raise DomainError("local intensity must be >= 0")
    ground = (0.5 * k + 1.0) / (k + 1.0)
    excited = 0.5 * k / (k + 1.0)
    if k.ndim == 0:
        return float(ground), float(excited)
    return ground, excited


# ---------------------------------------------------------------------------
# Inverse problem
# ---------------------------------------------------------------------------

def infer_absorption(eta_measured: float, kappa: float, length: float) -> float:
    """
    Closed-form absorption coefficient from a measured transmission.

    aL = ln(kappa) + kappa - eta*kappa - ln(eta*kappa) = -ln(eta) + kappa (1 - eta)

    :param eta_measured: Measured transmission in (0, 1].
    :param kappa: Scaled input intensity used for the measurement.
    :param length: Sample length [cm].
    :raises InconsistentMeasurementError: If the result would be negative.
    """
    if not eta_measured > 0:
        raise DomainError(f"measured transmission must be positive, got {eta_measured!r}")
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa!r}")
    if not length > 0:
        raise DomainError(f"length must be positive, got {length!r}")

    a_l = -math.log(eta_measured) + kappa * (1.0 - eta_measured)
    if a_l < 0:
        raise InconsistentMeasurementError(
            f"eta={eta_measured} exceeds the lossless maximum for kappa={kappa} (aL={a_l:.3e})"
        )
    return a_l / length


# ---------------------------------------------------------------------------
# Unit conversion
# ---------------------------------------------------------------------------

def photon_energy_j(wavelength_nm: float) -> float:
    """Photon energy h c / lambda [J]."""
    if not wavelength_nm > 0:
        raise DomainError("wavelength must be positive")
    return PLANCK * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)


def saturation_flux(sigma: float, tau: float) -> float:
    """n_s = 1 / (sigma tau) [photons / cm^2 / s]."""
    if not (sigma > 0 and tau > 0):
        raise DomainError("sigma and tau must be positive")
    return 1.0 / (sigma * tau)


def saturation_intensity_w_cm2(sigma: float, tau: float, wavelength_nm: float) -> float:
    """I_sat = (h c / lambda) / (sigma tau) [W / cm^2]."""
    return photon_energy_j(wavelength_nm) * saturation_flux(sigma, tau)


def _convert(value: float, src: SaturationUnit, dst: SaturationUnit, wavelength_nm: Optional[float]) -> float:
    src, dst = SaturationUnit(src), SaturationUnit(dst)
    if src is dst:
        return value
    if wavelength_nm is None:
        raise DomainError(f"converting {src.value} to {dst.value} needs a wavelength")
    energy = photon_energy_j(wavelength_nm)
    if src is SaturationUnit.W_PER_CM2:
        return value / energy
    return value * energy


def intensity_to_kappa(
    intensity: float,
    n_s: float,
    n_s_unit: SaturationUnit = SaturationUnit.W_PER_CM2,
    wavelength_nm: Optional[float] = None,
    intensity_unit: SaturationUnit = SaturationUnit.W_PER_CM2,
) -> float:
    """
    kappa = 2 I / I_sat with both intensities in matched units.

    :param intensity: Probe intensity.
    :param n_s: Saturation intensity.
    :param n_s_unit: Unit of ``n_s``.
    :param wavelength_nm: Needed only when the two units differ.
    :param intensity_unit: Unit of ``intensity``.
    """
    if not (intensity > 0 and n_s > 0):
        raise DomainError("intensity and n_s must be positive")
    matched = _convert(intensity, intensity_unit, n_s_unit, wavelength_nm)
    return 2.0 * matched / n_s


def kappa_to_intensity(
    kappa: float,
    n_s: float,
    n_s_unit: SaturationUnit = SaturationUnit.W_PER_CM2,
    wavelength_nm: Optional[float] = None,
    intensity_unit: SaturationUnit = SaturationUnit.W_PER_CM2,
) -> float:
    """Inverse of ``intensity_to_kappa``."""
    if not (kappa > 0 and n_s > 0):
        raise DomainError("kappa and n_s must be positive")
    return _convert(kappa * n_s / 2.0, n_s_unit, intensity_unit, wavelength_nm)
