# fisher.py
# -*- coding: utf-8 -*-
"""
Precision of absorption estimates from transmitted photon counting.

Every function returns the Fisher information F(a) on the absorption
coefficient for a single probe shot of <n_in> photons. Where a formula blows
up (a lossless sample, zero output noise) a ``Divergent`` value is returned
instead of a float so callers have to handle it explicitly.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, NamedTuple, Optional, Union

from .errors import DomainError
from .model import ProbeKind, ProbeSpec, SampleSpec, probe_input_variance, squeezing_factor, transmission

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Divergent:
    """Tagged infinite precision, e.g. the QFI bound of a lossless sample."""

    reason: str

    def __float__(self) -> float:
        return math.inf

    def __str__(self) -> str:
        return f"divergent ({self.reason})"


Precision = Union[float, Divergent]


def is_divergent(value: Any) -> bool:
    return isinstance(value, Divergent)


def as_float(value: Precision) -> float:
    """Collapse a precision value to a float; divergences become inf."""
    return float(value)


def to_db(ratio: Precision) -> float:
    """10 log10 of a power-like ratio."""
    value = as_float(ratio)
    if value <= 0:
        raise DomainError(f"cannot express non-positive ratio {value!r} in dB")
    return 10.0 * math.log10(value)


class DetectionModel(str, Enum):
    """
    Detector-loss model for ``fisher_detected``.

    PRINTED uses the slope L eta gamma / (gamma + eta kappa).
    FACTORED uses L eta gamma / (gamma (1 + eta kappa)); gamma cancels from the
    slope, so F falls as 1/gamma for a coherent probe.
    ERROR_PROPAGATION uses d(eta gamma)/da = gamma * d eta/da.
    """

    PRINTED = "printed"
    FACTORED = "factored"
    ERROR_PROPAGATION = "error_propagation"


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

def output_variance_linear_loss(eta: float, n_in: float, var_in: float) -> float:
    """
    Output photon-number variance after a linear loss of transmission eta.

    :return: eta^2 var_in + eta (1 - eta) n_in
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmission must lie in [0, 1], got {eta!r}")
    if n_in < 0 or var_in < 0:
        raise DomainError("n_in and var_in must be >= 0")
    return eta * eta * var_in + eta * (1.0 - eta) * n_in


def fisher_from_variance(eta: float, deta_da: float, n_in: float, var_out: float) -> Precision:
    """
    Error-propagation Fisher information (d eta/da)^2 n_in^2 / Var(n_out).

    :param eta: Transmission, checked for range only.
    :param deta_da: Slope of the transmission with respect to a.
    :param n_in: Mean input photon number.
    :param var_out: Output photon-number variance.
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmission must lie in [0, 1], got {eta!r}")
    if var_out < 0:
        raise DomainError("variance must be >= 0")
    if deta_da == 0:
        return 0.0
    if var_out == 0:
        return Divergent("zero output variance")
    return deta_da * deta_da * n_in * n_in / var_out


class _Operating(NamedTuple):
    eta: float
    slope: float  # |d eta / da| = L eta / (1 + eta kappa)
    n_in: float


def _operating_point(sample: SampleSpec, kappa: float) -> _Operating:
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa!r}")
    eta = transmission(kappa, sample.a_l)
    slope = sample.length * eta / (1.0 + eta * kappa)
    return _Operating(eta, slope, kappa * sample.photon_scale)


# ---------------------------------------------------------------------------
# Lossless detection
# ---------------------------------------------------------------------------

def fisher_coherent(sample: SampleSpec, kappa: float) -> float:
    """
    Coherent-probe FI, (L eta / (1 + eta kappa))^2 n_in / eta.

    In dimensionless mode (no photon-unit n_s on the sample) the value is
    per n_s/2 photons.
    """
    op = _operating_point(sample, kappa)
    # slope^2 / eta written without the division so eta -> 0 stays finite
    return sample.length * op.slope * op.n_in / (1.0 + op.eta * kappa)


def qfi_bound(sample: SampleSpec, kappa: float) -> Precision:
    """Upper bound on the QFI over all probes of the same mean photon number."""
    op = _operating_point(sample, kappa)
    if op.eta >= 1.0:
        logger.warning("QFI bound diverges for a lossless sample (aL=%g)", sample.a_l)
        return Divergent("eta == 1: lossless sample")
    return fisher_coherent(sample, kappa) / (1.0 - op.eta)


def fisher_fock(sample: SampleSpec, kappa: float) -> Precision:
    """
    Fock-state FI through the binomial output variance. Saturates ``qfi_bound``.
    """
    op = _operating_point(sample, kappa)
    var_out = output_variance_linear_loss(op.eta, op.n_in, probe_input_variance(ProbeKind.FOCK, op.n_in))
    return fisher_from_variance(op.eta, -op.slope, op.n_in, var_out)


def fisher_squeezed(sample: SampleSpec, kappa: float, r_db: float) -> Precision:
    """
    Bright amplitude-squeezed FI with R dB of squeezing below shot noise.

    R = 0 reproduces ``fisher_coherent``; R = inf reproduces ``qfi_bound``.
    """
    op = _operating_point(sample, kappa)
    var_in = probe_input_variance(ProbeKind.AMPLITUDE_SQUEEZED, op.n_in, r_db)
    var_out = output_variance_linear_loss(op.eta, op.n_in, var_in)
    return fisher_from_variance(op.eta, -op.slope, op.n_in, var_out)


def squeezed_fraction_of_limit(eta: float, r_db: float) -> float:
    """F_s / Q = (1 - eta) / (eta 10^(-R/10) + 1 - eta)."""
    if not 0.0 < eta <= 1.0:
        raise DomainError(f"transmission must lie in (0, 1], got {eta!r}")
    s = squeezing_factor(r_db)
    return (1.0 - eta) / (eta * s + 1.0 - eta)


def quantum_advantage(sample: SampleSpec, kappa: float) -> Precision:
    """Lambda = Q / F_c = 1 / (1 - eta)."""
    eta = _operating_point(sample, kappa).eta
    if eta >= 1.0:
        return Divergent("eta == 1: lossless sample")
    return 1.0 / (1.0 - eta)


class WeakAdvantage(NamedTuple):
    value: Precision
    valid: bool


def quantum_advantage_weak(kappa: float, a_l: float, length: float) -> WeakAdvantage:
    """
    Weak-absorption approximation Lambda ~ (1 + kappa) / aL.

    The approximation holds for kappa >= 1 and a <= (1 + kappa) / L.
    """
    if not (kappa > 0 and length > 0 and a_l >= 0):
        raise DomainError("kappa and length must be positive, aL >= 0")
    valid = kappa >= 1.0 and a_l / length <= (1.0 + kappa) / length
    if a_l == 0:
        return WeakAdvantage(Divergent("aL == 0"), valid)
    return WeakAdvantage((1.0 + kappa) / a_l, valid)


def fisher_for_probe(sample: SampleSpec, probe: ProbeSpec) -> Precision:
    """Lossless FI for the probe's state family at the probe's kappa."""
    if probe.kind is ProbeKind.COHERENT:
        return fisher_coherent(sample, probe.kappa)
    if probe.kind is ProbeKind.FOCK:
        return fisher_fock(sample, probe.kappa)
    return fisher_squeezed(sample, probe.kappa, probe.squeezing_db)


# ---------------------------------------------------------------------------
# Lossy detection
# ---------------------------------------------------------------------------

def fisher_detected(
    sample: SampleSpec,
    kappa: float,
    probe_kind: ProbeKind,
    gamma: float,
    squeezing_db: float = 0.0,
    model: DetectionModel = DetectionModel.PRINTED,
) -> Precision:
    """
    FI on the measured transmission eta_m = gamma * eta behind a detector of
    efficiency gamma.

    :param sample: Sample under test.
    :param kappa: Scaled input intensity.
    :param probe_kind: Probe state family.
    :param gamma: Detector efficiency in (0, 1].
    :param squeezing_db: R for amplitude-squeezed probes.
    :param model: Slope model, see ``DetectionModel``.
    """
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"detector efficiency must lie in (0, 1], got {gamma!r}")
    op = _operating_point(sample, kappa)
    eta_m = op.eta * gamma
    var_out = output_variance_linear_loss(eta_m, op.n_in, probe_input_variance(probe_kind, op.n_in, squeezing_db))

    numerator = sample.length * op.eta * gamma
    model = DetectionModel(model)
    if model is DetectionModel.PRINTED:
        slope = numerator / (gamma + op.eta * kappa)
    elif model is DetectionModel.FACTORED:
        slope = numerator / (gamma * (1.0 + op.eta * kappa))
    else:
        slope = numerator / (1.0 + op.eta * kappa)
    return fisher_from_variance(eta_m, -slope, op.n_in, var_out)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrecisionReport:
    """
    Precision summary of one probe on one sample.

    ``within_qcrb`` is False when a detector model pushes F above the lossless
    bound: PRINTED at small kappa with gamma < 1, FACTORED once gamma < 1 - eta.
    """

    eta: float
    fi_per_shot: Precision
    qfi_bound: Precision
    advantage: Precision
    probe: ProbeSpec
    sample: SampleSpec
    detector_efficiency: float = 1.0
    fi_coherent: Optional[float] = None

    @property
    def fi_per_photon(self) -> float:
        return as_float(self.fi_per_shot) / self.probe.mean_photons

    @property
    def fi_vs_limit_db(self) -> float:
        """dB of F relative to Q; 0 for a probe that saturates the bound."""
        if is_divergent(self.qfi_bound):
            return -math.inf if not is_divergent(self.fi_per_shot) else 0.0
        return to_db(as_float(self.fi_per_shot) / as_float(self.qfi_bound))

    @property
    def fi_vs_coherent_db(self) -> Optional[float]:
        """dB of F relative to a lossless coherent probe of the same <n_in>."""
        if self.fi_coherent is None or is_divergent(self.fi_per_shot):
            return None
        return to_db(as_float(self.fi_per_shot) / self.fi_coherent)

    @property
    def within_qcrb(self) -> bool:
        return as_float(self.fi_per_shot) <= as_float(self.qfi_bound) * (1.0 + 1e-12)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probe": self.probe.kind.value,
            "kappa": self.probe.kappa,
            "mean_photons": self.probe.mean_photons,
            "squeezing_db": self.probe.squeezing_db,
            "absorption_coefficient": self.sample.absorption_coefficient,
            "length": self.sample.length,
            "eta": self.eta,
            "detector_efficiency": self.detector_efficiency,
            "fi_per_shot": _jsonable(self.fi_per_shot),
            "qfi_bound": _jsonable(self.qfi_bound),
            "advantage": _jsonable(self.advantage),
            "fi_per_photon": self.fi_per_photon,
            "fi_vs_coherent_db": self.fi_vs_coherent_db,
            "within_qcrb": self.within_qcrb,
        }


def _jsonable(value: Precision) -> Any:
    if is_divergent(value):
        return {"divergent": value.reason}
    return value


def precision_report(
    sample: SampleSpec,
    probe: ProbeSpec,
    gamma: float = 1.0,
    model: DetectionModel = DetectionModel.PRINTED,
) -> PrecisionReport:
    """
    Evaluate F, Q and Lambda for ``probe`` on ``sample``.

    The probe's own <n_in> sets the photon count, so a probe built with
    ``ProbeSpec.from_kappa(kind, kappa, n_s=sample.n_s)`` is consistent with
    the sample's saturation scale.
    """
    kappa = probe.kappa
    scaled = sample.photon_scale
    # rescale to the probe's photon count; F, Q are linear in n_in
    factor = probe.mean_photons / (kappa * scaled)

    eta = transmission(kappa, sample.a_l)
    if gamma == 1.0:
        fi = fisher_for_probe(sample, probe)
    else:
        fi = fisher_detected(sample, kappa, probe.kind, gamma, probe.squeezing_db, model)
    q = qfi_bound(sample, kappa)

    if not is_divergent(fi):
        fi = fi * factor
    if not is_divergent(q):
        q = q * factor

    report = PrecisionReport(
        eta=eta,
        fi_per_shot=fi,
        qfi_bound=q,
        advantage=quantum_advantage(sample, kappa),
        probe=probe,
        sample=sample,
        detector_efficiency=gamma,
        fi_coherent=fisher_coherent(sample, kappa) * factor,
    )
    if not report.within_qcrb:
        logger.warning(
            "Detected FI exceeds the lossless QFI bound (kappa=%g, gamma=%g, model=%s)",
            kappa,
            gamma,
            DetectionModel(model).value,
        )
    return report
