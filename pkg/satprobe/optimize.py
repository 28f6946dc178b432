# optimize.py
# -*- coding: utf-8 -*-
"""
Optimal probe power, optimal sample length, equal-precision power reduction
and the two worked metrology scenarios (thermometry cell, dye cuvette).
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Optional, Tuple

from scipy.optimize import brentq

from .config import ChlorophyllScenarioConfig, DbtScenarioConfig
from .errors import BracketError, DomainError
from .fisher import (
    DetectionModel,
    PrecisionReport,
    Precision,
    as_float,
    fisher_coherent,
    fisher_detected,
    fisher_fock,
    is_divergent,
    precision_report,
    to_db,
)
from .model import (
    ProbeKind,
    ProbeSpec,
    SampleSpec,
    SaturationUnit,
    infer_absorption,
    intensity_to_kappa,
    kappa_to_intensity,
    saturation_flux,
    saturation_intensity_w_cm2,
    transmission,
)
from .special_fn import wright_omega

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1 / phi
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0  # 1 / phi^2

ARG_RTOL = 1e-8
MAX_EXPAND = 60
# How far below kappa_c the equal-precision root search starts, and how
# often it may be pushed further down.
ROOT_LOWER_DECADES = 12.0
ROOT_MAX_LOWERING = 8


# ---------------------------------------------------------------------------
# Golden-section search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizationResult:
    """
    Outcome of a one-dimensional maximization.

    :param argmax: Maximizer (kappa, or a length in cm).
    :param objective_at_opt: Objective value at the maximizer.
    :param bracket: Search interval actually used, after any expansion.
    :param iterations: Golden-section iterations.
    :param evaluations: Objective evaluations, expansion included.
    :param baseline_objective: Objective at the comparison point, if any.
    :param improvement_db: 10 log10(objective_at_opt / baseline_objective).
    """

    argmax: float
    objective_at_opt: float
    bracket: Tuple[float, float]
    iterations: int
    evaluations: int
    baseline_objective: Optional[float] = None
    improvement_db: Optional[float] = None

    def against(self, baseline_objective: float) -> "OptimizationResult":
        """Attach a baseline and the improvement over it."""
        return replace(
            self,
            baseline_objective=baseline_objective,
            improvement_db=to_db(self.objective_at_opt / baseline_objective),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "argmax": self.argmax,
            "objective_at_opt": self.objective_at_opt,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "baseline_objective": self.baseline_objective,
            "improvement_db": self.improvement_db,
        }


def golden_section_maximize(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rtol: float = ARG_RTOL,
    log_space: bool = False,
    max_expand: int = MAX_EXPAND,
) -> OptimizationResult:
    """
    Maximize a unimodal function by golden-section search.

    If the middle of [lo, hi] does not beat both ends, the interval is grown
    towards the larger end, doubling its reach each time.

    :param f: Objective.
    :param lo: Lower end of the starting bracket.
    :param hi: Upper end of the starting bracket.
    :param rtol: Relative tolerance on the argument.
    :param log_space: Search in ln(x); requires lo > 0.
    :param max_expand: Expansion steps before giving up.
    :raises BracketError: If no interior maximum is found.
    """
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got ({lo}, {hi})")
    if log_space and lo <= 0:
        raise DomainError("log-space search needs a positive bracket")

    to_x = math.exp if log_space else (lambda u: u)
    evaluations = 0

    def g(u: float) -> float:
        nonlocal evaluations
        evaluations += 1
        try:
            x = to_x(u)
        except OverflowError as exc:
            raise BracketError(f"bracket expansion left the finite range at u={u}") from exc
        if not math.isfinite(x):
            raise BracketError(f"bracket expansion left the finite range at u={u}")
        return as_float(f(x))

    a, b = (math.log(lo), math.log(hi)) if log_space else (lo, hi)
    m = 0.5 * (a + b)
    fa, fm, fb = g(a), g(m), g(b)

    # ---- expansion ----
    expansions = 0
    while fm < fa or fm < fb:
        if expansions >= max_expand:
            raise BracketError(
                f"no interior maximum after {max_expand} expansions, last bracket ({to_x(a)}, {to_x(b)})"
            )
        width = b - a
        if fb >= fa:
            a, fa, m, fm = m, fm, b, fb
            b = b + width
            fb = g(b)
        else:
            b, fb, m, fm = m, fm, a, fa
            a = a - width
            if not log_space and lo > 0 and a <= 0:
                raise BracketError("maximum appears to sit at or below zero")
            fa = g(a)
        expansions += 1
    if expansions:
        logger.debug("Bracket expanded %d times to (%g, %g)", expansions, to_x(a), to_x(b))

    # ---- golden section ----
    bracket = (to_x(a), to_x(b))
    h = b - a
    c, d = a + INV_PHI_SQUARE * h, a + INV_PHI * h
    fc, fd = g(c), g(d)
    iterations = 0
    while True:
        scale = 1.0 if log_space else max(abs(0.5 * (a + b)), 1e-300)
        if b - a <= rtol * scale:
            break
        iterations += 1
        if fc > fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = g(d)

    best_u, best_f = max(((c, fc), (d, fd), (m, fm)), key=lambda pair: pair[1])
    return OptimizationResult(
        argmax=to_x(best_u),
        objective_at_opt=best_f,
        bracket=bracket,
        iterations=iterations,
        evaluations=evaluations,
    )


# ---------------------------------------------------------------------------
# Probe power
# ---------------------------------------------------------------------------

def optimal_kappa(a_l: float) -> Tuple[float, float]:
    """
    Closed-form optimum of the coherent-probe FI over input intensity.

    kappa_opt = W(1 + aL) >= 1 and eta_opt = 1 / kappa_opt.
    """
    if not a_l >= 0:
        raise DomainError(f"aL must be >= 0, got {a_l!r}")
    kappa = float(wright_omega(1.0 + a_l))
    return kappa, 1.0 / kappa


def optimal_kappa_numeric(a_l: float, bracket: Tuple[float, float] = (1e-3, 1e3)) -> OptimizationResult:
    """Golden-section maximization of the coherent FI over kappa (unit length)."""
    sample = SampleSpec(absorption_coefficient=a_l, length=1.0)
    return golden_section_maximize(lambda k: fisher_coherent(sample, k), *bracket, log_space=True)


def optimal_fock_kappa(a_l: float, bracket: Tuple[float, float] = (1e-3, 1e3)) -> OptimizationResult:
    """Golden-section maximization of the Fock-state FI over kappa (unit length)."""
    if not a_l > 0:
        raise DomainError("the Fock FI diverges for a lossless sample")
    sample = SampleSpec(absorption_coefficient=a_l, length=1.0)
    return golden_section_maximize(lambda k: fisher_fock(sample, k), *bracket, log_space=True)


def linear_power_scaling_db(power_db: float) -> float:
    """Precision change without saturation: shot-noise FI scales 1:1 with power."""
    return float(power_db)


# ---------------------------------------------------------------------------
# Sample length
# ---------------------------------------------------------------------------

def optimal_length(
    a: float,
    kappa_in: float,
    bracket: Optional[Tuple[float, float]] = None,
    baseline_length: Optional[float] = None,
) -> OptimizationResult:
    """
    Sample length that maximizes the coherent FI with kappa held at the input face.

    :param a: Absorption coefficient [cm^-1], > 0.
    :param kappa_in: Scaled intensity at the input face.
    :param bracket: Starting length bracket [cm]; defaults to (0.2/a, 20/a).
    :param baseline_length: Optional comparison length for ``improvement_db``.
    """
    if not a > 0:
        raise DomainError(f"absorption coefficient must be positive, got {a!r}")
    if not kappa_in > 0:
        raise DomainError(f"kappa must be positive, got {kappa_in!r}")
    lo, hi = bracket if bracket is not None else (0.2 / a, 20.0 / a)

    def objective(length: float) -> float:
        return fisher_coherent(SampleSpec(absorption_coefficient=a, length=length), kappa_in)

    result = golden_section_maximize(objective, lo, hi, log_space=True)
    logger.info("Optimal length %.6g cm for a=%g, kappa=%g", result.argmax, a, kappa_in)
    if baseline_length is not None:
        result = result.against(objective(baseline_length))
    return result


# ---------------------------------------------------------------------------
# Equal-precision power reduction
# ---------------------------------------------------------------------------

def _equal_precision(target: Precision, fock: Callable[[float], Precision], kappa_c: float) -> float:
    if is_divergent(target) or as_float(target) <= 0:
        raise DomainError("coherent reference precision must be finite and positive")
    log_target = math.log(as_float(target))

    def residual(u: float) -> float:
        value = fock(math.exp(u))
        if is_divergent(value):
            raise DomainError("Fock FI diverges; the sample is lossless")
        return math.log(as_float(value)) - log_target

    hi = math.log(kappa_c)
    if residual(hi) <= 0:
        raise BracketError("Fock FI does not exceed the coherent FI at kappa_c")
    lo = hi - ROOT_LOWER_DECADES * math.log(10.0)
    for _ in range(ROOT_MAX_LOWERING):
        if residual(lo) < 0:
            break
        lo -= ROOT_LOWER_DECADES * math.log(10.0)
    else:
        raise BracketError("no sign change below kappa_c")

    root = brentq(residual, lo, hi, xtol=1e-14, maxiter=200)
    return math.exp(root)


def equal_precision_fock_kappa(kappa_c: float, a_l: float, length: float) -> float:
    """
    Fock-probe intensity that matches the coherent FI at ``kappa_c``.

    :param kappa_c: Coherent-probe scaled intensity.
    :param a_l: Optical depth, > 0.
    :param length: Sample length [cm].
    :return: kappa_q < kappa_c.
    """
    if not kappa_c > 0:
        raise DomainError(f"kappa_c must be positive, got {kappa_c!r}")
    if not a_l > 0:
        raise DomainError("no finite equal-precision point for a lossless sample")
    sample = SampleSpec(absorption_coefficient=a_l / length, length=length)
    return _equal_precision(fisher_coherent(sample, kappa_c), lambda k: fisher_fock(sample, k), kappa_c)


def detected_equal_precision_kappa(
    kappa_c: float,
    a_l: float,
    length: float,
    gamma: float,
    model: DetectionModel = DetectionModel.PRINTED,
) -> float:
    """``equal_precision_fock_kappa`` behind a detector of efficiency gamma."""
    if not kappa_c > 0:
        raise DomainError(f"kappa_c must be positive, got {kappa_c!r}")
    if not a_l > 0:
        raise DomainError("no finite equal-precision point for a lossless sample")
    sample = SampleSpec(absorption_coefficient=a_l / length, length=length)
    target = fisher_detected(sample, kappa_c, ProbeKind.COHERENT, gamma, model=model)
    return _equal_precision(
        target, lambda k: fisher_detected(sample, k, ProbeKind.FOCK, gamma, model=model), kappa_c
    )


def power_reduction_db(kappa_q: float, kappa_c: float) -> float:
    return to_db(kappa_q / kappa_c)


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

@dataclass
class ScenarioReport:
    """Named summary blocks plus the precision reports behind them."""

    name: str
    summary: Dict[str, Any] = field(default_factory=dict)
    reports: Dict[str, PrecisionReport] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "summary": self.summary,
            "reports": {key: report.to_dict() for key, report in self.reports.items()},
        }


def _dbt_block(a: float, config: DbtScenarioConfig, kappa_op: float) -> Dict[str, Any]:
    sample = SampleSpec(absorption_coefficient=a, length=config.length)
    a_l = sample.a_l
    kappa_opt, eta_opt = optimal_kappa(a_l)
    f_op = fisher_coherent(sample, kappa_op)
    f_opt = fisher_coherent(sample, kappa_opt)

    power_factor = 10.0 ** (config.power_step_db / 10.0)
    kappa_over = kappa_opt * power_factor
    block: Dict[str, Any] = {
        "absorption_coefficient": a,
        "a_l": a_l,
        "eta_operating": transmission(kappa_op, a_l),
        "kappa_opt": kappa_opt,
        "eta_opt": eta_opt,
        "improvement_db": to_db(f_opt / f_op),
        "overdrive_kappa": kappa_over,
        "overdrive_change_db": to_db(fisher_coherent(sample, kappa_over) / f_opt),
        "linear_scaling_db": linear_power_scaling_db(config.power_step_db),
    }
    if config.n_s is not None:
        block["intensity_opt"] = kappa_to_intensity(kappa_opt, config.n_s, config.n_s_unit)
    if a_l > 0:
        kappa_q = equal_precision_fock_kappa(kappa_opt, a_l, config.length)
        block["fock_kappa_equal_precision"] = kappa_q
        block["fock_power_reduction_db"] = power_reduction_db(kappa_q, kappa_opt)
        if config.detector_efficiency is not None:
            gamma = config.detector_efficiency
            kappa_qd = detected_equal_precision_kappa(kappa_opt, a_l, config.length, gamma)
            block["detected_fock_kappa_equal_precision"] = kappa_qd
            block["detected_power_reduction_db"] = power_reduction_db(kappa_qd, kappa_opt)
    return block


def run_dbt_scenario(config: DbtScenarioConfig, name: str = "dbt") -> ScenarioReport:
    """
    Thermometry-cell analysis: absorption, optimal power, improvement over the
    operating point and the effect of overdriving past the optimum.
    """
    kappa_op = config.operating_kappa()
    report = ScenarioReport(name=name)
    report.summary["kappa_operating"] = kappa_op
    if config.n_s is not None:
        report.summary["n_s"] = config.n_s
        report.summary["n_s_unit"] = SaturationUnit(config.n_s_unit).value

    if config.eta_measured is not None:
        a_measured = infer_absorption(config.eta_measured, kappa_op, config.length)
        report.summary["measured"] = _dbt_block(a_measured, config, kappa_op)
        report.summary["measured"]["eta_measured"] = config.eta_measured
        logger.info("Inferred a=%.5g cm^-1 from eta=%g at kappa=%g", a_measured, config.eta_measured, kappa_op)
    if config.absorption_coefficient is not None:
        report.summary["quoted"] = _dbt_block(config.absorption_coefficient, config, kappa_op)

    if "measured" in report.summary and "quoted" in report.summary:
        a_m = report.summary["measured"]["absorption_coefficient"]
        a_q = report.summary["quoted"]["absorption_coefficient"]
        if abs(a_m - a_q) > 1e-3 * max(a_m, a_q):
            logger.warning(
                "Quoted absorption %.4g cm^-1 disagrees with the measured transmission (%.4g cm^-1)",
                a_q,
                a_m,
            )

    primary = report.summary.get("quoted", report.summary.get("measured"))
    sample = SampleSpec(absorption_coefficient=primary["absorption_coefficient"], length=config.length)
    kappa_opt = primary["kappa_opt"]
    report.reports["operating_coherent"] = precision_report(sample, ProbeSpec.from_kappa(ProbeKind.COHERENT, kappa_op))
    report.reports["optimal_coherent"] = precision_report(sample, ProbeSpec.from_kappa(ProbeKind.COHERENT, kappa_opt))
    report.reports["optimal_fock"] = precision_report(sample, ProbeSpec.from_kappa(ProbeKind.FOCK, kappa_opt))
    return report


def run_chlorophyll_scenario(config: ChlorophyllScenarioConfig, name: str = "chlorophyll") -> ScenarioReport:
    """
    Dye-cuvette analysis: absorption from one transmission measurement, the
    saturation intensity from sigma and tau, and the optimal cuvette length.
    """
    i_sat = saturation_intensity_w_cm2(config.sigma, config.tau, config.wavelength_nm)
    if config.kappa is not None:
        kappa = config.kappa
    else:
        intensity = config.intensity if config.intensity is not None else config.power_w / config.beam_area_cm2
        kappa = intensity_to_kappa(intensity, i_sat, SaturationUnit.W_PER_CM2)

    a = infer_absorption(config.eta_measured, kappa, config.length)
    baseline = config.baseline_length if config.baseline_length is not None else config.length
    length_opt = optimal_length(a, kappa, config.length_bracket, baseline_length=baseline)

    report = ScenarioReport(name=name)
    report.summary.update(
        {
            "absorption_coefficient": a,
            "saturation_intensity_w_cm2": i_sat,
            "saturation_flux": saturation_flux(config.sigma, config.tau),
            "kappa": kappa,
            "probe_intensity_w_cm2": kappa_to_intensity(kappa, i_sat),
            "baseline_length": baseline,
            "optimal_length": length_opt.argmax,
            "improvement_db": length_opt.improvement_db,
            "search": length_opt.to_dict(),
        }
    )
    probe = ProbeSpec.from_kappa(ProbeKind.COHERENT, kappa, wavelength_nm=config.wavelength_nm)
    report.reports["baseline_coherent"] = precision_report(
        SampleSpec(absorption_coefficient=a, length=baseline), probe
    )
    report.reports["optimal_coherent"] = precision_report(
        SampleSpec(absorption_coefficient=a, length=length_opt.argmax), probe
    )
    return report
