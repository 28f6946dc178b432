import math

import numpy as np
import pytest

from satprobe.errors import DomainError
from satprobe.fisher import (
    DetectionModel,
    Divergent,
    as_float,
    fisher_coherent,
    fisher_detected,
    fisher_fock,
    fisher_for_probe,
    fisher_from_variance,
    fisher_squeezed,
    is_divergent,
    output_variance_linear_loss,
    precision_report,
    qfi_bound,
    quantum_advantage,
    quantum_advantage_weak,
    squeezed_fraction_of_limit,
    to_db,
)
from satprobe.model import ProbeKind, ProbeSpec, SampleSpec, transmission
from satprobe.optimize import optimal_kappa

ETA_UNIT = 0.5671432904097838


def _random_points(rng, n):
    kappa = rng.uniform(1e-3, 50.0, n)
    a_l = rng.uniform(1e-3, 10.0, n)
    return zip(kappa, a_l)


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def test_linear_loss_variance_examples():
    assert output_variance_linear_loss(1.0, 10.0, 3.0) == 3.0
    assert output_variance_linear_loss(0.5, 10.0, 0.0) == 2.5
    for eta in (0.1, 0.4, 0.9):
        assert output_variance_linear_loss(eta, 10.0, 10.0) == pytest.approx(10.0 * eta, rel=1e-14)


def test_linear_loss_variance_domain():
    with pytest.raises(DomainError):
        output_variance_linear_loss(1.1, 1.0, 1.0)
    with pytest.raises(DomainError):
        output_variance_linear_loss(0.5, -1.0, 1.0)


def test_fisher_from_variance_edges():
    assert fisher_from_variance(0.5, 0.0, 10.0, 2.0) == 0.0
    result = fisher_from_variance(1.0, -0.3, 10.0, 0.0)
    assert is_divergent(result)
    assert as_float(result) == math.inf


def test_divergent_is_infinite():
    value = Divergent("test")
    assert float(value) == math.inf
    assert "test" in str(value)


def test_to_db():
    assert to_db(10.0) == pytest.approx(10.0)
    assert to_db(0.5) == pytest.approx(-3.0103, abs=1e-4)
    with pytest.raises(DomainError):
        to_db(0.0)


# ---------------------------------------------------------------------------
# lossless detection
# ---------------------------------------------------------------------------


def test_coherent_unit_example(unit_sample):
    assert fisher_coherent(unit_sample, 1.0) == pytest.approx(0.230927, rel=1e-5)


def test_coherent_without_absorption():
    sample = SampleSpec(absorption_coefficient=0.0, length=2.0)
    assert fisher_coherent(sample, 3.0) == pytest.approx((2.0 / 4.0) ** 2 * 3.0, rel=1e-14)


def test_coherent_scales_with_photon_number():
    dimensionless = SampleSpec(absorption_coefficient=1.0, length=1.0)
    photons = SampleSpec(absorption_coefficient=1.0, length=1.0, n_s=200.0)
    assert fisher_coherent(photons, 1.0) == pytest.approx(100.0 * fisher_coherent(dimensionless, 1.0), rel=1e-14)


def test_qfi_unit_example(unit_sample):
    q = qfi_bound(unit_sample, 1.0)
    assert q == pytest.approx(0.533495, rel=1e-5)
    assert q / fisher_coherent(unit_sample, 1.0) == pytest.approx(1.0 / (1.0 - ETA_UNIT), rel=1e-12)


def test_qfi_diverges_for_lossless_sample():
    sample = SampleSpec(absorption_coefficient=0.0, length=1.0)
    assert is_divergent(qfi_bound(sample, 1.0))
    assert is_divergent(quantum_advantage(sample, 1.0))
    assert is_divergent(fisher_fock(sample, 1.0))


def test_fock_saturates_the_bound(rng):
    for kappa, a_l in _random_points(rng, 10_000):
        sample = SampleSpec(absorption_coefficient=a_l, length=1.0)
        assert fisher_fock(sample, kappa) == pytest.approx(qfi_bound(sample, kappa), rel=1e-12)


def test_advantage_identity(rng):
    for kappa, a_l in _random_points(rng, 10_000):
        sample = SampleSpec(absorption_coefficient=a_l, length=1.0)
        eta = transmission(kappa, a_l)
        advantage = quantum_advantage(sample, kappa)
        assert advantage == pytest.approx(1.0 / (1.0 - eta), rel=1e-12)
        assert qfi_bound(sample, kappa) / fisher_coherent(sample, kappa) == pytest.approx(advantage, rel=1e-12)


def test_advantage_of_half_transmission():
    # aL chosen so that eta = 0.5 at kappa = 1
    sample = SampleSpec(absorption_coefficient=math.log(2.0) + 0.5, length=1.0)
    assert quantum_advantage(sample, 1.0) == pytest.approx(2.0, rel=1e-9)


def test_squeezed_without_squeezing_is_coherent(unit_sample):
    for kappa in (0.01, 1.0, 30.0):
        assert fisher_squeezed(unit_sample, kappa, 0.0) == pytest.approx(fisher_coherent(unit_sample, kappa), rel=1e-12)


def test_squeezed_infinite_squeezing_is_the_bound(unit_sample):
    assert fisher_squeezed(unit_sample, 2.0, math.inf) == pytest.approx(qfi_bound(unit_sample, 2.0), rel=1e-12)


def test_squeezed_interpolates_monotonically(rng):
    levels = (0.0, 5.0, 10.0, 15.0, 30.0)
    for kappa, a_l in _random_points(rng, 2_000):
        sample = SampleSpec(absorption_coefficient=a_l, length=1.0)
        values = [fisher_squeezed(sample, kappa, r) for r in levels]
        assert values[0] >= fisher_coherent(sample, kappa) * (1 - 1e-12)
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] <= qfi_bound(sample, kappa) * (1 + 1e-12)


def test_squeezed_fraction_identity(rng):
    for kappa, a_l in _random_points(rng, 500):
        sample = SampleSpec(absorption_coefficient=a_l, length=1.0)
        eta = transmission(kappa, a_l)
        ratio = fisher_squeezed(sample, kappa, 12.0) / qfi_bound(sample, kappa)
        assert squeezed_fraction_of_limit(eta, 12.0) == pytest.approx(ratio, rel=1e-10)


def test_fifteen_db_squeezing_within_85_percent_of_limit():
    eta = np.linspace(1e-3, 0.848, 500)
    fractions = np.array([squeezed_fraction_of_limit(e, 15.0) for e in eta])
    assert np.all(fractions >= 0.85)
    assert squeezed_fraction_of_limit(0.86, 15.0) < 0.85


def test_negative_squeezing_rejected(unit_sample):
    with pytest.raises(DomainError):
        fisher_squeezed(unit_sample, 1.0, -1.0)


@pytest.mark.parametrize("kappa", [1.0, 2.0, 4.0])
def test_weak_absorption_advantage(kappa):
    a_l = 0.01
    exact = quantum_advantage(SampleSpec(absorption_coefficient=a_l, length=1.0), kappa)
    approx = quantum_advantage_weak(kappa, a_l, 1.0)
    assert approx.valid
    assert abs(exact - approx.value) / exact <= 0.02


def test_weak_absorption_validity():
    assert quantum_advantage_weak(1.0, 0.01, 1.0).value == pytest.approx(200.0)
    assert not quantum_advantage_weak(0.5, 0.01, 1.0).valid
    assert not quantum_advantage_weak(1.0, 2.5, 1.0).valid
    assert is_divergent(quantum_advantage_weak(1.0, 0.0, 1.0).value)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_per_photon_efficiency_falls_under_saturation(a):
    sample = SampleSpec(absorption_coefficient=a, length=1.0)
    kappa = np.logspace(0, 2, 200)
    per_photon = [fisher_coherent(sample, k) / k for k in kappa]
    assert all(b < a_ for a_, b in zip(per_photon, per_photon[1:]))


@pytest.mark.parametrize("a", [0.5, 1.0])
def test_per_photon_efficiency_falls_from_linear_regime(a):
    sample = SampleSpec(absorption_coefficient=a, length=1.0)
    kappa = np.logspace(-2, 2, 400)
    per_photon = [fisher_coherent(sample, k) / k for k in kappa]
    assert all(b < a_ for a_, b in zip(per_photon, per_photon[1:]))


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_bound_per_photon_falls_beyond_optimum(a):
    sample = SampleSpec(absorption_coefficient=a, length=1.0)
    kappa_opt, _ = optimal_kappa(a)
    kappa = np.logspace(math.log10(kappa_opt), 2, 200)
    per_photon = [qfi_bound(sample, k) / k for k in kappa]
    assert all(b < a_ for a_, b in zip(per_photon, per_photon[1:]))


def test_fisher_for_probe_dispatch(unit_sample):
    assert fisher_for_probe(unit_sample, ProbeSpec.from_kappa(ProbeKind.COHERENT, 1.0)) == fisher_coherent(
        unit_sample, 1.0
    )
    assert fisher_for_probe(unit_sample, ProbeSpec.from_kappa(ProbeKind.FOCK, 1.0)) == fisher_fock(unit_sample, 1.0)
    squeezed = ProbeSpec.from_kappa(ProbeKind.AMPLITUDE_SQUEEZED, 1.0, squeezing_db=10.0)
    assert fisher_for_probe(unit_sample, squeezed) == fisher_squeezed(unit_sample, 1.0, 10.0)


# ---------------------------------------------------------------------------
# lossy detection
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("model", list(DetectionModel))
def test_perfect_detector_is_lossless(unit_sample, model):
    kappa = 0.7
    assert fisher_detected(unit_sample, kappa, ProbeKind.COHERENT, 1.0, model=model) == pytest.approx(
        fisher_coherent(unit_sample, kappa), rel=1e-12
    )
    assert fisher_detected(unit_sample, kappa, ProbeKind.FOCK, 1.0, model=model) == pytest.approx(
        fisher_fock(unit_sample, kappa), rel=1e-12
    )
    assert fisher_detected(
        unit_sample, kappa, ProbeKind.AMPLITUDE_SQUEEZED, 1.0, squeezing_db=6.0, model=model
    ) == pytest.approx(fisher_squeezed(unit_sample, kappa, 6.0), rel=1e-12)


@pytest.mark.parametrize("gamma", [0.0, -0.1, 1.01])
def test_detector_efficiency_domain(unit_sample, gamma):
    with pytest.raises(DomainError):
        fisher_detected(unit_sample, 1.0, ProbeKind.COHERENT, gamma)


@pytest.mark.parametrize("kind", [ProbeKind.COHERENT, ProbeKind.FOCK])
def test_error_propagation_model_monotone_in_efficiency(kind):
    sample = SampleSpec(absorption_coefficient=2.0, length=1.0)
    gammas = np.linspace(0.05, 1.0, 40)
    for kappa in (0.01, 1.0, 10.0):
        values = [fisher_detected(sample, kappa, kind, g, model=DetectionModel.ERROR_PROPAGATION) for g in gammas]
        assert all(b > a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("kind", [ProbeKind.COHERENT, ProbeKind.FOCK])
def test_printed_model_monotone_at_optimum(dbt_sample, kind):
    kappa_opt, _ = optimal_kappa(dbt_sample.a_l)
    gammas = np.linspace(0.05, 1.0, 40)
    values = [fisher_detected(dbt_sample, kappa_opt, kind, g) for g in gammas]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_error_propagation_model_respects_bound(rng):
    for kappa, a_l in _random_points(rng, 500):
        sample = SampleSpec(absorption_coefficient=a_l, length=1.0)
        gamma = rng.uniform(0.05, 1.0)
        q = qfi_bound(sample, kappa)
        for kind in (ProbeKind.COHERENT, ProbeKind.FOCK):
            f = fisher_detected(sample, kappa, kind, gamma, model=DetectionModel.ERROR_PROPAGATION)
            assert f <= q * (1 + 1e-12)


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.9])
def test_factored_model_falls_as_inverse_efficiency(unit_sample, gamma):
    kappa = 0.7
    lossless = fisher_coherent(unit_sample, kappa)
    f = fisher_detected(unit_sample, kappa, ProbeKind.COHERENT, gamma, model=DetectionModel.FACTORED)
    assert f == pytest.approx(lossless / gamma, rel=1e-12)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def test_report_for_coherent_probe(unit_sample):
    report = precision_report(unit_sample, ProbeSpec.from_kappa(ProbeKind.COHERENT, 1.0))
    assert report.eta == pytest.approx(ETA_UNIT, rel=1e-12)
    assert report.fi_per_shot == pytest.approx(fisher_coherent(unit_sample, 1.0), rel=1e-14)
    assert report.advantage == pytest.approx(as_float(report.qfi_bound) / report.fi_per_shot, rel=1e-12)
    assert report.fi_vs_coherent_db == pytest.approx(0.0, abs=1e-12)
    assert report.within_qcrb


def test_report_for_fock_probe_saturates_bound(unit_sample):
    report = precision_report(unit_sample, ProbeSpec.from_kappa(ProbeKind.FOCK, 2.0))
    assert report.fi_vs_limit_db == pytest.approx(0.0, abs=1e-10)
    assert report.fi_vs_coherent_db == pytest.approx(to_db(report.advantage), rel=1e-10)


def test_report_uses_probe_photon_count():
    sample = SampleSpec(absorption_coefficient=1.0, length=1.0, n_s=100.0)
    probe = ProbeSpec.from_kappa(ProbeKind.COHERENT, 1.0, n_s=100.0)
    report = precision_report(sample, probe)
    assert report.fi_per_shot == pytest.approx(0.230927 * 50.0, rel=1e-5)
    assert report.fi_per_photon == pytest.approx(0.230927, rel=1e-5)


def test_report_flags_printed_model_above_bound(unit_sample):
    report = precision_report(unit_sample, ProbeSpec.from_kappa(ProbeKind.FOCK, 0.01), gamma=0.5)
    assert not report.within_qcrb
    corrected = precision_report(
        unit_sample, ProbeSpec.from_kappa(ProbeKind.FOCK, 0.01), gamma=0.5, model=DetectionModel.ERROR_PROPAGATION
    )
    assert corrected.within_qcrb


def test_report_serializes_divergence():
    sample = SampleSpec(absorption_coefficient=0.0, length=1.0)
    payload = precision_report(sample, ProbeSpec.from_kappa(ProbeKind.COHERENT, 1.0)).to_dict()
    assert payload["qfi_bound"] == {"divergent": "eta == 1: lossless sample"}
    assert payload["probe"] == "coherent"
