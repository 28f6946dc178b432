import math

import numpy as np
import pytest
from pydantic import ValidationError

from satprobe.config import load_config, validate_config
from satprobe.errors import ConfigError, ConvergenceError, DomainError
from satprobe.lindblad import (
    CSV_COLUMNS,
    DensityMatrix,
    LindbladGenerator,
    QuantumSimConfig,
    SliceRecord,
    build_operators,
    check_noise_claims,
    coherent_amplitudes,
    coupling_strength,
    evolve_slice,
    lindblad_rhs,
    photon_statistics,
    propagate_sample,
    semiclassical_baseline,
    total_excitation,
)


def _config(**overrides):
    data = {
        "n_absorbers_per_slice": 1,
        "n_slices": 1,
        "fock_dim": 2,
        "tau_int": 1.0,
        "g": 0.5,
        "gamma_sp": 0.0,
        "gamma_dp": 0.0,
        "input_state": {"kind": "fock", "n": 1},
    }
    data.update(overrides)
    return QuantumSimConfig.model_validate(data)


def _fock(n, dim):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def _random_density_matrix(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def test_fock_input_must_fit_truncation():
    with pytest.raises(ValidationError):
        _config(fock_dim=6, input_state={"kind": "fock", "n": 6})


def test_coherent_input_must_fit_truncation():
    with pytest.raises(ConfigError):
        validate_config(
            _config().model_dump() | {"fock_dim": 16, "input_state": {"kind": "coherent", "n_mean": 12.0}},
            QuantumSimConfig,
        )


def test_shipped_configs_load(conf_dir):
    for name in ("fig4_reduced_fock", "fig4_reduced_coherent", "saturated_coherent", "fig4_fock", "fig4_coherent"):
        config = load_config(conf_dir / f"{name}.toml", QuantumSimConfig)
        assert config.input_state.kind in ("fock", "coherent")
        assert config.hilbert_dim == config.fock_dim * 2**config.n_absorbers_per_slice


def test_coupling_strength():
    assert coupling_strength(0.5, 10.0) == pytest.approx(0.05265, rel=1e-3)
    with pytest.raises(DomainError):
        coupling_strength(0.0, 1.0)


# ---------------------------------------------------------------------------
# states and operators
# ---------------------------------------------------------------------------


def test_coherent_amplitudes_statistics():
    amplitudes, deficit = coherent_amplitudes(4.0, 32)
    assert np.linalg.norm(amplitudes) == pytest.approx(1.0, rel=1e-14)
    assert deficit < 1e-10
    stats = photon_statistics(np.outer(amplitudes, amplitudes))
    assert stats.mean == pytest.approx(4.0, rel=1e-8)
    assert stats.variance == pytest.approx(4.0, rel=1e-7)


def test_photon_statistics_of_fock_state():
    stats = photon_statistics(_fock(5, 8))
    assert stats.mean == pytest.approx(5.0)
    assert stats.variance == 0.0
    assert stats.fano_std == 0.0
    assert stats.fano_paper is None


def test_photon_statistics_of_mixture():
    stats = photon_statistics(0.5 * (_fock(0, 4) + _fock(2, 4)))
    assert stats.mean == pytest.approx(1.0)
    assert stats.variance == pytest.approx(1.0)
    assert stats.fano_std == pytest.approx(1.0)
    assert stats.fano_paper == pytest.approx(1.0)


def test_photon_statistics_of_vacuum():
    stats = photon_statistics(_fock(0, 4))
    assert not stats.fano_defined
    assert stats.fano_paper is None


def test_product_state_and_partial_trace(rng):
    field = _random_density_matrix(rng, 5)
    rho = DensityMatrix.product(field, 2)
    assert rho.dims == (5, 2, 2)
    assert rho.factor_labels == ["field", "absorber_1", "absorber_2"]
    assert rho.trace() == pytest.approx(1.0)
    np.testing.assert_allclose(rho.partial_trace_field(), field, atol=1e-14)
    assert rho.check() > -1e-12


def test_density_matrix_shape_is_checked():
    with pytest.raises(DomainError):
        DensityMatrix(np.eye(3, dtype=complex), fock_dim=2, n_absorbers=1)


def test_unphysical_state_fails_check():
    with pytest.raises(ConvergenceError) as err:
        DensityMatrix(np.diag([2.0, 0.0, 0.0, 0.0]).astype(complex), 2, 1).check(slice_index=3)
    assert err.value.diagnostics["slice"] == 3


def test_operator_algebra():
    ops = build_operators(2, 4)
    assert ops.dim == 16
    commutator = ops.annihilate * ops.create - ops.create * ops.annihilate
    # [a, a^dag] = 1 except on the truncation edge
    diag = np.real(commutator.diag()).reshape(4, 4)
    np.testing.assert_allclose(diag[:3], 1.0)
    for s, s_dag, z in zip(ops.sigma, ops.sigma_dagger, ops.sigma_z):
        np.testing.assert_allclose((s_dag * s - s * s_dag).full(), z.full())
    assert ops.sigma[0].dims == [[4, 2, 2], [4, 2, 2]]
    with pytest.raises(DomainError):
        build_operators(0, 4)


# ---------------------------------------------------------------------------
# master equation
# ---------------------------------------------------------------------------


def test_rhs_is_traceless_and_hermitian(rng):
    config = _config(n_absorbers_per_slice=2, fock_dim=4, g=0.3, gamma_sp=0.5, gamma_dp=2.0)
    rho = _random_density_matrix(rng, config.hilbert_dim)
    drho = lindblad_rhs(rho, config)
    assert abs(np.trace(drho)) < 1e-12
    assert np.max(np.abs(drho - drho.conj().T)) < 1e-12


def test_rhs_matches_commutator_form(rng):
    config = _config(n_absorbers_per_slice=1, fock_dim=3, g=0.3, gamma_sp=0.5, gamma_dp=2.0)
    gen = LindbladGenerator(config)
    rho = _random_density_matrix(rng, config.hilbert_dim)
    h = gen.hamiltonian.toarray()
    expected = -1j * (h @ rho - rho @ h)
    ops = gen.ops
    for rate, c in [(0.5, ops.sigma[0].full()), (2.0, ops.sigma_z[0].full())]:
        cdc = c.conj().T @ c
        expected += rate * (c @ rho @ c.conj().T - 0.5 * (cdc @ rho + rho @ cdc))
    np.testing.assert_allclose(gen(rho), expected, atol=1e-13)


def test_single_photon_rabi_oscillation():
    trace = propagate_sample(_config())
    assert trace.records[1].mean_n == pytest.approx(math.cos(0.5) ** 2, abs=1e-6)


def test_excitation_is_conserved_without_decay():
    config = _config(n_absorbers_per_slice=2, fock_dim=5, g=0.4, input_state={"kind": "fock", "n": 3})
    ops = build_operators(2, 5)
    rho = DensityMatrix.product(_fock(3, 5), 2)
    evolved = evolve_slice(rho, config, LindbladGenerator(config, ops))
    assert total_excitation(evolved, ops) == pytest.approx(total_excitation(rho, ops), abs=1e-8)
    assert total_excitation(rho, ops) == pytest.approx(3.0)


def test_no_rates_leaves_state_unchanged(rng):
    config = _config(g=0.0)
    rho = DensityMatrix(_random_density_matrix(rng, 4), 2, 1)
    np.testing.assert_array_equal(evolve_slice(rho, config).data, rho.data)


def test_absorber_decay_without_coupling_keeps_field(rng):
    config = _config(fock_dim=4, g=0.0, gamma_sp=1.0, gamma_dp=1.0)
    field = _random_density_matrix(rng, 4)
    evolved = evolve_slice(DensityMatrix.product(field, 1), config)
    np.testing.assert_allclose(evolved.partial_trace_field(), field, atol=1e-9)


def test_zero_coupling_gives_flat_trace():
    config = _config(fock_dim=8, n_slices=4, g=0.0, gamma_sp=0.5, input_state={"kind": "fock", "n": 4})
    trace = propagate_sample(config)
    assert [r.mean_n for r in trace.records] == [4.0] * 5
    assert all(r.eta == 1.0 for r in trace.records)


def test_integrator_failure_is_reported(monkeypatch):
    from satprobe import lindblad

    class _Failing:
        def __init__(self, fun, t0, y0, t_bound, **kwargs):
            self.status = "running"
            self.t = t0
            self.y = y0
            self.step_size = 1e-300

        def step(self):
            self.status = "failed"
            return "Required step size is less than spacing between numbers."

    monkeypatch.setitem(lindblad._SCHEMES, "RK45", _Failing)
    config = _config()
    with pytest.raises(ConvergenceError) as err:
        evolve_slice(DensityMatrix.product(_fock(1, 2), 1), config, slice_index=7)
    assert err.value.diagnostics["slice"] == 7


# ---------------------------------------------------------------------------
# traces and claims
# ---------------------------------------------------------------------------


def test_semiclassical_baseline():
    np.testing.assert_allclose(semiclassical_baseline([1.0, 0.5], 0.0, 10.0), [0.0, 2.5])
    np.testing.assert_allclose(semiclassical_baseline([1.0, 0.5], 10.0, 10.0), [10.0, 5.0])


def test_slice_record_row_marks_undefined_fano():
    row = SliceRecord(index=2, mean_n=0.0, var_n=0.0, fano_std=None, fano_paper=None, eta=0.0).row()
    assert len(row) == len(CSV_COLUMNS)
    assert math.isnan(row[3]) and math.isnan(row[4])


def test_reduced_fock_run_is_physical(reduced_fock_trace):
    records = reduced_fock_trace.records
    assert len(records) == 11
    assert records[0].mean_n == 6.0 and records[0].var_n == 0.0
    means = [r.mean_n for r in records]
    assert all(b < a for a, b in zip(means, means[1:]))
    assert all(r.trace_drift < 1e-8 for r in records)
    assert all(r.min_eigenvalue > -1e-8 for r in records)
    assert reduced_fock_trace.truncation_deficit == 0.0


def test_reduced_fock_run_suppresses_noise(reduced_fock_trace):
    claim = reduced_fock_trace.noise_claim()
    assert claim["claim"] == "noise_suppressed"
    assert claim["slices_checked"]
    assert claim["holds"]
    for r in reduced_fock_trace.records:
        if r.mean_n >= 2:
            assert r.var_n <= r.var_semiclassical + 1e-12


def test_reduced_coherent_run(reduced_coherent_trace):
    records = reduced_coherent_trace.records
    assert records[0].fano_std == pytest.approx(1.0, abs=1e-6)
    assert 0.0 < reduced_coherent_trace.truncation_deficit < 1e-8
    assert records[-1].mean_n < records[0].mean_n
    assert all(0.95 < r.fano_std < 1.2 for r in records)
    claim = reduced_coherent_trace.noise_claim()
    assert claim["claim"] == "super_poissonian"
    # weak saturation at g = 0.1: the stretch is real but stays below the margin
    assert 1.0 < claim["max_fano_std"] < claim["threshold"]
    assert not claim["holds"]


def test_saturated_coherent_run_turns_super_poissonian(saturated_coherent_trace):
    records = saturated_coherent_trace.records
    assert records[0].fano_std == pytest.approx(1.0, abs=1e-6)
    assert records[1].mean_n >= saturated_coherent_trace.n_absorbers
    assert records[1].fano_std > records[0].fano_std + 0.01
    assert all(r.trace_drift < 1e-8 for r in records)
    assert all(r.min_eigenvalue > -1e-8 for r in records)
    claim = saturated_coherent_trace.noise_claim()
    assert claim["holds"]
    assert claim["max_fano_std"] > claim["threshold"]


def test_check_noise_claims(reduced_coherent_trace, reduced_fock_trace):
    report = check_noise_claims(reduced_coherent_trace, reduced_fock_trace)
    assert report["fock"]["holds"]
    assert report["all_hold"] == (report["coherent"]["holds"] and report["fock"]["holds"])
    with pytest.raises(DomainError):
        check_noise_claims(reduced_coherent_trace, reduced_fock_trace, n_absorbers=3)


@pytest.mark.slow
def test_full_fock_run_suppresses_noise(conf_dir):
    trace = propagate_sample(load_config(conf_dir / "fig4_fock.toml", QuantumSimConfig))
    assert trace.noise_claim()["holds"]
    assert trace.na_crossing_index is None or trace.na_crossing_index > 0


@pytest.mark.slow
def test_full_coherent_run_is_physical(conf_dir):
    trace = propagate_sample(load_config(conf_dir / "fig4_coherent.toml", QuantumSimConfig))
    assert all(r.trace_drift < 1e-8 for r in trace.records)
    assert all(r.min_eigenvalue > -1e-8 for r in trace.records)
    assert "holds" in trace.noise_claim()
