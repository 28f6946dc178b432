# lindblad.py
# -*- coding: utf-8 -*-
"""
Quantum slice propagation of a single-mode probe through a saturable sample.

The sample is cut into slices of N_a two-level absorbers. Each slice starts
with all absorbers in the ground state, is evolved under a Lindblad master
equation for tau_int, and is then traced out; the reduced field state feeds
the next slice.

Operators and states are QuTiP objects in the tensor order field (x) absorber_1
(x) ... (x) absorber_Na; the integrator works on their dense/CSR matrices.
Absorber basis index 0 is |g>, index 1 is |e>, so sigma = |g><e|.
"""

import logging
import math
from dataclasses import dataclass
from typing import Annotated, Any, Dict, Iterable, List, Literal, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, NonNegativeInt, PositiveFloat, model_validator
from qutip import Qobj, destroy, expect, fock_dm, ket2dm, num, qeye, tensor, variance
from scipy import sparse
from scipy.integrate import DOP853, RK23, RK45
from scipy.stats import poisson
from tqdm import tqdm

from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

TRUNCATION_TOL = 1e-8
TRACE_TOL = 1e-8
HERMITIAN_TOL = 1e-12
POSITIVITY_TOL = 1e-8
SUPER_POISSONIAN_MARGIN = 0.01

_SCHEMES = {"RK45": RK45, "DOP853": DOP853, "RK23": RK23}

CSV_COLUMNS = ("slice", "mean_n", "var_n", "fano_std", "fano_paper", "eta", "var_semiclassical")


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

class _SimModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CoherentInput(_SimModel):
    kind: Literal["coherent"] = "coherent"
    n_mean: PositiveFloat


class FockInput(_SimModel):
    kind: Literal["fock"] = "fock"
    n: NonNegativeInt


InputState = Annotated[Union[CoherentInput, FockInput], Field(discriminator="kind")]


class IntegratorConfig(_SimModel):
    """Embedded Runge-Kutta pair from scipy and its local tolerances."""

    scheme: Literal["RK45", "DOP853", "RK23"] = "RK45"
    rtol: PositiveFloat = 1e-9
    atol: PositiveFloat = 1e-11
    max_step: Optional[PositiveFloat] = None


class QuantumSimConfig(_SimModel):
    """
    Parameters of one slice-propagation run, in natural units.

    :param n_absorbers_per_slice: N_a two-level absorbers per slice.
    :param n_slices: Number of slices the probe crosses.
    :param fock_dim: Field truncation; photon numbers 0 .. fock_dim - 1.
    :param tau_int: Interaction time per slice.
    :param g: Field-absorber coupling.
    :param gamma_sp: Spontaneous decay rate of each absorber.
    :param gamma_dp: Pure dephasing rate of each absorber.
    :param input_state: Coherent or Fock input.
    :param integrator: ODE integrator settings.
    """

    n_absorbers_per_slice: int = Field(ge=1)
    n_slices: int = Field(ge=1)
    fock_dim: int = Field(ge=2)
    tau_int: PositiveFloat
    g: NonNegativeFloat
    gamma_sp: NonNegativeFloat
    gamma_dp: NonNegativeFloat
    input_state: InputState
    integrator: IntegratorConfig = IntegratorConfig()

    @model_validator(mode="after")
    def _fits_truncation(self) -> "QuantumSimConfig":
        state = self.input_state
        if isinstance(state, FockInput) and state.n > self.fock_dim - 1:
            raise ValueError(f"Fock input n={state.n} needs fock_dim >= {state.n + 1}")
        if isinstance(state, CoherentInput):
            _, deficit = coherent_amplitudes(state.n_mean, self.fock_dim)
            if deficit > TRUNCATION_TOL:
                raise ValueError(
                    f"coherent input <n>={state.n_mean} loses {deficit:.2e} of its norm at fock_dim={self.fock_dim}"
                )
        return self

    @property
    def hilbert_dim(self) -> int:
        return self.fock_dim * 2**self.n_absorbers_per_slice


def coupling_strength(alpha: float, beta: float) -> float:
    """
    Field-absorber coupling g = sqrt(3 / (2 alpha)) * 3 / (pi^2 beta).

    Shipped configs set g explicitly; this helper only documents the
    focusing-geometry estimate.
    """
    if not (alpha > 0 and beta > 0):
        raise DomainError("alpha and beta must be positive")
    return math.sqrt(3.0 / (2.0 * alpha)) * 3.0 / (math.pi**2 * beta)


# ---------------------------------------------------------------------------
# States and operators
# ---------------------------------------------------------------------------

@dataclass
class DensityMatrix:
    """Density matrix on field (x) absorbers, with its factor dimensions."""

    data: np.ndarray
    fock_dim: int
    n_absorbers: int

    def __post_init__(self) -> None:
        dim = self.fock_dim * 2**self.n_absorbers
        if self.data.shape != (dim, dim):
            raise DomainError(f"density matrix shape {self.data.shape} does not match dimension {dim}")

    @classmethod
    def product(cls, field_state: np.ndarray, n_absorbers: int) -> "DensityMatrix":
        """Field state tensored with all absorbers in |g>."""
        field_qobj = Qobj(np.asarray(field_state, dtype=complex))
        data = tensor(field_qobj, *[fock_dm(2, 0)] * n_absorbers).full()
        return cls(data, field_qobj.shape[0], n_absorbers)

    @property
    def dims(self) -> Tuple[int, ...]:
        return (self.fock_dim,) + (2,) * self.n_absorbers

    @property
    def factor_labels(self) -> List[str]:
        return ["field"] + [f"absorber_{k}" for k in range(1, self.n_absorbers + 1)]

    def as_qobj(self) -> Qobj:
        return Qobj(self.data, dims=[list(self.dims), list(self.dims)])

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0])

    def partial_trace_field(self) -> np.ndarray:
        """Reduced field state, absorbers traced out."""
        return self.as_qobj().ptrace(0).full()

    def check(
        self,
        trace_tol: float = TRACE_TOL,
        hermitian_tol: float = HERMITIAN_TOL,
        positivity_tol: float = POSITIVITY_TOL,
        slice_index: Optional[int] = None,
    ) -> float:
        """
        Verify trace, Hermiticity and positivity.

        :return: The minimum eigenvalue.
        :raises ConvergenceError: If any check fails.
        """
        drift = abs(self.trace() - 1.0)
        herm = self.hermiticity_error()
        min_eig = self.min_eigenvalue()
        if drift > trace_tol or herm > hermitian_tol or min_eig < -positivity_tol:
            raise ConvergenceError(
                "density matrix left the physical set",
                {"slice": slice_index, "trace_drift": drift, "hermiticity": herm, "min_eigenvalue": min_eig},
            )
        return min_eig


@dataclass(frozen=True)
class Operators:
    """Field and absorber operators on the full field (x) absorbers space."""

    annihilate: Qobj
    create: Qobj
    number: Qobj
    sigma: Tuple[Qobj, ...]
    sigma_dagger: Tuple[Qobj, ...]
    sigma_z: Tuple[Qobj, ...]
    fock_dim: int
    n_absorbers: int

    @property
    def dim(self) -> int:
        return self.fock_dim * 2**self.n_absorbers

    def total_excitation(self) -> Qobj:
        """a^dag a + sum_k sigma_k^dag sigma_k."""
        total = self.number
        for s, s_dag in zip(self.sigma, self.sigma_dagger):
            total = total + s_dag * s
        return total


def _embed(op: Qobj, slot: int, dims: Sequence[int]) -> Qobj:
    factors = [qeye(d) for d in dims]
    factors[slot] = op
    return tensor(*factors)


def build_operators(n_absorbers: int, fock_dim: int) -> Operators:
    """
    Field and absorber operators, identity-padded on the other factors.

    :param n_absorbers: N_a >= 1.
    :param fock_dim: Field truncation >= 2.
    """
    if n_absorbers < 1 or fock_dim < 2:
        raise DomainError("need n_absorbers >= 1 and fock_dim >= 2")
    dims = (fock_dim,) + (2,) * n_absorbers

    # ladder order on the absorber: destroy(2) == |g><e|
    lower = destroy(2)
    pauli_z = 2 * num(2) - qeye(2)  # |e><e| - |g><g|

    a = _embed(destroy(fock_dim), 0, dims)
    sigma = tuple(_embed(lower, k, dims) for k in range(1, n_absorbers + 1))
    return Operators(
        annihilate=a,
        create=a.dag(),
        number=a.dag() * a,
        sigma=sigma,
        sigma_dagger=tuple(s.dag() for s in sigma),
        sigma_z=tuple(_embed(pauli_z, k, dims) for k in range(1, n_absorbers + 1)),
        fock_dim=fock_dim,
        n_absorbers=n_absorbers,
    )


def total_excitation(rho: DensityMatrix, ops: Operators) -> float:
    """<a^dag a + sum_k sigma_k^dag sigma_k>."""
    return float(np.real(expect(ops.total_excitation(), rho.as_qobj())))


def coherent_amplitudes(n_mean: float, fock_dim: int) -> Tuple[np.ndarray, float]:
    """
    Fock amplitudes of a real coherent state, truncated and renormalized.

    :return: (amplitudes, norm deficit lost to truncation)
    """
    if not n_mean > 0:
        raise DomainError("coherent state needs n_mean > 0")
    if fock_dim < 2:
        raise DomainError("fock_dim must be >= 2")
    n = np.arange(fock_dim)
    amplitudes = np.sqrt(poisson.pmf(n, n_mean))
    deficit = float(poisson.sf(fock_dim - 1, n_mean))
    return amplitudes / np.linalg.norm(amplitudes), deficit


def initial_field_state(config: QuantumSimConfig) -> Tuple[np.ndarray, float]:
    """Input field density matrix and its truncation deficit."""
    state = config.input_state
    if isinstance(state, FockInput):
        return fock_dm(config.fock_dim, state.n).full(), 0.0
    amplitudes, deficit = coherent_amplitudes(state.n_mean, config.fock_dim)
    if deficit > 0:
        logger.info("Coherent input truncated at fock_dim=%d, norm deficit %.3e", config.fock_dim, deficit)
    return ket2dm(Qobj(amplitudes.reshape(-1, 1))).full(), deficit


# ---------------------------------------------------------------------------
# Master equation
# ---------------------------------------------------------------------------

def _as_csr(op: Qobj) -> sparse.csr_matrix:
    return sparse.csr_matrix(op.full())


class LindbladGenerator:
    """
    Right-hand side of the master equation

        d rho/dt = -i[H, rho] + gamma_sp sum_k D[sigma_k] rho + gamma_dp sum_k D[sigma_z_k] rho

    with H = g sum_k (a sigma_k^dag + a^dag sigma_k), written through the
    effective non-Hermitian H_eff = H - (i/2) sum c^dag c so only sparse-dense
    products are needed.
    """

    def __init__(self, config: QuantumSimConfig, ops: Optional[Operators] = None) -> None:
        self.config = config
        self.ops = ops or build_operators(config.n_absorbers_per_slice, config.fock_dim)

        hamiltonian = 0 * self.ops.number
        for s, s_dag in zip(self.ops.sigma, self.ops.sigma_dagger):
            hamiltonian = hamiltonian + config.g * (self.ops.annihilate * s_dag + self.ops.create * s)

        jumps = []
        if config.gamma_sp > 0:
            jumps += [math.sqrt(config.gamma_sp) * s for s in self.ops.sigma]
        if config.gamma_dp > 0:
            jumps += [math.sqrt(config.gamma_dp) * z for z in self.ops.sigma_z]

        h_eff = hamiltonian
        for c in jumps:
            h_eff = h_eff - 0.5j * (c.dag() * c)
        self.hamiltonian = _as_csr(hamiltonian)
        self._h_eff = _as_csr(h_eff)
        self._h_eff_conj = self._h_eff.conj()
        self._jumps = [(_as_csr(c), _as_csr(c).conj()) for c in jumps]

    @property
    def is_trivial(self) -> bool:
        return self.config.g == 0 and not self._jumps

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self._h_eff @ rho)
        # rho H_eff^dag == (conj(H_eff) rho^T)^T
        out += 1j * (self._h_eff_conj @ rho.T).T
        for c, c_conj in self._jumps:
            out += (c_conj @ (c @ rho).T).T
        return out


def lindblad_rhs(
    rho: Union[DensityMatrix, np.ndarray],
    config: QuantumSimConfig,
    generator: Optional[LindbladGenerator] = None,
) -> np.ndarray:
    """d rho / dt for ``rho`` under ``config``; traceless and Hermitian."""
    gen = generator or LindbladGenerator(config)
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return gen(data)


def evolve_slice(
    rho: DensityMatrix,
    config: QuantumSimConfig,
    generator: Optional[LindbladGenerator] = None,
    slice_index: Optional[int] = None,
) -> DensityMatrix:
    """
    Evolve ``rho`` for tau_int with an adaptive Runge-Kutta pair, symmetrizing
    rho <- (rho + rho^dag) / 2 after every accepted step.

    :raises ConvergenceError: If the integrator fails (step-size underflow).
    """
    gen = generator or LindbladGenerator(config)
    if gen.is_trivial:
        return DensityMatrix(rho.data.copy(), rho.fock_dim, rho.n_absorbers)

    dim = rho.data.shape[0]
    settings = config.integrator

    def fun(_t: float, y: np.ndarray) -> np.ndarray:
        return gen(y.reshape(dim, dim)).ravel()

    solver = _SCHEMES[settings.scheme](
        fun,
        0.0,
        rho.data.astype(complex).ravel(),
        config.tau_int,
        rtol=settings.rtol,
        atol=settings.atol,
        max_step=settings.max_step if settings.max_step is not None else np.inf,
    )
    steps = 0
    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise ConvergenceError(
                f"integrator failed: {message}",
                {"slice": slice_index, "t": solver.t, "step_size": solver.step_size, "steps": steps},
            )
        state = solver.y.reshape(dim, dim)
        state[...] = 0.5 * (state + state.conj().T)
        steps += 1

    logger.debug("Slice %s: %d steps", slice_index, steps)
    return DensityMatrix(solver.y.reshape(dim, dim).copy(), rho.fock_dim, rho.n_absorbers)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

class PhotonStatistics(NamedTuple):
    mean: float
    variance: float
    fano_std: Optional[float]  # variance / mean
    fano_paper: Optional[float]  # mean / variance

    @property
    def fano_defined(self) -> bool:
        return self.fano_std is not None


def photon_statistics(rho_field: np.ndarray) -> PhotonStatistics:
    """
    Photon-number mean, variance and both Fano ratios of a field state.

    Ratios with a zero denominator are reported as None.
    """
    rho = Qobj(np.asarray(rho_field, dtype=complex))
    number = num(rho.shape[0])
    mean = float(np.real(expect(number, rho)))
    spread = max(float(np.real(variance(number, rho))), 0.0)
    fano_std = spread / mean if mean > 0 else None
    fano_paper = mean / spread if mean > 0 and spread > 0 else None
    return PhotonStatistics(mean, spread, fano_std, fano_paper)


@dataclass
class SliceRecord:
    index: int
    mean_n: float
    var_n: float
    fano_std: Optional[float]
    fano_paper: Optional[float]
    eta: float
    var_semiclassical: float = float("nan")
    trace_drift: float = 0.0
    min_eigenvalue: float = 0.0

    def row(self) -> Tuple[float, ...]:
        nan = float("nan")
        return (
            self.index,
            self.mean_n,
            self.var_n,
            nan if self.fano_std is None else self.fano_std,
            nan if self.fano_paper is None else self.fano_paper,
            self.eta,
            self.var_semiclassical,
        )


@dataclass
class SliceTrace:
    """Per-slice photon statistics; record 0 is the input state."""

    records: List[SliceRecord]
    n_absorbers: int
    input_kind: str
    input_mean: float
    input_variance: float
    truncation_deficit: float = 0.0

    @property
    def na_crossing_index(self) -> Optional[int]:
        """First slice whose mean photon number drops below N_a."""
        for record in self.records:
            if record.mean_n < self.n_absorbers:
                return record.index
        return None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) if getattr(r, name) is not None else np.nan for r in self.records])

    def etas(self) -> np.ndarray:
        return self.column("eta")

    def to_rows(self) -> List[Tuple[float, ...]]:
        return [record.row() for record in self.records]

    def noise_claim(self) -> Dict[str, Any]:
        """Evaluate this run's noise claim: super-Poissonian for coherent, suppressed for Fock."""
        saturated = [r for r in self.records if r.index > 0 and r.mean_n >= self.n_absorbers]
        if self.input_kind == "coherent":
            fanos = [r.fano_std for r in saturated if r.fano_std is not None]
            peak = max(fanos) if fanos else float("nan")
            return {
                "claim": "super_poissonian",
                "holds": bool(fanos) and peak > 1.0 + SUPER_POISSONIAN_MARGIN,
                "max_fano_std": peak,
                "threshold": 1.0 + SUPER_POISSONIAN_MARGIN,
            }
        margins = [r.var_semiclassical - r.var_n for r in saturated]
        return {
            "claim": "noise_suppressed",
            "holds": all(m >= -1e-12 for m in margins),
            "slices_checked": [r.index for r in saturated],
            "min_margin": min(margins) if margins else float("nan"),
        }


def semiclassical_baseline(
    trace_or_etas: Union[SliceTrace, Iterable[float]],
    input_var: float,
    input_mean: float,
) -> np.ndarray:
    """
    Linear-loss variance eta_i^2 Var_in + eta_i (1 - eta_i) <n_in> with eta_i
    taken from the quantum run (matched mean).
    """
    if isinstance(trace_or_etas, SliceTrace):
        etas = trace_or_etas.etas()
    else:
        etas = np.asarray(list(trace_or_etas), dtype=float)
    return etas * etas * input_var + etas * (1.0 - etas) * input_mean


def _record(index: int, rho_field: np.ndarray, input_mean: float) -> SliceRecord:
    stats = photon_statistics(rho_field)
    return SliceRecord(
        index=index,
        mean_n=stats.mean,
        var_n=stats.variance,
        fano_std=stats.fano_std,
        fano_paper=stats.fano_paper,
        eta=stats.mean / input_mean if input_mean > 0 else 1.0,
    )


def propagate_sample(config: QuantumSimConfig, progress: bool = False) -> SliceTrace:
    """
    Propagate the input field through ``config.n_slices`` fresh absorber slices.

    :param config: Simulation parameters.
    :param progress: Show a tqdm progress bar.
    """
    field_state, deficit = initial_field_state(config)
    n_a = config.n_absorbers_per_slice
    stats_in = photon_statistics(field_state)
    first = _record(0, field_state, stats_in.mean)
    records = [first]

    generator = LindbladGenerator(config) if config.g > 0 else None
    if generator is None:
        logger.info("g = 0: field decouples from the absorbers, statistics stay at the input")

    for index in tqdm(range(1, config.n_slices + 1), desc="slices", unit="slice", disable=not progress):
        if generator is None:
            records.append(_record(index, field_state, stats_in.mean))
            continue
        rho = evolve_slice(DensityMatrix.product(field_state, n_a), config, generator, slice_index=index)
        min_eig = rho.check(slice_index=index)
        field_state = rho.partial_trace_field()
        record = _record(index, field_state, stats_in.mean)
        record.trace_drift = abs(rho.trace() - 1.0)
        record.min_eigenvalue = min_eig
        records.append(record)
        logger.debug("Slice %d: <n>=%.6f var=%.6f", index, record.mean_n, record.var_n)

    trace = SliceTrace(
        records=records,
        n_absorbers=n_a,
        input_kind=config.input_state.kind,
        input_mean=stats_in.mean,
        input_variance=stats_in.variance,
        truncation_deficit=deficit,
    )
    baseline = semiclassical_baseline(trace, stats_in.variance, stats_in.mean)
    for record, var_sc in zip(trace.records, baseline):
        record.var_semiclassical = float(var_sc)
    logger.info(
        "Propagated %s input through %d slices, <n> %.4g -> %.4g",
        trace.input_kind,
        config.n_slices,
        stats_in.mean,
        records[-1].mean_n,
    )
    return trace


def check_noise_claims(
    coherent_trace: SliceTrace,
    fock_trace: SliceTrace,
    n_absorbers: Optional[int] = None,
) -> Dict[str, Any]:
    """
    Compare a coherent and a Fock run: saturation should broaden the coherent
    probe's photon statistics and leave the Fock probe below the linear-loss
    variance while the mean stays above N_a.
    """
    if n_absorbers is not None and n_absorbers != coherent_trace.n_absorbers:
        raise DomainError("n_absorbers does not match the traces")
    coherent = coherent_trace.noise_claim()
    fock = fock_trace.noise_claim()
    report = {"coherent": coherent, "fock": fock, "all_hold": coherent["holds"] and fock["holds"]}
    if not report["all_hold"]:
        logger.warning("Noise claims not met: coherent=%s fock=%s", coherent["holds"], fock["holds"])
    return report
