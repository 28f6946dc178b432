from pathlib import Path

import numpy as np
import pytest

from satprobe.config import load_config
from satprobe.lindblad import QuantumSimConfig, propagate_sample
from satprobe.model import SampleSpec

CONF_DIR = Path(__file__).resolve().parent.parent / "conf"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def conf_dir():
    return CONF_DIR


@pytest.fixture
def unit_sample():
    """a = 1 /cm, L = 1 cm, dimensionless photon counting."""
    return SampleSpec(absorption_coefficient=1.0, length=1.0)


@pytest.fixture
def dbt_sample():
    return SampleSpec(absorption_coefficient=1.898 / 0.75, length=0.75)


@pytest.fixture(scope="session")
def reduced_fock_trace():
    return propagate_sample(load_config(CONF_DIR / "fig4_reduced_fock.toml", QuantumSimConfig))


@pytest.fixture(scope="session")
def reduced_coherent_trace():
    return propagate_sample(load_config(CONF_DIR / "fig4_reduced_coherent.toml", QuantumSimConfig))


@pytest.fixture(scope="session")
def saturated_coherent_trace():
    return propagate_sample(load_config(CONF_DIR / "saturated_coherent.toml", QuantumSimConfig))
