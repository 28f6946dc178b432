# config.py
# -*- coding: utf-8 -*-
"""
Config files for scenarios, figure sweeps and simulations.

Files are TOML or JSON. Each subcommand has one pydantic model; unknown keys
are rejected so that a typo never silently falls back to a default.
"""

import json
import logging
import math
import tomllib
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, ValidationError, model_validator

from .errors import ConfigError
from .model import SaturationUnit, intensity_to_kappa

logger = logging.getLogger(__name__)

ConfigT = TypeVar("ConfigT", bound=BaseModel)


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class KappaGrid(_Config):
    """Log-spaced kappa grid, optionally extended by explicit points."""

    kappa_min: PositiveFloat = 1e-2
    kappa_max: PositiveFloat = 1e2
    n_kappa: int = Field(201, ge=2)
    kappas: List[PositiveFloat] = Field(default_factory=list)

    @model_validator(mode="after")
    def _ordered(self) -> "KappaGrid":
        if self.kappa_min >= self.kappa_max:
            raise ValueError("kappa_min must be below kappa_max")
        return self

    def kappa_grid(self) -> np.ndarray:
        grid = np.logspace(math.log10(self.kappa_min), math.log10(self.kappa_max), self.n_kappa)
        return np.unique(np.concatenate([grid, np.asarray(self.kappas, dtype=float)]))


# ---------------------------------------------------------------------------
# Figure sweeps
# ---------------------------------------------------------------------------

class TransmissionConfig(_Config):
    absorption_coefficient: float = Field(ge=0)
    length: PositiveFloat
    n_points: int = Field(101, ge=2)
    kappas: List[NonNegativeFloat] = Field(min_length=1)


class FisherSweepConfig(KappaGrid):
    length: PositiveFloat = 1.0
    absorptions: List[PositiveFloat]


class PowerReductionConfig(KappaGrid):
    length: PositiveFloat = 1.0
    absorptions: List[PositiveFloat]


class SqueezedConfig(KappaGrid):
    absorption_coefficient: PositiveFloat
    length: PositiveFloat = 1.0
    squeezing_db: List[float] = Field(min_length=1)

    @model_validator(mode="after")
    def _non_negative(self) -> "SqueezedConfig":
        if any(r < 0 for r in self.squeezing_db):
            raise ValueError("squeezing_db values must be >= 0")
        return self


class OptimizeConfig(_Config):
    """
    ``target = "kappa"`` optimizes probe power at fixed length;
    ``target = "length"`` optimizes length at fixed input-face kappa.
    """

    target: Literal["kappa", "length"]
    absorption_coefficient: NonNegativeFloat
    length: PositiveFloat = 1.0
    kappa_in: Optional[PositiveFloat] = None
    baseline_kappa: Optional[PositiveFloat] = None
    baseline_length: Optional[PositiveFloat] = None
    kappa_bracket: Tuple[PositiveFloat, PositiveFloat] = (1e-3, 1e3)
    length_bracket: Optional[Tuple[PositiveFloat, PositiveFloat]] = None

    @model_validator(mode="after")
    def _needs_kappa(self) -> "OptimizeConfig":
        if self.target == "length" and self.kappa_in is None:
            raise ValueError("kappa_in is required when target = 'length'")
        return self


# ---------------------------------------------------------------------------
# Worked scenarios
# ---------------------------------------------------------------------------

class DbtScenarioConfig(_Config):
    """
    Doppler-broadening thermometry cell.

    The probe is given either as ``kappa`` or as a physical ``intensity`` with
    ``n_s``; the sample either as ``eta_measured`` at that probe or as a quoted
    ``absorption_coefficient``. With both, the report carries both blocks.
    """

    length: PositiveFloat
    n_s: Optional[PositiveFloat] = None
    n_s_unit: SaturationUnit = SaturationUnit.W_PER_CM2
    kappa: Optional[PositiveFloat] = None
    intensity: Optional[PositiveFloat] = None
    intensity_unit: SaturationUnit = SaturationUnit.W_PER_CM2
    wavelength_nm: Optional[PositiveFloat] = None
    eta_measured: Optional[PositiveFloat] = None
    absorption_coefficient: Optional[float] = Field(None, ge=0)
    detector_efficiency: Optional[float] = Field(None, gt=0, le=1)
    power_step_db: float = 6.0

    @model_validator(mode="after")
    def _sources(self) -> "DbtScenarioConfig":
        if self.kappa is None and (self.intensity is None or self.n_s is None):
            raise ValueError("give kappa, or intensity together with n_s")
        if self.eta_measured is None and self.absorption_coefficient is None:
            raise ValueError("give eta_measured, absorption_coefficient, or both")
        return self

    def operating_kappa(self) -> float:
        if self.kappa is not None:
            return self.kappa
        return intensity_to_kappa(
            self.intensity, self.n_s, self.n_s_unit, self.wavelength_nm, self.intensity_unit
        )


class ChlorophyllScenarioConfig(_Config):
    """
    Dye solution in a cuvette, saturation data from cross-section and lifetime.

    The probe is ``kappa``, or ``intensity`` [W/cm^2], or ``power_w`` over
    ``beam_area_cm2``.
    """

    sigma: PositiveFloat
    tau: PositiveFloat
    wavelength_nm: PositiveFloat
    eta_measured: PositiveFloat
    length: PositiveFloat = 1.0
    kappa: Optional[PositiveFloat] = None
    intensity: Optional[PositiveFloat] = None
    power_w: Optional[PositiveFloat] = None
    beam_area_cm2: Optional[PositiveFloat] = None
    length_bracket: Tuple[PositiveFloat, PositiveFloat] = (0.5, 10.0)
    baseline_length: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _probe(self) -> "ChlorophyllScenarioConfig":
        given = [self.kappa is not None, self.intensity is not None, self.power_w is not None]
        if sum(given) != 1:
            raise ValueError("give exactly one of kappa, intensity, power_w")
        if self.power_w is not None and self.beam_area_cm2 is None:
            raise ValueError("power_w needs beam_area_cm2")
        return self


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def read_config_file(path: Union[str, Path]) -> dict:
    """
    Parse a TOML or JSON file into a plain dict.

    :raises ConfigError: On a missing file, unknown suffix or parse error.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            with path.open("rb") as fh:
                return tomllib.load(fh)
        if suffix == ".json":
            with path.open("r", encoding="utf-8") as fh:
                return json.load(fh)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    raise ConfigError(f"unsupported config format '{suffix}' (use .toml or .json)")


def validate_config(data: dict, model: Type[ConfigT]) -> ConfigT:
    """Validate ``data`` against ``model``, naming the first bad field on failure."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ())) or None
        raise ConfigError(first.get("msg", str(e)), field=field) from e


def load_config(path: Union[str, Path], model: Type[ConfigT]) -> ConfigT:
    config = validate_config(read_config_file(path), model)
    logger.debug("Loaded %s from %s", model.__name__, path)
    return config
