# settings.py
# -*- coding: utf-8 -*-
"""
Runtime settings read from the environment (prefix ``SATPROBE_``).

A ``.env`` file is honoured the same way ``load_dotenv`` is used for API keys:
put ``SATPROBE_LOG_LEVEL=DEBUG`` in ``conf/.env`` and pass ``--env conf/.env``.
"""

from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide knobs that are not part of any scenario config."""

    model_config = SettingsConfigDict(env_prefix="SATPROBE_", extra="ignore")

    log_level: str = "INFO"
    log_dir: Optional[Path] = None
    out_dir: Path = Path("out")
    progress: bool = True

    @field_validator("log_level")
    @classmethod
    def _upper(cls, value: str) -> str:
        value = value.strip().upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return value


def load_settings(env_path: Optional[str] = None) -> Settings:
    """
    Load settings, optionally reading a dotenv file first.

    :param env_path: Path to a ``.env`` file. Existing environment variables win.
    """
    if env_path:
        load_dotenv(env_path, override=False)
    return Settings()
