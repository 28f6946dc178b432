# errors.py
# -*- coding: utf-8 -*-
"""
Exception hierarchy shared by every satprobe module.

Divergent precision values are not errors; see ``satprobe.fisher.Divergent``.
"""

from typing import Any, Dict, Optional


class SatProbeError(Exception):
    """Base class for all satprobe failures."""


class DomainError(SatProbeError, ValueError):
    """An argument lies outside the domain of the formula being evaluated."""


class InconsistentMeasurementError(SatProbeError):
    """A measured transmission cannot be produced by the saturable model."""


class BracketError(SatProbeError):
    """A search interval holds no interior maximum or no sign change."""


class ConvergenceError(SatProbeError):
    """
    An iteration or integrator failed to reach its tolerance.

    :param message: Human readable description.
    :param diagnostics: Extra context (slice index, time reached, step size...).
    """

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({details})"


class ConfigError(SatProbeError):
    """
    A config file is missing a field or holds an invalid value.

    :param message: Human readable description.
    :param field: Dotted name of the offending field, if known.
    """

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
