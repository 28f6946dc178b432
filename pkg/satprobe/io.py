# io.py
# -*- coding: utf-8 -*-
"""
CSV and JSON writers for figure data and reports.

CSV files start with ``# key: value`` manifest lines, then a header row, then
rows in ``%.16e`` (17 significant digits). Nothing time-dependent is written,
so identical inputs give byte-identical files.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from . import __version__

logger = logging.getLogger(__name__)

FLOAT_FMT = "%.16e"


class RunManifest(BaseModel):
    """Provenance embedded in every output file."""

    model_config = ConfigDict(frozen=True)

    subcommand: str
    config_path: str
    output_dir: str
    seed: Optional[int] = None
    tool_version: str = __version__

    def header_lines(self) -> List[str]:
        return [f"# {key}: {value}" for key, value in self.model_dump().items()]


def _clean(value: Any) -> Any:
    """Make a value strict-JSON safe: NaN/inf become None, numpy scalars become Python."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def write_csv(
    path: Union[str, Path],
    columns: Sequence[str],
    rows: Sequence[Sequence[float]],
    manifest: RunManifest,
    int_columns: Sequence[str] = (),
) -> Path:
    """
    Write a numeric table with the manifest as ``#`` lines.

    :param path: Output file.
    :param columns: Column names, in order.
    :param rows: Row tuples matching ``columns``.
    :param manifest: Run provenance.
    :param int_columns: Columns printed as integers.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.asarray(rows, dtype=float).reshape(-1, len(columns))
    fmt = ["%d" if name in int_columns else FLOAT_FMT for name in columns]
    header = "\n".join(manifest.header_lines() + [",".join(columns)])
    np.savetxt(path, data, fmt=fmt, delimiter=",", header=header, comments="")
    logger.info("Wrote %s (%d rows)", path, data.shape[0])
    return path


def write_table(
    out_dir: Union[str, Path],
    stem: str,
    columns: Sequence[str],
    rows: Sequence[Sequence[float]],
    manifest: RunManifest,
    fmt: str = "csv",
    int_columns: Sequence[str] = (),
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write ``rows`` as ``<stem>.csv`` or ``<stem>.json`` under ``out_dir``."""
    out_dir = Path(out_dir)
    if fmt == "csv":
        return write_csv(out_dir / f"{stem}.csv", columns, rows, manifest, int_columns)
    records = [
        {name: (int(v) if name in int_columns else float(v)) for name, v in zip(columns, row)} for row in rows
    ]
    payload = {"manifest": manifest.model_dump(), "columns": list(columns), "rows": records}
    payload.update(extra or {})
    return write_json(out_dir / f"{stem}.json", payload)


def read_csv(path: Union[str, Path]) -> Tuple[Dict[str, str], List[str], np.ndarray]:
    """
    Read a table written by ``write_csv``.

    :return: (manifest fields, column names, data array)
    """
    manifest: Dict[str, str] = {}
    columns: List[str] = []
    skip = 0
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            skip += 1
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                manifest[key] = value
                continue
            columns = line.strip().split(",")
            break
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    return manifest, columns, data
