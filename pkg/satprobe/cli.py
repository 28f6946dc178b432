# cli.py
# -*- coding: utf-8 -*-
"""
Command-line front end.

    satprobe [--verbose] [--env FILE] <command> --config FILE [--out DIR] [--format csv|json] [--seed N]

Table commands (transmission, fisher-sweep, power-reduction, squeezed,
simulate) honour ``--format``; report commands (optimize, dbt, chlorophyll)
always write JSON.

Exit codes: 0 success, 2 config error, 3 numerical error.
"""

import argparse
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from . import __version__
from .config import (
    ChlorophyllScenarioConfig,
    DbtScenarioConfig,
    FisherSweepConfig,
    OptimizeConfig,
    PowerReductionConfig,
    SqueezedConfig,
    TransmissionConfig,
    load_config,
)
from .errors import ConfigError, SatProbeError
from .fisher import as_float, fisher_coherent, qfi_bound, quantum_advantage, squeezed_fraction_of_limit, to_db
from .io import RunManifest, write_json, write_table
from .lindblad import CSV_COLUMNS, QuantumSimConfig, propagate_sample
from .log import DEBUG, set_log_file, set_log_level
from .model import SampleSpec, transmission
from .optimize import (
    equal_precision_fock_kappa,
    optimal_kappa,
    optimal_kappa_numeric,
    optimal_length,
    power_reduction_db,
    run_chlorophyll_scenario,
    run_dbt_scenario,
)
from .settings import Settings, load_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

Table = Tuple[List[str], List[Tuple[float, ...]]]


# ---------------------------------------------------------------------------
# Figure tables
# ---------------------------------------------------------------------------

def cmd_transmission(config: TransmissionConfig) -> Table:
    """eta(z) along the sample for each kappa; kappa = 0 is the Beer-Lambert reference."""
    z = np.linspace(0.0, config.length, config.n_points)
    kappas = [0.0] + sorted({k for k in config.kappas if k > 0})
    rows = []
    for kappa in kappas:
        if kappa == 0:
            eta = np.exp(-config.absorption_coefficient * z)
        else:
            eta = transmission(np.full_like(z, kappa), config.absorption_coefficient * z)
        rows.extend((float(zi), kappa, float(ei)) for zi, ei in zip(z, eta))
    return ["z", "kappa", "eta"], rows


def cmd_fisher_sweep(config: FisherSweepConfig) -> Table:
    """Coherent FI, QFI bound and quantum advantage over kappa, per photon and per shot."""
    rows = []
    for a in config.absorptions:
        sample = SampleSpec(absorption_coefficient=a, length=config.length)
        for kappa in config.kappa_grid():
            f_c = fisher_coherent(sample, kappa)
            q = as_float(qfi_bound(sample, kappa))
            n_in = kappa * sample.photon_scale
            rows.append((kappa, a, f_c, f_c / n_in, q, q / n_in, as_float(quantum_advantage(sample, kappa))))
    columns = ["kappa", "a", "F_coherent", "F_per_photon_coherent", "Q", "Q_per_photon", "advantage"]
    return columns, rows


def cmd_power_reduction(config: PowerReductionConfig) -> Table:
    """Fock-probe intensity matching the coherent FI, and the power saving in dB."""
    rows = []
    for a in config.absorptions:
        a_l = a * config.length
        for kappa_c in config.kappa_grid():
            kappa_q = equal_precision_fock_kappa(kappa_c, a_l, config.length)
            rows.append((kappa_c, a, kappa_q, power_reduction_db(kappa_q, kappa_c)))
    return ["kappa_c", "a", "kappa_q", "reduction_db"], rows


def cmd_squeezed(config: SqueezedConfig) -> Table:
    """Squeezed-probe FI as a fraction of the QFI bound."""
    a_l = config.absorption_coefficient * config.length
    rows = []
    for r_db in config.squeezing_db:
        for kappa in config.kappa_grid():
            rows.append((kappa, r_db, squeezed_fraction_of_limit(transmission(kappa, a_l), r_db)))
    return ["kappa", "R", "Fs_over_Q"], rows


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def cmd_optimize(config: OptimizeConfig) -> Dict:
    """Optimal probe power or sample length, with the improvement over a baseline."""
    if config.target == "length":
        baseline = config.baseline_length if config.baseline_length is not None else config.length
        result = optimal_length(config.absorption_coefficient, config.kappa_in, config.length_bracket, baseline)
        return {
            "target": "length",
            "absorption_coefficient": config.absorption_coefficient,
            "kappa_in": config.kappa_in,
            "baseline": {"length": baseline, "objective": result.baseline_objective},
            "optimum": {"length": result.argmax, "objective": result.objective_at_opt},
            "improvement_db": result.improvement_db,
            "search": result.to_dict(),
        }

    sample = SampleSpec(absorption_coefficient=config.absorption_coefficient, length=config.length)
    kappa_opt, eta_opt = optimal_kappa(sample.a_l)
    f_opt = fisher_coherent(sample, kappa_opt)
    report = {
        "target": "kappa",
        "absorption_coefficient": config.absorption_coefficient,
        "length": config.length,
        "a_l": sample.a_l,
        "optimum": {"kappa": kappa_opt, "eta": eta_opt, "objective": f_opt},
        "search": optimal_kappa_numeric(sample.a_l, config.kappa_bracket).to_dict(),
        "baseline": None,
        "improvement_db": None,
    }
    if config.baseline_kappa is not None:
        f_base = fisher_coherent(sample, config.baseline_kappa)
        report["baseline"] = {"kappa": config.baseline_kappa, "objective": f_base}
        report["improvement_db"] = to_db(f_opt / f_base)
    return report


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def _run_table(fn: Callable, model) -> Callable:
    def run(
        args: argparse.Namespace, manifest: RunManifest, out_dir: Path, stem: str, settings: Settings
    ) -> List[Path]:
        columns, rows = fn(load_config(args.config, model))
        return [write_table(out_dir, stem, columns, rows, manifest, args.format)]

    return run


def _run_report(fn: Callable, model) -> Callable:
    def run(
        args: argparse.Namespace, manifest: RunManifest, out_dir: Path, stem: str, settings: Settings
    ) -> List[Path]:
        result = fn(load_config(args.config, model))
        payload = result.to_dict() if hasattr(result, "to_dict") else dict(result)
        payload["manifest"] = manifest.model_dump()
        return [write_json(out_dir / f"{stem}.json", payload)]

    return run


def cmd_simulate(
    args: argparse.Namespace, manifest: RunManifest, out_dir: Path, stem: str, settings: Settings
) -> List[Path]:
    config = load_config(args.config, QuantumSimConfig)
    trace = propagate_sample(config, progress=settings.progress)
    claim = trace.noise_claim()
    if not claim["holds"]:
        logger.warning("Expected %s behaviour not observed; trace archived in %s", claim["claim"], out_dir)
    summary = {
        "na_crossing_index": trace.na_crossing_index,
        "truncation_deficit": trace.truncation_deficit,
        "noise_claim": claim,
        "max_trace_drift": max(r.trace_drift for r in trace.records),
        "min_eigenvalue": min(r.min_eigenvalue for r in trace.records),
    }
    rows = trace.to_rows()
    if args.format == "json":
        return [write_table(out_dir, stem, CSV_COLUMNS, rows, manifest, "json", ("slice",), extra=summary)]
    csv_path = write_table(out_dir, stem, CSV_COLUMNS, rows, manifest, "csv", ("slice",))
    sidecar = dict(summary, manifest=manifest.model_dump())
    return [csv_path, write_json(out_dir / f"{stem}.json", sidecar)]


COMMANDS: Dict[str, Tuple[str, Callable]] = {
    "transmission": (
        "Transmission along the sample for several intensities",
        _run_table(cmd_transmission, TransmissionConfig),
    ),
    "fisher-sweep": (
        "Fisher information and quantum advantage over kappa",
        _run_table(cmd_fisher_sweep, FisherSweepConfig),
    ),
    "optimize": ("Optimal probe power or sample length", _run_report(cmd_optimize, OptimizeConfig)),
    "power-reduction": (
        "Fock-probe power saving at equal precision",
        _run_table(cmd_power_reduction, PowerReductionConfig),
    ),
    "squeezed": ("Squeezed-probe precision relative to the quantum limit", _run_table(cmd_squeezed, SqueezedConfig)),
    "simulate": ("Quantum slice propagation of a coherent or Fock probe", cmd_simulate),
    "dbt": ("Doppler-broadening thermometry cell scenario", _run_report(run_dbt_scenario, DbtScenarioConfig)),
    "chlorophyll": ("Chlorophyll cuvette scenario", _run_report(run_chlorophyll_scenario, ChlorophyllScenarioConfig)),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satprobe",
        description="Precision limits of saturable-absorption measurements",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log at DEBUG level")
    parser.add_argument("--env", help="Path to a .env file with SATPROBE_* settings")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", required=True, help="TOML or JSON config file")
    common.add_argument("--out", "-o", help="Output directory (default: SATPROBE_OUT_DIR or ./out)")
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="Table format")
    common.add_argument("--seed", type=int, help="Recorded in the run manifest")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, _) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        settings = load_settings(args.env)
    except ValidationError as e:
        logger.error("Invalid environment settings: %s", e)
        return EXIT_CONFIG

    set_log_level(DEBUG if args.verbose else settings.log_level)
    if settings.log_dir is not None:
        set_log_file(str(settings.log_dir))

    out_dir = Path(args.out) if args.out else settings.out_dir
    stem = Path(args.config).stem
    manifest = RunManifest(
        subcommand=args.command,
        config_path=str(args.config),
        output_dir=str(out_dir),
        seed=args.seed,
    )

    _, run = COMMANDS[args.command]
    try:
        paths = run(args, manifest, out_dir, stem, settings)
    except ConfigError as e:
        logger.error("Config error: %s", e)
        return EXIT_CONFIG
    except SatProbeError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_NUMERIC

    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
