"""
Command line interface: ``syk-chaos run | diagnose | gatecost | manifest``.

Exit codes: 0 success, 2 configuration or parameter error, 3 capacity error,
4 numerical error.

History:
---------
- **2026/10**: Initial commit.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from sykchaosanalysis import __version__
from sykchaosanalysis.EnsembleDataStore import EnsembleDataStore
from sykchaosanalysis.EnsembleRunner import RunConfig, EnsembleRunner
from sykchaosanalysis.HamiltonianFactory import FAMILIES
from sykchaosanalysis.SpectralAnalyzer import SpectralAnalyzer, figure_manifest, write_manifest
from sykchaosanalysis.utils.circuits import gate_cost_report
from sykchaosanalysis.utils.dataio import write_table
from sykchaosanalysis.utils.errors import ConfigError, exit_code_for

# command-line flag -> configuration key
_MODEL_FLAGS = ("family", "d", "L", "q", "q_tilde", "M", "N", "seed", "samples", "variant", "coupling_structure")
_RUN_FLAGS = (
    "output_dir",
    "worker_count",
    "poly_degree",
    "edge_trim",
    "sff_points",
    "sff_log_tmin",
    "sff_log_tmax",
    "max_dim",
    "memory_budget_gb",
    "max_majoranas",
)


def _samples(value: str):
    return value if value == "auto" else int(value)


def _add_model_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("model")
    group.add_argument("--config", type=Path, help="key = value configuration file")
    group.add_argument("--family", choices=FAMILIES)
    group.add_argument("--d", type=int)
    group.add_argument("--L", type=int)
    group.add_argument("--q", type=int)
    group.add_argument("--q-tilde", dest="q_tilde", type=int)
    group.add_argument("--M", type=int)
    group.add_argument("--N", type=int)
    group.add_argument("--seed", type=int)
    group.add_argument("--samples", type=_samples, help="ensemble size or 'auto'")
    group.add_argument("--variant")
    group.add_argument("--coupling-structure", dest="coupling_structure")


def _add_run_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("run")
    group.add_argument("--output-dir", dest="output_dir", type=Path)
    group.add_argument("--workers", dest="worker_count", type=int)
    group.add_argument("--diagnostics", help="comma list of dos,spacings,gap_ratio,sff,gatecost")
    group.add_argument("--poly-degree", dest="poly_degree", type=int)
    group.add_argument("--edge-trim", dest="edge_trim", type=float)
    group.add_argument("--sff-points", dest="sff_points", type=int)
    group.add_argument("--sff-log-tmin", dest="sff_log_tmin", type=float)
    group.add_argument("--sff-log-tmax", dest="sff_log_tmax", type=float)
    group.add_argument("--max-dim", dest="max_dim", type=int, help="override the dense dimension cap")
    group.add_argument("--memory-budget-gb", dest="memory_budget_gb", type=float)
    group.add_argument("--max-majoranas", dest="max_majoranas", type=int, help="override the Majorana cap")
    group.add_argument("--figures", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syk-chaos",
        description="Disorder ensembles, level statistics and gate costs of SYK-type Hamiltonians",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", type=int, default=1, help="0 silent, 1 progress, 2 detail")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="diagonalise an ensemble and compute diagnostics")
    _add_model_arguments(run)
    _add_run_arguments(run)
    run.add_argument("--no-diagnostics", action="store_true", help="only fill the archive")

    diagnose = subparsers.add_parser("diagnose", help="diagnostics of an existing archive")
    diagnose.add_argument("archive", type=Path)
    _add_model_arguments(diagnose)
    _add_run_arguments(diagnose)

    gatecost = subparsers.add_parser("gatecost", help="Trotter-step gate cost of a qubit model")
    _add_model_arguments(gatecost)
    gatecost.add_argument("--output", type=Path, help="table file, printed when omitted")

    manifest = subparsers.add_parser("manifest", help="tables and the figures they feed")
    _add_model_arguments(manifest)
    _add_run_arguments(manifest)
    manifest.add_argument("--output", type=Path, help="manifest file, printed when omitted")
    return parser


def config_from_args(args: argparse.Namespace, base: Optional[dict] = None) -> RunConfig:
    """Merge the configuration file, ``base`` and explicit flags, flags winning.

    Parameters
    ----------
    args: argparse.Namespace
        parsed arguments
    base: Optional[dict], default None
        mapping applied before the flags (an archived model, for instance)

    Returns
    -------
    config: RunConfig
        validated run configuration
    """

    config = {}
    if getattr(args, "config", None) is not None:
        config = RunConfig.from_file(args.config).to_config()
    if base:
        config.update(base)
    for key in _MODEL_FLAGS + _RUN_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    diagnostics = getattr(args, "diagnostics", None)
    if diagnostics is not None:
        config["diagnostics"] = tuple(d.strip() for d in diagnostics.split(",") if d.strip())
    if getattr(args, "figures", None):
        config["figures"] = True
    if "family" not in config:
        raise ConfigError("give a model with --config or --family")
    return RunConfig.from_config(config)


def _run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    datastore = EnsembleRunner(config, verbose=args.verbose).run_ensemble()
    if not args.no_diagnostics:
        SpectralAnalyzer(datastore, config, verbose=args.verbose).compute_diagnostics()
    return 0


def _diagnose(args: argparse.Namespace) -> int:
    datastore = EnsembleDataStore(args.archive)
    config = config_from_args(args, base=datastore.spec.to_config())
    output_dir = args.output_dir if args.output_dir is not None else args.archive.parent
    SpectralAnalyzer(datastore, config, output_dir=output_dir, verbose=args.verbose).compute_diagnostics()
    return 0


def _gatecost(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    table = gate_cost_report(config.spec).to_frame()
    if args.output is not None:
        write_table(table, args.output)
    else:
        print(table.to_string(index=False))
    return 0


def _manifest(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    manifest = figure_manifest(config)
    if args.output is not None:
        write_manifest(manifest, args.output)
    else:
        print(manifest.to_string(index=False))
    return 0


_COMMANDS = {"run": _run, "diagnose": _diagnose, "gatecost": _gatecost, "manifest": _manifest}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of ``syk-chaos``; returns the process exit code."""

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as error:
        code = exit_code_for(error)
        if code == 1:
            raise
        print(f"syk-chaos {args.command}: {type(error).__name__}: {error}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
