#!/usr/bin/env python3
"""
Squeezed-state revival laboratory
Command-line front end: runs one experiment from a JSON run document and
writes its CSV tables and manifest.

Exit codes: 0 success, 1 failed check or refused run, 2 invalid configuration.
"""

import argparse
import json
import logging
import logging.config
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from config import config
from errors import DimensionLimitError, LabError, ParameterError
from experiments import run_experiment, write_outputs
from run_config import EXPERIMENTS, parse_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="Path to the JSON run document")
    common.add_argument("--out", type=str, help="Output directory (overrides the document)")
    common.add_argument("--cutoff", type=int, help="Per-mode Fock cutoff (overrides the document)")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    parser = argparse.ArgumentParser(description="Squeezed-state revival laboratory")
    subcommands = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "spectrum": "Compare the RWA diagonal with the closed-form eigenvalues",
        "evolve": "Evolve a squeezed initial state under the effective Hamiltonian",
        "revival": "Scan fractional revivals of the opposite-phase squeezed state",
        "adiabatic": "Check the elimination of the excited level over a detuning sweep",
        "validity": "Estimate the atom number limit of the single-mode picture",
    }
    for name in EXPERIMENTS:
        subcommands.add_parser(name, parents=[common], help=descriptions[name])
    return parser


def validate_setup() -> bool:
    """Validate the environment configuration"""
    results = config.validate_config()
    for warning in results['warnings']:
        logger.warning(warning)
    for error in results['errors']:
        logger.error(error)
    return results['valid']


def load_document(path: Path) -> dict:
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def print_summary(experiment: str, summary: dict, files: dict):
    digits = config.summary_digits
    print(f"\n{experiment} summary:")
    for key, value in summary.items():
        shown = f"{value:.{digits}g}" if isinstance(value, float) else value
        print(f"  {key}: {shown}")
    print("Files:")
    for name, path in files.items():
        print(f"  {name}: {path}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main application function"""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.config.dictConfig(config.get_logging_config(quiet=args.quiet))

    if not validate_setup():
        logger.error("Environment configuration validation failed")
        return EXIT_INVALID_CONFIG

    try:
        document = load_document(args.config)
        run_config = parse_config(document, experiment=args.command, cutoff=args.cutoff)
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Cannot read run document {args.config}: {e}")
        return EXIT_INVALID_CONFIG
    except ValidationError as e:
        for error in e.errors():
            location = '.'.join(str(part) for part in error['loc']) or '<document>'
            logger.error(f"Invalid run document: {location}: {error['msg']}")
        return EXIT_INVALID_CONFIG
    except (ValueError, ParameterError) as e:
        logger.error(f"Invalid run document: {e}")
        return EXIT_INVALID_CONFIG

    try:
        result = run_experiment(run_config)
    except DimensionLimitError as e:
        logger.error(f"Refusing run: {e} (requires {e.required}, limit {e.limit})")
        return EXIT_FAILED
    except LabError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_FAILED

    files = write_outputs(result, run_config, out_dir=args.out)
    if not args.quiet:
        print_summary(result.experiment, result.summary, files)

    if not result.passed:
        for failure in result.failures:
            logger.error(f"Check failed: {failure}")
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
