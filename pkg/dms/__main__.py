# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import argparse
import logging
import sys
from typing import List, Optional

from .cli import KINDS, load_spec, run, validate, write_report

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_WARNINGS = 2

# errors a spec or a module can raise for bad input
_USER_ERRORS = (ValueError, TypeError, KeyError, RuntimeError, OSError)

KIND_HELP = {
    "norm": "Weighted or unweighted sequence norm of a given coefficient sequence",
    "adtest": "Ensemble norm ratios of an almost diagonal operator",
    "dims": "Estimated A_p,inf lower and upper dimensions of a weight",
    "trace": "Trace norm ratios from R^(n+1) to R^n",
    "ext": "Extension norm ratios from R^n to R^(n+1)",
    "psido": "Molecule checks of a pseudo-differential operator applied to wavelets",
    "czo": "Kernel conditions and atom images of a Calderon-Zygmund operator",
    "wavelet-check": "Orthonormality and moment residuals of a Daubechies system",
}


def _experiment(arguments: argparse.Namespace) -> int:
    logger = logging.getLogger("dms")
    try:
        spec = load_spec(arguments.spec, arguments.window)
        if spec.kind != arguments.COMMAND:
            raise ValueError(
                f"{arguments.spec} describes a {spec.kind!r} experiment, "
                f"not {arguments.COMMAND!r}"
            )
        result = run(spec, arguments.workers)
        write_report(result, spec, arguments.out)
    except _USER_ERRORS as error:
        logger.error(f"{arguments.COMMAND} failed: {error}")
        print(f"error: {error}", file=sys.stderr)
        return EXIT_ERROR
    for message in result.warnings:
        print(f"warning: {message}", file=sys.stderr)
    return EXIT_WARNINGS if result.warnings else EXIT_OK


def _validate(arguments: argparse.Namespace) -> int:
    try:
        spec = load_spec(arguments.spec, arguments.window)
    except _USER_ERRORS as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_ERROR
    messages = validate(spec)
    for message in messages:
        print(message)
    return EXIT_WARNINGS if messages else EXIT_OK


def _common_spec_args(parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser.add_argument(
        "--spec",
        help="experiment document in a json file",
        required=True,
    )
    parser.add_argument(
        "--window",
        help="window override j_min:j_max:box",
        required=False,
        default=None,
    )
    return parser


def _parser() -> argparse.ArgumentParser:
    root_parser = argparse.ArgumentParser(
        prog="dms",
        description="Runs experiments on matrix-weighted dyadic sequence spaces and "
        "writes a json report with csv tables",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )

    root_parser.add_argument(
        "--verbose",
        action="store_true",
        required=False,
        default=False,
    )

    subparsers = root_parser.add_subparsers(
        required=True,
        dest="COMMAND",
        help="experiment kind, or validate to only print diagnostics",
    )

    for kind in KINDS:
        kind_parser = subparsers.add_parser(kind, help=KIND_HELP[kind])
        _common_spec_args(kind_parser)
        kind_parser.add_argument(
            "--out",
            help="output directory for report.json and the csv files",
            required=True,
        )
        kind_parser.add_argument(
            "--workers",
            help="parallel jobs, -1 for all cores; capped by DMS_THREADS",
            type=int,
            required=False,
            default=None,
        )
        kind_parser.set_defaults(func=_experiment)

    validate_parser = subparsers.add_parser(
        "validate",
        help="Prints the diagnostics of an experiment document without running it",
    )
    _common_spec_args(validate_parser)
    validate_parser.set_defaults(func=_validate)
    return root_parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(
            format="%(asctime)s:%(levelname)s:%(name)s, %(message)s",
            level=logging.INFO,
        )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
