# File: app/cli.py

"""
Command line entry point: `python -m app <subcommand> [options]`.

Data goes to stdout or --out; log records go to stderr.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import EXIT_NUMERICAL, EXIT_USAGE, OpolyError, exit_code_for
from app.schemas.run_config import RunConfig, Subcommand
from app.services.pipeline import render

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so main() owns the exit status."""

    def error(self, message: str):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _common(parser: argparse.ArgumentParser, *, needs_t: bool = True) -> None:
    parser.add_argument("--nu", required=True, help="Weight exponent, a decimal string.")
    if needs_t:
        parser.add_argument("--t", required=True, help="Deformation parameter t > 0.")
    parser.add_argument("--digits", type=int, default=settings.OPOLY_DEFAULT_DIGITS)
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--out", default=None, help="Write output to this path instead of stdout.")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opoly", description="Orthonormal polynomials for x^nu exp(-x - t/x).")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    _common(sub.add_parser(Subcommand.RHO.value, help="Moment rho_nu(t)."))

    coeffs = sub.add_parser(Subcommand.COEFFS.value, help="Recurrence coefficients and monomial coefficients.")
    _common(coeffs)
    coeffs.add_argument("--n-max", type=int, default=settings.OPOLY_N_MAX_DEFAULT)

    quad = sub.add_parser(Subcommand.QUAD.value, help="Gauss nodes and weights.")
    _common(quad)
    quad.add_argument("--m", type=int, required=True)

    verify = sub.add_parser(Subcommand.VERIFY.value, help="Residual report for the identity suite.")
    _common(verify)
    verify.add_argument("--n-max", type=int, default=6)
    verify.add_argument("--suite", default="all", help="Comma separated identity ids, or 'all'.")
    verify.add_argument("--seed", type=int, default=settings.OPOLY_DEFAULT_SEED)

    expand = sub.add_parser(Subcommand.EXPAND.value, help="Laguerre expansion coefficients and their bounds.")
    _common(expand)
    expand.add_argument("--n", type=int, required=True)
    expand.add_argument("--k-max", type=int, default=None)

    limit = sub.add_parser(Subcommand.LIMIT.value, help="Small-t values against the Laguerre limit.")
    _common(limit, needs_t=False)
    limit.add_argument("--n-max", type=int, default=6)

    ev = sub.add_parser(Subcommand.EVAL.value, help="P_n(x, t) by the recurrence.")
    _common(ev)
    ev.add_argument("--n", type=int, required=True)
    ev.add_argument("--x", required=True)
    ev.add_argument("--oracle", action="store_true", help="Also evaluate by the moment determinant.")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {key: value for key, value in vars(args).items() if value is not None}
    if "suite" in fields:
        fields["suite"] = [part.strip() for part in fields["suite"].split(",") if part.strip()]
    return RunConfig(**fields)


def run(config: RunConfig) -> int:
    """Render one configuration to stdout or config.out; returns the exit status."""
    text, status = render(config)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        logger.info(f"Wrote {config.subcommand.value} output to {config.out}")
    else:
        sys.stdout.write(text)
    return status


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        stream=sys.stderr,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        config = config_from_args(build_parser().parse_args(argv))
    except _UsageError as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE

    try:
        return run(config)
    except OpolyError as e:
        logger.error(f"{config.subcommand.value} failed: {e}", exc_info=True)
        return exit_code_for(e)
    except (ArithmeticError, ValueError) as e:
        logger.error(f"{config.subcommand.value} failed: {e}", exc_info=True)
        return EXIT_NUMERICAL
