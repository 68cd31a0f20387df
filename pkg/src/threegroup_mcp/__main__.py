from __future__ import annotations

import argparse
import logging
import logging.config
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

from pydantic import ValidationError

from . import __version__
from .cli import (
    AnalysisRequest,
    cmd_adjust,
    cmd_analyze,
    cmd_ci,
    cmd_example,
    cmd_simulate,
    parse_triple,
    sim_scenario,
)
from .config import Settings, settings_from_env
from .errors import ErrorCode, ExitCode, MultcompError
from .report import ReportDocument, render_json, render_text

LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING").upper()

LOG_CONFIG = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "default": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "default",
            "stream": "ext://sys.stderr",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": LOG_LEVEL,
    },
}

logger = logging.getLogger(__name__)

EPILOG = (
    "A hypothesis is rejected when its p-value is <= alpha. Exit status: 0 ok, 2 input parse error, "
    "3 degenerate or insufficient data, 64 usage error, 70 numerical failure."
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(int(ExitCode.usage_error), f"{self.prog}: error: {message}\n")


def _pair(text: str) -> tuple[int, int]:
    if len(text) != 2 or not text.isdigit() or text[0] == text[1] or not set(text) <= set("123"):
        raise argparse.ArgumentTypeError(f"expected a group pair such as 12, 13 or 23, got {text!r}")
    return (int(text[0]), int(text[1]))


def _triple(cast: type[float] | type[int]):
    def convert(text: str) -> tuple:
        try:
            return parse_triple(text, cast=cast)
        except MultcompError as exc:
            raise argparse.ArgumentTypeError(exc.message) from exc

    return convert


def _add_input_flags(parser: argparse.ArgumentParser) -> None:
    source = parser.add_argument_group("input (exactly one)")
    source.add_argument("--csv", type=Path, help="CSV file with header 'group,value'.")
    source.add_argument(
        "--group",
        action="append",
        default=[],
        metavar="[LABEL=]N:MEAN:SD",
        help="Summary statistics of one group; give it three times.",
    )
    source.add_argument(
        "--summary-file",
        type=Path,
        help='JSON file {"groups": [{"label": .., "n": .., "mean": .., "sd": ..}, x3]}.',
    )


def _add_common_flags(parser: argparse.ArgumentParser, settings: Settings) -> None:
    parser.add_argument("--alpha", type=float, default=settings.alpha)
    parser.add_argument("--format", choices=["text", "json"], default="text")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = _Parser(
        prog="threegroup-mcp",
        description="Multiple comparison procedures for three groups.",
        epilog=EPILOG,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="Adjusted p-values and decisions for one study.", epilog=EPILOG)
    _add_input_flags(analyze)
    analyze.add_argument(
        "--method",
        action="append",
        default=[],
        help="closed, shaffer, stepdown-dunnett, stepdown-tukey (or A-D, or all); repeatable. Default: all.",
    )
    analyze.add_argument(
        "--baseline",
        action="append",
        default=[],
        choices=["unadjusted", "anova-tukey", "anova-bonferroni"],
        help="Also report a baseline procedure; repeatable.",
    )
    analyze.add_argument("--primary", type=_pair, default=(1, 2), help="Shaffer's primary pair (12, 13 or 23).")
    analyze.add_argument("--control", type=int, choices=[1, 2, 3], default=1, help="Dunnett's control group.")
    analyze.add_argument("--trace", action="store_true", help="Print the Step 1 / Step 2 trace.")
    _add_common_flags(analyze, settings)

    adjust = commands.add_parser("adjust", help="Closed or Shaffer adjustment of given p-values.", epilog=EPILOG)
    adjust.add_argument("--p12", type=float, required=True)
    adjust.add_argument("--p13", type=float, required=True)
    adjust.add_argument("--p23", type=float, required=True)
    adjust.add_argument("--p123", type=float, help="Global (ANOVA) p-value; required by closed.")
    adjust.add_argument("--method", default="closed", help="closed or shaffer.")
    adjust.add_argument("--primary", type=_pair, default=(1, 2))
    adjust.add_argument("--trace", action="store_true")
    _add_common_flags(adjust, settings)

    simulate = commands.add_parser("simulate", help="Monte Carlo operating characteristics.", epilog=EPILOG)
    simulate.add_argument("kind", choices=["fwer", "power", "agreement", "dominance", "paradox"])
    simulate.add_argument("--means", type=_triple(float), required=True, metavar="A,B,C")
    simulate.add_argument("--sd", type=float, default=1.0)
    simulate.add_argument("--n", type=_triple(int), required=True, metavar="N[,N,N]")
    simulate.add_argument("--method", action="append", default=[], help="Method name; repeatable.")
    simulate.add_argument("--methods", default="", help="Comma-separated method names.")
    simulate.add_argument("--family", choices=["pairwise", "all", "both"], default="both")
    simulate.add_argument("--primary", type=_pair, default=(1, 2))
    simulate.add_argument("--control", type=int, choices=[1, 2, 3], default=1)
    simulate.add_argument("--reps", type=int, default=settings.reps)
    simulate.add_argument("--seed", type=int, default=settings.seed)
    simulate.add_argument("--workers", type=int, default=settings.workers)
    simulate.add_argument("--chunk-size", type=int, default=settings.chunk_size)
    _add_common_flags(simulate, settings)

    ci = commands.add_parser("ci", help="Single-step simultaneous confidence intervals.", epilog=EPILOG)
    _add_input_flags(ci)
    ci.add_argument("--family", choices=["tukey", "dunnett"], default="tukey")
    ci.add_argument("--control", type=int, choices=[1, 2, 3], default=1)
    _add_common_flags(ci, settings)

    example = commands.add_parser("example", help="Reproduce the worked example.", epilog=EPILOG)
    example.add_argument("--trace", action="store_true")
    _add_common_flags(example, settings)
    return parser


def _request(args: argparse.Namespace) -> AnalysisRequest:
    try:
        return AnalysisRequest(csv=args.csv, groups=tuple(args.group), summary_file=args.summary_file)
    except ValidationError as exc:
        raise MultcompError(
            code=ErrorCode.usage_error,
            message="give exactly one of --csv, --group (three times) or --summary-file",
        ) from exc


def run(args: argparse.Namespace) -> ReportDocument:
    match args.command:
        case "analyze":
            return cmd_analyze(
                _request(args),
                methods=args.method,
                baselines=args.baseline,
                primary=args.primary,
                control=args.control,
                alpha=args.alpha,
            )
        case "adjust":
            return cmd_adjust(
                args.p12,
                args.p13,
                args.p23,
                args.p123,
                method=args.method,
                primary=args.primary,
                alpha=args.alpha,
            )
        case "simulate":
            methods = [*args.method, *(name for name in args.methods.split(",") if name.strip())]
            scenario = sim_scenario(
                args.means,
                args.sd,
                args.n,
                alpha=args.alpha,
                reps=args.reps,
                seed=args.seed,
            )
            return cmd_simulate(
                args.kind,
                scenario,
                methods,
                family=args.family,
                primary=args.primary,
                control=args.control,
                workers=args.workers,
                chunk_size=args.chunk_size,
            )
        case "ci":
            return cmd_ci(_request(args), family=args.family, control=args.control, alpha=args.alpha)
        case "example":
            return cmd_example(alpha=args.alpha)
    raise MultcompError(code=ErrorCode.usage_error, message=f"unknown command {args.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    logging.config.dictConfig(LOG_CONFIG)
    try:
        settings = settings_from_env()
    except MultcompError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return int(exc.exit_code)

    args = build_parser(settings).parse_args(argv)
    try:
        document = run(args)
    except MultcompError as exc:
        logger.debug("Command failed (command=%s, code=%s, details=%s)", args.command, exc.code, exc.details)
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return int(exc.exit_code)

    if args.format == "json":
        print(render_json(document))
    else:
        print(render_text(document, trace=getattr(args, "trace", False)))
    return int(ExitCode.ok)


if __name__ == "__main__":
    sys.exit(main())
