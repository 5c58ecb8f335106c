from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import APP_NAME, DEFAULT_OUT_DIR, DEFAULT_WORKERS, MAX_WORKERS, PROG_NAME
from .errors import DriftDataError
from .ingest import FORMATS
from .models import RunSettings
from .pipeline import configure_logging, default_log_file, run_pipeline

COMMANDS = {
    "ingest": "parse, normalize and filter records; write the normalized corpus",
    "stats": "write per-field yearly and per-period corpus statistics",
    "dissim": "write the twelve dissimilarity measures for successive years",
    "pca": "dissim + PCA loadings and scree table",
    "evolve": "pca + translated PC1 series and evolution speed table",
    "report": "full pipeline: every CSV report",
}

logger = logging.getLogger("drift_app.cli")


def _year_span(value: str, what: str) -> tuple[int, int]:
    start_text, sep, end_text = value.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected A:B, got {value!r}")
    try:
        start, end = int(start_text), int(end_text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integer years in {value!r}") from exc
    if end < start:
        raise argparse.ArgumentTypeError(f"empty {what}")
    return start, end


def year_range(value: str) -> tuple[int, int]:
    return _year_span(value, "year range")


def period_list(value: str) -> tuple[tuple[int, int], ...]:
    periods = []
    for part in value.split(","):
        if not part.strip():
            continue
        start, end = _year_span(part.strip(), "period")
        if start == end:
            raise argparse.ArgumentTypeError(f"period {part.strip()!r} contains no year pairs")
        periods.append((start, end))
    if not periods:
        raise argparse.ArgumentTypeError("no periods given")
    return tuple(periods)


def year_pair(value: str) -> tuple[int, int]:
    first, sep, second = value.partition(":")
    try:
        t, s = int(first), int(second)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected T:S years, got {value!r}") from exc
    if not sep or t == s:
        raise argparse.ArgumentTypeError("pair needs two different years")
    return t, s


def field_list(value: str) -> tuple[str, ...]:
    fields = tuple(dict.fromkeys(part.strip() for part in value.split(",") if part.strip()))
    if not fields:
        raise argparse.ArgumentTypeError("no fields given")
    return fields


def worker_count(value: str) -> int:
    try:
        count = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid worker count {value!r}") from exc
    if not 1 <= count <= MAX_WORKERS:
        raise argparse.ArgumentTypeError(f"workers must be between 1 and {MAX_WORKERS}")
    return count


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", dest="inputs", action="append", type=Path, required=True, metavar="PATH",
                        help="record file (repeatable)")
    common.add_argument("--format", dest="input_format", choices=FORMATS, default="tsv")
    common.add_argument("--fields", type=field_list, default=(), metavar="CSV-LIST",
                        help="field codes to analyze, in output order (default: all, in first-seen order)")
    common.add_argument("--years", type=year_range, default=None, metavar="A:B",
                        help="inclusive year range (default: the data's range)")
    common.add_argument("--periods", type=period_list, default=(), metavar="A:B[,A:B...]",
                        help="speed/statistics windows")
    common.add_argument("--language", default=None, metavar="TAG", help="keep only records with this language tag")
    common.add_argument("--out", dest="out_dir", type=Path, default=DEFAULT_OUT_DIR, metavar="DIR")
    common.add_argument("--strict", action="store_true", help="treat record-level parse errors as fatal")
    common.add_argument("--workers", type=worker_count, default=DEFAULT_WORKERS, metavar="N")
    common.add_argument("--log-file", nargs="?", const="auto", default=None, metavar="PATH",
                        help="also log to PATH (or to a timestamped file under logs/)")
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog=PROG_NAME,
        description=f"{APP_NAME}: quantify how a document corpus evolves year over year from its keyword distributions.",
    )
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, help_text in COMMANDS.items():
        sub = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name in {"dissim", "pca", "evolve", "report"}:
            sub.add_argument("--dump-distributions", action="store_true",
                             help="also write distributions/<field>_<year>.csv")
        if name == "dissim":
            sub.add_argument("--pair", type=year_pair, default=None, metavar="T:S",
                             help="compare two arbitrary years instead of successive pairs")
    return parser


def _settings_from_args(args: argparse.Namespace) -> RunSettings:
    if args.log_file == "auto":
        log_file = default_log_file(args.command)
    elif args.log_file:
        log_file = Path(args.log_file)
    else:
        log_file = None
    return RunSettings(
        command=args.command,
        inputs=list(args.inputs),
        input_format=args.input_format,
        fields=tuple(args.fields),
        years=args.years,
        periods=tuple(args.periods),
        language=args.language,
        out_dir=args.out_dir,
        strict=args.strict,
        workers=args.workers,
        log_file=log_file,
        verbose=args.verbose,
        dump_distributions=getattr(args, "dump_distributions", False),
        pair=getattr(args, "pair", None),
    )


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    settings = _settings_from_args(args)
    configure_logging(settings.log_file, settings.verbose)
    try:
        result = run_pipeline(settings)
    except DriftDataError as exc:
        logger.error("%s", exc)
        return 1
    except OSError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return 1
    for path in result.written:
        print(path)
    return 0
