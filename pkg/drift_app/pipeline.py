from __future__ import annotations

import datetime as dt
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import psutil

from .config import LOG_ROOT, MAX_REPORTED_PARSE_ERRORS
from .errors import InsufficientDataError, ZeroVarianceColumnError
from .evolution import (
    build_dissimilarity_matrix,
    build_distributions,
    build_series,
    compare_years,
    rank_fields,
    resolve_periods,
    score_matrix,
    speed_table,
)
from .ingest import parse_paths, partition, serialize_records
from .models import CorrelationReport, DissimilarityMatrix, MeasureSummary, PartitionResult, RunSettings
from .reporting import (
    correlation_report,
    descriptive_stats,
    install_output,
    measure_summary,
    write_correlation,
    write_corpus_stats,
    write_dissimilarity,
    write_distributions,
    write_evolution,
    write_measure_summary,
    write_pca,
    write_scatter,
    write_speed,
    write_speed_ranking,
)

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(threadName)s | %(message)s"
LOG_DATEFMT = "%H:%M:%S"

logger = logging.getLogger("drift_app.pipeline")


def configure_logging(log_file: Path | None = None, verbose: bool = False) -> None:
    formatter = logging.Formatter(LOG_FORMAT, LOG_DATEFMT)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    root.addHandler(stream_handler)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)


def default_log_file(command: str) -> Path:
    stamp = dt.datetime.now().strftime("%Y%m%d-%H%M%S")
    return LOG_ROOT / f"{command}_{stamp}_{os.getpid()}.log"


@dataclass
class PipelineResult:
    written: list[Path] = field(default_factory=list)
    record_count: int = 0
    filtered_count: int = 0
    parse_errors: int = 0
    rows: int = 0


def _load_corpus(settings: RunSettings, result: PipelineResult) -> PartitionResult:
    parsed = parse_paths(settings.inputs, settings.input_format, strict=settings.strict, workers=settings.workers)
    result.parse_errors = len(parsed.errors)
    for error in parsed.errors[:MAX_REPORTED_PARSE_ERRORS]:
        logger.warning("Skipped record: %s", error)
    if len(parsed.errors) > MAX_REPORTED_PARSE_ERRORS:
        logger.warning("... and %d more record error(s).", len(parsed.errors) - MAX_REPORTED_PARSE_ERRORS)

    if settings.years is None:
        if not parsed.records:
            raise InsufficientDataError("no records parsed and no --years given")
        years = (min(r.year for r in parsed.records), max(r.year for r in parsed.records))
        settings.years = years
        logger.info("Year range not given; using %d:%d from the data.", *years)
    if not settings.fields:
        settings.fields = tuple(dict.fromkeys(r.field_code for r in parsed.records))
        if not settings.fields:
            raise InsufficientDataError("no records parsed and no --fields given")
        logger.info("Fields not given; using %s from the data.", ",".join(settings.fields))

    corpus = partition(parsed.records, settings.fields, settings.years, language=settings.language)
    result.record_count = len(parsed.records)
    result.filtered_count = corpus.filtered_count
    logger.info(
        "Partitioned %d record(s) into %d bucket(s); %d filtered out.",
        corpus.record_count,
        len(corpus.buckets),
        corpus.filtered_count,
    )
    return corpus


def _run_ingest(settings: RunSettings, corpus: PartitionResult, result: PipelineResult) -> None:
    kept = [
        record
        for field_code in corpus.fields
        for year in corpus.years
        for record in corpus.bucket(field_code, year).records
    ]
    suffix = "jsonl" if settings.input_format == "jsonl" else "tsv"
    path = settings.out_dir / f"records.{suffix}"
    result.written.append(install_output(path, serialize_records(kept, settings.input_format)))


def _run_stats(settings: RunSettings, corpus: PartitionResult, result: PipelineResult) -> None:
    periods = resolve_periods(settings.years, settings.periods)
    stats = descriptive_stats(corpus, settings.fields, settings.years, periods)
    result.written.append(write_corpus_stats(settings.out_dir, stats))


def _run_pair(settings: RunSettings, corpus: PartitionResult, result: PipelineResult) -> None:
    t, s = settings.pair
    for year in (t, s):
        if year not in corpus.years:
            raise InsufficientDataError(f"year {year} lies outside the analyzed range")
    rows = tuple(compare_years(corpus, field_code, t, s) for field_code in settings.fields)
    result.rows = len(rows)
    result.written.append(write_dissimilarity(settings.out_dir, DissimilarityMatrix(rows), f"dissimilarity_{t}_{s}.csv"))


def _field_correlations(matrix: DissimilarityMatrix, fields: tuple[str, ...]) -> list[CorrelationReport]:
    reports = []
    for field_code in fields:
        try:
            reports.append(correlation_report(matrix, field_code))
        except (InsufficientDataError, ZeroVarianceColumnError) as exc:
            logger.warning("Skipping correlation for field %s: %s", field_code, exc)
    return reports


def _run_analysis(settings: RunSettings, corpus: PartitionResult, result: PipelineResult) -> None:
    # Every stage is computed before the first file is written.
    command = settings.command
    distributions = build_distributions(corpus, settings.fields, settings.years)
    matrix = build_dissimilarity_matrix(
        corpus,
        settings.fields,
        settings.years,
        workers=settings.workers,
        distributions=distributions,
    )
    result.rows = len(matrix.rows)

    model = scored = reports = stats = None
    summaries: list[MeasureSummary] = []
    correlations: list[CorrelationReport] = []
    if command != "dissim":
        model, scored = score_matrix(matrix)
    if command in {"evolve", "report"}:
        periods = resolve_periods(settings.years, settings.periods)
        reports = speed_table(build_series(scored), periods)
    if command == "report":
        stats = descriptive_stats(corpus, settings.fields, settings.years, periods)
        summaries = [measure_summary(matrix, field_code) for field_code in settings.fields]
        correlations = _field_correlations(matrix, settings.fields)

    out_dir = settings.out_dir
    written = result.written
    if settings.dump_distributions:
        written.extend(write_distributions(out_dir, list(distributions.values())))
    written.append(write_dissimilarity(out_dir, matrix))
    if model is not None:
        written.extend(write_pca(out_dir, model))
    if reports is not None:
        written.append(write_evolution(out_dir, scored))
        written.append(write_speed(out_dir, reports))
    if stats is not None:
        written.append(write_speed_ranking(out_dir, rank_fields(reports)))
        written.append(write_corpus_stats(out_dir, stats))
        written.append(write_measure_summary(out_dir, summaries))
        written.append(write_correlation(out_dir, correlations))
        written.extend(write_scatter(out_dir, matrix))


def run_pipeline(settings: RunSettings) -> PipelineResult:
    """Run one CLI command end to end and log the run summary."""
    proc = psutil.Process(os.getpid())
    start = time.time()
    start_stamp = dt.datetime.now().isoformat(timespec="seconds")
    start_rss = proc.memory_info().rss
    start_cpu = proc.cpu_times()
    result = PipelineResult()

    logger.info("Command %s started.", settings.command)
    logger.info("Inputs: %s", ", ".join(str(path) for path in settings.inputs))
    logger.info("Output directory: %s", settings.out_dir)
    try:
        corpus = _load_corpus(settings, result)
        if settings.command == "ingest":
            _run_ingest(settings, corpus, result)
        elif settings.command == "stats":
            _run_stats(settings, corpus, result)
        elif settings.command == "dissim" and settings.pair is not None:
            _run_pair(settings, corpus, result)
        else:
            _run_analysis(settings, corpus, result)
    finally:
        duration = time.time() - start
        end_rss = proc.memory_info().rss
        end_cpu = proc.cpu_times()
        logger.info("Run start: %s", start_stamp)
        logger.info("Run end: %s", dt.datetime.now().isoformat(timespec="seconds"))
        logger.info("Duration: %.2f seconds", duration)
        logger.info("Records parsed: %d (record errors: %d, filtered: %d)", result.record_count, result.parse_errors, result.filtered_count)
        logger.info("Dissimilarity rows: %d", result.rows)
        logger.info("Files written: %d", len(result.written))
        logger.info("Process RSS start: %d bytes", start_rss)
        logger.info("Process RSS end: %d bytes", end_rss)
        logger.info("Process CPU user delta: %.4f", end_cpu.user - start_cpu.user)
        logger.info("Process CPU system delta: %.4f", end_cpu.system - start_cpu.system)
    return result

