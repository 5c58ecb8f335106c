"""Descriptive statistics, measure summaries, correlations and CSV emitters."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import numbers
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .config import KEYWORDS_PER_ARTICLE_DECIMALS, SCATTER_MEASURES, SIGNIFICANT_DIGITS
from .distributions import distribution_rows
from .errors import InsufficientDataError, OutputNameCollisionError
from .models import (
    MEASURE_LABELS,
    MEASURES,
    CorpusStats,
    CorrelationReport,
    DissimilarityMatrix,
    KeywordDistribution,
    MeasureId,
    MeasureStats,
    MeasureSummary,
    PartitionResult,
    PcaModel,
    PeriodStats,
    ScoredSeries,
    SpeedReport,
    YearStats,
)
from .pca import standardize

OUTPUT_SUFFIXES = {".csv", ".tsv", ".jsonl"}

logger = logging.getLogger("drift_app.reporting")


def descriptive_stats(
    corpus: PartitionResult,
    fields: Sequence[str],
    years: tuple[int, int],
    periods: Sequence[tuple[int, int]],
) -> CorpusStats:
    """Article/keyword counts per field per period and per year.

    A keyword is new in a year when no earlier year of the analyzed range
    used it; the first year therefore has no new-keyword count.
    """
    t_min, t_max = years
    for start, end in periods:
        if start < t_min or end > t_max or start > end:
            raise InsufficientDataError(f"period {start}:{end} lies outside the analyzed range {t_min}:{t_max}")

    year_rows: list[YearStats] = []
    period_rows: list[PeriodStats] = []
    for field_code in fields:
        vocabularies: dict[int, set[str]] = {}
        seen: set[str] = set()
        for year in range(t_min, t_max + 1):
            bucket = corpus.bucket(field_code, year)
            vocab: set[str] = set()
            for record in bucket.records:
                vocab.update(record.keywords)
            vocabularies[year] = vocab
            new_count = None if year == t_min else len(vocab - seen)
            seen |= vocab
            year_rows.append(
                YearStats(
                    field_code=field_code,
                    year=year,
                    articles=bucket.article_count,
                    keywords=bucket.keyword_count,
                    distinct_keywords=len(vocab),
                    new_keywords=new_count,
                )
            )
        for start, end in periods:
            span = range(start, end + 1)
            union: set[str] = set()
            for year in span:
                union |= vocabularies[year]
            period_rows.append(
                PeriodStats(
                    field_code=field_code,
                    start=start,
                    end=end,
                    articles=sum(corpus.bucket(field_code, year).article_count for year in span),
                    keywords=sum(corpus.bucket(field_code, year).keyword_count for year in span),
                    distinct_keywords=len(union),
                )
            )
    return CorpusStats(periods=tuple(period_rows), years=tuple(year_rows))


def _exact_mean(values: np.ndarray) -> float:
    total = sum((Fraction(float(value)) for value in values), Fraction(0))
    return float(total / len(values))


def measure_summary(matrix: DissimilarityMatrix, field_code: str) -> MeasureSummary:
    rows = matrix.for_field(field_code)
    if not rows.rows:
        raise InsufficientDataError(f"no dissimilarity rows for field {field_code!r}")
    data = rows.as_array()
    stats = []
    for measure in MEASURES:
        values = data[:, measure.column]
        q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75], method="linear")
        stats.append(
            MeasureStats(
                measure=measure,
                minimum=float(values.min()),
                q1=float(q1),
                median=float(median),
                mean=_exact_mean(values),
                q3=float(q3),
                maximum=float(values.max()),
            )
        )
    return MeasureSummary(field_code=field_code, stats=tuple(stats))


def correlation_matrix(data: np.ndarray) -> np.ndarray:
    z, _, _ = standardize(data)
    corr = (z.T @ z) / (z.shape[0] - 1)
    corr = np.clip(0.5 * (corr + corr.T), -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def correlation_report(matrix: DissimilarityMatrix, field_code: str) -> CorrelationReport:
    rows = matrix.for_field(field_code)
    if len(rows.rows) < 3:
        raise InsufficientDataError(
            f"correlation for field {field_code!r} needs at least 3 rows, found {len(rows.rows)}"
        )
    return CorrelationReport(field_code=field_code, matrix=correlation_matrix(rows.as_array()))


def scatter_rows(matrix: DissimilarityMatrix, first: MeasureId, second: MeasureId) -> list[list[Any]]:
    return [
        [row.field_code, row.year_from, row.year_to, row.value(first), row.value(second)]
        for row in matrix.rows
    ]


def format_real(value: float) -> str:
    return format(float(value), f".{SIGNIFICANT_DIGITS}g")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return format_real(float(value))
    return str(value)


def _has_symlink_segment(path: Path) -> bool:
    current = Path(path.anchor) if path.is_absolute() else Path.cwd()
    for segment in path.parts:
        if segment in {"", path.anchor}:
            continue
        current = current / segment
        try:
            if current.is_symlink():
                return True
        except Exception:
            return True
    return False


def _ensure_safe_output_dir(path: Path) -> Path:
    if _has_symlink_segment(path):
        raise PermissionError("Refusing symlink output directory path.")
    path.mkdir(parents=True, exist_ok=True)
    if path.is_symlink() or _has_symlink_segment(path):
        raise PermissionError("Refusing symlink output directory path.")
    return path


def _safe_output_file(path: Path) -> Path:
    if path.suffix.lower() not in OUTPUT_SUFFIXES:
        raise ValueError(f"Output path must end in one of {', '.join(sorted(OUTPUT_SUFFIXES))}.")
    if path.is_symlink():
        raise PermissionError("Refusing to overwrite symlink output file.")
    return path


def install_output(path: Path, data: bytes) -> Path:
    """Stage ``data`` next to ``path`` and atomically replace the destination."""
    path = _safe_output_file(path)
    output_dir = _ensure_safe_output_dir(path.parent)
    temp_fd, temp_name = tempfile.mkstemp(prefix=".drift-", suffix=".tmp", dir=output_dir)
    temp_path = Path(temp_name)
    try:
        with os.fdopen(temp_fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.chmod(temp_path, 0o644)
        if path.is_symlink():
            raise PermissionError("Refusing to overwrite symlink output file.")
        os.replace(temp_path, path)
    except Exception:
        try:
            if temp_path.exists():
                temp_path.unlink()
        except OSError:
            pass
        raise
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    install_output(path, buffer.getvalue().encode("utf-8"))
    logger.debug("Wrote %s", path)
    return path


def write_dissimilarity(out_dir: Path, matrix: DissimilarityMatrix, name: str = "dissimilarity.csv") -> Path:
    header = ["field", "year_from", "year_to", *MEASURE_LABELS]
    rows = ([row.field_code, row.year_from, row.year_to, *row.values] for row in matrix.rows)
    return write_csv(out_dir / name, header, rows)


def write_pca(out_dir: Path, model: PcaModel) -> list[Path]:
    width = model.loadings.shape[1]
    loadings_header = ["measure", *(f"PC{index + 1}" for index in range(width))]
    loadings_rows = (
        [MEASURE_LABELS[row] if width == len(MEASURE_LABELS) else f"column{row + 1}", *model.loadings[row, :]]
        for row in range(model.loadings.shape[0])
    )
    cumulative = model.cumulative_fraction
    scree_rows = (
        [index + 1, model.eigenvalues[index], model.explained_fraction[index], cumulative[index]]
        for index in range(width)
    )
    return [
        write_csv(out_dir / "pca_loadings.csv", loadings_header, loadings_rows),
        write_csv(
            out_dir / "pca_scree.csv",
            ["component", "eigenvalue", "explained_fraction", "cumulative_fraction"],
            scree_rows,
        ),
    ]


def write_evolution(out_dir: Path, scored: ScoredSeries) -> Path:
    rows = (
        [row.field_code, row.year_from, row.year_to, raw, translated]
        for row, raw, translated in zip(scored.rows, scored.raw_pc1, scored.translated)
    )
    return write_csv(
        out_dir / "evolution.csv",
        ["field", "year_from", "year_to", "raw_pc1", "dissimilarity"],
        rows,
    )


def write_speed(out_dir: Path, reports: Sequence[SpeedReport]) -> Path:
    rows = ([r.field_code, r.t1, r.t2, r.amount, r.speed] for r in reports)
    return write_csv(out_dir / "speed.csv", ["field", "t1", "t2", "amount_D", "speed_V"], rows)


def write_speed_ranking(out_dir: Path, ranking: Sequence[tuple[int, int, int, str, float]]) -> Path:
    return write_csv(out_dir / "speed_ranking.csv", ["t1", "t2", "rank", "field", "speed_V"], ranking)


def write_corpus_stats(out_dir: Path, stats: CorpusStats) -> Path:
    header = [
        "field",
        "scope",
        "start",
        "end",
        "articles",
        "keywords",
        "distinct_keywords",
        "keywords_per_article",
        "new_keywords",
    ]
    per_article = f".{KEYWORDS_PER_ARTICLE_DECIMALS}f"
    rows: list[list[Any]] = []
    for item in stats.periods:
        rows.append(
            [
                item.field_code,
                "period",
                item.start,
                item.end,
                item.articles,
                item.keywords,
                item.distinct_keywords,
                format(item.keywords_per_article, per_article),
                None,
            ]
        )
    for year in stats.years:
        rows.append(
            [
                year.field_code,
                "year",
                year.year,
                year.year,
                year.articles,
                year.keywords,
                year.distinct_keywords,
                format(year.keywords_per_article, per_article),
                year.new_keywords,
            ]
        )
    return write_csv(out_dir / "corpus_stats.csv", header, rows)


def write_measure_summary(out_dir: Path, summaries: Sequence[MeasureSummary]) -> Path:
    rows = (
        [summary.field_code, s.measure.label, s.minimum, s.q1, s.median, s.mean, s.q3, s.maximum]
        for summary in summaries
        for s in summary.stats
    )
    return write_csv(
        out_dir / "measure_summary.csv",
        ["field", "measure", "min", "q1", "median", "mean", "q3", "max"],
        rows,
    )


def write_correlation(out_dir: Path, reports: Sequence[CorrelationReport]) -> Path:
    rows = (
        [report.field_code, MEASURE_LABELS[index], *report.matrix[index, :]]
        for report in reports
        for index in range(report.matrix.shape[0])
    )
    return write_csv(out_dir / "correlation.csv", ["field", "measure", *MEASURE_LABELS], rows)


def write_scatter(
    out_dir: Path,
    matrix: DissimilarityMatrix,
    measures: Sequence[str] = SCATTER_MEASURES,
) -> list[Path]:
    chosen = [MeasureId.from_label(label) for label in measures]
    written = []
    for first, second in itertools.combinations(chosen, 2):
        written.append(
            write_csv(
                out_dir / f"scatter_{first.label}_{second.label}.csv",
                ["field", "year_from", "year_to", first.label, second.label],
                scatter_rows(matrix, first, second),
            )
        )
    return written


def distribution_file_name(distribution: KeywordDistribution) -> str:
    return f"{_safe_file_part(distribution.field_code)}_{distribution.year}.csv"


def write_distributions(out_dir: Path, distributions: Sequence[KeywordDistribution]) -> list[Path]:
    """Dump each distribution to distributions/<field>_<year>.csv.

    All names are checked before the first write, so two field codes that
    sanitize to the same file name fail the run instead of overwriting.
    """
    owners: dict[str, str] = {}
    for distribution in distributions:
        name = distribution_file_name(distribution)
        owner = owners.setdefault(name, distribution.field_code)
        if owner != distribution.field_code:
            raise OutputNameCollisionError(name, owner, distribution.field_code)
    return [
        write_csv(
            out_dir / "distributions" / distribution_file_name(distribution),
            ["keyword", "count", "relfreq"],
            distribution_rows(distribution),
        )
        for distribution in distributions
    ]


def _safe_file_part(value: str) -> str:
    filtered = "".join(ch if ch.isalnum() or ch in ("-", "_") else "_" for ch in value)
    return filtered.strip("_") or "field"
