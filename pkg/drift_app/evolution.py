from __future__ import annotations

import logging
import math
import multiprocessing as mp
from typing import Sequence

from .config import DEFAULT_PERIODS
from .distributions import align_pair, build_distribution
from .errors import InsufficientDataError, MeasureDivisionByZero, MissingPairError
from .measures import all_measures
from .models import (
    DissimilarityMatrix,
    DissimilarityVector,
    EvolutionPair,
    EvolutionSeries,
    KeywordDistribution,
    PartitionResult,
    PcaModel,
    ScoredSeries,
    SpeedReport,
)
from .pca import fit_matrix, pc1_scores, translate_scores

logger = logging.getLogger("drift_app.evolution")


def _pair_vector(
    payload: tuple[str, int, int, KeywordDistribution, KeywordDistribution],
) -> DissimilarityVector:
    field_code, year_from, year_to, left, right = payload
    try:
        return all_measures(align_pair(left, right), field_code, year_from, year_to)
    except MeasureDivisionByZero as exc:
        raise MeasureDivisionByZero(exc.measure, field_code, year_from, year_to) from exc


def _checked_range(years: tuple[int, int]) -> tuple[int, int]:
    t_min, t_max = years
    if t_max - t_min < 1:
        raise InsufficientDataError(
            f"year range {t_min}:{t_max} has no successive pairs; it must span at least 2 years"
        )
    return t_min, t_max


def build_distributions(
    corpus: PartitionResult,
    fields: Sequence[str],
    years: tuple[int, int],
) -> dict[tuple[str, int], KeywordDistribution]:
    t_min, t_max = years
    return {
        (field_code, year): build_distribution(corpus.bucket(field_code, year))
        for field_code in fields
        for year in range(t_min, t_max + 1)
    }


def build_dissimilarity_matrix(
    corpus: PartitionResult,
    fields: Sequence[str],
    years: tuple[int, int],
    *,
    workers: int = 1,
    distributions: dict[tuple[str, int], KeywordDistribution] | None = None,
) -> DissimilarityMatrix:
    """Successive-pair dissimilarity rows, by field in input order, then by year."""
    t_min, t_max = _checked_range(years)
    if distributions is None:
        distributions = build_distributions(corpus, fields, years)
    payloads = [
        (field_code, t, t + 1, distributions[(field_code, t)], distributions[(field_code, t + 1)])
        for field_code in fields
        for t in range(t_min, t_max)
    ]
    if workers > 1 and len(payloads) > 1:
        ctx = mp.get_context("spawn")
        with ctx.Pool(processes=min(workers, len(payloads))) as pool:
            rows = pool.map(_pair_vector, payloads)
    else:
        rows = [_pair_vector(payload) for payload in payloads]
    logger.info("Computed %d dissimilarity row(s) for %d field(s).", len(rows), len(fields))
    return DissimilarityMatrix(tuple(rows))


def compare_years(corpus: PartitionResult, field_code: str, t: int, s: int) -> DissimilarityVector:
    """All measures between two arbitrary years of one field."""
    left = build_distribution(corpus.bucket(field_code, t))
    right = build_distribution(corpus.bucket(field_code, s))
    return _pair_vector((field_code, t, s, left, right))


def score_matrix(matrix: DissimilarityMatrix) -> tuple[PcaModel, ScoredSeries]:
    model = fit_matrix(matrix)
    scored = translate_scores(pc1_scores(model, matrix), matrix.rows)
    logger.info(
        "PC1 explains %.1f%% of variance (eigenvalue %.4f).",
        100.0 * float(model.explained_fraction[0]),
        float(model.eigenvalues[0]),
    )
    return model, scored


def build_series(scored: ScoredSeries) -> list[EvolutionSeries]:
    grouped: dict[str, list[EvolutionPair]] = {}
    for row, raw, translated in zip(scored.rows, scored.raw_pc1, scored.translated):
        grouped.setdefault(row.field_code, []).append(
            EvolutionPair(
                year_from=row.year_from,
                year_to=row.year_to,
                dissimilarity=float(translated),
                raw_pc1=float(raw),
            )
        )
    series = []
    for field_code, pairs in grouped.items():
        ordered = tuple(sorted(pairs, key=lambda pair: pair.year_from))
        for pair in ordered:
            if pair.year_to != pair.year_from + 1:
                raise ValueError(f"pair {pair.year_from}->{pair.year_to} is not successive")
        series.append(EvolutionSeries(field_code=field_code, pairs=ordered))
    return series


def _window(series: EvolutionSeries, t1: int, t2: int) -> list[float]:
    if t1 >= t2:
        raise ValueError(f"window {t1}:{t2} must satisfy t1 < t2")
    by_start = {pair.year_from: pair for pair in series.pairs}
    values = []
    for t in range(t1, t2):
        pair = by_start.get(t)
        if pair is None or pair.year_to != t + 1:
            raise MissingPairError(series.field_code, t1, t2, t)
        values.append(pair.dissimilarity)
    return values


def evolution_amount(series: EvolutionSeries, t1: int, t2: int) -> float:
    """Sum of translated dissimilarities over pairs (t1, t1+1) .. (t2-1, t2)."""
    return math.fsum(_window(series, t1, t2))


def _speed(values: list[float], amount: float) -> float:
    # A constant window reports its value as is; D/(t2 - t1) could be off by one ulp.
    if len(set(values)) == 1:
        return values[0]
    return amount / len(values)


def evolution_speed(series: EvolutionSeries, t1: int, t2: int) -> float:
    """D / (t2 - t1), dividing the same correctly rounded sum that D reports."""
    values = _window(series, t1, t2)
    return _speed(values, math.fsum(values))


def resolve_periods(
    years: tuple[int, int],
    periods: Sequence[tuple[int, int]] = (),
) -> tuple[tuple[int, int], ...]:
    if periods:
        return tuple(periods)
    t_min, t_max = years
    chosen = [period for period in DEFAULT_PERIODS if t_min <= period[0] < period[1] <= t_max]
    if (t_min, t_max) not in chosen:
        chosen.append((t_min, t_max))
    return tuple(chosen)


def speed_table(
    series_list: Sequence[EvolutionSeries],
    periods: Sequence[tuple[int, int]],
) -> list[SpeedReport]:
    reports = []
    for series in series_list:
        for t1, t2 in periods:
            values = _window(series, t1, t2)
            amount = math.fsum(values)
            reports.append(
                SpeedReport(
                    field_code=series.field_code,
                    t1=t1,
                    t2=t2,
                    amount=amount,
                    speed=_speed(values, amount),
                )
            )
    return reports


def rank_fields(reports: Sequence[SpeedReport]) -> list[tuple[int, int, int, str, float]]:
    """Per period, fields ordered fastest first; ties keep field order."""
    by_period: dict[tuple[int, int], list[SpeedReport]] = {}
    for report in reports:
        by_period.setdefault((report.t1, report.t2), []).append(report)
    ranking = []
    for (t1, t2), items in by_period.items():
        ordered = sorted(items, key=lambda report: -report.speed)
        for rank, report in enumerate(ordered, start=1):
            ranking.append((t1, t2, rank, report.field_code, report.speed))
    return ranking
