from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import RecordParseError


class MeasureId(IntEnum):
    """Dissimilarity measures in their canonical column order."""

    CANBERRA = 1
    CLARK = 2
    COSINE = 3
    CZEKANOWSKI = 4
    EUCLIDEAN = 5
    JENSEN_SHANNON = 6
    KULCZYNSKI = 7
    LORENTZIAN = 8
    MANHATTAN = 9
    PROB_SYMMETRIC_CHI2 = 10
    SOERGEL = 11
    SQUARED_CHORD = 12

    @property
    def label(self) -> str:
        return self.name.lower()

    @property
    def column(self) -> int:
        return self.value - 1

    @classmethod
    def from_label(cls, label: str) -> "MeasureId":
        return cls[label.strip().upper()]


MEASURES: tuple[MeasureId, ...] = tuple(MeasureId)
MEASURE_LABELS: tuple[str, ...] = tuple(m.label for m in MEASURES)


@dataclass(frozen=True)
class BibRecord:
    record_id: str
    year: int
    field_code: str
    keywords: tuple[str, ...]
    language: str | None = None


@dataclass(frozen=True)
class YearBucket:
    field_code: str
    year: int
    records: tuple[BibRecord, ...] = ()

    @property
    def article_count(self) -> int:
        return len(self.records)

    @property
    def keyword_count(self) -> int:
        return sum(len(record.keywords) for record in self.records)


@dataclass
class ParseResult:
    records: list[BibRecord] = field(default_factory=list)
    errors: list[RecordParseError] = field(default_factory=list)


@dataclass
class PartitionResult:
    buckets: dict[tuple[str, int], YearBucket]
    fields: tuple[str, ...]
    years: tuple[int, ...]
    filtered_count: int = 0

    def bucket(self, field_code: str, year: int) -> YearBucket:
        return self.buckets[(field_code, year)]

    @property
    def record_count(self) -> int:
        return sum(bucket.article_count for bucket in self.buckets.values())


@dataclass(frozen=True, eq=False)
class KeywordDistribution:
    field_code: str
    year: int
    counts: Mapping[str, int]
    relfreqs: Mapping[str, float]
    total_count: int

    @property
    def vocab_size(self) -> int:
        return len(self.counts)

    def vocabulary(self) -> frozenset[str]:
        return frozenset(self.counts)


@dataclass(frozen=True, eq=False)
class AlignedDistributionPair:
    union_vocab: tuple[str, ...]
    p: np.ndarray
    q: np.ndarray
    v_left: int
    v_right: int
    common_count: int

    @property
    def size(self) -> int:
        return len(self.union_vocab)


@dataclass(frozen=True)
class DissimilarityVector:
    field_code: str
    year_from: int
    year_to: int
    values: tuple[float, ...]

    def value(self, measure: MeasureId) -> float:
        return self.values[measure.column]


@dataclass(frozen=True)
class DissimilarityMatrix:
    rows: tuple[DissimilarityVector, ...]

    def as_array(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, len(MEASURES)))
        return np.array([row.values for row in self.rows], dtype=float)

    def field_codes(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.field_code, None)
        return tuple(seen)

    def for_field(self, field_code: str) -> "DissimilarityMatrix":
        return DissimilarityMatrix(tuple(row for row in self.rows if row.field_code == field_code))


@dataclass(frozen=True, eq=False)
class PcaModel:
    means: np.ndarray
    stddevs: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray
    explained_fraction: np.ndarray
    sweeps: int = 0

    @property
    def pc1(self) -> np.ndarray:
        return self.loadings[:, 0]

    @property
    def cumulative_fraction(self) -> np.ndarray:
        return np.cumsum(self.explained_fraction)


@dataclass(frozen=True, eq=False)
class ScoredSeries:
    rows: tuple[DissimilarityVector, ...]
    raw_pc1: np.ndarray
    translated: np.ndarray
    global_min: float


@dataclass(frozen=True)
class EvolutionPair:
    year_from: int
    year_to: int
    dissimilarity: float
    raw_pc1: float = 0.0


@dataclass(frozen=True)
class EvolutionSeries:
    field_code: str
    pairs: tuple[EvolutionPair, ...]


@dataclass(frozen=True)
class SpeedReport:
    field_code: str
    t1: int
    t2: int
    amount: float
    speed: float


@dataclass(frozen=True)
class PeriodStats:
    field_code: str
    start: int
    end: int
    articles: int
    keywords: int
    distinct_keywords: int

    @property
    def keywords_per_article(self) -> float:
        return self.keywords / self.articles if self.articles else 0.0


@dataclass(frozen=True)
class YearStats:
    field_code: str
    year: int
    articles: int
    keywords: int
    distinct_keywords: int
    new_keywords: int | None = None

    @property
    def keywords_per_article(self) -> float:
        return self.keywords / self.articles if self.articles else 0.0


@dataclass(frozen=True)
class CorpusStats:
    periods: tuple[PeriodStats, ...]
    years: tuple[YearStats, ...]


@dataclass(frozen=True)
class MeasureStats:
    measure: MeasureId
    minimum: float
    q1: float
    median: float
    mean: float
    q3: float
    maximum: float


@dataclass(frozen=True)
class MeasureSummary:
    field_code: str
    stats: tuple[MeasureStats, ...]


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    field_code: str
    matrix: np.ndarray


@dataclass
class RunSettings:
    command: str
    inputs: list[Path]
    input_format: str = "tsv"
    fields: tuple[str, ...] = ()
    years: tuple[int, int] | None = None
    periods: tuple[tuple[int, int], ...] = ()
    language: str | None = None
    out_dir: Path = Path(".")
    strict: bool = False
    workers: int = 1
    log_file: Path | None = None
    verbose: bool = False
    dump_distributions: bool = False
    pair: tuple[int, int] | None = None
