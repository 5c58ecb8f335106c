from __future__ import annotations

from collections import Counter

import numpy as np

from .config import SIGNIFICANT_DIGITS
from .errors import EmptyVocabularyError
from .models import AlignedDistributionPair, KeywordDistribution, YearBucket


def distribution_from_counts(field_code: str, year: int, counts: dict[str, int]) -> KeywordDistribution:
    kept = {keyword: count for keyword, count in counts.items() if count > 0}
    if not kept:
        raise EmptyVocabularyError(field_code, year)
    total = sum(kept.values())
    relfreqs = {keyword: count / total for keyword, count in kept.items()}
    return KeywordDistribution(
        field_code=field_code,
        year=year,
        counts=kept,
        relfreqs=relfreqs,
        total_count=total,
    )


def build_distribution(bucket: YearBucket) -> KeywordDistribution:
    """Relative keyword frequencies of one (field, year) bucket.

    Records carry deduplicated keywords, so each count is the number of
    records in the bucket that list the keyword.
    """
    counts: Counter[str] = Counter()
    for record in bucket.records:
        counts.update(record.keywords)
    return distribution_from_counts(bucket.field_code, bucket.year, dict(counts))


def align_pair(left: KeywordDistribution, right: KeywordDistribution) -> AlignedDistributionPair:
    if not left.counts or not right.counts:
        raise ValueError("cannot align an empty distribution")
    union_vocab = tuple(sorted(left.counts.keys() | right.counts.keys()))
    left_freqs = left.relfreqs
    right_freqs = right.relfreqs
    p = np.fromiter((left_freqs.get(kw, 0.0) for kw in union_vocab), dtype=float, count=len(union_vocab))
    q = np.fromiter((right_freqs.get(kw, 0.0) for kw in union_vocab), dtype=float, count=len(union_vocab))
    common = len(left.counts.keys() & right.counts.keys())
    return AlignedDistributionPair(
        union_vocab=union_vocab,
        p=p,
        q=q,
        v_left=left.vocab_size,
        v_right=right.vocab_size,
        common_count=common,
    )


def distribution_rows(distribution: KeywordDistribution) -> list[list[str]]:
    """CSV body for a distribution dump: keyword, count, relfreq."""
    return [
        [keyword, str(distribution.counts[keyword]), format(distribution.relfreqs[keyword], f".{SIGNIFICANT_DIGITS}g")]
        for keyword in sorted(distribution.counts)
    ]
