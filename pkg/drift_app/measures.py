"""Dissimilarity measures between two aligned probability vectors.

All sums run over the union vocabulary in ascending index order with plain
sequential accumulation, so a value never depends on how year pairs are
scheduled across workers.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import MeasureDivisionByZero
from .models import MEASURES, AlignedDistributionPair, DissimilarityVector, MeasureId

Kernel = Callable[[np.ndarray, np.ndarray], float]


def _ordered_sum(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    return float(np.add.accumulate(values)[-1])


def _support(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # (0, 0) coordinates carry no mass and would divide by zero.
    keep = (p + q) > 0
    if keep.all():
        return p, q
    return p[keep], q[keep]


def canberra(p: np.ndarray, q: np.ndarray) -> float:
    return _ordered_sum(np.abs(p - q) / (p + q))


def clark(p: np.ndarray, q: np.ndarray) -> float:
    ratio = (p - q) / (p + q)
    return math.sqrt(_ordered_sum(ratio * ratio))


def cosine(p: np.ndarray, q: np.ndarray) -> float:
    dot = _ordered_sum(p * q)
    norm = math.sqrt(_ordered_sum(p * p)) * math.sqrt(_ordered_sum(q * q))
    return min(1.0, max(0.0, 1.0 - dot / norm))


def czekanowski(p: np.ndarray, q: np.ndarray) -> float:
    return _ordered_sum(np.abs(p - q)) / _ordered_sum(p + q)


def euclidean(p: np.ndarray, q: np.ndarray) -> float:
    diff = p - q
    return math.sqrt(_ordered_sum(diff * diff))


def jensen_shannon(p: np.ndarray, q: np.ndarray) -> float:
    total = p + q
    left = np.zeros_like(p)
    right = np.zeros_like(q)
    mask_p = p > 0
    mask_q = q > 0
    left[mask_p] = p[mask_p] * np.log(2.0 * p[mask_p] / total[mask_p])
    right[mask_q] = q[mask_q] * np.log(2.0 * q[mask_q] / total[mask_q])
    return max(0.0, 0.5 * _ordered_sum(left + right))


def kulczynski(p: np.ndarray, q: np.ndarray) -> float:
    denominator = _ordered_sum(np.minimum(p, q))
    if denominator == 0.0:
        raise MeasureDivisionByZero(MeasureId.KULCZYNSKI.label)
    return _ordered_sum(np.abs(p - q)) / denominator


def lorentzian(p: np.ndarray, q: np.ndarray) -> float:
    return _ordered_sum(np.log1p(np.abs(p - q)))


def manhattan(p: np.ndarray, q: np.ndarray) -> float:
    return _ordered_sum(np.abs(p - q))


def prob_symmetric_chi2(p: np.ndarray, q: np.ndarray) -> float:
    diff = p - q
    return 2.0 * _ordered_sum(diff * diff / (p + q))


def soergel(p: np.ndarray, q: np.ndarray) -> float:
    return _ordered_sum(np.abs(p - q)) / _ordered_sum(np.maximum(p, q))


def squared_chord(p: np.ndarray, q: np.ndarray) -> float:
    diff = np.sqrt(p) - np.sqrt(q)
    return _ordered_sum(diff * diff)


KERNELS: dict[MeasureId, Kernel] = {
    MeasureId.CANBERRA: canberra,
    MeasureId.CLARK: clark,
    MeasureId.COSINE: cosine,
    MeasureId.CZEKANOWSKI: czekanowski,
    MeasureId.EUCLIDEAN: euclidean,
    MeasureId.JENSEN_SHANNON: jensen_shannon,
    MeasureId.KULCZYNSKI: kulczynski,
    MeasureId.LORENTZIAN: lorentzian,
    MeasureId.MANHATTAN: manhattan,
    MeasureId.PROB_SYMMETRIC_CHI2: prob_symmetric_chi2,
    MeasureId.SOERGEL: soergel,
    MeasureId.SQUARED_CHORD: squared_chord,
}


def measure_vector(p: np.ndarray, q: np.ndarray, measure: MeasureId) -> float:
    p_arr, q_arr = _support(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    return KERNELS[measure](p_arr, q_arr)


def dissimilarity(measure: MeasureId, pair: AlignedDistributionPair) -> float:
    return measure_vector(pair.p, pair.q, measure)


def all_measures(
    pair: AlignedDistributionPair,
    field_code: str,
    t: int,
    year_to: int | None = None,
) -> DissimilarityVector:
    p, q = _support(pair.p, pair.q)
    values = tuple(KERNELS[measure](p, q) for measure in MEASURES)
    return DissimilarityVector(
        field_code=field_code,
        year_from=t,
        year_to=t + 1 if year_to is None else year_to,
        values=values,
    )
