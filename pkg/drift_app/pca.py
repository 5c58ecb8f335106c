"""Correlation-matrix PCA over the pooled dissimilarity matrix."""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from .config import EIGENVALUE_CLAMP, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE
from .errors import ConvergenceFailure, InsufficientDataError, ZeroVarianceColumnError
from .models import MEASURE_LABELS, DissimilarityMatrix, MeasureId, PcaModel, ScoredSeries

ANCHOR_COLUMN = MeasureId.MANHATTAN.column

logger = logging.getLogger("drift_app.pca")


def _as_array(data: DissimilarityMatrix | np.ndarray) -> np.ndarray:
    if isinstance(data, DissimilarityMatrix):
        return data.as_array()
    return np.asarray(data, dtype=float)


def _column_label(index: int, width: int) -> str | None:
    if width == len(MEASURE_LABELS):
        return MEASURE_LABELS[index]
    return None


def standardize(
    matrix: DissimilarityMatrix | np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Z-score each column with the sample (n - 1) standard deviation."""
    x = _as_array(matrix)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InsufficientDataError("standardization needs at least 2 rows")
    width = x.shape[1]
    for column in range(width):
        values = x[:, column]
        if not np.all(np.isfinite(values)):
            raise InsufficientDataError(f"column {column} contains non-finite values")
        if values.max() == values.min():
            raise ZeroVarianceColumnError(column, _column_label(column, width))
    means = x.mean(axis=0)
    stddevs = x.std(axis=0, ddof=1)
    for column in range(width):
        if stddevs[column] == 0.0:
            raise ZeroVarianceColumnError(column, _column_label(column, width))
    return (x - means) / stddevs, means, stddevs


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return math.sqrt(float(np.sum(off * off)))


def jacobi_eigh(
    symmetric: np.ndarray,
    tol: float = JACOBI_TOLERANCE,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Cyclic Jacobi rotations; returns (eigenvalues, eigenvectors as columns, sweeps)."""
    a = np.array(symmetric, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    sweeps = 0
    while True:
        off = _off_norm(a)
        if off < tol:
            return np.diag(a).copy(), v, sweeps
        if sweeps >= max_sweeps:
            raise ConvergenceFailure(sweeps, off)
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q


def _orient(vector: np.ndarray, anchor: int | None) -> np.ndarray:
    if anchor is not None and vector[anchor] != 0.0:
        return vector if vector[anchor] > 0 else -vector
    pivot = int(np.argmax(np.abs(vector)))
    return vector if vector[pivot] > 0 else -vector


def fit_pca(z: np.ndarray, anchor_column: int | None = ANCHOR_COLUMN) -> PcaModel:
    """Eigendecomposition of the sample correlation matrix of a standardized matrix.

    PC1 is oriented so its loading on ``anchor_column`` is positive; every
    other component (and PC1 when no anchor applies) so its largest-magnitude
    loading is positive.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[0] < 2:
        raise InsufficientDataError("PCA needs at least 2 rows")
    n, width = z.shape
    if anchor_column is not None and not 0 <= anchor_column < width:
        anchor_column = None
    correlation = (z.T @ z) / (n - 1)
    correlation = 0.5 * (correlation + correlation.T)

    eigenvalues, vectors, sweeps = jacobi_eigh(correlation)
    order = sorted(range(width), key=lambda index: (-eigenvalues[index], index))
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]

    negative = eigenvalues < 0
    if np.any(eigenvalues < -EIGENVALUE_CLAMP):
        logger.warning("Correlation matrix has eigenvalue %.3e below zero.", float(eigenvalues.min()))
    eigenvalues = np.where(negative & (eigenvalues >= -EIGENVALUE_CLAMP), 0.0, eigenvalues)

    loadings = np.empty_like(vectors)
    for component in range(width):
        anchor = anchor_column if component == 0 else None
        loadings[:, component] = _orient(vectors[:, component], anchor)

    total = float(np.sum(eigenvalues))
    explained = eigenvalues / total if total > 0 else np.zeros_like(eigenvalues)
    logger.debug("Jacobi eigensolver converged in %d sweep(s).", sweeps)
    return PcaModel(
        means=np.zeros(width),
        stddevs=np.ones(width),
        loadings=loadings,
        eigenvalues=eigenvalues,
        explained_fraction=explained,
        sweeps=sweeps,
    )


def fit_matrix(matrix: DissimilarityMatrix | np.ndarray, anchor_column: int | None = ANCHOR_COLUMN) -> PcaModel:
    """Standardize, fit, and keep the standardization statistics on the model."""
    z, means, stddevs = standardize(matrix)
    model = fit_pca(z, anchor_column)
    return PcaModel(
        means=means,
        stddevs=stddevs,
        loadings=model.loadings,
        eigenvalues=model.eigenvalues,
        explained_fraction=model.explained_fraction,
        sweeps=model.sweeps,
    )


def pc1_scores(model: PcaModel, matrix: DissimilarityMatrix | np.ndarray) -> np.ndarray:
    x = _as_array(matrix)
    z = (x - model.means) / model.stddevs
    return z @ model.pc1


def translate_scores(
    raw_scores: Sequence[float] | np.ndarray,
    rows: Sequence = (),
) -> ScoredSeries:
    raw = np.asarray(raw_scores, dtype=float)
    if raw.size == 0:
        raise InsufficientDataError("no scores to translate")
    global_min = float(raw.min())
    return ScoredSeries(
        rows=tuple(rows),
        raw_pc1=raw,
        translated=raw - global_min,
        global_min=global_min,
    )
