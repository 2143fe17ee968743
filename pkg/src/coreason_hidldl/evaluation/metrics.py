# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

"""The five label-distribution measures.

Chebyshev, Clark and Canberra are distances (lower is better); Cosine and
Intersection are similarities (higher is better). Clark and Canberra terms where
both distributions assign zero mass contribute 0.
"""

from typing import Dict, List, Literal, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from coreason_hidldl.core.dataset import SIMPLEX_TOLERANCE, check_simplex_rows

MetricName = Literal["chebyshev", "clark", "canberra", "cosine", "intersection"]
METRICS: Tuple[MetricName, ...] = ("chebyshev", "clark", "canberra", "cosine", "intersection")
DISTANCE_METRICS = frozenset({"chebyshev", "clark", "canberra"})
SIMILARITY_METRICS = frozenset({"cosine", "intersection"})

Matrix = npt.NDArray[np.float64]


def _safe_ratio(numerator: Matrix, denominator: Matrix) -> Matrix:
    return np.divide(numerator, denominator, out=np.zeros_like(numerator), where=denominator > 0)


def rowwise(kind: MetricName, truth: Matrix, predicted: Matrix) -> npt.NDArray[np.float64]:
    """Evaluates one metric for every row pair; no input validation."""
    diff = truth - predicted
    total = truth + predicted
    if kind == "chebyshev":
        return np.max(np.abs(diff), axis=1)
    if kind == "clark":
        return np.sqrt(np.sum(_safe_ratio(diff**2, total**2), axis=1))
    if kind == "canberra":
        return np.sum(_safe_ratio(np.abs(diff), total), axis=1)
    if kind == "cosine":
        norms = np.linalg.norm(truth, axis=1) * np.linalg.norm(predicted, axis=1)
        return np.sum(truth * predicted, axis=1) / norms
    if kind == "intersection":
        return np.sum(np.minimum(truth, predicted), axis=1)
    raise ValueError(f"unknown metric {kind!r}")


def row_metric(kind: MetricName, d: npt.ArrayLike, d_hat: npt.ArrayLike) -> float:
    """One metric between two distributions.

    Raises:
        ValueError: On a length mismatch or a vector off the simplex.
    """
    truth = np.atleast_2d(np.asarray(d, dtype=np.float64))
    predicted = np.atleast_2d(np.asarray(d_hat, dtype=np.float64))
    if truth.shape != predicted.shape or truth.shape[0] != 1:
        raise ValueError(f"length mismatch: {np.shape(d)} vs {np.shape(d_hat)}")
    check_simplex_rows(truth, SIMPLEX_TOLERANCE)
    check_simplex_rows(predicted, SIMPLEX_TOLERANCE)
    return float(rowwise(kind, truth, predicted)[0])


class MetricSummary(BaseModel):
    """Mean, sample standard deviation and per-row values of one metric."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mean: float
    std: float
    per_row: List[float] = Field(default_factory=list)


class MetricReport(BaseModel):
    """All five metrics over a matrix pair, keyed in the canonical metric order."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    per_metric: Dict[str, MetricSummary]
    n_rows: int

    def means(self) -> Dict[str, float]:
        return {name: summary.mean for name, summary in self.per_metric.items()}

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


def summarize(values: npt.NDArray[np.float64]) -> MetricSummary:
    """Mean and sample std (0 for a single value)."""
    values = np.asarray(values, dtype=np.float64)
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return MetricSummary(mean=float(np.mean(values)), std=std, per_row=values.tolist())


def evaluate(recovered: npt.ArrayLike, truth: npt.ArrayLike) -> MetricReport:
    """Scores a recovered (or predicted) matrix against the ground truth.

    Raises:
        ValueError: On a shape mismatch or rows off the simplex.
    """
    predicted = np.asarray(recovered, dtype=np.float64)
    actual = np.asarray(truth, dtype=np.float64)
    if predicted.shape != actual.shape or predicted.ndim != 2:
        raise ValueError(f"shape mismatch: {predicted.shape} vs {actual.shape}")
    check_simplex_rows(actual, SIMPLEX_TOLERANCE)
    check_simplex_rows(predicted, SIMPLEX_TOLERANCE)
    per_metric = {name: summarize(rowwise(name, actual, predicted)) for name in METRICS}
    return MetricReport(per_metric=per_metric, n_rows=int(actual.shape[0]))
