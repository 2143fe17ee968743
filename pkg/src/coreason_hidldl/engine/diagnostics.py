# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from typing import List

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict

from coreason_hidldl.core.dataset import HiddenView
from coreason_hidldl.engine.solver import RecoveryResult


class RowBound(BaseModel):
    """Scaling-coefficient bound check for one row.

    Attributes:
        row: Row index.
        k_true: 1 / (ground-truth mass on observed positions).
        k_recovered: The solver's k_i.
        squared_error: (k_true - k_recovered)^2.
        sigma: 1 - (recovered mass on observed positions).
        epsilon: sigma^2 / (ground-truth observed mass)^2.
        coefficient_gap: (ground-truth observed mass - k_recovered)^2, the error against the
            coefficient that actually maps D^o onto D^g at observed positions.
        violated: squared_error exceeds epsilon.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    row: int
    k_true: float
    k_recovered: float
    squared_error: float
    sigma: float
    epsilon: float
    coefficient_gap: float
    violated: bool


class BoundReport(BaseModel):
    """Per-row bound diagnostics plus the list of violating rows."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    rows: List[RowBound]
    violations: List[int]

    @property
    def fraction_within(self) -> float:
        return 1.0 - len(self.violations) / len(self.rows) if self.rows else 1.0


def recovery_bound_diagnostics(
    result: RecoveryResult,
    hidden: HiddenView,
    ground_truth: npt.NDArray[np.float64],
    atol: float = 1e-12,
) -> BoundReport:
    """Compares recovered scaling coefficients against the per-row recovery bound.

    The bound is only expected to hold when the hidden mass of a row is small, so rows
    that break it are reported rather than rejected.

    Args:
        result: A finished solve.
        hidden: The view the solve ran on.
        ground_truth: The complete label matrix (diagnostic use only).
        atol: Absolute slack when comparing the squared error to epsilon.

    Raises:
        ValueError: If the ground truth does not match the view's shape.
    """
    truth = np.asarray(ground_truth, dtype=np.float64)
    if truth.shape != hidden.observed.shape or result.recovered.shape != truth.shape:
        raise ValueError(
            f"dimension mismatch: truth {truth.shape}, view {hidden.observed.shape}, "
            f"recovered {result.recovered.shape}"
        )
    mask = hidden.mask.entries
    true_mass = np.sum(truth * mask, axis=1)
    k_true = 1.0 / true_mass
    k = result.scaling_coefficients
    squared_error = (k_true - k) ** 2
    sigma = 1.0 - np.sum(result.recovered * mask, axis=1)
    epsilon = sigma**2 / true_mass**2
    gap = (true_mass - k) ** 2
    violated = squared_error > epsilon + atol

    rows = [
        RowBound(
            row=i,
            k_true=float(k_true[i]),
            k_recovered=float(k[i]),
            squared_error=float(squared_error[i]),
            sigma=float(sigma[i]),
            epsilon=float(epsilon[i]),
            coefficient_gap=float(gap[i]),
            violated=bool(violated[i]),
        )
        for i in range(truth.shape[0])
    ]
    return BoundReport(rows=rows, violations=np.flatnonzero(violated).tolist())
