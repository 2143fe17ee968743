# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class IterationRecord(BaseModel):
    """One row of a solver trace.

    Attributes:
        iteration: 1-based ADMM iteration.
        residual_da: ||D - A||_inf after the multiplier step.
        residual_db: ||D - B||_inf after the multiplier step.
        objective: Objective value at the projected D.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    iteration: int = Field(..., ge=1)
    residual_da: float
    residual_db: float
    objective: float

    @property
    def max_residual(self) -> float:
        return max(self.residual_da, self.residual_db)


TRACE_COLUMNS = ("iteration", "residual_da", "residual_db", "objective")


class TrialRecord(BaseModel):
    """Outcome of one method variant inside one experiment trial.

    Attributes:
        dataset: Dataset name.
        missing_rate: Requested hidden fraction.
        repeat: Repeat index.
        seed: Trial seed.
        variant: Method variant name.
        alpha: Trace-norm weight the variant ran with (None for non-solver variants).
        mask_hash: Fingerprint of the mask shared by all variants of the trial.
        metric_means: Row-mean of each metric for this trial.
        iterations: Solver iterations used (None for non-solver variants).
        converged: Whether the residual stopping rule fired.
        final_residuals: Final (||D - A||_inf, ||D - B||_inf).
        trace: Per-iteration solver trace, kept only when requested.
    """

    model_config = ConfigDict(extra="forbid")

    dataset: str
    missing_rate: float
    repeat: int
    seed: int
    variant: str
    alpha: Optional[float] = None
    mask_hash: str
    metric_means: Dict[str, float]
    iterations: Optional[int] = None
    converged: Optional[bool] = None
    final_residuals: Optional[Tuple[float, float]] = None
    trace: Optional[List[IterationRecord]] = None

    def sort_key(self) -> Tuple[str, float, str, float, int]:
        return (self.dataset, self.missing_rate, self.variant, self.alpha or 0.0, self.repeat)
