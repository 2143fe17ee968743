# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

import math

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict
from scipy.special import betainc

from coreason_hidldl.evaluation.metrics import SIMILARITY_METRICS
from coreason_hidldl.utils.logger import logger


class TTestResult(BaseModel):
    """Outcome of a one-sided paired t-test of H1: mean(a - b) < 0.

    Attributes:
        t_stat: The t statistic (+/-inf for zero-variance nonzero differences).
        p_value: Lower-tail probability under Student's t with n - 1 degrees of freedom.
        significant: p_value < level.
        n_pairs: Number of pairs.
        mean_difference: mean(a - b).
        level: The significance level used.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    t_stat: float
    p_value: float
    significant: bool
    n_pairs: int
    mean_difference: float
    level: float


def student_t_cdf(t: float, dof: int) -> float:
    """P(T <= t) for Student's t via the regularised incomplete beta function."""
    if math.isinf(t):
        return 0.0 if t < 0 else 1.0
    tail = 0.5 * float(betainc(dof / 2.0, 0.5, dof / (dof + t * t)))
    return tail if t < 0 else 1.0 - tail


def paired_ttest_one_sided(
    scores_a: npt.ArrayLike, scores_b: npt.ArrayLike, level: float = 0.05
) -> TTestResult:
    """Tests whether ``scores_a`` is significantly lower than ``scores_b``.

    Zero-variance differences are resolved by their sign: a zero mean gives t = 0 and
    p = 0.5; a negative mean is declared significant with p = 0.

    Raises:
        ValueError: On fewer than 2 pairs, unequal lengths or a level outside (0, 1).
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired scores must be equal-length vectors, got {a.shape} and {b.shape}")
    n = int(a.size)
    if n < 2:
        raise ValueError(f"need at least 2 pairs, got {n}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")

    diff = a - b
    mean = float(np.mean(diff))
    sd = float(np.std(diff, ddof=1))

    if sd == 0.0:
        if mean == 0.0:
            t_stat, p_value = 0.0, 0.5
        else:
            t_stat = -math.inf if mean < 0 else math.inf
            p_value = 0.0 if mean < 0 else 1.0
            logger.warning("Degenerate t-test input: zero variance", mean_difference=mean, n_pairs=n)
    else:
        t_stat = mean / (sd / math.sqrt(n))
        p_value = student_t_cdf(t_stat, n - 1)

    return TTestResult(
        t_stat=t_stat,
        p_value=p_value,
        significant=p_value < level,
        n_pairs=n,
        mean_difference=mean,
        level=level,
    )


def compare_scores(
    metric: str, scores_a: npt.ArrayLike, scores_b: npt.ArrayLike, level: float = 0.05
) -> TTestResult:
    """Direction-aware test that method a beats method b on ``metric``.

    Distances are tested as-is (lower is better); similarities are negated first.
    """
    if metric in SIMILARITY_METRICS:
        return paired_ttest_one_sided(-np.asarray(scores_a), -np.asarray(scores_b), level)
    return paired_ttest_one_sided(scores_a, scores_b, level)
