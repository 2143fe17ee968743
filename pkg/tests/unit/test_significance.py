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
import pytest
from scipy import integrate, stats

from coreason_hidldl.evaluation.significance import compare_scores, paired_ttest_one_sided, student_t_cdf


def test_clearly_better_method() -> None:
    """Differences [-1, -1.2, -0.8, -1.1, -0.9]: mean -1, t about -14.14."""
    b = np.array([3.0, 3.0, 3.0, 3.0, 3.0])
    a = b + np.array([-1.0, -1.2, -0.8, -1.1, -0.9])

    result = paired_ttest_one_sided(a, b)

    assert result.mean_difference == pytest.approx(-1.0)
    assert result.t_stat == pytest.approx(-14.142, abs=1e-3)
    assert result.p_value < 1e-4
    assert result.significant
    assert result.n_pairs == 5


def test_matches_scipy() -> None:
    rng = np.random.default_rng(3)
    for n in (2, 5, 12):
        a = rng.normal(0.0, 1.0, n)
        b = a + rng.normal(0.2, 0.5, n)
        ours = paired_ttest_one_sided(a, b)
        reference = stats.ttest_rel(a, b, alternative="less")
        assert ours.t_stat == pytest.approx(float(reference.statistic), rel=1e-10)
        assert ours.p_value == pytest.approx(float(reference.pvalue), rel=1e-8, abs=1e-14)


def test_t_cdf_matches_density_integral() -> None:
    for dof in (1, 4, 30):
        density = lambda x, v=dof: (  # noqa: E731
            math.gamma((v + 1) / 2) / (math.sqrt(v * math.pi) * math.gamma(v / 2)) * (1 + x * x / v) ** (-(v + 1) / 2)
        )
        for t in (-3.0, -0.5, 0.0, 1.7):
            expected, _ = integrate.quad(density, -math.inf, t)
            assert student_t_cdf(t, dof) == pytest.approx(expected, abs=1e-7)
    assert student_t_cdf(-math.inf, 3) == 0.0
    assert student_t_cdf(math.inf, 3) == 1.0


def test_degenerate_inputs() -> None:
    equal = paired_ttest_one_sided([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert (equal.t_stat, equal.p_value, equal.significant) == (0.0, 0.5, False)

    shifted = paired_ttest_one_sided([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
    assert shifted.t_stat == -math.inf
    assert shifted.p_value == 0.0
    assert shifted.significant

    worse = paired_ttest_one_sided([1.0, 2.0], [0.0, 1.0])
    assert worse.p_value == 1.0 and not worse.significant


def test_invalid_inputs() -> None:
    with pytest.raises(ValueError, match="at least 2"):
        paired_ttest_one_sided([1.0], [2.0])
    with pytest.raises(ValueError):
        paired_ttest_one_sided([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="level"):
        paired_ttest_one_sided([1.0, 2.0], [2.0, 3.0], level=1.0)


def test_compare_scores_direction() -> None:
    """A higher similarity is better, so it is negated before testing."""
    low = [0.80, 0.82, 0.79, 0.81]
    high = [0.90, 0.93, 0.88, 0.92]

    assert compare_scores("cosine", high, low).significant
    assert not compare_scores("cosine", low, high).significant
    assert compare_scores("canberra", low, high).significant
    assert not compare_scores("canberra", high, low).significant
