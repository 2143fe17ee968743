# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

import csv
from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from coreason_hidldl.evaluation.metrics import METRICS
from coreason_hidldl.evaluation.significance import TTestResult, compare_scores
from coreason_hidldl.events.protocol import TrialRecord

GroupKey = Tuple[str, float, str, Optional[float]]


class AggregateMetric(BaseModel):
    """Mean and sample std of a metric over the trials of one cell."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mean: float
    std: float
    trials: List[float]


class ReportEntry(BaseModel):
    """One (dataset, missing rate, variant, alpha) cell of the results table."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dataset: str
    missing_rate: float
    variant: str
    alpha: Optional[float] = None
    metrics: Dict[str, AggregateMetric]
    converged_trials: Optional[int] = None


class Comparison(BaseModel):
    """Paired test that ``variant`` beats ``baseline`` on ``metric`` at one missing rate."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dataset: str
    missing_rate: float
    metric: str
    variant: str
    baseline: str
    result: TTestResult


class Provenance(BaseModel):
    """What produced the report."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    config_hash: str
    base_seed: int
    trial_seeds: List[int]
    package_version: str
    created_at: str


class ExperimentReport(BaseModel):
    """Aggregated results of an experiment run."""

    model_config = ConfigDict(extra="forbid")

    mode: str
    config: Dict[str, Any]
    provenance: Provenance
    selected_alpha: Optional[float] = None
    alpha_selection: List[ReportEntry] = Field(default_factory=list)
    entries: List[ReportEntry] = Field(default_factory=list)
    comparisons: List[Comparison] = Field(default_factory=list)
    trials: List[TrialRecord] = Field(default_factory=list)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def deterministic_json(self) -> str:
        """The report without its creation timestamp; identical across reruns of a config."""
        return self.model_dump_json(indent=2, exclude={"provenance": {"created_at"}})

    def entry(self, variant: str, missing_rate: float, alpha: Optional[float] = None) -> ReportEntry:
        for item in self.entries:
            same_alpha = alpha is None or item.alpha == alpha
            if item.variant == variant and item.missing_rate == missing_rate and same_alpha:
                return item
        raise KeyError(f"no entry for variant={variant}, missing_rate={missing_rate}, alpha={alpha}")


def _sample_std(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def _group(trials: Sequence[TrialRecord]) -> Dict[GroupKey, List[TrialRecord]]:
    groups: Dict[GroupKey, List[TrialRecord]] = defaultdict(list)
    for trial in sorted(trials, key=TrialRecord.sort_key):
        groups[(trial.dataset, trial.missing_rate, trial.variant, trial.alpha)].append(trial)
    return groups


def aggregate(trials: Sequence[TrialRecord]) -> List[ReportEntry]:
    """Per-cell mean and std of the per-trial metric means, trials ordered by repeat."""
    entries: List[ReportEntry] = []
    for (dataset, rate, variant, alpha), members in _group(trials).items():
        metrics = {}
        for name in METRICS:
            values = [t.metric_means[name] for t in members]
            metrics[name] = AggregateMetric(mean=float(np.mean(values)), std=_sample_std(values), trials=values)
        flags = [t.converged for t in members if t.converged is not None]
        entries.append(
            ReportEntry(
                dataset=dataset,
                missing_rate=rate,
                variant=variant,
                alpha=alpha,
                metrics=metrics,
                converged_trials=sum(flags) if flags else None,
            )
        )
    return entries


def compare(
    trials: Sequence[TrialRecord], pairs: Sequence[Tuple[str, str]], level: float = 0.05
) -> List[Comparison]:
    """One-sided paired t-tests over repeats for each (variant, baseline) pair and metric.

    Cells with fewer than two common repeats are skipped.
    """
    by_cell: Dict[Tuple[str, float, str], Dict[int, TrialRecord]] = defaultdict(dict)
    for trial in trials:
        by_cell[(trial.dataset, trial.missing_rate, trial.variant)][trial.repeat] = trial

    cells = sorted({(t.dataset, t.missing_rate) for t in trials})
    comparisons: List[Comparison] = []
    for dataset, rate in cells:
        for variant, baseline in pairs:
            ours = by_cell.get((dataset, rate, variant), {})
            theirs = by_cell.get((dataset, rate, baseline), {})
            repeats = sorted(set(ours) & set(theirs))
            if len(repeats) < 2:
                continue
            for name in METRICS:
                a = [ours[r].metric_means[name] for r in repeats]
                b = [theirs[r].metric_means[name] for r in repeats]
                comparisons.append(
                    Comparison(
                        dataset=dataset,
                        missing_rate=rate,
                        metric=name,
                        variant=variant,
                        baseline=baseline,
                        result=compare_scores(name, a, b, level),
                    )
                )
    return comparisons


SUMMARY_COLUMNS = ("dataset", "missing_rate", "variant", "alpha", "metric", "mean", "std")
CURVE_COLUMNS = ("missing_rate", "alpha", "variant", "metric", "mean", "std")


def write_tables(report: ExperimentReport, directory: str | Path) -> List[Path]:
    """Writes report.json and summary.csv, plus curves.csv for the sweep modes.

    Returns:
        List[Path]: The files written.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [directory / "report.json", directory / "summary.csv"]
    written[0].write_text(report.to_json(), encoding="utf-8")

    with written[1].open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for entry in report.entries:
            alpha = "" if entry.alpha is None else repr(entry.alpha)
            for name, agg in entry.metrics.items():
                rate = repr(entry.missing_rate)
                writer.writerow([entry.dataset, rate, entry.variant, alpha, name, repr(agg.mean), repr(agg.std)])

    if report.mode in ("alpha_sweep", "missing_rate_sweep"):
        curves = directory / "curves.csv"
        with curves.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CURVE_COLUMNS)
            for entry in report.entries:
                alpha = "" if entry.alpha is None else repr(entry.alpha)
                for name, agg in entry.metrics.items():
                    row = [repr(entry.missing_rate), alpha, entry.variant, name, repr(agg.mean), repr(agg.std)]
                    writer.writerow(row)
        written.append(curves)
    return written
