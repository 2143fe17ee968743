# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from coreason_hidldl.engine.solver import SolverConfig
from coreason_hidldl.utils.io import canonical_json, sha256_hex

ExperimentMode = Literal["recovery", "predictive", "ablation", "alpha_sweep", "missing_rate_sweep"]
AblationName = Literal["without_constraint", "without_trace_norm"]

DEFAULT_ALPHA_GRID = [2.0**e for e in range(-10, 11)]


class SyntheticSpec(BaseModel):
    """Parameters of the synthetic low-rank label generator.

    Attributes:
        n: Number of instances.
        d: Feature dimension.
        m: Number of labels.
        rank: Number of prototype distributions.
        noise_feature: Std of Gaussian noise added to features.
        noise_label: Std of Gaussian noise added to labels before clamping and renormalising.
        label_floor: Weight of the uniform distribution mixed into every label row.
        concentration: Symmetric Dirichlet concentration for the prototypes.
        seed: Generator seed.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    n: int = Field(200, ge=2)
    d: int = Field(16, ge=1)
    m: int = Field(6, ge=2)
    rank: int = Field(2, ge=1)
    noise_feature: float = Field(0.05, ge=0.0)
    noise_label: float = Field(0.02, ge=0.0)
    label_floor: float = Field(0.05, ge=0.0, lt=1.0)
    concentration: float = Field(2.0, gt=0.0)
    seed: int = 0

    @model_validator(mode="after")
    def _rank_fits(self) -> "SyntheticSpec":
        if self.rank > self.m:
            raise ValueError(f"rank {self.rank} exceeds the number of labels {self.m}")
        return self


class DatasetSource(BaseModel):
    """Where the experiment data comes from: two CSV files, or the synthetic generator."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    features_path: Optional[Path] = None
    labels_path: Optional[Path] = None
    name: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None

    @model_validator(mode="after")
    def _one_source(self) -> "DatasetSource":
        has_files = self.features_path is not None or self.labels_path is not None
        if has_files and (self.features_path is None or self.labels_path is None):
            raise ValueError("features_path and labels_path must be given together")
        if has_files and self.synthetic is not None:
            raise ValueError("give either dataset files or a synthetic spec, not both")
        return self

    @property
    def is_synthetic(self) -> bool:
        return self.features_path is None

    def synthetic_spec(self) -> SyntheticSpec:
        return self.synthetic or SyntheticSpec()


class ExperimentConfig(BaseModel):
    """Configuration of an experiment run.

    Attributes:
        dataset: Data source; synthetic defaults when omitted.
        mode: Which protocol to run.
        missing_rates: Hidden fractions to evaluate.
        repeats: Trials per missing rate; trial seeds are seed + repeat.
        alpha: Trace-norm weight for the full method.
        alpha_grid: Grid for the sweep and for alpha selection.
        select_alpha: Pick alpha from the grid by mean Canberra before running.
        sigma: Gaussian bandwidth of the KNN graph.
        rho: ADMM penalty.
        k: Neighbour count; defaults to the number of labels.
        max_iterations: ADMM iteration cap.
        residual_tolerance: ADMM residual stopping threshold.
        seed: Base seed.
        zscore: Standardise features before building graphs.
        ablations: Ablated variants run in ablation mode.
        train_fraction: Train share in the predictive setting.
        predictor_max_iters: Iteration cap of the downstream learner.
        predictor_tolerance: Gradient tolerance of the downstream learner.
        significance_level: Level of the one-sided paired t-tests.
        record_traces: Keep per-iteration solver traces in the report.
        max_parallel_trials: Worker threads for independent trials (not part of the hash).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    dataset: DatasetSource = Field(default_factory=DatasetSource)
    mode: ExperimentMode = "recovery"
    missing_rates: List[float] = Field(default_factory=lambda: [0.4, 0.5, 0.6, 0.7, 0.8], min_length=1)
    repeats: int = Field(5, ge=1)
    alpha: float = Field(1.0, ge=0.0)
    alpha_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_ALPHA_GRID), min_length=1)
    select_alpha: bool = True
    sigma: float = Field(1.0, gt=0.0)
    rho: float = Field(2.0, gt=0.0)
    k: Optional[int] = Field(None, ge=1)
    max_iterations: int = Field(100, ge=0)
    residual_tolerance: float = Field(1e-3, gt=0.0)
    seed: int = 0
    zscore: bool = False
    ablations: List[AblationName] = Field(default_factory=lambda: ["without_constraint", "without_trace_norm"])
    train_fraction: float = Field(0.8, gt=0.0, lt=1.0)
    predictor_max_iters: int = Field(500, ge=0)
    predictor_tolerance: float = Field(1e-6, gt=0.0)
    significance_level: float = Field(0.05, gt=0.0, lt=1.0)
    record_traces: bool = False
    max_parallel_trials: int = Field(4, ge=1)

    @field_validator("missing_rates")
    @classmethod
    def _rates_in_range(cls, rates: List[float]) -> List[float]:
        for rate in rates:
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"missing rate {rate} outside [0, 1)")
        return rates

    @field_validator("alpha_grid")
    @classmethod
    def _grid_nonnegative(cls, grid: List[float]) -> List[float]:
        for value in grid:
            if value < 0:
                raise ValueError(f"alpha grid value {value} is negative")
        return grid

    def solver_config(self, alpha: float, use_constraint: bool = True) -> SolverConfig:
        return SolverConfig(
            alpha=alpha,
            rho=self.rho,
            max_iterations=self.max_iterations,
            residual_tolerance=self.residual_tolerance,
            use_constraint=use_constraint,
            seed=self.seed,
        )

    def trial_seed(self, repeat: int) -> int:
        return self.seed + repeat

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of every field that influences results."""
        payload = self.model_dump(mode="json", exclude={"max_parallel_trials"})
        return sha256_hex(canonical_json(payload))
