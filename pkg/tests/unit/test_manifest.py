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

import pytest
from pydantic import ValidationError

from coreason_hidldl.core.manifest import DEFAULT_ALPHA_GRID, DatasetSource, ExperimentConfig, SyntheticSpec


def test_defaults() -> None:
    config = ExperimentConfig()

    assert config.mode == "recovery"
    assert config.missing_rates == [0.4, 0.5, 0.6, 0.7, 0.8]
    assert (config.rho, config.sigma, config.max_iterations, config.residual_tolerance) == (2.0, 1.0, 100, 1e-3)
    assert config.alpha_grid[0] == 2.0**-10 and config.alpha_grid[-1] == 2.0**10
    assert len(DEFAULT_ALPHA_GRID) == 21
    assert config.dataset.is_synthetic
    assert config.dataset.synthetic_spec() == SyntheticSpec()
    assert config.select_alpha


def test_solver_config_and_seeds() -> None:
    config = ExperimentConfig(seed=7, rho=3.0, max_iterations=12)

    solver = config.solver_config(0.5, use_constraint=False)

    assert (solver.alpha, solver.rho, solver.max_iterations, solver.use_constraint) == (0.5, 3.0, 12, False)
    assert [config.trial_seed(r) for r in range(3)] == [7, 8, 9]


def test_config_hash() -> None:
    base = ExperimentConfig()

    assert base.config_hash() == ExperimentConfig().config_hash()
    assert base.config_hash() == ExperimentConfig(max_parallel_trials=1).config_hash()
    assert base.config_hash() != ExperimentConfig(seed=1).config_hash()
    assert len(base.config_hash()) == 64


@pytest.mark.parametrize(  # type: ignore
    "overrides",
    [
        {"missing_rates": [1.0]},
        {"missing_rates": []},
        {"alpha_grid": [-1.0]},
        {"rho": 0.0},
        {"repeats": 0},
        {"mode": "bogus"},
        {"ablations": ["without_graph"]},
        {"unknown": 1},
    ],
)
def test_invalid_configs(overrides: dict[str, object]) -> None:
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(overrides)


def test_dataset_source_validation(tmp_path: Path) -> None:
    files = DatasetSource(features_path=tmp_path / "x.csv", labels_path=tmp_path / "y.csv")
    assert not files.is_synthetic

    with pytest.raises(ValidationError, match="together"):
        DatasetSource(features_path=tmp_path / "x.csv")
    with pytest.raises(ValidationError, match="not both"):
        DatasetSource(features_path=tmp_path / "x.csv", labels_path=tmp_path / "y.csv", synthetic=SyntheticSpec())


def test_synthetic_spec_rank_check() -> None:
    with pytest.raises(ValidationError, match="exceeds"):
        SyntheticSpec(m=3, rank=4)


def test_config_json_round_trip() -> None:
    config = ExperimentConfig(mode="ablation", dataset={"synthetic": {"n": 30}}, missing_rates=[0.3])

    again = ExperimentConfig.model_validate_json(config.model_dump_json())

    assert again == config
    assert again.dataset.synthetic_spec().n == 30
