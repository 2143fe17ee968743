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
from typing import Callable

import numpy as np
import numpy.typing as npt
import pytest

from coreason_hidldl.core.dataset import Dataset, HiddenView, generate_mask, hide
from coreason_hidldl.core.manifest import ExperimentConfig, SyntheticSpec
from coreason_hidldl.engine.topology import SimilarityGraph, build_graph
from coreason_hidldl.experiments.synthetic import generate_synthetic

pytest_plugins = ("pytest_asyncio",)


@pytest.fixture  # type: ignore
def anyio_backend() -> str:
    return "asyncio"


@pytest.fixture  # type: ignore
def small_spec() -> SyntheticSpec:
    return SyntheticSpec(n=50, d=6, m=4, rank=2, seed=3)


@pytest.fixture  # type: ignore
def small_dataset(small_spec: SyntheticSpec) -> Dataset:
    return generate_synthetic(small_spec)


@pytest.fixture  # type: ignore
def small_graph(small_dataset: Dataset) -> SimilarityGraph:
    return build_graph(small_dataset.features, k=4)


@pytest.fixture  # type: ignore
def half_hidden(small_dataset: Dataset) -> HiddenView:
    return hide(small_dataset.labels, generate_mask(small_dataset.labels, 0.5, seed=11))


@pytest.fixture  # type: ignore
def fast_config() -> ExperimentConfig:
    """A small synthetic experiment that runs in well under a second per trial."""
    return ExperimentConfig(
        dataset={"synthetic": {"n": 40, "d": 5, "m": 4, "rank": 2, "seed": 1}},
        missing_rates=[0.5],
        repeats=3,
        max_iterations=30,
        predictor_max_iters=100,
        alpha_grid=[0.25, 1.0, 4.0],
        select_alpha=False,
    )


@pytest.fixture  # type: ignore
def write_csv(tmp_path: Path) -> Callable[[str, npt.ArrayLike], Path]:
    """Writes a headerless CSV under tmp_path and returns its path."""

    def _write(name: str, matrix: npt.ArrayLike) -> Path:
        path = tmp_path / name
        rows = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        path.write_text("\n".join(",".join(repr(float(x)) for x in row) for row in rows) + "\n", encoding="utf-8")
        return path

    return _write
