# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from typing import List, Optional

import numpy as np
import numpy.typing as npt

from coreason_hidldl.core.dataset import HiddenView
from coreason_hidldl.core.interfaces import Recoverer, RecoveryOutcome
from coreason_hidldl.core.manifest import ExperimentConfig
from coreason_hidldl.engine.solver import SolverConfig, solve
from coreason_hidldl.engine.topology import SimilarityGraph


class AdmmRecoverer:
    """The ADMM solver under a given configuration (full method or an ablation)."""

    def __init__(self, name: str, config: SolverConfig) -> None:
        self.name = name
        self.config = config
        self.alpha: Optional[float] = config.alpha

    def recover(self, hidden: HiddenView, graph: SimilarityGraph) -> RecoveryOutcome:
        result = solve(hidden, graph, self.config)
        return RecoveryOutcome(recovered=result.recovered, result=result)


class IdentityRecoverer:
    """Baseline that uses the observed incomplete distributions unchanged."""

    name = "identity"
    alpha: Optional[float] = None

    def recover(self, hidden: HiddenView, graph: SimilarityGraph) -> RecoveryOutcome:
        return RecoveryOutcome(recovered=hidden.observed)


class GroundTruthRecoverer:
    """Oracle that returns the complete training labels; predictive setting only."""

    name = "ground_truth"
    alpha: Optional[float] = None

    def __init__(self, labels: npt.ArrayLike) -> None:
        self.labels = np.asarray(labels, dtype=np.float64)

    def recover(self, hidden: HiddenView, graph: SimilarityGraph) -> RecoveryOutcome:
        if self.labels.shape != hidden.observed.shape:
            raise ValueError(f"shape mismatch: labels {self.labels.shape}, view {hidden.observed.shape}")
        return RecoveryOutcome(recovered=self.labels)


def ablation_recoverers(config: ExperimentConfig, alpha: float) -> List[Recoverer]:
    """The full method followed by the configured ablations."""
    recoverers: List[Recoverer] = [AdmmRecoverer("full", config.solver_config(alpha))]
    for name in config.ablations:
        if name == "without_constraint":
            recoverers.append(AdmmRecoverer(name, config.solver_config(alpha, use_constraint=False)))
        else:
            recoverers.append(AdmmRecoverer(name, config.solver_config(0.0)))
    return recoverers


def recovery_recoverers(config: ExperimentConfig, alpha: float) -> List[Recoverer]:
    """The full method and the identity baseline."""
    return [AdmmRecoverer("full", config.solver_config(alpha)), IdentityRecoverer()]


def sweep_recoverers(config: ExperimentConfig) -> List[Recoverer]:
    """One full-method recoverer per grid value, in ascending alpha order."""
    return [AdmmRecoverer("full", config.solver_config(alpha)) for alpha in sorted(set(config.alpha_grid))]
