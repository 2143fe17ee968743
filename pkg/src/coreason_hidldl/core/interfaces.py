# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from typing import Optional, Protocol

from pydantic import BaseModel, ConfigDict

from coreason_hidldl.core.dataset import HiddenView
from coreason_hidldl.core.types import FloatMatrix
from coreason_hidldl.engine.solver import RecoveryResult
from coreason_hidldl.engine.topology import SimilarityGraph


class RecoveryOutcome(BaseModel):
    """Recovered matrix plus the solver result when one was run.

    Attributes:
        recovered: n x m matrix with simplex rows.
        result: Full solver output, None for non-solver variants.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    recovered: FloatMatrix
    result: Optional[RecoveryResult] = None


class Recoverer(Protocol):
    """Interface for a method variant that completes a hidden-label view."""

    name: str
    alpha: Optional[float]

    def recover(self, hidden: HiddenView, graph: SimilarityGraph) -> RecoveryOutcome:
        """Completes the hidden view.

        Args:
            hidden: The observed incomplete distributions and mask.
            graph: The feature similarity graph over the same rows.

        Returns:
            RecoveryOutcome: The completed matrix.
        """
        ...
