# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from typing import Any, Dict

from pydantic import BaseModel, ConfigDict, Field


class TrialContext(BaseModel):
    """Coordinates of a single experiment trial.

    Attributes:
        dataset: Name of the dataset the trial runs on.
        missing_rate: The requested fraction of hidden entries.
        repeat: Zero-based repeat index.
        seed: The trial seed (base seed + repeat).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    dataset: str
    missing_rate: float = Field(..., ge=0.0, lt=1.0)
    repeat: int = Field(..., ge=0)
    seed: int

    @property
    def trial_id(self) -> str:
        """A stable identifier, e.g. ``synthetic/w0.50/r3``."""
        return f"{self.dataset}/w{self.missing_rate:.2f}/r{self.repeat}"

    def coordinates(self, **extra: Any) -> Dict[str, Any]:
        """Returns the coordinates as a plain dict, optionally extended (e.g. with a variant)."""
        coords: Dict[str, Any] = self.model_dump()
        coords.update(extra)
        return coords
