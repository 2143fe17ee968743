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


class HidLDLError(Exception):
    """Base class for all library errors."""

    pass


class DataValidationError(HidLDLError, ValueError):
    """Raised when a dataset, mask or hidden view violates its invariants."""

    pass


class GraphConstructionError(HidLDLError, ValueError):
    """Raised when the KNN graph cannot be built from the given parameters."""

    pass


class SolverDivergenceError(HidLDLError):
    """Raised when a non-finite value appears during a solve.

    Attributes:
        iteration: The ADMM iteration (1-based) at which the value was detected.
    """

    def __init__(self, message: str, iteration: int) -> None:
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class TrialError(HidLDLError):
    """Raised when an experiment trial fails.

    Attributes:
        coordinates: The trial coordinates (dataset, missing rate, repeat, variant).
    """

    def __init__(self, message: str, coordinates: Dict[str, Any]) -> None:
        rendered = ", ".join(f"{k}={v}" for k, v in coordinates.items())
        super().__init__(f"{message} [{rendered}]")
        self.coordinates = coordinates
