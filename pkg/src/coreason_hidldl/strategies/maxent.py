# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

"""Maximum-entropy (softmax-linear) label distribution learner.

Used as the common downstream learner in the predictive setting. Training minimises the
mean KL divergence from the targets by gradient descent with a backtracking line search,
in place of a quasi-Newton optimiser.
"""

from pathlib import Path
from typing import List, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import rel_entr

from coreason_hidldl.core.dataset import SIMPLEX_TOLERANCE, check_simplex_rows
from coreason_hidldl.core.errors import SolverDivergenceError
from coreason_hidldl.core.types import FloatMatrix, FloatVector
from coreason_hidldl.utils.logger import logger

Matrix = npt.NDArray[np.float64]

ARMIJO = 1e-4
SHRINK = 0.5
GROW = 2.0
MAX_STEP = 1e3
MIN_STEP = 1e-12


def softmax(scores: Matrix) -> Matrix:
    """Row-wise softmax with max-score subtraction."""
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


class MaxEntModel(BaseModel):
    """Softmax-linear model P = softmax(X W + b).

    Attributes:
        weights: d x m score weights.
        bias: Length-m score bias.
        training_log: (iteration, loss) for every accepted step, starting at iteration 0.
        iterations: Accepted gradient steps.
        converged: Whether the gradient tolerance was met.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    weights: FloatMatrix
    bias: FloatVector
    training_log: List[Tuple[int, float]] = Field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @classmethod
    def zeros(cls, d: int, m: int) -> "MaxEntModel":
        return cls(weights=np.zeros((d, m)), bias=np.zeros(m))

    @property
    def final_loss(self) -> float:
        return self.training_log[-1][1] if self.training_log else float("nan")

    def scores(self, features: npt.ArrayLike) -> Matrix:
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if X.shape[1] != self.weights.shape[0]:
            raise ValueError(f"feature width {X.shape[1]} does not match model width {self.weights.shape[0]}")
        return X @ self.weights + self.bias

    def save(self, path: str | Path) -> None:
        """Writes the model as JSON (weights row-major)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MaxEntModel":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def predict(model: MaxEntModel, features: npt.ArrayLike) -> Matrix:
    """Predicted label distributions, one row per feature row."""
    return softmax(model.scores(features))


def _check_training_data(features: Matrix, targets: Matrix) -> None:
    if features.ndim != 2 or targets.ndim != 2 or features.shape[0] != targets.shape[0]:
        raise ValueError(f"shape mismatch: features {features.shape}, targets {targets.shape}")


def loss_and_gradient(
    model: MaxEntModel, features: npt.ArrayLike, targets: npt.ArrayLike
) -> Tuple[float, Matrix, npt.NDArray[np.float64]]:
    """Mean KL(target || prediction) and its gradients.

    Returns:
        Tuple: (loss, dL/dW = X^T (P - T) / n, dL/db = column means of P - T).
    """
    X = np.asarray(features, dtype=np.float64)
    T = np.asarray(targets, dtype=np.float64)
    _check_training_data(X, T)
    P = predict(model, X)
    if P.shape != T.shape:
        raise ValueError(f"shape mismatch: predictions {P.shape}, targets {T.shape}")
    n = X.shape[0]
    loss = float(np.sum(rel_entr(T, P)) / n)
    residual = P - T
    return loss, X.T @ residual / n, residual.mean(axis=0)


def fit(
    features: npt.ArrayLike,
    targets: npt.ArrayLike,
    max_iters: int = 500,
    tolerance: float = 1e-6,
    seed: int = 0,
) -> MaxEntModel:
    """Trains a model from zero initialisation.

    Stops when the gradient infinity-norm drops below ``tolerance``, after ``max_iters``
    accepted steps, or when the line search cannot make progress. ``seed`` does not
    influence the result.

    Raises:
        ValueError: On mismatched shapes or targets off the simplex.
        SolverDivergenceError: If the loss becomes non-finite.
    """
    X = np.asarray(features, dtype=np.float64)
    T = np.asarray(targets, dtype=np.float64)
    _check_training_data(X, T)
    check_simplex_rows(T, SIMPLEX_TOLERANCE)

    d, m = X.shape[1], T.shape[1]
    W = np.zeros((d, m))
    b = np.zeros(m)
    model = MaxEntModel(weights=W, bias=b)
    loss, gW, gb = loss_and_gradient(model, X, T)
    log: List[Tuple[int, float]] = [(0, loss)]
    step = 1.0
    converged = False
    iteration = 0

    while iteration < max_iters:
        grad_inf = max(float(np.max(np.abs(gW), initial=0.0)), float(np.max(np.abs(gb))))
        if grad_inf < tolerance:
            converged = True
            break
        grad_sq = float(np.sum(gW**2) + np.sum(gb**2))
        accepted = False
        while step >= MIN_STEP:
            candidate = MaxEntModel(weights=W - step * gW, bias=b - step * gb)
            new_loss, new_gW, new_gb = loss_and_gradient(candidate, X, T)
            if not np.isfinite(new_loss):
                raise SolverDivergenceError("non-finite training loss", iteration=iteration + 1)
            if new_loss <= loss - ARMIJO * step * grad_sq:
                accepted = True
                break
            step *= SHRINK
        if not accepted:
            logger.debug("Line search stalled", iteration=iteration, loss=loss)
            break
        iteration += 1
        W, b = candidate.weights, candidate.bias
        loss, gW, gb = new_loss, new_gW, new_gb
        log.append((iteration, loss))
        step = min(step * GROW, MAX_STEP)
    else:
        grad_inf = max(float(np.max(np.abs(gW), initial=0.0)), float(np.max(np.abs(gb))))
        converged = grad_inf < tolerance

    logger.info("MaxEnt training finished", iterations=iteration, loss=loss, converged=converged)
    return MaxEntModel(weights=W, bias=b, training_log=log, iterations=iteration, converged=converged)
