# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

"""ADMM recovery of complete label distributions from a hidden-label view.

Solves

    min_D  1/2 tr(D^T G D) + alpha ||D||_*
    s.t.   D 1 = 1,  D >= 0,  D in Cons

by splitting D into copies A (trace-norm prox) and B (proportionality prox) with
multipliers Lambda, Lambda' and a fixed penalty rho. Cons requires every row of B,
restricted to the observed positions, to be a scalar multiple k_i of the observed row.
"""

import csv
from pathlib import Path
from typing import List, Literal, Tuple, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, field_validator

from coreason_hidldl.core.dataset import HiddenView
from coreason_hidldl.core.errors import DataValidationError, SolverDivergenceError
from coreason_hidldl.core.types import FloatMatrix, FloatVector
from coreason_hidldl.engine.topology import SimilarityGraph, largest_eigenvalue
from coreason_hidldl.events.protocol import TRACE_COLUMNS, IterationRecord
from coreason_hidldl.utils.logger import logger

Matrix = npt.NDArray[np.float64]


class SolverConfig(BaseModel):
    """Configuration for a single ADMM solve.

    Attributes:
        alpha: Trace-norm weight.
        rho: Fixed ADMM penalty.
        max_iterations: Iteration cap.
        residual_tolerance: Stop once max(||D - A||_inf, ||D - B||_inf) falls below this.
        pgd_step: "auto" for 1 / (lambda_max(G) + 2 rho), or a fixed positive step.
        power_iterations: Power-iteration count for the lambda_max estimate.
        use_constraint: Enforce the proportional constraint in the B step.
        seed: Seed for the power-iteration start vector.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(1.0, ge=0.0)
    rho: float = Field(2.0, gt=0.0)
    max_iterations: int = Field(100, ge=0)
    residual_tolerance: float = Field(1e-3, gt=0.0)
    pgd_step: Union[Literal["auto"], float] = "auto"
    power_iterations: int = Field(50, ge=1)
    use_constraint: bool = True
    seed: int = 0

    def step_size(self, graph: SimilarityGraph) -> float:
        if self.pgd_step == "auto":
            lam = largest_eigenvalue(graph.laplacian, iterations=self.power_iterations, seed=self.seed)
            return 1.0 / (lam + 2.0 * self.rho)
        return float(self.pgd_step)

    @field_validator("pgd_step")
    @classmethod
    def _positive_step(cls, value: Union[str, float]) -> Union[str, float]:
        if not isinstance(value, str) and not value > 0:
            raise ValueError(f"pgd_step must be positive, got {value}")
        return value


class SolverState(BaseModel):
    """Iterates of the ADMM loop.

    Attributes:
        D: Primal iterate kept on the probability simplex.
        A: Trace-norm copy of D.
        B: Proportionality copy of D.
        lambda1: Multiplier for D = A.
        lambda2: Multiplier for D = B.
        iteration: Completed iterations.
        residual_history: (||D - A||_inf, ||D - B||_inf) per iteration.
        objective_history: Objective value per iteration.
    """

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    D: FloatMatrix
    A: FloatMatrix
    B: FloatMatrix
    lambda1: FloatMatrix
    lambda2: FloatMatrix
    iteration: int = 0
    residual_history: List[Tuple[float, float]] = Field(default_factory=list)
    objective_history: List[float] = Field(default_factory=list)

    @classmethod
    def initial(cls, hidden: HiddenView) -> "SolverState":
        """A = B = Lambda = Lambda' = 1, D = D^o."""
        ones = np.ones_like(hidden.observed)
        return cls(D=hidden.observed, A=ones, B=ones, lambda1=ones, lambda2=ones)

    def residuals(self) -> Tuple[float, float]:
        return (float(np.max(np.abs(self.D - self.A))), float(np.max(np.abs(self.D - self.B))))


class RecoveryResult(BaseModel):
    """Outcome of a solve.

    Attributes:
        recovered: Final D, rows on the simplex.
        scaling_coefficients: Per-row k_i from the last B step.
        B: Final proportionality copy.
        converged: Whether the residual stopping rule fired.
        iterations_used: Completed iterations.
        final_residuals: Last (||D - A||_inf, ||D - B||_inf).
        trace: Per-iteration residuals and objective.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    recovered: FloatMatrix
    scaling_coefficients: FloatVector
    B: FloatMatrix
    converged: bool
    iterations_used: int
    final_residuals: Tuple[float, float]
    trace: List[IterationRecord] = Field(default_factory=list)


def _check_same_shape(*matrices: Matrix) -> None:
    shapes = {np.shape(x) for x in matrices}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


def gradient_D(state: SolverState, graph: SimilarityGraph, config: SolverConfig) -> Matrix:
    """G D + Lambda + Lambda' + rho (D - A) + rho (D - B)."""
    _check_same_shape(state.D, state.A, state.B, state.lambda1, state.lambda2)
    if graph.n != state.D.shape[0]:
        raise ValueError(f"graph over {graph.n} samples, state has {state.D.shape[0]} rows")
    rho = config.rho
    return (
        graph.laplacian @ state.D
        + state.lambda1
        + state.lambda2
        + rho * (state.D - state.A)
        + rho * (state.D - state.B)
    )


def project_simplex_rows(D: Matrix) -> Matrix:
    """Clamps negatives to zero and rescales each row to sum to one.

    Rows with no positive entry become uniform. Proportions among the surviving
    positive entries are preserved, unlike the Euclidean simplex projection.
    """
    clipped = np.maximum(np.asarray(D, dtype=np.float64), 0.0)
    sums = clipped.sum(axis=1, keepdims=True)
    m = clipped.shape[1]
    safe = np.where(sums > 0.0, sums, 1.0)
    return np.where(sums > 0.0, clipped / safe, 1.0 / m)


def singular_value_threshold(Z: Matrix, threshold: float) -> Matrix:
    """Proximal operator of threshold * ||.||_*: shrink every singular value by ``threshold``."""
    if not np.isfinite(Z).all():
        raise ValueError("singular value thresholding on non-finite input")
    U, s, Vt = scipy.linalg.svd(Z, full_matrices=False, lapack_driver="gesdd")
    shrunk = np.maximum(s - threshold, 0.0)
    return (U * shrunk) @ Vt


def update_A(D: Matrix, lambda1: Matrix, alpha: float, rho: float) -> Matrix:
    """argmin_A 1/2 ||A - (D + Lambda/rho)||_F^2 + (alpha/rho) ||A||_*."""
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    _check_same_shape(D, lambda1)
    target = D + lambda1 / rho
    if alpha == 0:
        return target
    return singular_value_threshold(target, alpha / rho)


def scaling_coefficients(D: Matrix, lambda2: Matrix, hidden: HiddenView, rho: float) -> npt.NDArray[np.float64]:
    """k_i = sum_k (rho D_ik + Lambda'_ik) D^o_ik M_ik / (rho sum_k (D^o_ik)^2 M_ik).

    Raises:
        DataValidationError: If some row has no nonzero observed degree.
    """
    _check_same_shape(D, lambda2, hidden.observed)
    observed = hidden.observed * hidden.mask.entries
    denominator = rho * np.sum(observed**2, axis=1)
    if (denominator <= 0.0).any():
        row = int(np.flatnonzero(denominator <= 0.0)[0])
        raise DataValidationError(f"row {row} has no nonzero observed degree")
    numerator = np.sum((rho * D + lambda2) * observed, axis=1)
    return numerator / denominator


def update_B(
    D: Matrix, lambda2: Matrix, hidden: HiddenView, rho: float
) -> Tuple[Matrix, npt.NDArray[np.float64]]:
    """Row-wise prox onto Cons.

    Hidden positions take the unconstrained minimiser D + Lambda'/rho; observed positions
    are k_i * D^o with k_i the least-squares scale.

    Returns:
        Tuple: The new B and the coefficient vector k.
    """
    k = scaling_coefficients(D, lambda2, hidden, rho)
    free = D + lambda2 / rho
    B = np.where(hidden.mask.entries == 1, k[:, None] * hidden.observed, free)
    return B, k


def update_multipliers(state: SolverState, rho: float) -> SolverState:
    """Dual ascent: Lambda += rho (D - A), Lambda' += rho (D - B)."""
    _check_same_shape(state.D, state.A, state.B, state.lambda1, state.lambda2)
    return state.model_copy(
        update={
            "lambda1": state.lambda1 + rho * (state.D - state.A),
            "lambda2": state.lambda2 + rho * (state.D - state.B),
        }
    )


def trace_norm(D: Matrix) -> float:
    return float(np.sum(scipy.linalg.svd(D, compute_uv=False, lapack_driver="gesdd")))


def objective_value(D: Matrix, graph: SimilarityGraph, alpha: float) -> float:
    """1/2 tr(D^T G D) + alpha ||D||_*."""
    D = np.asarray(D, dtype=np.float64)
    if D.shape[0] != graph.n:
        raise ValueError(f"matrix with {D.shape[0]} rows does not match a graph over {graph.n} samples")
    smooth = 0.5 * float(np.sum(D * (graph.laplacian @ D)))
    if alpha == 0:
        return smooth
    return smooth + alpha * trace_norm(D)


class AdmmSolver:
    """Runs the ADMM loop: D step, projection, A step, B step, multiplier step."""

    def __init__(self, config: SolverConfig | None = None) -> None:
        """Initializes the AdmmSolver.

        Args:
            config: Solver configuration; defaults to ``SolverConfig()``.
        """
        self.config = config or SolverConfig()

    def step(self, state: SolverState, hidden: HiddenView, graph: SimilarityGraph, eta: float) -> SolverState:
        """Performs one ADMM iteration and returns the new state (history not appended)."""
        cfg = self.config
        grad = gradient_D(state, graph, cfg)
        if not np.isfinite(grad).all():
            logger.error("Non-finite gradient", iteration=state.iteration + 1)
            raise SolverDivergenceError("non-finite gradient", iteration=state.iteration + 1)
        D = project_simplex_rows(state.D - eta * grad)
        A = update_A(D, state.lambda1, cfg.alpha, cfg.rho)
        if cfg.use_constraint:
            B, _ = update_B(D, state.lambda2, hidden, cfg.rho)
        else:
            B = D + state.lambda2 / cfg.rho
        moved = state.model_copy(update={"D": D, "A": A, "B": B, "iteration": state.iteration + 1})
        return update_multipliers(moved, cfg.rho)

    def run(self, hidden: HiddenView, graph: SimilarityGraph) -> RecoveryResult:
        """Solves from the standard initialisation.

        Raises:
            ValueError: If the view and the graph disagree on n.
            SolverDivergenceError: If a non-finite value appears.
        """
        if hidden.n != graph.n:
            raise ValueError(f"dimension mismatch: view has {hidden.n} rows, graph has {graph.n} samples")
        cfg = self.config
        eta = cfg.step_size(graph)
        state = SolverState.initial(hidden)
        lambda2_used = state.lambda2
        trace: List[IterationRecord] = []
        converged = False

        logger.info(
            "Starting ADMM solve",
            n=hidden.n,
            m=hidden.m,
            alpha=cfg.alpha,
            rho=cfg.rho,
            step=eta,
            use_constraint=cfg.use_constraint,
        )

        while state.iteration < cfg.max_iterations:
            lambda2_used = state.lambda2
            state = self.step(state, hidden, graph, eta)
            t = state.iteration

            for name in ("D", "A", "B", "lambda1", "lambda2"):
                if not np.isfinite(getattr(state, name)).all():
                    logger.error("Non-finite iterate", iteration=t, variable=name)
                    raise SolverDivergenceError(f"non-finite values in {name}", iteration=t)

            r_da, r_db = state.residuals()
            objective = objective_value(state.D, graph, cfg.alpha)
            state.residual_history.append((r_da, r_db))
            state.objective_history.append(objective)
            trace.append(IterationRecord(iteration=t, residual_da=r_da, residual_db=r_db, objective=objective))
            logger.debug("ADMM iteration", iteration=t, residual_da=r_da, residual_db=r_db, objective=objective)

            if max(r_da, r_db) < cfg.residual_tolerance:
                converged = True
                break

        # k from the last B step's inputs, so it matches the reported B exactly.
        k = scaling_coefficients(state.D, lambda2_used, hidden, cfg.rho)
        residuals = state.residuals()
        logger.info(
            "ADMM solve finished",
            iterations=state.iteration,
            converged=converged,
            residual_da=residuals[0],
            residual_db=residuals[1],
        )
        return RecoveryResult(
            recovered=state.D,
            scaling_coefficients=k,
            B=state.B,
            converged=converged,
            iterations_used=state.iteration,
            final_residuals=residuals,
            trace=trace,
        )


def solve(hidden: HiddenView, graph: SimilarityGraph, config: SolverConfig | None = None) -> RecoveryResult:
    """Recovers the complete label matrix from ``hidden`` on ``graph``."""
    return AdmmSolver(config).run(hidden, graph)


def write_trace_csv(result: RecoveryResult, path: str | Path) -> None:
    """Writes the iteration trace with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for record in result.trace:
            writer.writerow(
                [record.iteration, repr(record.residual_da), repr(record.residual_db), repr(record.objective)]
            )
