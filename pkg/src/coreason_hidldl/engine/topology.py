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

import networkx as nx
import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.distance import cdist

from coreason_hidldl.core.errors import GraphConstructionError
from coreason_hidldl.core.types import FloatMatrix
from coreason_hidldl.utils.io import write_matrix
from coreason_hidldl.utils.logger import logger


class SimilarityGraph(BaseModel):
    """KNN similarity graph over the samples and its Laplacian.

    The smoothness energy is defined in trace form, tr(D^T G D). The pairwise sum
    sum_ij A_ij ||d_i - d_j||^2 equals twice that value.

    Attributes:
        similarity: Symmetric n x n Gaussian weights A, zero diagonal.
        laplacian: G = diag(A 1) - A.
        k: Neighbour count used for the directed KNN lists.
        bandwidth: Gaussian kernel bandwidth sigma.
        n_components: Connected components of the KNN graph.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    similarity: FloatMatrix
    laplacian: FloatMatrix
    k: int = Field(..., ge=1)
    bandwidth: float = Field(..., gt=0.0)
    n_components: int = Field(1, ge=1)

    @property
    def n(self) -> int:
        return int(self.similarity.shape[0])


class GraphBuilder:
    """Builds KNN Gaussian similarity graphs with deterministic tie-breaking."""

    def __init__(self, k: int, bandwidth: float = 1.0) -> None:
        """Initializes the GraphBuilder.

        Args:
            k: Number of nearest neighbours per sample (self excluded).
            bandwidth: Gaussian kernel bandwidth sigma.

        Raises:
            GraphConstructionError: If k < 1 or bandwidth <= 0.
        """
        if k < 1:
            raise GraphConstructionError(f"k must be >= 1, got {k}")
        if not bandwidth > 0:
            raise GraphConstructionError(f"bandwidth must be > 0, got {bandwidth}")
        self.k = k
        self.bandwidth = bandwidth

    def neighbours(self, sq_dist: npt.NDArray[np.float64]) -> npt.NDArray[np.intp]:
        """Returns the n x k neighbour indices; distance ties go to the smaller index."""
        ranked = sq_dist.copy()
        np.fill_diagonal(ranked, np.inf)
        return np.argsort(ranked, axis=1, kind="stable")[:, : self.k]

    def build(self, features: npt.NDArray[np.float64]) -> SimilarityGraph:
        """Builds the graph for the rows of ``features``.

        Samples i and j are connected when either is among the other's k nearest
        neighbours; connected pairs get exp(-||x_i - x_j||^2 / (2 sigma^2)).

        Raises:
            GraphConstructionError: If n < 2 or k > n - 1.
        """
        features = np.asarray(features, dtype=np.float64)
        n = features.shape[0]
        if n < 2:
            raise GraphConstructionError(f"need at least 2 samples, got {n}")
        if self.k > n - 1:
            raise GraphConstructionError(f"k={self.k} out of range for n={n} (max {n - 1})")

        sq_dist = cdist(features, features, metric="sqeuclidean")
        nbrs = self.neighbours(sq_dist)

        directed = np.zeros((n, n), dtype=bool)
        directed[np.repeat(np.arange(n), self.k), nbrs.ravel()] = True
        connected = directed | directed.T

        weights = np.exp(-sq_dist / (2.0 * self.bandwidth**2))
        similarity = np.where(connected, weights, 0.0)
        laplacian = np.diag(similarity.sum(axis=1)) - similarity

        n_components = self.count_components(connected)
        if n_components > 1:
            logger.warning("KNN graph is disconnected", components=n_components, n=n, k=self.k)

        return SimilarityGraph(
            similarity=similarity,
            laplacian=laplacian,
            k=self.k,
            bandwidth=self.bandwidth,
            n_components=n_components,
        )

    def count_components(self, connected: npt.NDArray[np.bool_]) -> int:
        graph = nx.from_numpy_array(connected.astype(np.int8))
        return int(nx.number_connected_components(graph))


def build_graph(features: npt.NDArray[np.float64], k: int, bandwidth: float = 1.0) -> SimilarityGraph:
    """Builds the KNN similarity graph and Laplacian of ``features``."""
    return GraphBuilder(k=k, bandwidth=bandwidth).build(features)


def default_k(n: int, m: int) -> int:
    """Neighbour count defaults to the number of labels, capped at n - 1."""
    return max(1, min(m, n - 1))


def _check_rows(graph: SimilarityGraph, D: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != graph.n:
        raise ValueError(f"matrix with shape {D.shape} does not match a graph over {graph.n} samples")
    return D


def smoothness_energy(graph: SimilarityGraph, D: npt.NDArray[np.float64]) -> float:
    """tr(D^T G D)."""
    D = _check_rows(graph, D)
    return float(np.sum(D * (graph.laplacian @ D)))


def pairwise_energy(graph: SimilarityGraph, D: npt.NDArray[np.float64]) -> float:
    """sum_ij A_ij ||d_i - d_j||^2, which equals 2 * smoothness_energy."""
    D = _check_rows(graph, D)
    return float(np.sum(graph.similarity * cdist(D, D, metric="sqeuclidean")))


def largest_eigenvalue(laplacian: npt.NDArray[np.float64], iterations: int = 50, seed: int = 0) -> float:
    """Power-iteration estimate of the largest eigenvalue of a symmetric PSD matrix.

    The start vector is drawn from ``seed``; the constant vector would sit in the
    Laplacian's null space.
    """
    n = laplacian.shape[0]
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iterations):
        w = laplacian @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        estimate = float(v @ (laplacian @ v))
    return estimate


def save_graph(graph: SimilarityGraph, directory: str | Path) -> None:
    """Writes ``similarity.csv`` and ``laplacian.csv`` into ``directory``."""
    directory = Path(directory)
    write_matrix(directory / "similarity.csv", graph.similarity)
    write_matrix(directory / "laplacian.csv", graph.laplacian)
