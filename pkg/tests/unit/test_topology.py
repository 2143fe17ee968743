# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

import math
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pytest

from coreason_hidldl.core.dataset import Dataset
from coreason_hidldl.core.errors import GraphConstructionError
from coreason_hidldl.engine.topology import (
    GraphBuilder,
    SimilarityGraph,
    build_graph,
    default_k,
    largest_eigenvalue,
    pairwise_energy,
    save_graph,
    smoothness_energy,
)
from coreason_hidldl.utils.io import read_matrix


def brute_force_similarity(x: npt.NDArray[np.float64], k: int, sigma: float) -> npt.NDArray[np.float64]:
    """Direct loop implementation: k nearest by (distance, index), OR-symmetrised."""
    n = x.shape[0]
    dist = [[float(np.sum((x[i] - x[j]) ** 2)) for j in range(n)] for i in range(n)]
    linked = np.zeros((n, n), dtype=bool)
    for i in range(n):
        ranked = sorted((dist[i][j], j) for j in range(n) if j != i)
        for _, j in ranked[:k]:
            linked[i, j] = linked[j, i] = True
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if linked[i, j]:
                a[i, j] = math.exp(-dist[i][j] / (2 * sigma**2))
    return a


@pytest.fixture  # type: ignore
def two_point_graph() -> SimilarityGraph:
    return build_graph(np.array([[0.0, 0.0], [0.0, 0.0]]), k=1)


def test_two_identical_points(two_point_graph: SimilarityGraph) -> None:
    """Two identical points with k=1: A = [[0,1],[1,0]], G = [[1,-1],[-1,1]]."""
    np.testing.assert_array_equal(two_point_graph.similarity, [[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(two_point_graph.laplacian, [[1.0, -1.0], [-1.0, 1.0]])
    assert two_point_graph.n_components == 1


def test_gaussian_weight() -> None:
    """Squared distance 2 with sigma 1 gives exp(-1)."""
    graph = build_graph(np.array([[0.0, 0.0], [1.0, 1.0]]), k=1, bandwidth=1.0)

    assert graph.similarity[0, 1] == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_matches_brute_force(small_dataset: Dataset) -> None:
    for k, sigma in ((1, 1.0), (3, 0.5), (7, 2.0)):
        graph = build_graph(small_dataset.features, k=k, bandwidth=sigma)
        expected = brute_force_similarity(small_dataset.features, k, sigma)
        np.testing.assert_allclose(graph.similarity, expected, rtol=1e-12, atol=1e-15)


def test_graph_invariants(small_graph: SimilarityGraph) -> None:
    a, g = small_graph.similarity, small_graph.laplacian

    np.testing.assert_array_equal(a, a.T)
    assert (np.diag(a) == 0).all()
    assert (a >= 0).all()
    np.testing.assert_allclose(g.sum(axis=1), 0.0, atol=1e-12)
    assert np.linalg.eigvalsh(g).min() > -1e-10
    # every node has at least k neighbours after symmetrisation
    assert ((a > 0).sum(axis=1) >= small_graph.k).all()


def test_ties_break_towards_smaller_index() -> None:
    """All points identical: each node links to the lowest other indices."""
    x = np.zeros((5, 2))
    builder = GraphBuilder(k=2)

    nbrs = builder.neighbours(np.zeros((5, 5)))

    assert nbrs[0].tolist() == [1, 2]
    assert nbrs[3].tolist() == [0, 1]
    graph = builder.build(x)
    assert graph.similarity[3, 4] == 0.0
    assert graph.similarity[4, 0] == 1.0


def test_disconnected_graph_is_reported() -> None:
    x = np.array([[0.0], [0.1], [10.0], [10.1]])

    graph = build_graph(x, k=1)

    assert graph.n_components == 2


def test_invalid_parameters() -> None:
    x = np.zeros((3, 2))

    with pytest.raises(GraphConstructionError):
        build_graph(x, k=0)
    with pytest.raises(GraphConstructionError):
        build_graph(x, k=3)
    with pytest.raises(GraphConstructionError):
        build_graph(x, k=1, bandwidth=0.0)
    with pytest.raises(GraphConstructionError):
        build_graph(np.zeros((1, 2)), k=1)
    with pytest.raises(ValueError):
        build_graph(x, k=-1)


def test_default_k() -> None:
    assert default_k(200, 6) == 6
    assert default_k(4, 6) == 3
    assert default_k(2, 9) == 1


def test_energy_conventions(two_point_graph: SimilarityGraph) -> None:
    """D = I on the two-point graph: pairwise sum 4, trace form 2."""
    d = np.eye(2)

    assert smoothness_energy(two_point_graph, d) == pytest.approx(2.0)
    assert pairwise_energy(two_point_graph, d) == pytest.approx(4.0)


def test_energy_constant_rows_and_factor_two(small_graph: SimilarityGraph, small_dataset: Dataset) -> None:
    constant = np.full((small_graph.n, 4), 0.25)
    assert smoothness_energy(small_graph, constant) == pytest.approx(0.0, abs=1e-12)

    labels = small_dataset.labels
    assert pairwise_energy(small_graph, labels) == pytest.approx(2.0 * smoothness_energy(small_graph, labels))
    with pytest.raises(ValueError):
        smoothness_energy(small_graph, labels[:-1])


def test_largest_eigenvalue(small_graph: SimilarityGraph) -> None:
    exact = float(np.linalg.eigvalsh(small_graph.laplacian).max())

    estimate = largest_eigenvalue(small_graph.laplacian, iterations=500, seed=0)

    assert estimate <= exact + 1e-9
    assert estimate == pytest.approx(exact, rel=1e-3)
    assert largest_eigenvalue(np.zeros((3, 3))) == 0.0


def test_save_graph(tmp_path: Path, two_point_graph: SimilarityGraph) -> None:
    save_graph(two_point_graph, tmp_path / "g")

    np.testing.assert_array_equal(read_matrix(tmp_path / "g" / "similarity.csv"), two_point_graph.similarity)
    np.testing.assert_array_equal(read_matrix(tmp_path / "g" / "laplacian.csv"), two_point_graph.laplacian)
