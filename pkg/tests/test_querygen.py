import numpy as np
import pytest

from querysum.errors import ConvergenceError, DegenerateGraphError, InputError
from querysum.querygen import (
    WeightedGraph,
    eigenvector_centrality,
    generate_visual_query,
    pairwise_iou_graph,
)


def _random_connected(rng, n):
    w = np.zeros((n, n))
    for v in range(1, n):
        u = int(rng.integers(0, v))
        x = rng.random() + 0.1
        w[u, v] = w[v, u] = x
    for _ in range(n):
        a, b = rng.integers(0, n, 2)
        if a != b:
            x = rng.random() + 0.1
            w[a, b] = w[b, a] = x
    return w


def test_centrality_matches_dense_solve():
    rng = np.random.default_rng(11)
    for _ in range(100):
        w = _random_connected(rng, int(rng.integers(2, 13)))
        c = eigenvector_centrality(WeightedGraph(w))
        vals, vecs = np.linalg.eigh(w)
        v = np.abs(vecs[:, -1])
        v /= np.linalg.norm(v)
        assert np.max(np.abs(c - v)) < 1e-8


def test_star_fixture():
    # K_{1,3}: center = 1/sqrt(2), leaves = 1/sqrt(6)
    w = np.zeros((4, 4))
    w[0, 1:] = w[1:, 0] = 1.0
    c = eigenvector_centrality(WeightedGraph(w))
    assert abs(c[0] - 0.70711) < 1e-5
    assert np.allclose(c[1:], 1 / np.sqrt(6), atol=1e-8)


def test_disconnected_dominant_component():
    w = np.zeros((5, 5))
    w[0, 1] = w[1, 0] = 0.2  # minor component
    w[2, 3] = w[3, 2] = 1.0  # dominant (larger spectral radius)
    w[3, 4] = w[4, 3] = 1.0
    c = eigenvector_centrality(WeightedGraph(w))
    assert c[3] == c.max()
    assert c[0] < 1e-5 and c[1] < 1e-5  # scaled-down minor component
    assert abs(np.linalg.norm(c) - 1) < 1e-12


def test_degenerate_graph_raises():
    with pytest.raises(DegenerateGraphError):
        eigenvector_centrality(WeightedGraph(np.zeros((3, 3))))


def test_convergence_error():
    # Star graph: the uniform starting vector is far from the eigenvector,
    # so a single iteration cannot reach the tolerance.
    w = np.zeros((4, 4))
    w[0, 1:] = w[1:, 0] = 1.0
    with pytest.raises(ConvergenceError):
        eigenvector_centrality(WeightedGraph(w), max_iter=1)


def test_pairwise_iou_graph():
    tags = [["a", "b"], ["a", "b"], ["c"], ["a"]]
    g = pairwise_iou_graph([0, 1, 3], tags)
    assert g.weights[0, 1] == 1.0
    assert g.weights[0, 2] == 0.5  # {a,b} vs {a}
    assert np.all(np.diag(g.weights) == 0)
    with pytest.raises(InputError):
        pairwise_iou_graph([0], tags)


def test_generate_visual_query_topk_sort_oracle():
    rng = np.random.default_rng(5)
    tags = [[f"t{rng.integers(0, 6)}", f"t{rng.integers(0, 6)}"] for _ in range(40)]
    summary = sorted(rng.choice(40, size=12, replace=False).tolist())
    query = generate_visual_query(summary, tags, k=5)
    cent = eigenvector_centrality(pairwise_iou_graph(summary, tags))
    order = np.argsort(-cent, kind="stable")
    assert query == [summary[i] for i in order[:5]]
    assert len(query) == 5 and set(query) <= set(summary)


def test_generate_visual_query_needs_enough_shots():
    tags = [["a"]] * 10
    with pytest.raises(InputError):
        generate_visual_query([1, 2, 3], tags, k=5)
