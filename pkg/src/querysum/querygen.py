"""Visual-query generation from a ground-truth summary.

The summary shots form a weighted undirected graph whose edge weights are
pairwise semantic IOUs of the shots' tag sets; the most central shots under
eigenvector centrality become the visual query (top-k, default 5).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateGraphError, InputError
from .evaluation import semantic_iou

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000
MINOR_COMPONENT_SCALE = 1e-6


@dataclass
class WeightedGraph:
    weights: np.ndarray  # symmetric, nonnegative, zero diagonal

    @property
    def n(self):
        return self.weights.shape[0]


def pairwise_iou_graph(summary, tags):
    """W[i, j] = semantic IOU of summary shots i and j; zero diagonal."""
    shots = [int(s) for s in summary]
    if len(shots) < 2:
        raise InputError(f"need at least 2 summary shots, got {len(shots)}")
    n = len(shots)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = semantic_iou(tags[shots[i]], tags[shots[j]])
    return WeightedGraph(w)


def _components(w):
    n = w.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in np.nonzero(w[v] > 0)[0]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(int(u))
        comps.append(sorted(comp))
    return comps


def _power_iteration(w, tol, max_iter):
    """Dominant eigenvector of a connected nonnegative graph.

    Iterates x <- (x + W x) / ||.||; the +x shift keeps bipartite graphs
    (whose spectrum contains -lambda_max) from oscillating.  Returns the
    nonnegative unit vector and the Perron value of W.
    """
    n = w.shape[0]
    x = np.ones(n) / np.sqrt(n)
    for _ in range(max_iter):
        z = x + w @ x
        norm = np.linalg.norm(z)
        z = z / norm
        residual = np.abs(z - x).max()
        x = z
        if residual < tol:
            return x, float(x @ (w @ x))
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(residual {residual:.3e})"
    )


def eigenvector_centrality(g: WeightedGraph, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Nonnegative unit-norm centrality vector of a weighted graph.

    Disconnected graphs are handled per component: the component with the
    largest spectral radius keeps its vector, the others are scaled down by
    1e-6 so its vertices always outrank theirs; isolated vertices get 0.
    """
    w = np.asarray(g.weights, dtype=np.float64)
    if w.size == 0 or not (w > 0).any():
        raise DegenerateGraphError("graph has no positive edge weight")

    comps = [c for c in _components(w)]
    out = np.zeros(w.shape[0])
    solved = []
    for comp in comps:
        if len(comp) == 1:
            continue
        idx = np.asarray(comp)
        sub = w[np.ix_(idx, idx)]
        if not (sub > 0).any():
            continue
        vec, radius = _power_iteration(sub, tol, max_iter)
        solved.append((radius, idx, vec))
    dominant = max(range(len(solved)), key=lambda i: solved[i][0])
    for i, (_, idx, vec) in enumerate(solved):
        out[idx] = vec if i == dominant else vec * MINOR_COMPONENT_SCALE
    return out / np.linalg.norm(out)


def generate_visual_query(summary, tags, k=5):
    """Top-k summary shots by eigenvector centrality (ties -> lower index)."""
    shots = sorted(int(s) for s in summary)  # ties resolve to the lower shot index
    if len(shots) < k:
        raise InputError(f"summary has {len(shots)} shots; need at least k={k}")
    graph = pairwise_iou_graph(shots, tags)
    centrality = eigenvector_centrality(graph)
    order = np.argsort(-centrality, kind="stable")
    ranked = [shots[i] for i in order]
    return ranked[:k]
