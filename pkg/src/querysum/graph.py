"""Ego-graph construction and typed edge convolution.

Vertices are feature rows; an edge set is a pair of (src, dst) index arrays
with messages flowing src -> dst.  Three edge types exist on segment graphs:

  - ``intent``: every ego (query/intent) vertex connected with every segment
    vertex in both directions, so the ego vertex aggregates too,
  - ``semantic``: for each segment, directed edges from its K nearest
    neighbors (Euclidean, ties to the lower index) into it, recomputed from
    the current features before every GCN layer,
  - ``temporal``: forward/backward edges along the segment sequence.

Edge convolution computes, per type, max over in-neighbors j of
ReLU(Linear([x_i || x_j - x_i])) and adds the per-type aggregates to x_i
(residual).  A GCN layer is two such sub-layers plus an outer shortcut.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, GraphIntegrityError, InputError
from .nn import Linear, Module, relu, relu_backward


@dataclass
class EdgeSet:
    src: np.ndarray
    dst: np.ndarray

    def __len__(self):
        return len(self.src)


def _edge_set(src, dst):
    return EdgeSet(np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64))


EMPTY = _edge_set([], [])


def _scatter_add(target, idx, values):
    """target[idx[e]] += values[e] for all e (bincount; much faster than ufunc.at)."""
    c = target.shape[1]
    flat = np.bincount(
        (idx[:, None] * c + np.arange(c, dtype=np.int64)).ravel(),
        weights=values.astype(np.float64, copy=False).ravel(),
        minlength=target.size,
    )
    target += flat.reshape(target.shape).astype(target.dtype)


def semantic_edges(x, k):
    """K-nearest-neighbor edges, neighbor -> center, per vertex."""
    n = x.shape[0]
    if not 1 <= k < n:
        raise ConfigError(f"semantic edges need 1 <= K < N, got K={k}, N={n}")
    sq = (x * x).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")  # ties -> lower index
    nbrs = order[:, :k]
    dst = np.repeat(np.arange(n, dtype=np.int64), k)
    return _edge_set(nbrs.reshape(-1), dst)


def temporal_edges(n):
    """(t -> t+1) and (t -> t-1) over a sequence of n vertices."""
    if n < 1:
        raise InputError("temporal edges need at least one vertex")
    t = np.arange(n - 1, dtype=np.int64)
    return _edge_set(np.concatenate([t, t + 1]), np.concatenate([t + 1, t]))


def intent_edges(n_segments, n_egos):
    """Complete star between every ego vertex and every segment, both ways."""
    segs = np.arange(n_segments, dtype=np.int64)
    egos = n_segments + np.arange(n_egos, dtype=np.int64)
    src = np.concatenate([np.repeat(egos, n_segments), np.tile(segs, n_egos)])
    dst = np.concatenate([np.tile(segs, n_egos), np.repeat(egos, n_segments)])
    return _edge_set(src, dst)


@dataclass
class EgoGraph:
    features: np.ndarray  # [N + M, c]; segments first, then ego vertices
    n_segments: int
    n_egos: int
    edges: dict


def build_ego_graph(segments, ego, ego_proj: Linear, k):
    """Assemble the ego graph: projected ego vertices plus the three edge sets."""
    n = segments.shape[0]
    if n < 2:
        raise InputError(f"ego graph needs at least 2 segments, got {n}")
    projected, _ = ego_proj.forward(np.atleast_2d(ego))
    features = np.vstack([segments, projected])
    edges = {
        "intent": intent_edges(n, projected.shape[0]),
        "semantic": semantic_edges(segments, min(k, n - 1)),
        "temporal": temporal_edges(n),
    }
    return EgoGraph(features, n, projected.shape[0], edges)


class EdgeConv(Module):
    """One edge-convolution sub-layer over typed edge sets."""

    def __init__(self, c, edge_types, rng, dtype=np.float32):
        self.c = int(c)
        self.edge_types = tuple(edge_types)
        self.msg = {t: Linear(2 * c, c, rng, dtype) for t in self.edge_types}

    def forward(self, x, edges):
        v = x.shape[0]
        out = x.copy()
        caches = {}
        for t in self.edge_types:
            es = edges.get(t, EMPTY)
            if len(es) == 0:
                caches[t] = None
                continue
            if es.src.max() >= v or es.dst.max() >= v or es.src.min() < 0 or es.dst.min() < 0:
                raise GraphIntegrityError(f"{t} edge references a vertex outside [0, {v})")
            center = x[es.dst]
            inp = np.concatenate([center, x[es.src] - center], axis=1)
            h, lc = self.msg[t].forward(inp)
            m, mask = relu(h)
            agg, arg = kernels.group_max_forward(np.ascontiguousarray(m), es.dst, v)
            out += agg
            caches[t] = (es, lc, mask, arg, len(es))
        return out, (caches, v)

    def backward(self, cache, dout):
        caches, v = cache
        dx = dout.copy()
        for t in self.edge_types:
            c = caches[t]
            if c is None:
                continue
            es, lc, mask, arg, n_edges = c
            dm = kernels.group_max_backward(np.ascontiguousarray(dout), arg, n_edges)
            dh = relu_backward(mask, dm)
            dinp = self.msg[t].backward(lc, dh)
            dcenter = dinp[:, : self.c] - dinp[:, self.c :]
            _scatter_add(dx, es.dst, dcenter)
            _scatter_add(dx, es.src, dinp[:, self.c :])
        return dx


class GcnLayer(Module):
    """Two edge-conv sub-layers plus an outer input->output shortcut."""

    def __init__(self, c, edge_types, rng, dtype=np.float32):
        self.sub1 = EdgeConv(c, edge_types, rng, dtype)
        self.sub2 = EdgeConv(c, edge_types, rng, dtype)

    def forward(self, x, edges):
        h, c1 = self.sub1.forward(x, edges)
        y, c2 = self.sub2.forward(h, edges)
        return x + y, (c1, c2)

    def backward(self, cache, dy):
        c1, c2 = cache
        dh = self.sub2.backward(c2, dy)
        return dy + self.sub1.backward(c1, dh)


class GcnStack(Module):
    """Stack of GCN layers with the semantic edges recomputed per layer.

    Semantic recomputation uses the current segment features (ego vertices
    excluded from the kNN).  ``plan`` replays previously recorded edge sets,
    freezing the graph structure for gradient checks.
    """

    def __init__(self, n_layers, c, rng, k_semantic, dtype=np.float32):
        if n_layers < 1:
            raise ConfigError(f"GCN stack needs at least one layer, got {n_layers}")
        self.k_semantic = int(k_semantic)
        self.layers = [
            GcnLayer(c, ("intent", "semantic", "temporal"), rng, dtype)
            for _ in range(n_layers)
        ]

    def forward(self, x, n_segments, static_edges, plan=None):
        caches = []
        sem_plan = []
        for i, layer in enumerate(self.layers):
            if plan is not None:
                sem = plan[i]
            else:
                k_eff = min(self.k_semantic, n_segments - 1)
                sem = semantic_edges(x[:n_segments], k_eff) if k_eff >= 1 else EMPTY
            sem_plan.append(sem)
            edges = dict(static_edges)
            edges["semantic"] = sem
            x, c = layer.forward(x, edges)
            caches.append(c)
        return x, (caches, sem_plan)

    def backward(self, cache, dy):
        caches, _ = cache
        for layer, c in zip(reversed(self.layers), reversed(caches)):
            dy = layer.backward(c, dy)
        return dy


class LocalGraphRecover(Module):
    """Shot-level feature recovery from segment-level features.

    For each segment a star graph joins the segment vertex with its spanned
    shots; semantic (kNN, clamped to span size - 1) and temporal edges run
    among the shots of the same segment.  All vertices are first mapped into
    a mutual space, then one edge convolution produces the shot features.
    """

    def __init__(self, seg_dim, shot_dim, mutual_dim, k_semantic, rng, dtype=np.float32):
        self.mutual_dim = int(mutual_dim)
        self.k_semantic = int(k_semantic)
        self.seg_proj = Linear(seg_dim, mutual_dim, rng, dtype)
        self.shot_proj = Linear(shot_dim, mutual_dim, rng, dtype)
        self.conv = EdgeConv(mutual_dim, ("segment", "semantic", "temporal"), rng, dtype)

    def forward(self, seg_feats, spans, shots, plan=None):
        n = seg_feats.shape[0]
        t = shots.shape[0]
        if len(spans) != n:
            raise GraphIntegrityError(f"{n} segments but {len(spans)} spans")
        covered = sum(stop - start for start, stop in spans)
        if covered != t or any(stop <= start for start, stop in spans):
            raise GraphIntegrityError("spans do not partition the shot range")

        sp, csp = self.seg_proj.forward(seg_feats)
        hp, chp = self.shot_proj.forward(shots)
        features = np.vstack([sp, hp])  # segment i -> row i, shot t -> row n + t

        star_src, star_dst, tmp_src, tmp_dst = [], [], [], []
        sem_src, sem_dst = [], []
        sem_plan = []
        for i, (start, stop) in enumerate(spans):
            rows = n + np.arange(start, stop, dtype=np.int64)
            star_src.extend([i] * len(rows))
            star_dst.extend(rows)
            star_src.extend(rows)
            star_dst.extend([i] * len(rows))
            if len(rows) > 1:
                tmp_src.extend(rows[:-1])
                tmp_dst.extend(rows[1:])
                tmp_src.extend(rows[1:])
                tmp_dst.extend(rows[:-1])
            if plan is not None:
                local = plan[i]
            else:
                k_eff = min(self.k_semantic, len(rows) - 1)
                local = semantic_edges(hp[start:stop], k_eff) if k_eff >= 1 else EMPTY
            sem_plan.append(local)
            if len(local):
                sem_src.extend(rows[0] + local.src)
                sem_dst.extend(rows[0] + local.dst)

        edges = {
            "segment": _edge_set(star_src, star_dst),
            "semantic": _edge_set(sem_src, sem_dst),
            "temporal": _edge_set(tmp_src, tmp_dst),
        }
        y, cc = self.conv.forward(features, edges)
        return y[n:], (csp, chp, cc, n, sem_plan)

    def backward(self, cache, dshots_out):
        csp, chp, cc, n, _ = cache
        dfeat = np.zeros((n + dshots_out.shape[0], self.mutual_dim), dtype=dshots_out.dtype)
        dfeat[n:] = dshots_out
        dfeat = self.conv.backward(cc, dfeat)
        dseg = self.seg_proj.backward(csp, dfeat[:n])
        dshots_in = self.shot_proj.backward(chp, dfeat[n:])
        return dseg, dshots_in
