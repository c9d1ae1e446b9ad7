"""Intent and summary modules, score mixing and summary selection.

The summary module scores every shot once per basis intent (a [k, T] matrix
H); the intent module turns a textual or visual query into a probability
vector g over the k basis intents.  The overall shot score mixes the two:
``score_t = sum_i max(g_i * H[i, t] - delta, 0)``.  H never depends on the
query, which is what makes client-side re-mixing and the summary-module
transfer setting possible.
"""

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError, DimensionError, InputError
from .graph import GcnStack, LocalGraphRecover, intent_edges, temporal_edges
from .nn import (
    MLP,
    Linear,
    Module,
    MultiheadAttention,
    Param,
    resolve_dtype,
    shifted_relu,
    shifted_relu_backward,
    sigmoid,
    sigmoid_backward,
    softmax,
    softmax_backward,
)
from .pathways import GsPathways, PathwayConfig, coarse_spec, fine_spec


@dataclass(frozen=True)
class ModelConfig:
    feature_dim: int
    n_intents: int = 20
    intent_dim: int = 128
    text_dim: int = 300
    fine_channels: int = 256
    coarse_channels: int = 1024
    local_dim: int = 512
    relevance_dim: int = 1024
    summary_hidden: int = 1024
    attn_dim: int = 300
    attn_heads: int = 5
    intent_hidden: int = 2048
    summary_layers: int = 3
    intent_layers: int = 2
    k_semantic: int = 8
    k_local_fine: int = 4
    k_local_coarse: int = 10
    visual_query_size: int = 5
    delta: float = 0.05
    dtype: str = "f32"

    @classmethod
    def toy(cls, feature_dim, **overrides):
        """Small widths for CPU-scale training; structure is unchanged.

        The basis is shrunk too: with k intents and a near-uniform intent
        distribution every product g_i * H[i, t] is at most 1/k, so k must
        stay well below 1/delta or the shifted ReLU starts (and dies) in its
        zero region.
        """
        defaults = dict(
            feature_dim=feature_dim,
            n_intents=6,
            intent_dim=32,
            fine_channels=32,
            coarse_channels=64,
            local_dim=64,
            relevance_dim=64,
            summary_hidden=64,
            attn_dim=30,
            intent_hidden=128,
        )
        defaults.update(overrides)
        return cls(**defaults)

    def to_dict(self):
        return asdict(self)

    def pathway_config(self):
        return PathwayConfig(
            in_dim=self.feature_dim,
            fine=fine_spec(self.fine_channels),
            coarse=coarse_spec(self.coarse_channels),
        )


def _scale_final(mlp: MLP, scale):
    """Shrink the output layer of a head MLP.

    The residual GCN stacks inflate activation scale, so a full-scale random
    output layer saturates sigmoid/softmax at init and the shifted-ReLU
    mixing then starts inside its dead zone with no usable gradient.  A small
    (but nonzero) output layer keeps sigmoid heads near 0.5 and softmax heads
    near uniform while still breaking the symmetry between intents, which the
    mixing gradient alone cannot do.
    """
    last = mlp.layers[-1]
    last.W.value *= np.asarray(scale, dtype=last.W.value.dtype)
    last.b.value[...] = 0


# ---------------------------------------------------------------------------
# score mixing / selection


def mix_scores(g, h_matrix, delta):
    """score_t = sum_i max(g_i * H[i, t] - delta, 0)."""
    g = np.asarray(g)
    h_matrix = np.asarray(h_matrix)
    if g.ndim != 1 or h_matrix.ndim != 2 or g.shape[0] != h_matrix.shape[0]:
        raise DimensionError(
            f"mix_scores expects g[k] and H[k,T]; got {g.shape} and {h_matrix.shape}"
        )
    prod = g[:, None] * h_matrix
    shifted, mask = shifted_relu(prod, delta)
    return shifted.sum(axis=0), (g, h_matrix, mask)


def mix_scores_backward(cache, dscores):
    g, h_matrix, mask = cache
    dprod = shifted_relu_backward(mask, np.broadcast_to(dscores, h_matrix.shape))
    dg = (dprod * h_matrix).sum(axis=1)
    dh = dprod * g[:, None]
    return dg, dh


def select_summary(scores, mode="threshold", threshold=0.5, budget=None):
    """Pick summary shots: all above a threshold, or the top-B by score."""
    scores = np.asarray(scores)
    t = scores.shape[0]
    if mode == "threshold":
        return np.nonzero(scores > threshold)[0].tolist()
    if mode == "budget":
        if budget is None or not 1 <= budget <= t:
            raise ConfigError(f"budget must be in [1, {t}], got {budget}")
        order = np.argsort(-scores, kind="stable")  # ties -> lower index
        return sorted(order[:budget].tolist())
    raise ConfigError(f"unknown selection mode {mode!r}")


def default_budget(t):
    return max(1, -(-t * 2 // 100))  # ceil(0.02 * T)


def representative_shots(row, m):
    """Top-m shot indices by score, descending, ties to the lower index."""
    row = np.asarray(row)
    if not 1 <= m <= row.shape[0]:
        raise ConfigError(f"m must be in [1, {row.shape[0]}], got {m}")
    order = np.argsort(-row, kind="stable")
    return order[:m].tolist()


# ---------------------------------------------------------------------------
# summary module


class SummaryModule(Module):
    """h(intent_i, video): per-intent shot scores via pathways + ego GCN."""

    def __init__(self, cfg: ModelConfig, rng):
        dt = resolve_dtype(cfg.dtype)
        self.cfg = cfg
        cf, cc = cfg.fine_channels, cfg.coarse_channels
        self.pathways = GsPathways(cfg.pathway_config(), rng, dt)
        self.ego_proj_fine = Linear(cfg.intent_dim, cf, rng, dt)
        self.ego_proj_coarse = Linear(cfg.intent_dim, cc, rng, dt)
        self.stack_fine = GcnStack(cfg.summary_layers, cf, rng, cfg.k_semantic, dt)
        self.stack_coarse = GcnStack(cfg.summary_layers, cc, rng, cfg.k_semantic, dt)
        self.local_fine = LocalGraphRecover(cf, cfg.feature_dim, cfg.local_dim, cfg.k_local_fine, rng, dt)
        self.local_coarse = LocalGraphRecover(cc, cfg.feature_dim, cfg.local_dim, cfg.k_local_coarse, rng, dt)
        self.fuse = Linear(2 * cfg.local_dim, cfg.local_dim, rng, dt)
        self.shot_rel = Linear(cfg.local_dim, cfg.relevance_dim, rng, dt)
        self.intent_rel = Linear(cfg.intent_dim, cfg.relevance_dim, rng, dt)
        self.head = MLP([cfg.relevance_dim, cfg.summary_hidden, cfg.summary_hidden, 1], rng, dt)
        # The summary head keeps a moderate output scale: its per-intent row
        # shapes at init are what break the intent symmetry (see _scale_final).
        _scale_final(self.head, 0.05)

    def _branch_forward(self, seg_feats, spans, video, ego, ego_proj, stack, local, plan):
        n = seg_feats.shape[0]
        proj, cp = ego_proj.forward(ego)
        feats = np.vstack([seg_feats, proj])
        static = {"intent": intent_edges(n, 1), "temporal": temporal_edges(n)}
        y, cs = stack.forward(feats, n, static, plan=None if plan is None else plan["stack"])
        shots, cl = local.forward(y[:n], spans, video, plan=None if plan is None else plan["local"])
        recorded = {"stack": cs[1], "local": cl[4]}
        return shots, (cp, cs, cl, n), recorded

    def _branch_backward(self, cache, dshots, ego_proj, stack, local):
        cp, cs, cl, n = cache
        dseg_out, dvideo = local.backward(cl, dshots)
        dy = np.zeros((n + 1, dseg_out.shape[1]), dtype=dseg_out.dtype)
        dy[:n] = dseg_out
        dfeats = stack.backward(cs, dy)
        dego = ego_proj.backward(cp, dfeats[n:])
        return dfeats[:n], dvideo, dego

    def forward(self, video, basis, plan=None):
        """video [T, d], basis [k, e] -> H [k, T]."""
        video = np.asarray(video)
        k = basis.shape[0]
        t = video.shape[0]
        segs, cpath = self.pathways.forward(video)
        h_rows = []
        caches = []
        recorded = []
        for i in range(k):
            ego = basis[i : i + 1]
            pf = None if plan is None else plan[i]["fine"]
            pc = None if plan is None else plan[i]["coarse"]
            sf, cf_, rf = self._branch_forward(
                segs.fine, segs.fine_spans, video, ego,
                self.ego_proj_fine, self.stack_fine, self.local_fine, pf)
            sc, cc_, rc = self._branch_forward(
                segs.coarse, segs.coarse_spans, video, ego,
                self.ego_proj_coarse, self.stack_coarse, self.local_coarse, pc)
            fused_in = np.concatenate([sf, sc], axis=1)
            fused, cfu = self.fuse.forward(fused_in)
            srel, csr = self.shot_rel.forward(fused)
            irel, cir = self.intent_rel.forward(ego)
            prod = srel * irel
            logits, chd = self.head.forward(prod)
            row = sigmoid(logits[:, 0])
            h_rows.append(row)
            caches.append((cf_, cc_, cfu, csr, cir, chd, srel, irel, row))
            recorded.append({"fine": rf, "coarse": rc})
        h_matrix = np.stack(h_rows)
        return h_matrix, {"path": cpath, "intents": caches, "plan": recorded,
                          "t": t, "segs": segs}

    def backward(self, cache, dh_matrix):
        """Accumulates parameter grads; returns (dvideo, dbasis)."""
        segs = cache["segs"]
        dvideo = 0.0
        dfine = np.zeros_like(segs.fine)
        dcoarse = np.zeros_like(segs.coarse)
        dbasis_rows = []
        for i, c in enumerate(cache["intents"]):
            cf_, cc_, cfu, csr, cir, chd, srel, irel, row = c
            dlogit = sigmoid_backward(row, dh_matrix[i])[:, None]
            dprod = self.head.backward(chd, dlogit)
            dsrel = dprod * irel
            direl = (dprod * srel).sum(axis=0, keepdims=True)
            dego = self.intent_rel.backward(cir, direl)
            dfused = self.shot_rel.backward(csr, dsrel)
            dfused_in = self.fuse.backward(cfu, dfused)
            ld = self.cfg.local_dim
            dseg_f, dvid_f, dego_f = self._branch_backward(
                cf_, dfused_in[:, :ld], self.ego_proj_fine, self.stack_fine, self.local_fine)
            dseg_c, dvid_c, dego_c = self._branch_backward(
                cc_, dfused_in[:, ld:], self.ego_proj_coarse, self.stack_coarse, self.local_coarse)
            dfine += dseg_f
            dcoarse += dseg_c
            dvideo = dvideo + dvid_f + dvid_c
            dbasis_rows.append(dego[0] + dego_f[0] + dego_c[0])
        dvideo = dvideo + self.pathways.backward(cache["path"], dfine, dcoarse)
        return dvideo, np.stack(dbasis_rows)


def extract_plan(cache):
    """Recorded semantic-edge structure, replayable via ``plan=``."""
    return cache["plan"]


# ---------------------------------------------------------------------------
# intent module


class IntentModule(Module):
    """g(query, video): query -> probability vector over basis intents.

    ``vertex_dim`` is the width of each ego vertex (concatenated concept
    embeddings for text, raw shot features for visual queries) and
    ``query_dim`` the width of each attention-pooling query row.
    """

    def __init__(self, cfg: ModelConfig, vertex_dim, query_dim, rng):
        dt = resolve_dtype(cfg.dtype)
        self.cfg = cfg
        cf, cc = cfg.fine_channels, cfg.coarse_channels
        a = cfg.attn_dim
        self.pathways = GsPathways(cfg.pathway_config(), rng, dt)
        self.ego_proj_fine = Linear(vertex_dim, cf, rng, dt)
        self.ego_proj_coarse = Linear(vertex_dim, cc, rng, dt)
        # High-gain ego projections: the ego (query) vertex is the only
        # query-dependent input to the segment graph, so its messages must
        # perturb segment features well above the video's own feature scale
        # for the pooled statistics to carry a usable query signal at init.
        self.ego_proj_fine.W.value *= np.asarray(16.0, dtype=dt)
        self.ego_proj_coarse.W.value *= np.asarray(16.0, dtype=dt)
        self.stack_fine = GcnStack(cfg.intent_layers, cf, rng, cfg.k_semantic, dt)
        self.stack_coarse = GcnStack(cfg.intent_layers, cc, rng, cfg.k_semantic, dt)
        self.q_proj = Linear(query_dim, a, rng, dt)
        self.kv_proj_fine = Linear(cf, a, rng, dt)
        self.kv_proj_coarse = Linear(cc, a, rng, dt)
        self.attn_fine = MultiheadAttention(a, cfg.attn_heads, rng, dt)
        self.attn_coarse = MultiheadAttention(a, cfg.attn_heads, rng, dt)
        self.mlp = MLP([cf + cc + 2 * a, cfg.intent_hidden, cfg.intent_hidden, cfg.n_intents], rng, dt)
        # The intent head starts small so the intent distribution is near
        # uniform early on, but not so small that the gradient flowing back
        # through the final weights starves the layers below of signal.
        _scale_final(self.mlp, 0.05)

    def _pool_forward(self, seg_feats, ego_vertices, queries, ego_proj, stack, kv_proj, attn, plan):
        n = seg_feats.shape[0]
        proj, cp = ego_proj.forward(ego_vertices)
        feats = np.vstack([seg_feats, proj])
        static = {"intent": intent_edges(n, proj.shape[0]), "temporal": temporal_edges(n)}
        y, cs = stack.forward(feats, n, static, plan=plan)
        seg_out = y[:n]
        avg = seg_out.mean(axis=0)
        kv, ckv = kv_proj.forward(seg_out)
        q, cq = self.q_proj.forward(queries)
        att, cat = attn.forward(q, kv)
        pooled = att.mean(axis=0)
        return avg, pooled, (cp, cs, ckv, cq, cat, n, att.shape[0]), cs[1]

    def forward(self, video, ego_vertices, queries, plan=None):
        video = np.asarray(video)
        segs, cpath = self.pathways.forward(video)
        pf = None if plan is None else plan["fine"]
        pc = None if plan is None else plan["coarse"]
        avg_f, pool_f, cfine, rf = self._pool_forward(
            segs.fine, ego_vertices, queries,
            self.ego_proj_fine, self.stack_fine, self.kv_proj_fine, self.attn_fine, pf)
        avg_c, pool_c, ccoarse, rc = self._pool_forward(
            segs.coarse, ego_vertices, queries,
            self.ego_proj_coarse, self.stack_coarse, self.kv_proj_coarse, self.attn_coarse, pc)
        concat = np.concatenate([avg_f, pool_f, avg_c, pool_c])
        logits, cm = self.mlp.forward(concat[None, :])
        probs = softmax(logits[0])
        return probs, {"path": cpath, "fine": cfine, "coarse": ccoarse,
                       "mlp": cm, "probs": probs, "segs": segs,
                       "plan": {"fine": rf, "coarse": rc}}

    def backward(self, cache, dprobs):
        """Accumulates parameter grads; returns (dvideo, dego_vertices, dqueries)."""
        cfg = self.cfg
        dlogits = softmax_backward(cache["probs"], dprobs)
        dconcat = self.mlp.backward(cache["mlp"], dlogits[None, :])[0]
        cf, a = cfg.fine_channels, cfg.attn_dim
        cc = cfg.coarse_channels
        d_avg_f, d_pool_f = dconcat[:cf], dconcat[cf : cf + a]
        d_avg_c, d_pool_c = dconcat[cf + a : cf + a + cc], dconcat[cf + a + cc :]

        dego_total = 0.0
        dqueries_total = 0.0
        dsegs = {}
        for name, davg, dpool, ego_proj, stack, kv_proj, attn in (
            ("fine", d_avg_f, d_pool_f, self.ego_proj_fine, self.stack_fine,
             self.kv_proj_fine, self.attn_fine),
            ("coarse", d_avg_c, d_pool_c, self.ego_proj_coarse, self.stack_coarse,
             self.kv_proj_coarse, self.attn_coarse),
        ):
            cp, cs, ckv, cq, cat, n, n_queries = cache[name]
            datt = np.broadcast_to(dpool / n_queries, (n_queries, dpool.shape[0]))
            dq, dkv = attn.backward(cat, np.ascontiguousarray(datt))
            dqueries_total = dqueries_total + self.q_proj.backward(cq, dq)
            dseg_out = kv_proj.backward(ckv, dkv) + davg[None, :] / n
            dy = np.zeros((n + _n_egos(cp), dseg_out.shape[1]), dtype=dseg_out.dtype)
            dy[:n] = dseg_out
            dfeats = stack.backward(cs, dy)
            dego_total = dego_total + ego_proj.backward(cp, dfeats[n:])
            dsegs[name] = dfeats[:n]

        dvideo = self.pathways.backward(cache["path"], dsegs["fine"], dsegs["coarse"])
        return dvideo, dego_total, dqueries_total


def _n_egos(linear_cache):
    # Linear.forward caches its input; row count = number of ego vertices.
    return linear_cache.shape[0]


# ---------------------------------------------------------------------------
# query containers and the full model


@dataclass
class TextQuery:
    c1: str
    c2: str
    embeddings: np.ndarray  # [2, text_dim]

    def ego_vertices(self):
        return self.embeddings.reshape(1, -1)

    def attn_queries(self):
        return self.embeddings


@dataclass
class VisualQuery:
    shot_indices: list
    features: np.ndarray  # [P, d]

    @classmethod
    def from_video(cls, indices, video_features):
        indices = [int(i) for i in indices]
        t = video_features.shape[0]
        if len(set(indices)) != len(indices):
            raise InputError(f"duplicate query shot indices: {indices}")
        if any(i < 0 or i >= t for i in indices):
            raise InputError(f"query shot index out of range [0, {t}): {indices}")
        return cls(indices, video_features[np.asarray(indices, dtype=np.int64)])

    def ego_vertices(self):
        return self.features

    def attn_queries(self):
        return self.features


class QuerysumModel(Module):
    """Bundle: basis intents, summary module, textual and visual intent modules."""

    def __init__(self, cfg: ModelConfig, seed=0):
        rng = np.random.default_rng(seed)
        dt = resolve_dtype(cfg.dtype)
        self.cfg = cfg
        # Unit-scale basis vectors: the basis is the only input that differs
        # between the summary module's per-intent passes, so its spread sets
        # how distinct the intent rows are at initialization.
        self.basis = Param(
            rng.standard_normal((cfg.n_intents, cfg.intent_dim)).astype(dt)
        )
        self.summary = SummaryModule(cfg, rng)
        self.intent_text = IntentModule(cfg, 2 * cfg.text_dim, cfg.text_dim, rng)
        self.intent_visual = IntentModule(cfg, cfg.feature_dim, cfg.feature_dim, rng)

    def intent_module(self, query):
        if isinstance(query, TextQuery):
            return self.intent_text
        if isinstance(query, VisualQuery):
            return self.intent_visual
        raise InputError(f"unsupported query type {type(query).__name__}")

    def intent_forward(self, video, query, plan=None):
        mod = self.intent_module(query)
        return mod.forward(video, query.ego_vertices(), query.attn_queries(), plan=plan)

    def summary_forward(self, video, plan=None):
        return self.summary.forward(video, self.basis.value, plan=plan)
