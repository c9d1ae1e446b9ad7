"""Gradient-check suite over every layer and the full model (float64)."""

import numpy as np

from .gradcheck import grad_check
from .graph import EdgeConv, semantic_edges, temporal_edges, intent_edges
from .model import ModelConfig, QuerysumModel, TextQuery, extract_plan, mix_scores, \
    mix_scores_backward
from .nn import (
    Conv1d,
    Linear,
    MaxPool1d,
    MultiheadAttention,
    bce_backward,
    bce_loss,
    shifted_relu,
    shifted_relu_backward,
)

F64 = np.float64


def _param_check(layer, x, extra_params=None, step=1e-5, seed=0):
    """FD-check input and parameter gradients of a single layer."""
    rng = np.random.default_rng(seed)
    params = [p for _, p in layer.params()] if hasattr(layer, "params") else []
    if extra_params is not None:
        params = extra_params
    proj = {}

    def f(inputs):
        xin = inputs[0]
        for p, arr in zip(params, inputs[1:]):
            p.value[...] = arr
            p.grad[...] = 0
        y, cache = layer.forward(xin)
        if y.shape not in proj:
            proj[y.shape] = rng.standard_normal(y.shape)
        r = proj[y.shape]
        loss = float((y * r).sum())
        dx = layer.backward(cache, r)
        return loss, [dx] + [p.grad.copy() for p in params]

    inputs = [x] + [p.value.copy() for p in params]
    return grad_check(f, inputs, step=step)


def check_linear(seed=3):
    rng = np.random.default_rng(seed)
    layer = Linear(5, 4, rng, F64)
    x = rng.standard_normal((6, 5))
    return _param_check(layer, x, seed=seed)


def check_conv1d(seed=11):
    rng = np.random.default_rng(seed)
    layer = Conv1d(3, 4, kernel=3, stride=2, rng=rng, dtype=F64)
    x = rng.standard_normal((12, 3))
    return _param_check(layer, x, seed=seed)


def check_maxpool(seed=5):
    # Continuous random input keeps coordinates away from argmax ties.
    rng = np.random.default_rng(seed)
    layer = MaxPool1d(kernel=3, stride=2)
    x = rng.standard_normal((11, 4)) + 1.0  # positive: padding never wins
    return _param_check(layer, x, extra_params=[], seed=seed)


def check_shifted_relu(seed=7, delta=0.05):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(40)
    x = np.where(np.abs(x - delta) < 0.1, x + 0.3, x)  # stay off the kink

    def f(inputs):
        y, mask = shifted_relu(inputs[0], delta)
        r = np.linspace(-1.0, 1.0, y.size)
        return float((y * r).sum()), [shifted_relu_backward(mask, r)]

    return grad_check(f, [x], step=1e-5)


def check_attention(seed=13):
    rng = np.random.default_rng(seed)
    layer = MultiheadAttention(10, heads=5, rng=rng, dtype=F64)
    q = rng.standard_normal((2, 10))
    kv = rng.standard_normal((4, 10))
    params = [p for _, p in layer.params()]
    proj = rng.standard_normal((2, 10))

    def f(inputs):
        qin, kin = inputs[0], inputs[1]
        for p, arr in zip(params, inputs[2:]):
            p.value[...] = arr
            p.grad[...] = 0
        y, cache = layer.forward(qin, kin)
        loss = float((y * proj).sum())
        dq, dkv = layer.backward(cache, proj)
        return loss, [dq, dkv] + [p.grad.copy() for p in params]

    return grad_check(f, [q, kv] + [p.value.copy() for p in params], step=1e-5)


def check_bce(seed=17):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.05, 0.95, size=30)
    y = (rng.random(30) > 0.5).astype(F64)

    def f(inputs):
        loss, cache = bce_loss(inputs[0], y)
        return float(loss), [bce_backward(cache)]

    return grad_check(f, [p], step=1e-6)


def check_edge_conv(seed=19):
    # Fixed graph structure: the edge sets are built once and reused.
    rng = np.random.default_rng(seed)
    n, c = 6, 5
    layer = EdgeConv(c, ("intent", "semantic", "temporal"), rng, F64)
    x = rng.standard_normal((n, c))
    edges = {
        "intent": intent_edges(n - 1, 1),
        "semantic": semantic_edges(x[: n - 1], 2),
        "temporal": temporal_edges(n - 1),
    }
    params = [p for _, p in layer.params()]
    proj = rng.standard_normal((n, c))

    def f(inputs):
        for p, arr in zip(params, inputs[1:]):
            p.value[...] = arr
            p.grad[...] = 0
        y, cache = layer.forward(inputs[0], edges)
        loss = float((y * proj).sum())
        dx = layer.backward(cache, proj)
        return loss, [dx] + [p.grad.copy() for p in params]

    return grad_check(f, [x] + [p.value.copy() for p in params], step=1e-5)


def check_conv_pool_composite(seed=23):
    rng = np.random.default_rng(seed)
    conv = Conv1d(2, 3, kernel=3, stride=1, rng=rng, dtype=F64)
    pool = MaxPool1d(kernel=2, stride=2)
    x = rng.standard_normal((10, 2))
    params = [p for _, p in conv.params()]
    proj = {}

    def f(inputs):
        for p, arr in zip(params, inputs[1:]):
            p.value[...] = arr
            p.grad[...] = 0
        h, c1 = conv.forward(inputs[0])
        y, c2 = pool.forward(h)
        if y.shape not in proj:
            proj[y.shape] = np.random.default_rng(seed + 1).standard_normal(y.shape)
        r = proj[y.shape]
        loss = float((y * r).sum())
        dh = pool.backward(c2, r)
        dx = conv.backward(c1, dh)
        return loss, [dx] + [p.grad.copy() for p in params]

    return grad_check(f, [x] + [p.value.copy() for p in params], step=1e-5)


def tiny_model(seed=0, feature_dim=6):
    cfg = ModelConfig(
        feature_dim=feature_dim,
        n_intents=3,
        intent_dim=6,
        text_dim=8,
        fine_channels=6,
        coarse_channels=8,
        local_dim=7,
        relevance_dim=6,
        summary_hidden=6,
        attn_dim=10,
        attn_heads=5,
        intent_hidden=8,
        dtype="f64",
    )
    return QuerysumModel(cfg, seed=seed)


def check_full_model(seed=29, t=32, n_coords=50, step=1e-5):
    """Whole-model FD check with frozen graph structure.

    Perturbs ``n_coords`` randomly chosen parameter coordinates and compares
    the analytic BCE gradient against central differences.
    """
    rng = np.random.default_rng(seed)
    model = tiny_model(seed=seed)
    cfg = model.cfg
    video = rng.standard_normal((t, cfg.feature_dim))
    query = TextQuery("a", "b", rng.standard_normal((2, cfg.text_dim)))
    y = (rng.random(t) > 0.8).astype(np.float64)

    # Record the dynamic kNN structure once and replay it in every FD eval.
    _, h_cache0 = model.summary_forward(video)
    h_plan = extract_plan(h_cache0)
    _, g_cache0 = model.intent_forward(video, query)
    g_plan = g_cache0["plan"]

    def loss_and_backward(do_backward):
        h_matrix, h_cache = model.summary_forward(video, plan=h_plan)
        g, g_cache = model.intent_forward(video, query, plan=g_plan)
        scores, m_cache = mix_scores(g, h_matrix, cfg.delta)
        loss, b_cache = bce_loss(scores, y)
        if do_backward:
            model.zero_grad()
            dscores = bce_backward(b_cache)
            dg, dh = mix_scores_backward(m_cache, dscores)
            model.intent_text.backward(g_cache, dg)
            model.summary.backward(h_cache, dh)
        return float(loss)

    loss_and_backward(True)
    named = model.params()
    analytic = {name: p.grad.copy() for name, p in named}

    sizes = np.array([p.value.size for _, p in named])
    total = int(sizes.sum())
    picks = rng.choice(total, size=min(n_coords, total), replace=False)
    bounds = np.cumsum(sizes)

    worst = 0.0
    for flat_idx in picks:
        pi = int(np.searchsorted(bounds, flat_idx, side="right"))
        local = int(flat_idx - (bounds[pi - 1] if pi else 0))
        name, p = named[pi]
        flat = p.value.reshape(-1)
        orig = flat[local]
        flat[local] = orig + step
        lp = loss_and_backward(False)
        flat[local] = orig - step
        lm = loss_and_backward(False)
        flat[local] = orig
        num = (lp - lm) / (2 * step)
        ana = analytic[name].reshape(-1)[local]
        denom = max(abs(num), abs(ana), 1e-3)
        worst = max(worst, abs(num - ana) / denom)
    return worst


SUITE = {
    "linear": check_linear,
    "conv1d": check_conv1d,
    "maxpool1d": check_maxpool,
    "shifted_relu": check_shifted_relu,
    "attention": check_attention,
    "bce": check_bce,
    "edge_conv": check_edge_conv,
    "conv_pool_composite": check_conv_pool_composite,
    "full_model": check_full_model,
}


def run_suite():
    """Run every check; returns {name: max relative error}."""
    return {name: float(fn()) for name, fn in SUITE.items()}
