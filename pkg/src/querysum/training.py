"""Toy-scale trainer: Adam + warm-up/step-decay schedule over the BCE loss.

The forward chain per (video, query) sample is intent module -> summary
module -> score mixing; the mixed score is clamped into (0, 1) by the BCE
itself.  H (the per-intent score matrix) is query-independent, so samples of
the same video within a batch share one summary forward/backward pass.
"""

import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError, InputError
from .model import QuerysumModel, TextQuery, VisualQuery, default_budget, mix_scores, \
    mix_scores_backward, select_summary
from .evaluation import evaluate_summary
from .nn import bce_backward, bce_loss

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    base_lr: float = 1e-4
    weight_decay: float = 6e-5
    warmup_epochs: int = 10
    decay_factor: float = 0.1
    decay_every: int = 20
    epochs: int = 120
    batch_size: int = 2
    delta: float = 0.05
    grad_clip: float | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("base_lr", "weight_decay", "warmup_epochs", "decay_factor",
                     "decay_every", "epochs", "batch_size"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"TrainConfig.{name} must be positive")

    def to_dict(self):
        return asdict(self)


def lr_at_epoch(epoch, cfg: TrainConfig):
    """Linear warm-up to base_lr, then one-tenth every decay_every epochs."""
    if epoch < cfg.warmup_epochs:
        return cfg.base_lr * (epoch + 1) / cfg.warmup_epochs
    steps = (epoch - cfg.warmup_epochs) // cfg.decay_every
    return cfg.base_lr * cfg.decay_factor**steps


class AdamState:
    """First/second moment buffers keyed by parameter name."""

    def __init__(self):
        self.m = {}
        self.v = {}
        self.t = 0


def adam_step(named_params, state: AdamState, lr, weight_decay):
    """One Adam update with decoupled weight decay (lr * wd * param)."""
    state.t += 1
    t = state.t
    for name, p in named_params:
        g = p.grad
        if not np.isfinite(g).all():
            raise InputError(f"non-finite gradient in parameter {name!r}")
        if name not in state.m:
            state.m[name] = np.zeros_like(p.value)
            state.v[name] = np.zeros_like(p.value)
        m = state.m[name]
        v = state.v[name]
        m *= ADAM_BETA1
        m += (1 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1 - ADAM_BETA2) * g * g
        mhat = m / (1 - ADAM_BETA1**t)
        vhat = v / (1 - ADAM_BETA2**t)
        p.value -= (lr * (mhat / (np.sqrt(vhat) + ADAM_EPS))).astype(p.value.dtype)
        if weight_decay:
            p.value -= (lr * weight_decay) * p.value


@dataclass
class Sample:
    video_id: str
    features: np.ndarray
    tags: list
    query: object  # TextQuery | VisualQuery
    labels: np.ndarray  # [T] in {0, 1}

    @property
    def ground_truth(self):
        return np.nonzero(self.labels > 0.5)[0].tolist()


@dataclass
class TrainRecord:
    epochs: list = field(default_factory=list)
    heldout: dict | None = None
    wall_seconds: float = 0.0

    def to_dict(self):
        return {"epochs": self.epochs, "heldout": self.heldout,
                "wall_seconds": round(self.wall_seconds, 3)}


def _trainable_params(model: QuerysumModel, samples, freeze_summary):
    prefixes = set()
    if any(isinstance(s.query, TextQuery) for s in samples):
        prefixes.add("intent_text.")
    if any(isinstance(s.query, VisualQuery) for s in samples):
        prefixes.add("intent_visual.")
    named = [
        (n, p) for n, p in model.params()
        if any(n.startswith(pre) for pre in prefixes)
    ]
    if not freeze_summary:
        named += [
            (n, p) for n, p in model.params()
            if n == "basis" or n.startswith("summary.")
        ]
    return sorted(named, key=lambda np_: np_[0])


def _clip_gradients(named_params, max_norm):
    total = np.sqrt(sum(float((p.grad**2).sum()) for _, p in named_params))
    if total > max_norm:
        scale = max_norm / total
        for _, p in named_params:
            p.grad *= scale


def forward_sample(model: QuerysumModel, sample: Sample, delta, h_cached=None):
    """Full forward pass; returns (loss, mixed scores, caches)."""
    if h_cached is None:
        h_matrix, h_cache = model.summary_forward(sample.features)
    else:
        h_matrix, h_cache = h_cached
    g, g_cache = model.intent_forward(sample.features, sample.query)
    scores, m_cache = mix_scores(g, h_matrix, delta)
    loss, b_cache = bce_loss(scores, sample.labels.astype(scores.dtype))
    return loss, scores, (h_matrix, h_cache, g_cache, m_cache, b_cache)


def train(model: QuerysumModel, samples, cfg: TrainConfig,
          heldout=None, freeze_summary=False, log=None):
    """Mini-batch BCE training; deterministic given (seed, cfg, dataset)."""
    if not samples:
        raise InputError("training dataset is empty")
    for s in samples:
        if s.features.shape[0] < 16:
            raise InputError(f"video {s.video_id} has fewer than 16 shots")

    rng = np.random.default_rng(cfg.seed)
    trainable = _trainable_params(model, samples, freeze_summary)
    state = AdamState()
    record = TrainRecord()
    start = time.perf_counter()

    for epoch in range(cfg.epochs):
        lr = lr_at_epoch(epoch, cfg)
        order = rng.permutation(len(samples))
        epoch_loss = 0.0
        for b0 in range(0, len(order), cfg.batch_size):
            batch = [samples[i] for i in order[b0 : b0 + cfg.batch_size]]
            model.zero_grad()
            # Group by video so H (query-independent) is computed once.
            groups = {}
            for s in batch:
                groups.setdefault(s.video_id, []).append(s)
            batch_loss = 0.0
            for group in groups.values():
                video = group[0].features
                h_matrix, h_cache = model.summary_forward(video)
                dh_total = np.zeros_like(h_matrix)
                for s in group:
                    loss, scores, caches = forward_sample(
                        model, s, cfg.delta, h_cached=(h_matrix, h_cache))
                    _, _, g_cache, m_cache, b_cache = caches
                    if not np.isfinite(loss):
                        raise InputError(
                            f"non-finite loss at epoch {epoch}, batch {b0 // cfg.batch_size}")
                    batch_loss += loss
                    dscores = bce_backward(b_cache, 1.0 / len(batch))
                    dg, dh = mix_scores_backward(m_cache, dscores)
                    mod = model.intent_module(s.query)
                    mod.backward(g_cache, dg)
                    dh_total += dh
                if not freeze_summary:
                    model.summary.backward(h_cache, dh_total)
            if cfg.grad_clip is not None:
                _clip_gradients(trainable, cfg.grad_clip)
            adam_step(trainable, state, lr, cfg.weight_decay)
            epoch_loss += batch_loss / len(batch)
        n_batches = -(-len(order) // cfg.batch_size)
        entry = {"epoch": epoch, "loss": epoch_loss / n_batches, "lr": lr}
        record.epochs.append(entry)
        if log:
            log(entry)

    if heldout:
        record.heldout = evaluate_heldout(model, heldout, cfg.delta)
    record.wall_seconds = time.perf_counter() - start
    return record


def _eval_budget(sample, budget):
    # Oracle-budget protocol: match the ground-truth summary size so a
    # perfect model can reach F1 = 1 regardless of the summary ratio.
    if budget is not None:
        return budget
    return len(sample.ground_truth) or default_budget(sample.features.shape[0])


def evaluate_heldout(model: QuerysumModel, samples, delta, budget=None):
    """Mean budget-mode P/R/F1 over held-out (video, query) pairs."""
    h_by_video = {}
    rows = []
    for s in samples:
        if s.video_id not in h_by_video:
            h_matrix, _ = model.summary_forward(s.features)
            h_by_video[s.video_id] = h_matrix
        g, _ = model.intent_forward(s.features, s.query)
        scores, _ = mix_scores(g, h_by_video[s.video_id], delta)
        b = _eval_budget(s, budget)
        pred = select_summary(scores, mode="budget", budget=b)
        mask = s.query.shot_indices if isinstance(s.query, VisualQuery) else None
        res = evaluate_summary(pred, s.ground_truth, s.tags, mask=mask)
        rows.append(res)
    return {
        "precision": float(np.mean([r.precision for r in rows])),
        "recall": float(np.mean([r.recall for r in rows])),
        "f1": float(np.mean([r.f1 for r in rows])),
        "n": len(rows),
    }


def random_baseline_f1(samples, budget=None, n_draws=1000, seed=0):
    """Mean F1 of random same-budget summaries; the learning floor."""
    rng = np.random.default_rng(seed)
    f1s = []
    for s in samples:
        t = s.features.shape[0]
        b = _eval_budget(s, budget)
        mask = s.query.shot_indices if isinstance(s.query, VisualQuery) else None
        for _ in range(n_draws):
            pred = rng.choice(t, size=b, replace=False).tolist()
            f1s.append(evaluate_summary(pred, s.ground_truth, s.tags, mask=mask).f1)
    return float(np.mean(f1s))
