import numpy as np
import pytest

from querysum.checks import tiny_model
from querysum.errors import ConfigError, InputError
from querysum.model import (
    ModelConfig,
    TextQuery,
    VisualQuery,
    default_budget,
    extract_plan,
    mix_scores,
    mix_scores_backward,
    representative_shots,
    select_summary,
)


@pytest.fixture(scope="module")
def model():
    return tiny_model(seed=5)


@pytest.fixture(scope="module")
def video(model):
    return np.random.default_rng(2).standard_normal((48, model.cfg.feature_dim))


def test_h_matrix_shape_and_range(model, video):
    h, _ = model.summary_forward(video)
    assert h.shape == (model.cfg.n_intents, 48)
    assert (h > 0).all() and (h < 1).all()  # sigmoid outputs


def test_h_query_independence(model, video):
    """H depends only on (video, weights) — the basis of client-side remixing."""
    h1, _ = model.summary_forward(video)
    h2, _ = model.summary_forward(video)
    assert np.array_equal(h1, h2)


def test_plan_replay_reproduces_h(model, video):
    h1, cache = model.summary_forward(video)
    h2, _ = model.summary_forward(video, plan=extract_plan(cache))
    assert np.array_equal(h1, h2)


def test_text_and_visual_intent_probs(model, video):
    rng = np.random.default_rng(3)
    tq = TextQuery("a", "b", rng.standard_normal((2, model.cfg.text_dim)))
    g, _ = model.intent_forward(video, tq)
    assert g.shape == (model.cfg.n_intents,)
    assert abs(g.sum() - 1) < 1e-10 and (g >= 0).all()

    vq = VisualQuery.from_video([0, 5, 9, 17, 23], video)
    g2, _ = model.intent_forward(video, vq)
    assert abs(g2.sum() - 1) < 1e-10 and (g2 >= 0).all()


def test_visual_query_validation(video):
    with pytest.raises(InputError):
        VisualQuery.from_video([0, 0, 1, 2, 3], video)
    with pytest.raises(InputError):
        VisualQuery.from_video([0, 1, 2, 3, 48], video)


def test_mix_scores_formula():
    g = np.array([0.5, 0.5])
    h = np.array([[0.2, 0.8], [0.4, 0.1]])
    s, _ = mix_scores(g, h, 0.05)
    expect = np.array(
        [max(0.1 - 0.05, 0) + max(0.2 - 0.05, 0), max(0.4 - 0.05, 0) + max(0.05 - 0.05, 0)]
    )
    assert np.allclose(s, expect, atol=1e-12)


def test_mix_scores_delta_zero_linear(rng):
    g = rng.dirichlet(np.ones(6))
    h = rng.random((6, 30))
    s, _ = mix_scores(g, h, 0.0)
    assert np.abs(s - g @ h).max() < 1e-12


def test_mix_scores_backward_matches_fd(rng):
    g = rng.dirichlet(np.ones(4))
    h = rng.random((4, 11))
    r = rng.standard_normal(11)
    s, cache = mix_scores(g, h, 0.05)
    dg, dh = mix_scores_backward(cache, r)
    eps = 1e-7
    for i in range(4):
        gp = g.copy(); gp[i] += eps
        gm = g.copy(); gm[i] -= eps
        num = ((mix_scores(gp, h, 0.05)[0] - mix_scores(gm, h, 0.05)[0]) * r).sum() / (2 * eps)
        assert abs(num - dg[i]) < 1e-6


def test_select_summary_modes():
    s = np.array([0.9, 0.1, 0.6, 0.6, 0.2])
    assert select_summary(s, mode="threshold", threshold=0.5) == [0, 2, 3]
    assert select_summary(s, mode="budget", budget=2) == [0, 2]  # tie -> lower index
    assert select_summary(s, mode="budget", budget=3) == [0, 2, 3]
    with pytest.raises(ConfigError):
        select_summary(s, mode="nope")


def test_default_budget():
    assert default_budget(256) == 6  # ceil(0.02 * 256)
    assert default_budget(10) == 1
    assert default_budget(1000) == 20


def test_representative_shots():
    row = np.array([0.1, 0.9, 0.9, 0.3])
    assert representative_shots(row, 2) == [1, 2]
    with pytest.raises(ConfigError):
        representative_shots(row, 0)


def test_toy_config_keeps_structure():
    cfg = ModelConfig.toy(feature_dim=64)
    assert cfg.n_intents == 6 and cfg.delta == 0.05
    assert cfg.n_intents < 1 / cfg.delta  # uniform mixing stays out of the dead zone
    full = ModelConfig(feature_dim=64)
    assert full.coarse_channels == 1024 and full.relevance_dim == 1024
    assert full.intent_hidden == 2048 and full.attn_heads == 5
