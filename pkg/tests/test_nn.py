import numpy as np
import pytest

from querysum import checks
from querysum.errors import ConfigError, DimensionError
from querysum.nn import (
    BCE_EPS,
    Conv1d,
    Linear,
    MaxPool1d,
    MLP,
    _ceil_pad,
    bce_backward,
    bce_loss,
    resolve_dtype,
    shifted_relu,
    sigmoid,
    softmax,
)


def test_resolve_dtype():
    assert resolve_dtype("f32") == np.float32
    assert resolve_dtype("f64") == np.float64
    with pytest.raises(ConfigError):
        resolve_dtype("f16")


@pytest.mark.parametrize("t,k,s", [(16, 5, 1), (16, 2, 1), (100, 5, 1), (7, 3, 2), (16, 3, 2)])
def test_ceil_pad_output_length(t, k, s):
    out_len, left, right = _ceil_pad(t, k, s)
    assert out_len == -(-t // s)  # ceil(t / s)
    assert (t + left + right - k) // s + 1 == out_len


def test_linear_shapes_and_grad(rng):
    layer = Linear(5, 3, rng, np.float64)
    y, _ = layer.forward(rng.standard_normal((7, 5)))
    assert y.shape == (7, 3)
    with pytest.raises(DimensionError):
        layer.forward(rng.standard_normal((7, 4)))
    assert checks.check_linear() < 1e-6


def test_conv_maxpool_grads():
    assert checks.check_conv1d() < 1e-6
    assert checks.check_maxpool() < 1e-6
    assert checks.check_conv_pool_composite() < 1e-6


def test_maxpool_tie_breaks_to_lowest_index():
    pool = MaxPool1d(kernel=3, stride=3)
    x = np.array([[1.0], [1.0], [0.5]])
    y, cache = pool.forward(x)
    assert y[0, 0] == 1.0
    dx = pool.backward(cache, np.ones_like(y))
    assert dx[0, 0] == 1.0 and dx[1, 0] == 0.0  # gradient routed to index 0


def test_softmax_probability_vector(rng):
    p = softmax(rng.standard_normal(9) * 30)
    assert p.min() >= 0 and abs(p.sum() - 1) < 1e-12


def test_sigmoid_stable_extremes():
    y = sigmoid(np.array([-1000.0, 0.0, 1000.0]))
    assert np.all(np.isfinite(y))
    assert y[0] == 0.0 and y[1] == 0.5 and y[2] == 1.0


def test_bce_clamp_zeroes_gradient_outside():
    p = np.array([0.0, 0.5, 1.0])
    y = np.array([0.0, 1.0, 1.0])
    loss, cache = bce_loss(p, y)
    assert np.isfinite(loss)
    g = bce_backward(cache)
    assert g[0] == 0.0 and g[2] == 0.0 and g[1] != 0.0
    # clamped loss value matches the epsilon-clamped formula
    expect = -(np.log(1 - BCE_EPS) + np.log(0.5) + np.log(1 - BCE_EPS)) / 3
    assert abs(loss - expect) < 1e-12


def test_attention_and_activations():
    assert checks.check_attention() < 1e-6
    assert checks.check_shifted_relu() < 1e-6
    assert checks.check_bce() < 1e-6


def test_shifted_relu_values():
    y, _ = shifted_relu(np.array([-1.0, 0.05, 0.3]), 0.05)
    assert np.allclose(y, [0.0, 0.0, 0.25])


def test_mlp_stack(rng):
    mlp = MLP([4, 8, 2], rng, np.float64)
    y, _ = mlp.forward(rng.standard_normal((5, 4)))
    assert y.shape == (5, 2)


def test_params_traversal_names(rng):
    mlp = MLP([4, 8, 2], rng, np.float64)
    names = [n for n, _ in mlp.params()]
    assert len(names) == len(set(names)) == 4  # 2 layers x (W, b)
