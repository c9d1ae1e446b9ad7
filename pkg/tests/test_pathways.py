import numpy as np
import pytest

from querysum.errors import InputError
from querysum.pathways import (
    MIN_SHOTS,
    GsPathways,
    PathwayConfig,
    coarse_spec,
    fine_spec,
    segment_spans,
)


@pytest.fixture(scope="module")
def gs():
    cfg = PathwayConfig(in_dim=8, fine=fine_spec(12), coarse=coarse_spec(16))
    return GsPathways(cfg, np.random.default_rng(0), np.float64)


@pytest.mark.parametrize("t", [16, 100, 256, 1000])
def test_output_lengths(gs, t):
    x = np.random.default_rng(t).standard_normal((t, 8))
    segs, _ = gs.forward(x)
    assert segs.fine.shape == (-(-t // 4), 12)
    assert segs.coarse.shape == (-(-t // 16), 16)


def test_paper_channel_widths():
    # fine: conv(5, s1, 256) pool(2, s2) conv(5, s1) pool(2, s2)
    f = fine_spec(256)
    assert [(s.kernel, s.stride) for s in (f.conv1, f.pool1, f.conv2, f.pool2)] == [
        (5, 1), (2, 2), (5, 1), (2, 2)]
    # coarse: conv(5, s8, 1024) pool(2, s1) conv(5, s1) pool(3, s2)
    c = coarse_spec(1024)
    assert [(s.kernel, s.stride) for s in (c.conv1, c.pool1, c.conv2, c.pool2)] == [
        (5, 8), (2, 1), (5, 1), (3, 2)]


def test_spans_partition():
    for t in (16, 33, 100):
        for span in (4, 16):
            spans = segment_spans(t, span)
            assert spans[0][0] == 0 and spans[-1][1] == t
            assert all(a[1] == b[0] for a, b in zip(spans, spans[1:]))
            assert all(stop - start <= span for start, stop in spans)


def test_min_shots_enforced(gs):
    assert MIN_SHOTS == 16
    with pytest.raises(InputError):
        gs.forward(np.zeros((15, 8)))


def test_backward_shapes(gs):
    x = np.random.default_rng(1).standard_normal((32, 8))
    segs, cache = gs.forward(x)
    dx = gs.backward(cache, np.ones_like(segs.fine), np.ones_like(segs.coarse))
    assert dx.shape == x.shape
    assert np.isfinite(dx).all()
