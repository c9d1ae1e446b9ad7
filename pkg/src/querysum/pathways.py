"""Two-granularity temporal feature extractor.

Shot-level features [T, d] become two segment-level sequences: a fine one of
length ceil(T/4) and a coarse one of length ceil(T/16).  Layer hyper-
parameters default to: coarse Conv(5,8)/Pool(2,1)/Conv(5,1)/Pool(3,2) at
1024 channels, fine Conv(5,1)/Pool(2,2)/Conv(5,1)/Pool(2,2) at 256 channels.
Every conv/pool uses symmetric zero padding so each output length is
ceil(in/stride), which composes to the stated L//4 and L//16 lengths.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .nn import Conv1d, MaxPool1d, Module

MIN_SHOTS = 16


@dataclass(frozen=True)
class StageSpec:
    kernel: int
    stride: int
    channels: int


@dataclass(frozen=True)
class PathwaySpec:
    conv1: StageSpec
    pool1: StageSpec
    conv2: StageSpec
    pool2: StageSpec

    @property
    def total_stride(self):
        return self.conv1.stride * self.pool1.stride * self.conv2.stride * self.pool2.stride

    @property
    def out_channels(self):
        return self.conv2.channels


def coarse_spec(channels=1024):
    return PathwaySpec(
        conv1=StageSpec(5, 8, channels),
        pool1=StageSpec(2, 1, channels),
        conv2=StageSpec(5, 1, channels),
        pool2=StageSpec(3, 2, channels),
    )


def fine_spec(channels=256):
    return PathwaySpec(
        conv1=StageSpec(5, 1, channels),
        pool1=StageSpec(2, 2, channels),
        conv2=StageSpec(5, 1, channels),
        pool2=StageSpec(2, 2, channels),
    )


@dataclass(frozen=True)
class PathwayConfig:
    in_dim: int
    fine: PathwaySpec = field(default_factory=fine_spec)
    coarse: PathwaySpec = field(default_factory=coarse_spec)


def segment_spans(n_shots, span):
    """Span map: segment index -> (start, stop) over shots; last may be short."""
    n_seg = -(-n_shots // span)
    return [(i * span, min((i + 1) * span, n_shots)) for i in range(n_seg)]


@dataclass
class SegmentFeatures:
    fine: np.ndarray
    coarse: np.ndarray
    fine_spans: list
    coarse_spans: list


class Pathway(Module):
    def __init__(self, in_dim, spec: PathwaySpec, rng, dtype=np.float32):
        self.spec = spec
        self.conv1 = Conv1d(in_dim, spec.conv1.channels, spec.conv1.kernel, spec.conv1.stride, rng, dtype)
        self.pool1 = MaxPool1d(spec.pool1.kernel, spec.pool1.stride)
        self.conv2 = Conv1d(spec.conv1.channels, spec.conv2.channels, spec.conv2.kernel, spec.conv2.stride, rng, dtype)
        self.pool2 = MaxPool1d(spec.pool2.kernel, spec.pool2.stride)

    def forward(self, x):
        h1, c1 = self.conv1.forward(x)
        h2, c2 = self.pool1.forward(h1)
        h3, c3 = self.conv2.forward(h2)
        h4, c4 = self.pool2.forward(h3)
        return h4, (c1, c2, c3, c4)

    def backward(self, cache, dy):
        c1, c2, c3, c4 = cache
        dy = self.pool2.backward(c4, dy)
        dy = self.conv2.backward(c3, dy)
        dy = self.pool1.backward(c2, dy)
        return self.conv1.backward(c1, dy)


class GsPathways(Module):
    """The fine/coarse pathway pair."""

    def __init__(self, cfg: PathwayConfig, rng, dtype=np.float32):
        self.cfg = cfg
        self.fine = Pathway(cfg.in_dim, cfg.fine, rng, dtype)
        self.coarse = Pathway(cfg.in_dim, cfg.coarse, rng, dtype)

    def forward(self, x):
        t = x.shape[0]
        if t < MIN_SHOTS:
            raise InputError(f"video has {t} shots; pathways need at least {MIN_SHOTS}")
        fine, cf = self.fine.forward(x)
        coarse, cc = self.coarse.forward(x)
        segs = SegmentFeatures(
            fine=fine,
            coarse=coarse,
            fine_spans=segment_spans(t, self.cfg.fine.total_stride),
            coarse_spans=segment_spans(t, self.cfg.coarse.total_stride),
        )
        return segs, (cf, cc)

    def backward(self, cache, dfine, dcoarse):
        cf, cc = cache
        return self.fine.backward(cf, dfine) + self.coarse.backward(cc, dcoarse)
