"""Central finite-difference gradient checking."""

import numpy as np

from .errors import GradCheckError


def default_step(dtype):
    return 1e-4 if np.dtype(dtype) == np.float64 else 1e-2


def grad_check(f, inputs, step=None, sample=None, rng=None):
    """Compare analytic gradients of ``f`` against central differences.

    ``f`` maps a list of arrays to ``(scalar loss, [grad per input])`` and
    must be pure.  Returns the worst relative error over all checked
    coordinates.  ``sample`` limits the check to that many randomly chosen
    coordinates per input (all coordinates when None).
    """
    inputs = [np.asarray(x, dtype=np.float64 if step is None else None) for x in inputs]
    if step is None:
        step = default_step(inputs[0].dtype)
    loss, grads = f(inputs)
    if not np.isfinite(loss):
        raise GradCheckError("loss is not finite at the evaluation point")
    if rng is None:
        rng = np.random.default_rng(0)

    worst = 0.0
    for idx, (x, g) in enumerate(zip(inputs, grads)):
        flat = x.reshape(-1)
        coords = np.arange(flat.size)
        if sample is not None and flat.size > sample:
            coords = rng.choice(flat.size, size=sample, replace=False)
        gflat = np.asarray(g).reshape(-1)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + step
            lp, _ = f(inputs)
            flat[c] = orig - step
            lm, _ = f(inputs)
            flat[c] = orig
            if not (np.isfinite(lp) and np.isfinite(lm)):
                raise GradCheckError(f"non-finite loss at input {idx}, coordinate {c}")
            num = (lp - lm) / (2.0 * step)
            ana = gflat[c]
            denom = max(abs(num), abs(ana), 1e-3)
            worst = max(worst, abs(num - ana) / denom)
    return worst


def scalarize(forward, backward, shapes_rng):
    """Build an ``f`` for grad_check from a forward/backward pair.

    The scalar loss is the inner product of the forward output with a fixed
    random projection, which makes every output coordinate contribute.
    ``forward(inputs) -> (out, cache)``; ``backward(cache, dout) -> grads``.
    """
    proj = {}

    def f(inputs):
        out, cache = forward(inputs)
        key = out.shape
        if key not in proj:
            proj[key] = shapes_rng.standard_normal(out.shape)
        r = proj[key].astype(out.dtype)
        loss = float((out * r).sum())
        grads = backward(cache, r)
        return loss, grads

    return f
