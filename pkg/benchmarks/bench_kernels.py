"""Benchmark the compiled kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py

Compares max-pool forward/backward and grouped edge-message max reduction.
Both backends must agree bit-for-bit; the table reports wall time per call.
"""

import os
import time

import numpy as np

os.environ["QUERYSUM_BACKEND"] = "numba"  # need both backends importable
from querysum import kernels

if kernels.BACKEND != "numba":
    raise SystemExit("numba is not installed; nothing to compare against")


def _time(fn, *args, repeat=20):
    fn(*args)  # warm-up (includes JIT compilation for the numba path)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_maxpool(t=4096, c=256, kernel=3, stride=2, seed=0):
    rng = np.random.default_rng(seed)
    out_len = -(-t // stride)
    pad = (out_len - 1) * stride + kernel - t
    xp = np.zeros((t + pad, c), dtype=np.float32)
    xp[pad // 2 : pad // 2 + t] = rng.standard_normal((t, c)).astype(np.float32)

    y_nb, arg_nb = kernels._nb_maxpool_forward(xp, kernel, stride, out_len)
    y_np, arg_np = kernels._np_maxpool_forward(xp, kernel, stride, out_len)
    assert np.array_equal(y_nb, y_np) and np.array_equal(arg_nb, arg_np)

    dy = rng.standard_normal(y_np.shape).astype(np.float32)
    assert np.array_equal(
        kernels._nb_maxpool_backward(dy, arg_np, xp.shape[0]),
        kernels._np_maxpool_backward(dy, arg_np, xp.shape[0]),
    )
    return {
        "maxpool_forward/numba": _time(kernels._nb_maxpool_forward, xp, kernel, stride, out_len),
        "maxpool_forward/numpy": _time(kernels._np_maxpool_forward, xp, kernel, stride, out_len),
        "maxpool_backward/numba": _time(kernels._nb_maxpool_backward, dy, arg_np, xp.shape[0]),
        "maxpool_backward/numpy": _time(kernels._np_maxpool_backward, dy, arg_np, xp.shape[0]),
    }


def bench_group_max(n_vertices=2048, n_edges=16384, c=128, seed=1):
    rng = np.random.default_rng(seed)
    msgs = rng.standard_normal((n_edges, c)).astype(np.float32)
    centers = rng.integers(0, n_vertices, size=n_edges).astype(np.int64)

    o_nb, a_nb = kernels._nb_group_max_forward(msgs, centers, n_vertices)
    o_np, a_np = kernels._np_group_max_forward(msgs, centers, n_vertices)
    assert np.array_equal(o_nb, o_np) and np.array_equal(a_nb, a_np)

    dout = rng.standard_normal(o_np.shape).astype(np.float32)
    assert np.array_equal(
        kernels._nb_group_max_backward(dout, a_np, n_edges),
        kernels._np_group_max_backward(dout, a_np, n_edges),
    )
    return {
        "group_max_forward/numba": _time(kernels._nb_group_max_forward, msgs, centers, n_vertices),
        "group_max_forward/numpy": _time(kernels._np_group_max_forward, msgs, centers, n_vertices),
        "group_max_backward/numba": _time(kernels._nb_group_max_backward, dout, a_np, n_edges),
        "group_max_backward/numpy": _time(kernels._np_group_max_backward, dout, a_np, n_edges),
    }


def main():
    rows = {}
    rows.update(bench_maxpool())
    rows.update(bench_group_max())
    print(f"{'kernel/backend':32s} {'best (ms)':>10s}")
    for name, secs in rows.items():
        print(f"{name:32s} {secs * 1e3:10.3f}")
    for base in sorted({k.rsplit('/', 1)[0] for k in rows}):
        speedup = rows[f"{base}/numpy"] / rows[f"{base}/numba"]
        print(f"{base}: numba is {speedup:.1f}x the numpy fallback")


if __name__ == "__main__":
    main()
