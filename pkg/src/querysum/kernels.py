"""Hot inner-loop kernels.

Two implementations live here: numba ``@njit`` versions and pure-numpy
fallbacks.  Selection happens once at import time via the environment
variable ``QUERYSUM_BACKEND`` (``numba`` by default, ``numpy`` forces the
fallback path).  Both backends are bit-identical; the benchmark in
``benchmarks/bench_kernels.py`` compares them.

Kernels:
  - max-pool over temporal windows with argmax routing for the backward pass
  - grouped max over edge messages (edge-convolution aggregation) with
    argmax routing
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "maxpool_forward",
    "maxpool_backward",
    "group_max_forward",
    "group_max_backward",
]


def _select_backend() -> str:
    choice = os.environ.get("QUERYSUM_BACKEND", "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"QUERYSUM_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba":
        try:
            import numba  # noqa: F401
        except ImportError:
            choice = "numpy"
    return choice


BACKEND = _select_backend()


# ---------------------------------------------------------------------------
# numpy fallbacks


def _np_maxpool_forward(xp, kernel, stride, out_len):
    # xp is already padded; windows never run past the end.
    c = xp.shape[1]
    windows = np.empty((out_len, kernel, c), dtype=xp.dtype)
    for k in range(kernel):
        windows[:, k, :] = xp[k : k + out_len * stride : stride, :]
    arg_in_window = windows.argmax(axis=1)  # first max wins -> lowest index
    y = np.take_along_axis(windows, arg_in_window[:, None, :], axis=1)[:, 0, :]
    rows = np.arange(out_len, dtype=np.int64)[:, None] * stride
    arg = (rows + arg_in_window).astype(np.int64)
    return y, arg


def _np_maxpool_backward(dy, arg, padded_len):
    dxp = np.zeros((padded_len, dy.shape[1]), dtype=dy.dtype)
    cols = np.broadcast_to(np.arange(dy.shape[1]), dy.shape)
    np.add.at(dxp, (arg, cols), dy)
    return dxp


def _np_group_max_forward(msgs, centers, n_vertices):
    e, c = msgs.shape
    out = np.zeros((n_vertices, c), dtype=msgs.dtype)
    arg = np.full((n_vertices, c), -1, dtype=np.int64)
    order = np.argsort(centers, kind="stable")
    i = 0
    while i < e:
        v = centers[order[i]]
        j = i
        while j < e and centers[order[j]] == v:
            j += 1
        group = order[i:j]
        block = msgs[group]
        local = block.argmax(axis=0)
        out[v] = block[local, np.arange(c)]
        arg[v] = group[local]
        i = j
    return out, arg


def _np_group_max_backward(dout, arg, n_edges):
    dmsgs = np.zeros((n_edges, dout.shape[1]), dtype=dout.dtype)
    mask = arg >= 0
    rows, cols = np.nonzero(mask)
    np.add.at(dmsgs, (arg[rows, cols], cols), dout[rows, cols])
    return dmsgs


# ---------------------------------------------------------------------------
# numba versions

if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def _nb_maxpool_forward(xp, kernel, stride, out_len):
        c = xp.shape[1]
        y = np.empty((out_len, c), dtype=xp.dtype)
        arg = np.empty((out_len, c), dtype=np.int64)
        for t in range(out_len):
            base = t * stride
            for j in range(c):
                best = xp[base, j]
                bi = base
                for k in range(1, kernel):
                    v = xp[base + k, j]
                    if v > best:
                        best = v
                        bi = base + k
                y[t, j] = best
                arg[t, j] = bi
        return y, arg

    @njit(cache=True)
    def _nb_maxpool_backward(dy, arg, padded_len):
        c = dy.shape[1]
        dxp = np.zeros((padded_len, c), dtype=dy.dtype)
        for t in range(dy.shape[0]):
            for j in range(c):
                dxp[arg[t, j], j] += dy[t, j]
        return dxp

    @njit(cache=True)
    def _nb_group_max_forward(msgs, centers, n_vertices):
        e, c = msgs.shape
        out = np.zeros((n_vertices, c), dtype=msgs.dtype)
        arg = np.full((n_vertices, c), -1, dtype=np.int64)
        for i in range(e):
            v = centers[i]
            for j in range(c):
                if arg[v, j] < 0 or msgs[i, j] > out[v, j]:
                    out[v, j] = msgs[i, j]
                    arg[v, j] = i
        return out, arg

    @njit(cache=True)
    def _nb_group_max_backward(dout, arg, n_edges):
        n, c = dout.shape
        dmsgs = np.zeros((n_edges, c), dtype=dout.dtype)
        for v in range(n):
            for j in range(c):
                i = arg[v, j]
                if i >= 0:
                    dmsgs[i, j] += dout[v, j]
        return dmsgs

    maxpool_forward = _nb_maxpool_forward
    maxpool_backward = _nb_maxpool_backward
    group_max_forward = _nb_group_max_forward
    group_max_backward = _nb_group_max_backward
else:
    maxpool_forward = _np_maxpool_forward
    maxpool_backward = _np_maxpool_backward
    group_max_forward = _np_group_max_forward
    group_max_backward = _np_group_max_backward
