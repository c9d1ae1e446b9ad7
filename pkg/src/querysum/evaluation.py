"""Semantic evaluation protocol.

A predicted and a ground-truth summary are compared by building the bipartite
graph whose edge weights are the semantic IOU of the two shots' tag sets,
finding its maximum-weight matching, and turning the matched weight into
precision (weight / |pred|), recall (weight / |gt|) and F1.  Query shots can
be masked out of both sides beforehand.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError


def semantic_iou(a, b):
    """|a ∩ b| / |a ∪ b| over tag sets; two empty sets give 0."""
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


@dataclass(frozen=True)
class EvalResult:
    precision: float
    recall: float
    f1: float

    def to_dict(self):
        return {
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f1": round(self.f1, 6),
        }


ZERO_RESULT = EvalResult(0.0, 0.0, 0.0)


def _check_weights(w):
    w = np.asarray(w, dtype=np.float64)
    if w.size and (not np.isfinite(w).all() or (w < 0).any()):
        raise InputError("matching weights must be finite and nonnegative")
    return w


def _total(w, pairs):
    return float(sum(w[i, j] for i, j in pairs))


def max_weight_matching(w):
    """Maximum-weight matching of a nonnegative [m, n] weight matrix.

    Augmenting-path assignment on the zero-padded square matrix; exact in
    O(s^3).  Returns (pairs sorted lexicographically, total weight); pairs
    with zero weight are omitted.
    """
    w = _check_weights(w)
    if w.size == 0:
        return [], 0.0
    m, n = w.shape
    s = max(m, n)
    cost = np.zeros((s + 1, s + 1))  # 1-indexed; minimize -weight
    cost[1 : m + 1, 1 : n + 1] = -w

    inf = float("inf")
    u = np.zeros(s + 1)
    v = np.zeros(s + 1)
    p = np.zeros(s + 1, dtype=np.int64)  # p[j] = row matched to column j
    way = np.zeros(s + 1, dtype=np.int64)
    for i in range(1, s + 1):
        p[0] = i
        j0 = 0
        minv = np.full(s + 1, inf)
        used = np.zeros(s + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, s + 1):
                if used[j]:
                    continue
                cur = cost[i0, j] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(s + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    pairs = sorted(
        (int(p[j] - 1), j - 1)
        for j in range(1, s + 1)
        if p[j] - 1 < m and j - 1 < n and w[p[j] - 1, j - 1] > 0
    )
    return pairs, _total(w, pairs)


BRUTE_FORCE_LIMIT = 8


def brute_force_matching(w):
    """Exhaustive matching enumeration; test oracle for min(m, n) <= 8."""
    w = _check_weights(w)
    if w.size == 0:
        return [], 0.0
    m, n = w.shape
    transposed = m > n
    a = w.T if transposed else w
    rows, cols = a.shape
    if rows > BRUTE_FORCE_LIMIT:
        raise InputError(f"brute force limited to min(m,n) <= {BRUTE_FORCE_LIMIT}")

    best = {"weight": -1.0, "pairs": []}

    def recurse(r, used, acc, pairs):
        if r == rows:
            if acc > best["weight"]:
                best["weight"] = acc
                best["pairs"] = list(pairs)
            return
        recurse(r + 1, used, acc, pairs)  # leave row r unmatched
        for c in range(cols):
            if c not in used:
                used.add(c)
                pairs.append((r, c))
                recurse(r + 1, used, acc + a[r, c], pairs)
                pairs.pop()
                used.remove(c)

    recurse(0, set(), 0.0, [])
    pairs = [(c, r) if transposed else (r, c) for r, c in best["pairs"]]
    pairs = sorted(p for p in pairs if w[p[0], p[1]] > 0)
    return pairs, _total(w, pairs)


def evaluate_summary(pred, gt, tags, mask=None):
    """Evaluate a predicted shot set against the ground truth via tag IOU."""
    n_shots = len(tags)
    for idx in list(pred) + list(gt) + list(mask or []):
        if not 0 <= int(idx) < n_shots:
            raise InputError(f"shot index {idx} out of range [0, {n_shots})")
    masked = set(int(i) for i in (mask or []))
    pred = [int(i) for i in pred if int(i) not in masked]
    gt = [int(i) for i in gt if int(i) not in masked]
    if not pred or not gt:
        return ZERO_RESULT
    w = np.array([[semantic_iou(tags[p], tags[g]) for g in gt] for p in pred])
    _, weight = max_weight_matching(w)
    precision = weight / len(pred)
    recall = weight / len(gt)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return EvalResult(precision, recall, f1)
