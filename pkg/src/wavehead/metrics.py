"""Threshold-free binary-classification metrics: ROC curve, AUC, EER.

Scores follow the convention higher = more likely fake (label 1).  AUC is
the Mann-Whitney rank statistic with ties counted one half, computed in
O(n log n); it equals the trapezoidal area under the ROC sweep, which the
tests cross-check against an O(n^2) pairwise oracle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, UndefinedMetricError


@dataclass(frozen=True)
class RocReport:
    """ROC sweep for one (scores, labels) pair.

    ``points`` is an (k, 2) array of (fpr, tpr) rows from (0,0) to (1,1),
    one interior point per distinct score threshold.
    """

    points: np.ndarray
    auc: float
    eer: float
    n_pos: int
    n_neg: int


def _check(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.ndim != 1 or y.shape != s.shape:
        raise ShapeError(
            f"scores shape {s.shape} and labels shape {y.shape} must be equal 1D"
        )
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos + n_neg != s.shape[0]:
        raise UndefinedMetricError(
            f"labels must be 0/1, got {sorted(set(np.asarray(labels).tolist()))}"
        )
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"need both classes, got {n_pos} positive / {n_neg} negative"
        )
    return s, y.astype(np.int64), n_pos, n_neg


def auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative (ties = 1/2)."""
    s, y, n_pos, n_neg = _check(scores, labels)
    order = np.argsort(s, kind="stable")
    ranks = _average_ranks(s[order])
    rank_sum = ranks[y[order] == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _average_ranks(sorted_scores: np.ndarray) -> np.ndarray:
    """1-based ranks of a sorted vector, tied groups sharing their mean rank."""
    n = sorted_scores.shape[0]
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j < n and sorted_scores[j] == sorted_scores[i]:
            j += 1
        ranks[i:j] = 0.5 * (i + 1 + j)
        i = j
    return ranks


def roc_curve(scores, labels) -> RocReport:
    """Full ROC sweep over distinct thresholds plus endpoints."""
    s, y, n_pos, n_neg = _check(scores, labels)
    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    s_sorted = s[order]
    # group boundaries of distinct scores, descending
    boundary = np.flatnonzero(np.diff(s_sorted)) + 1
    ends = np.concatenate([boundary, [len(s_sorted)]])
    tp = np.cumsum(y_sorted)[ends - 1]
    fp = ends - tp
    fpr = np.concatenate([[0.0], fp / n_neg])
    tpr = np.concatenate([[0.0], tp / n_pos])
    points = np.column_stack([fpr, tpr])
    return RocReport(
        points=points,
        auc=auc(scores, labels),
        eer=_eer_from_points(points),
        n_pos=n_pos,
        n_neg=n_neg,
    )


def eer(scores, labels) -> float:
    """Rate at the ROC point where fpr = 1 - tpr (false accepts = misses).

    Between bracketing sweep points the crossing is located by linear
    interpolation; exact when a sweep point lies on the crossing.
    """
    return roc_curve(scores, labels).eer


def _eer_from_points(points: np.ndarray) -> float:
    # g = fpr + tpr - 1 is non-decreasing along the sweep, from -1 to +1
    g = points[:, 0] + points[:, 1] - 1.0
    k = int(np.searchsorted(g >= 0.0, True))
    if g[k] == 0.0:
        return float(points[k, 0])
    f0, t0 = points[k - 1]
    f1, t1 = points[k]
    alpha = (1.0 - t0 - f0) / ((f1 - f0) + (t1 - t0))
    return float(f0 + alpha * (f1 - f0))
