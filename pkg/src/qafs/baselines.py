"""Classical filter feature-selection baselines.

Each scorer ranks features independently of any classifier: absolute
Pearson correlation with the label, plug-in mutual information, or the
one-way ANOVA p-value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .qubo import correlation_stats

METHODS = ("pearson", "mutual_info", "p_value")


@dataclass(frozen=True)
class SelectionResult:
    method: str
    indices: list[int]
    scores: np.ndarray

    @property
    def k(self) -> int:
        return len(self.indices)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "indices": [int(i) for i in self.indices],
            "scores": [float(s) for s in self.scores],
            "k": self.k,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionResult":
        return cls(d["method"], [int(i) for i in d["indices"]], np.asarray(d["scores"], dtype=float))


def mutual_info(feature, labels, bins: int = 10) -> float:
    """Plug-in mutual information in bits between a feature and class labels.

    The feature is cut into ``bins`` equal-width bins over its observed
    range; a constant feature carries no information.
    """
    x = np.asarray(feature, dtype=np.float64)
    c = np.asarray(labels)
    if x.shape != c.shape or x.ndim != 1:
        raise ValueError("feature and labels must be 1-D sequences of equal length")
    if x.size < 2:
        raise ValueError("mutual_info needs at least 2 samples")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return 0.0
    b = np.floor((x - lo) / (hi - lo) * bins).astype(np.int64)
    np.clip(b, 0, bins - 1, out=b)
    _, ci = np.unique(c, return_inverse=True)
    joint = np.zeros((bins, ci.max() + 1))
    np.add.at(joint, (b, ci), 1.0)
    joint /= x.size
    pb = joint.sum(axis=1, keepdims=True)
    pc = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    mi = float(np.sum(joint[nz] * np.log2(joint[nz] / (pb @ pc)[nz])))
    return max(mi, 0.0)


def f_sf(f: float, df1: float, df2: float) -> float:
    """Right tail of the F distribution via the regularized incomplete beta."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


def anova_f(feature, labels) -> tuple[float, float]:
    """One-way ANOVA F statistic and p-value over the label groups."""
    x = np.asarray(feature, dtype=np.float64)
    c = np.asarray(labels)
    if x.shape != c.shape or x.ndim != 1:
        raise ValueError("feature and labels must be 1-D sequences of equal length")
    classes, ci, counts = np.unique(c, return_inverse=True, return_counts=True)
    if classes.size < 2:
        raise ValueError("ANOVA needs at least 2 classes")
    if counts.min() < 2:
        bad = classes[np.argmin(counts)]
        raise ValueError(f"class {bad!r} has fewer than 2 samples")
    grand = x.mean()
    means = np.bincount(ci, weights=x) / counts
    ssb = float(np.sum(counts * (means - grand) ** 2))
    ssw = float(np.sum((x - means[ci]) ** 2))
    df1 = classes.size - 1
    df2 = x.size - classes.size
    if ssw == 0.0:
        # no within-group spread: either nothing varies at all or the groups
        # are perfectly separated
        return (0.0, 1.0) if ssb == 0.0 else (math.inf, 0.0)
    f = (ssb / df1) / (ssw / df2)
    return f, f_sf(f, df1, df2)


def anova_p_value(feature, labels) -> float:
    return anova_f(feature, labels)[1]


def _top_k(scores: np.ndarray, k: int, descending: bool) -> list[int]:
    order = np.argsort(-scores if descending else scores, kind="stable")
    return sorted(int(i) for i in order[:k])


def feature_scores(X, y, method: str, bins: int = 10) -> np.ndarray:
    """Per-column score for ``method``; larger is better except for p-values."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if method == "pearson":
        if np.unique(y).size < 2:
            raise ValueError("training labels contain a single class")
        return np.abs(correlation_stats(X, y).feature_target)
    if method == "mutual_info":
        return np.array([mutual_info(X[:, j], y, bins) for j in range(X.shape[1])])
    if method == "p_value":
        return np.array([anova_p_value(X[:, j], y) for j in range(X.shape[1])])
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


def baseline_select(X, y, method: str, k: int, bins: int = 10) -> SelectionResult:
    """Top-``k`` features by ``method`` score, ties to the lower index."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    scores = feature_scores(X, y, method, bins)
    return SelectionResult(method, _top_k(scores, k, descending=method != "p_value"), scores)


def pearson_select(X, y, k: int) -> SelectionResult:
    return baseline_select(X, y, "pearson", k)
