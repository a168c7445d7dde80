"""Binary quadratic models built from feature correlations.

Each feature becomes a binary inclusion variable. Its linear bias rewards
relevance to the target and each pairwise coupling penalizes redundancy
between two features, so low-energy assignments pick relevant features that
do not repeat each other::

    E(x) = sum_i h_i x_i + sum_{i<j} J_ij x_i x_j + offset
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Bqm:
    """Immutable binary quadratic model.

    ``J`` is held as a dense symmetric matrix with zero diagonal; the
    upper triangle is the canonical storage for serialization.
    """

    h: np.ndarray
    J: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64).reshape(-1)
        J = np.array(self.J, dtype=np.float64)
        n = h.shape[0]
        if J.shape != (n, n):
            raise ValueError(f"J must have shape ({n}, {n}), got {J.shape}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(J)) and math.isfinite(self.offset)):
            raise ValueError("Bqm entries must be finite")
        if np.any(np.diag(J) != 0):
            raise ValueError("J must have a zero diagonal")
        if not np.array_equal(J, J.T):
            raise ValueError("J must be symmetric")
        h.setflags(write=False)
        J.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @classmethod
    def from_upper(cls, h, couplings, offset=0.0) -> "Bqm":
        """Build from ``h`` and an iterable of ``(i, j, value)`` with ``i < j``."""
        h = np.asarray(h, dtype=np.float64)
        J = np.zeros((h.shape[0], h.shape[0]))
        for i, j, v in couplings:
            i, j = int(i), int(j)
            if not i < j:
                raise ValueError(f"coupling ({i}, {j}) is not in the upper triangle")
            J[i, j] = J[j, i] = float(v)
        return cls(h, J, offset)

    def energy(self, x) -> float:
        return energy(self, x)

    def to_dict(self) -> dict:
        iu, ju = np.triu_indices(self.n, k=1)
        return {
            "n": self.n,
            "h": [float(v) for v in self.h],
            "J": [[int(i), int(j), float(self.J[i, j])] for i, j in zip(iu, ju)],
            "offset": self.offset,
        }

    def to_json(self) -> str:
        # repr-based float formatting in json round-trips exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Bqm":
        bqm = cls.from_upper(d["h"], d["J"], d.get("offset", 0.0))
        if bqm.n != int(d["n"]):
            raise ValueError(f"n={d['n']} does not match {bqm.n} biases")
        return bqm

    @classmethod
    def from_json(cls, text: str) -> "Bqm":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CorrelationStats:
    feature_target: np.ndarray
    feature_feature: np.ndarray = field(repr=False)


def pearson(x, y) -> float:
    """Pearson correlation coefficient, 0 when either input is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two 1-D sequences of equal length")
    if x.size < 2:
        raise ValueError("pearson needs at least 2 samples")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def _corr_columns(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Xc = X - X.mean(axis=0)
    ss = np.einsum("ij,ij->j", Xc, Xc)
    norm = np.sqrt(ss)
    return Xc, norm


def correlation_stats(X, y) -> CorrelationStats:
    """Feature-target and feature-feature Pearson correlations.

    Constant columns correlate 0 with everything (1 with themselves).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (n_samples, n_features) and y (n_samples,)")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    Xc, norm = _corr_columns(X)
    yc = y - y.mean()
    ynorm = math.sqrt(float(yc @ yc))
    live = norm > 0
    ft = np.zeros(X.shape[1])
    if ynorm > 0:
        ft[live] = (Xc[:, live].T @ yc) / (norm[live] * ynorm)
    ff = np.zeros((X.shape[1], X.shape[1]))
    if live.any():
        Z = Xc[:, live] / norm[live]
        ff[np.ix_(live, live)] = Z.T @ Z
    np.clip(ft, -1.0, 1.0, out=ft)
    np.clip(ff, -1.0, 1.0, out=ff)
    ff = 0.5 * (ff + ff.T)
    np.fill_diagonal(ff, 1.0)
    return CorrelationStats(ft, ff)


def build_bqm(X, y, alpha: float = 1.0, signed: bool = False) -> Bqm:
    """Feature-selection BQM from training data.

    Parameters
    ----------
    X : array of shape (n_samples, n_features)
    y : array of shape (n_samples,)
        Ordinal class labels (0=Low, 1=Medium, 2=High).
    alpha : float
        Weight of the redundancy couplings relative to relevance biases.
    signed : bool
        Use raw correlations (``h = -r``, ``J = alpha * r``) instead of
        magnitudes.

    Returns
    -------
    Bqm
        ``h_i = -|r(f_i, y)|`` and ``J_ij = alpha * |r(f_i, f_j)|``.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("training data needs at least 2 rows")
    if np.unique(y).size < 2:
        raise ValueError("training labels contain a single class; target correlation is undefined")
    stats = correlation_stats(X, y)
    ft, ff = stats.feature_target, stats.feature_feature.copy()
    if not signed:
        ft, ff = np.abs(ft), np.abs(ff)
    np.fill_diagonal(ff, 0.0)
    return Bqm(-ft, alpha * ff, 0.0)


def energy(bqm: Bqm, x) -> float:
    """Exact energy of a binary assignment.

    Terms are summed with ``math.fsum`` so the result is the correctly
    rounded total, independent of summation order.
    """
    x = np.asarray(x).reshape(-1)
    if x.shape[0] != bqm.n:
        raise ValueError(f"assignment has length {x.shape[0]}, model has {bqm.n} variables")
    on = np.flatnonzero(x)
    sub = bqm.J[np.ix_(on, on)]
    iu = np.triu_indices(on.size, k=1)
    return math.fsum([*bqm.h[on].tolist(), *sub[iu].tolist(), bqm.offset])
