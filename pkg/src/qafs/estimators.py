"""scikit-learn compatible selectors and classifier.

These wrap the functional core so the selection step drops into a
``Pipeline`` or ``GridSearchCV`` like any other transformer.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baselines import METHODS, baseline_select
from .qubo import build_bqm
from .sampler import AnnealSchedule, exhaustive_solve, simulated_anneal


class QuboFeatureSelector(SelectorMixin, BaseEstimator):
    """Select features by minimizing a correlation QUBO.

    Parameters
    ----------
    alpha : float, default=1.0
        Redundancy weight on the feature-feature couplings.
    signed : bool, default=False
        Use raw rather than absolute correlations.
    sampler : {"annealing", "exhaustive"}, default="annealing"
    sweeps, beta_start, beta_end, n_reads
        Annealing schedule; ignored by the exhaustive sampler.
    seed : int, default=0

    Attributes
    ----------
    bqm_ : Bqm
    sampleset_ : SampleSet or None
        All annealing reads, ``None`` for the exhaustive sampler.
    best_ : Sample
    support_ : ndarray of bool
    """

    def __init__(
        self,
        alpha=1.0,
        signed=False,
        sampler="annealing",
        sweeps=1000,
        beta_start=0.1,
        beta_end=10.0,
        n_reads=100,
        seed=0,
    ):
        self.alpha = alpha
        self.signed = signed
        self.sampler = sampler
        self.sweeps = sweeps
        self.beta_start = beta_start
        self.beta_end = beta_end
        self.n_reads = n_reads
        self.seed = seed

    @property
    def schedule(self) -> AnnealSchedule:
        return AnnealSchedule(self.sweeps, self.beta_start, self.beta_end, self.n_reads)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        self.bqm_ = build_bqm(X, y, alpha=self.alpha, signed=self.signed)
        if self.sampler == "exhaustive":
            self.sampleset_ = None
            self.best_ = exhaustive_solve(self.bqm_)
        elif self.sampler == "annealing":
            self.sampleset_ = simulated_anneal(self.bqm_, self.schedule, self.seed)
            self.best_ = self.sampleset_.first
        else:
            raise ValueError(f"unknown sampler {self.sampler!r}")
        support = self.best_.x.astype(bool)
        if not support.any():
            # an empty selection would leave nothing to classify with
            support[int(np.argmin(self.bqm_.h))] = True
        self.support_ = support
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_


class FilterFeatureSelector(SelectorMixin, BaseEstimator):
    """Top-``k`` filter selection by Pearson, mutual information or ANOVA p-value."""

    def __init__(self, method="pearson", k=5, bins=10):
        self.method = method
        self.k = k
        self.bins = bins

    def fit(self, X, y):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        X, y = check_X_y(X, y, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        self.result_ = baseline_select(X, y, self.method, self.k, self.bins)
        self.scores_ = self.result_.scores
        mask = np.zeros(X.shape[1], dtype=bool)
        mask[self.result_.indices] = True
        self.support_ = mask
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_


class KNNClassifier(ClassifierMixin, BaseEstimator):
    """k-nearest-neighbours on train-standardized features.

    Equal distances resolve to the lower training row and split votes to
    the lower class, so predictions never depend on sort internals.
    """

    def __init__(self, n_neighbors=5, standardize=True):
        self.n_neighbors = n_neighbors
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        if X.shape[0] < self.n_neighbors:
            raise ValueError(
                f"need at least n_neighbors={self.n_neighbors} training rows, got {X.shape[0]}"
            )
        self.classes_, self._y = np.unique(y, return_inverse=True)
        if self.standardize:
            self.mean_ = X.mean(axis=0)
            scale = X.std(axis=0)
            scale[scale == 0] = 1.0
            self.scale_ = scale
        else:
            self.mean_ = np.zeros(X.shape[1])
            self.scale_ = np.ones(X.shape[1])
        self._X = (X - self.mean_) / self.scale_
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "_X")
        X = check_array(X, dtype=np.float64)
        Z = (X - self.mean_) / self.scale_
        d2 = ((Z[:, None, :] - self._X[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.n_neighbors]
        votes = np.zeros((X.shape[0], self.classes_.size), dtype=np.int64)
        np.add.at(votes, (np.arange(X.shape[0])[:, None], self._y[nearest]), 1)
        return self.classes_[np.argmax(votes, axis=1)]


def knn_classify(X_train, y_train, test_row, k: int = 5):
    """Single-row convenience wrapper around :class:`KNNClassifier`."""
    model = KNNClassifier(n_neighbors=k).fit(X_train, y_train)
    return model.predict(np.atleast_2d(test_row))[0]
