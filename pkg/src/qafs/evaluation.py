"""Training-fraction experiment grid.

One stratified train/test split is fixed for the whole run. For each
method, training fraction and repetition the training rows are subsampled,
features are selected on the subsample, a kNN classifier is trained on the
same subsample and scored with per-class F1 on the untouched test rows.

Seeds: the outer split uses ``derive_seed(seed, "split")``; repetition ``r``
uses ``s_r = seed + r`` and derives ``derive_seed(s_r, "subsample")`` and
``derive_seed(s_r, "anneal")`` from it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc
from scipy.stats import mannwhitneyu

from ._random import PortableRandom, derive_seed
from .baselines import METHODS as BASELINE_METHODS
from .baselines import baseline_select
from .estimators import KNNClassifier
from .qubo import build_bqm
from .sampler import AnnealSchedule, select_features
from .signals import LABEL_NAMES, SOURCES, FeatureMatrix

log = logging.getLogger(__name__)

ALL_METHODS = ("qa",) + BASELINE_METHODS
N_CLASSES = 3


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.3
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must be in (0, 1)")


@dataclass(frozen=True)
class ExperimentConfig:
    fractions: tuple[float, ...] = (1.0, 0.3, 0.2, 0.1)
    n_repeats: int = 10
    methods: tuple[str, ...] = ALL_METHODS
    alpha: float = 1.0
    schedule: AnnealSchedule = AnnealSchedule()
    knn_k: int = 5
    seed: int = 0
    test_fraction: float = 0.3
    bins: int = 10
    # None matches each baseline's k to the QA selection size
    baseline_k: int | None = None
    sampler: str = "annealing"
    significance_test: str = "welch"

    def __post_init__(self):
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.fractions or any(not 0 < f <= 1 for f in self.fractions):
            raise ValueError("every fraction must be in (0, 1]")
        if self.n_repeats < 1:
            raise ValueError("n_repeats must be >= 1")
        unknown = [m for m in self.methods if m not in ALL_METHODS]
        if unknown or not self.methods:
            raise ValueError(f"unknown methods {unknown}; expected some of {', '.join(ALL_METHODS)}")
        if self.knn_k < 1:
            raise ValueError("knn_k must be >= 1")
        if self.baseline_k is not None and self.baseline_k < 1:
            raise ValueError("baseline_k must be >= 1")
        if self.significance_test not in ("welch", "mannwhitney"):
            raise ValueError("significance_test must be 'welch' or 'mannwhitney'")
        SplitSpec(self.test_fraction)


@dataclass
class ExperimentResult:
    # (method, fraction, repetition, class, f1)
    f1_rows: list[tuple] = field(default_factory=list)
    # (method, fraction, repetition, feature_index, feature_name, source)
    selections: list[tuple] = field(default_factory=list)

    def f1_matrix(self, method: str, fraction: float) -> np.ndarray:
        """Repetitions by classes array of F1 scores."""
        rows = [r for r in self.f1_rows if r[0] == method and r[1] == fraction]
        n_rep = max(r[2] for r in rows) + 1
        out = np.zeros((n_rep, N_CLASSES))
        for _, _, rep, cls, f1 in rows:
            out[rep, cls] = f1
        return out


def _round_half_up(x: float) -> int:
    # tolerate representation error such as 0.3 * 10 = 3.0000000000000004
    return int(math.floor(x + 0.5 + 1e-9))


def train_test_split(fm: FeatureMatrix, spec: SplitSpec = SplitSpec()) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Seeded split with ``round(class_count * test_fraction)`` test rows per class."""
    if fm.n_rows < 10:
        raise ValueError("need at least 10 rows to split")
    classes, counts = np.unique(fm.labels, return_counts=True)
    if classes.size < 2:
        raise ValueError("need at least 2 classes to split")
    rng = PortableRandom(derive_seed(spec.seed, "split"))
    test = []
    if spec.stratified:
        for c, count in zip(classes, counts):
            if count < 2:
                raise ValueError(f"class {c} has fewer than 2 rows")
            rows = np.flatnonzero(fm.labels == c)
            test.extend(rows[rng.permutation(rows.size)[: _round_half_up(count * spec.test_fraction)]])
    else:
        test.extend(rng.permutation(fm.n_rows)[: _round_half_up(fm.n_rows * spec.test_fraction)])
    is_test = np.zeros(fm.n_rows, dtype=bool)
    is_test[test] = True
    return fm.take(np.flatnonzero(~is_test)), fm.take(np.flatnonzero(is_test))


def _allocate(counts: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder allocation of ``total`` rows, at least one per class."""
    quota = counts * (total / counts.sum())
    alloc = np.minimum(np.floor(quota).astype(np.int64), counts)
    rem = quota - np.floor(quota)
    for i in np.argsort(-rem, kind="stable"):
        if alloc.sum() >= total:
            break
        if alloc[i] < counts[i]:
            alloc[i] += 1
    for i in np.flatnonzero(alloc == 0):
        donor = int(np.argmax(alloc))
        if alloc[donor] > 1:
            alloc[donor] -= 1
        alloc[i] = 1
    return alloc


def subsample_training(train: FeatureMatrix, fraction: float, seed: int) -> FeatureMatrix:
    """Stratified seeded subsample of ``round(fraction * rows)`` rows (>= 1 per class)."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    if fraction == 1.0:
        return train
    classes, counts = np.unique(train.labels, return_counts=True)
    total = max(_round_half_up(fraction * train.n_rows), classes.size)
    alloc = _allocate(counts, total)
    rng = PortableRandom(derive_seed(seed, "subsample"))
    keep = []
    for c, m in zip(classes, alloc):
        rows = np.flatnonzero(train.labels == c)
        keep.extend(rows[rng.permutation(rows.size)[:m]])
    return train.take(np.sort(np.asarray(keep, dtype=np.int64)))


def f1_per_class(true, pred, n_classes: int = N_CLASSES) -> np.ndarray:
    """Per-class F1; a 0/0 precision, recall or F1 counts as 0."""
    true = np.asarray(true, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if true.shape != pred.shape:
        raise ValueError("true and pred must have equal length")
    out = np.zeros(n_classes)
    for c in range(n_classes):
        tp = int(np.sum((true == c) & (pred == c)))
        fp = int(np.sum((true != c) & (pred == c)))
        fn = int(np.sum((true == c) & (pred != c)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        out[c] = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return out


def t_sf_two_sided(t: float, df: float) -> float:
    """Two-sided Student-t tail probability via the incomplete beta."""
    if math.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def welch_t_p_value(a, b) -> float:
    """Two-sided Welch t-test p-value with Welch-Satterthwaite df."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0.0:
        return 1.0 if diff == 0.0 else 0.0
    t = diff / math.sqrt(se2)
    df = se2 * se2 / (va * va / (a.size - 1) + vb * vb / (b.size - 1))
    return t_sf_two_sided(t, df)


def mann_whitney_p_value(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    if np.ptp(np.concatenate([a, b])) == 0:
        return 1.0
    return float(mannwhitneyu(a, b, alternative="two-sided").pvalue)


def qa_select(train: FeatureMatrix, cfg: ExperimentConfig, seed: int) -> list[int]:
    bqm = build_bqm(train.values, train.labels, alpha=cfg.alpha)
    return select_features(bqm, cfg.sampler, cfg.schedule, derive_seed(seed, "anneal"))


def _score(train: FeatureMatrix, test: FeatureMatrix, cols: list[int], knn_k: int) -> np.ndarray:
    model = KNNClassifier(n_neighbors=knn_k).fit(train.values[:, cols], train.labels)
    return f1_per_class(test.labels, model.predict(test.values[:, cols]))


def run_experiment(fm: FeatureMatrix, cfg: ExperimentConfig = ExperimentConfig()) -> ExperimentResult:
    """Run every (method, fraction, repetition) cell of the grid."""
    train, test = train_test_split(fm, SplitSpec(cfg.test_fraction, True, cfg.seed))
    smallest = subsample_training(train, min(cfg.fractions), cfg.seed).n_rows
    if smallest < cfg.knn_k:
        raise ValueError(
            f"fraction {min(cfg.fractions)} leaves {smallest} training rows, "
            f"fewer than knn_k={cfg.knn_k}; supply more windows"
        )
    result = ExperimentResult()
    qa_cache: dict[tuple[float, int], list[int]] = {}
    for method in cfg.methods:
        for fraction in cfg.fractions:
            for rep in range(cfg.n_repeats):
                seed_r = cfg.seed + rep
                sub = subsample_training(train, fraction, seed_r)
                key = (fraction, rep)
                if method == "qa" or cfg.baseline_k is None:
                    if key not in qa_cache:
                        qa_cache[key] = qa_select(sub, cfg, seed_r)
                if method == "qa":
                    cols = qa_cache[key]
                else:
                    k = cfg.baseline_k if cfg.baseline_k is not None else len(qa_cache[key])
                    cols = baseline_select(sub.values, sub.labels, method, min(k, fm.n_features), cfg.bins).indices
                f1 = _score(sub, test, cols, cfg.knn_k)
                result.f1_rows.extend((method, fraction, rep, c, float(f1[c])) for c in range(N_CLASSES))
                result.selections.extend(
                    (method, fraction, rep, j, fm.names[j], fm.sources[j]) for j in cols
                )
                log.debug("%s fraction=%s rep=%d selected=%s f1=%s", method, fraction, rep, cols, f1)
    return result


def significance(result: ExperimentResult, cfg: ExperimentConfig) -> list[tuple]:
    """p-values of each fraction's F1s against the largest fraction's.

    Returns rows ``(method, class, fraction, p_value, significant)``; empty
    when there is a single repetition.
    """
    if cfg.n_repeats < 2:
        log.warning("significance needs at least 2 repetitions; skipping")
        return []
    test = welch_t_p_value if cfg.significance_test == "welch" else mann_whitney_p_value
    reference = max(cfg.fractions)
    rows = []
    for method in cfg.methods:
        ref = result.f1_matrix(method, reference)
        for c in range(N_CLASSES):
            for fraction in cfg.fractions:
                if fraction == reference:
                    continue
                p = test(result.f1_matrix(method, fraction)[:, c], ref[:, c])
                rows.append((method, c, fraction, p, int(p < 0.05)))
    return rows


def source_contribution(selections) -> dict[str, float]:
    """Percentage of selected features coming from each signal source.

    ``selections`` holds selection rows (their last field is the source tag)
    or bare source tags.
    """
    tags = [s if isinstance(s, str) else s[-1] for s in selections]
    if not tags:
        raise ValueError("no selections to summarize")
    total = len(tags)
    return {src: 100.0 * sum(t == src for t in tags) / total for src in SOURCES}


def contribution_table(result: ExperimentResult, cfg: ExperimentConfig) -> list[tuple]:
    rows = []
    for method in cfg.methods:
        for fraction in cfg.fractions:
            sel = [s for s in result.selections if s[0] == method and s[1] == fraction]
            for src, pct in source_contribution(sel).items():
                rows.append((method, fraction, src, pct))
    return rows


def class_name(c: int) -> str:
    return LABEL_NAMES[c]
