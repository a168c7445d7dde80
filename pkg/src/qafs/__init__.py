"""Feature selection for physiological stress detection via a correlation QUBO."""

from .baselines import SelectionResult, anova_p_value, baseline_select, mutual_info, pearson_select
from .estimators import FilterFeatureSelector, KNNClassifier, QuboFeatureSelector, knn_classify
from .evaluation import (
    ExperimentConfig,
    ExperimentResult,
    SplitSpec,
    f1_per_class,
    run_experiment,
    source_contribution,
    subsample_training,
    train_test_split,
    welch_t_p_value,
)
from .qubo import Bqm, build_bqm, energy, pearson
from .sampler import AnnealSchedule, Sample, SampleSet, exhaustive_solve, select_features, simulated_anneal
from .signals import FeatureMatrix, SignalRecord, WindowSpec, build_feature_matrix

__version__ = "0.1.0"
