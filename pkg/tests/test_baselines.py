import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qafs.baselines import (
    SelectionResult,
    anova_f,
    anova_p_value,
    baseline_select,
    f_sf,
    feature_scores,
    mutual_info,
    pearson_select,
)


class TestMutualInfo:
    def test_label_copy_is_label_entropy(self):
        y = np.repeat([0, 1, 2], 30)
        assert mutual_info(y.astype(float), y) == pytest.approx(math.log2(3), abs=1e-12)

    def test_constant_feature(self):
        assert mutual_info(np.full(30, 2.5), np.repeat([0, 1, 2], 10)) == 0.0

    def test_independent_data_near_zero(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            assert mutual_info(rng.normal(size=10_000), rng.integers(0, 3, 10_000)) <= 0.05

    def test_hand_computed(self):
        # two bins, two classes, joint = [[.5, 0], [.25, .25]]
        x = np.array([0.0, 0.0, 1.0, 1.0])
        y = np.array([0, 0, 0, 1])
        expected = 0.5 * math.log2(0.5 / (0.5 * 0.75)) + 0.25 * math.log2(0.25 / (0.5 * 0.75)) + 0.25 * math.log2(
            0.25 / (0.5 * 0.25)
        )
        assert mutual_info(x, y, bins=2) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=30)
    @given(st.floats(0.01, 100), st.floats(-100, 100), st.integers(0, 1000))
    def test_affine_invariance(self, scale, shift, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=200)
        y = rng.integers(0, 3, 200)
        assert mutual_info(scale * x + shift, y) == pytest.approx(mutual_info(x, y), abs=1e-9)

    def test_errors(self):
        with pytest.raises(ValueError):
            mutual_info([1.0, 2.0], [0])
        with pytest.raises(ValueError):
            mutual_info([1.0, 2.0], [0, 1], bins=0)


class TestAnova:
    def test_constant_feature(self):
        f, p = anova_f(np.ones(6), [0, 0, 1, 1, 2, 2])
        assert f == 0.0 and p == 1.0

    def test_two_group_example(self):
        # means 1.5 and 3.5, SSB = 4, SSW = 1, df = (1, 2)
        f, p = anova_f([1.0, 2.0, 3.0, 4.0], [0, 0, 1, 1])
        assert f == pytest.approx(8.0)
        assert p == pytest.approx(stats.f.sf(8.0, 1, 2), rel=1e-10)
        assert p == pytest.approx(0.1056, abs=1e-4)

    def test_matches_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.normal(size=45)
            y = np.repeat([0, 1, 2], 15)
            x[y == 2] += rng.uniform(0, 1)
            f, p = anova_f(x, y)
            ref = stats.f_oneway(x[y == 0], x[y == 1], x[y == 2])
            assert f == pytest.approx(ref.statistic, rel=1e-10)
            assert p == pytest.approx(ref.pvalue, rel=1e-8, abs=1e-300)

    def test_separated_groups(self):
        rng = np.random.default_rng(1)
        y = np.repeat([0, 1, 2], 20)
        assert anova_p_value(y * 10 + rng.normal(size=60), y) < 1e-6

    def test_perfect_separation(self):
        assert anova_f([1.0, 1.0, 2.0, 2.0], [0, 0, 1, 1]) == (math.inf, 0.0)

    def test_null_calibration(self):
        rng = np.random.default_rng(2)
        y = np.repeat([0, 1, 2], 20)
        hits = sum(anova_p_value(rng.normal(size=60), rng.permutation(y)) < 0.05 for _ in range(1000))
        assert abs(hits / 1000 - 0.05) <= 0.02

    def test_f_sf_edges(self):
        assert f_sf(0.0, 2, 10) == 1.0
        assert f_sf(math.inf, 2, 10) == 0.0

    def test_errors(self):
        with pytest.raises(ValueError):
            anova_f([1.0, 2.0, 3.0], [0, 0, 0])
        with pytest.raises(ValueError):
            anova_f([1.0, 2.0, 3.0], [0, 0, 1])


class TestSelection:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.y = np.repeat([0, 1, 2], 30)
        noise = rng.normal(size=(90, 5))
        # column strength ordered 2 > 0 > 4; columns 1 and 3 are noise
        self.X = noise.copy()
        self.X[:, 2] += 3 * self.y
        self.X[:, 0] += 1.0 * self.y
        self.X[:, 4] += 0.4 * self.y

    def test_pearson_order(self):
        assert pearson_select(self.X, self.y, 2).indices == [0, 2]
        assert pearson_select(self.X, self.y, 3).indices == [0, 2, 4]

    def test_k_equals_n(self):
        for method in ("pearson", "mutual_info", "p_value"):
            assert baseline_select(self.X, self.y, method, 5).indices == [0, 1, 2, 3, 4]

    def test_all_methods_find_the_strongest(self):
        for method in ("pearson", "mutual_info", "p_value"):
            assert baseline_select(self.X, self.y, method, 1).indices == [2]

    def test_ties_go_to_lower_index(self):
        X = np.column_stack([self.X[:, 1], self.X[:, 2], self.X[:, 2]])
        assert pearson_select(X, self.y, 1).indices == [1]

    def test_scores_shape(self):
        for method in ("pearson", "mutual_info", "p_value"):
            assert feature_scores(self.X, self.y, method).shape == (5,)

    def test_errors(self):
        with pytest.raises(ValueError, match="k must be"):
            baseline_select(self.X, self.y, "pearson", 0)
        with pytest.raises(ValueError, match="k must be"):
            baseline_select(self.X, self.y, "pearson", 6)
        with pytest.raises(ValueError, match="unknown method"):
            baseline_select(self.X, self.y, "lasso", 2)

    def test_result_round_trip(self):
        res = baseline_select(self.X, self.y, "mutual_info", 3)
        back = SelectionResult.from_dict(res.to_dict())
        assert back.indices == res.indices and np.array_equal(back.scores, res.scores) and back.k == 3
