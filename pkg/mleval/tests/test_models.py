import numpy as np
import pytest

from mleval.data import Filter, build_design, load_features
from mleval.models import classify_expansion, regress_delta

from conftest import synthetic_rows, write_feature_csv


def table_from(tmp_path, rows):
    return load_features(write_feature_csv(tmp_path / "f.csv", rows))


class TestClassifier:
    def test_perfectly_separable_hits_ceiling(self, tmp_path):
        # class determined by fan count with an enormous margin
        import numpy as np

        rows = synthetic_rows(n=160, seed=3)
        for i, row in enumerate(rows):
            expanding = i % 2 == 0
            row["f"] = 50_000 + 17 * i if expanding else 10 + i
            row["log_f"] = np.log10(1 + row["f"])
            row["fan_delta"] = 100 if expanding else -100
        table = table_from(tmp_path, rows)
        design = build_design(table)
        metrics = classify_expansion(design, table, seed=0)
        assert metrics.accuracy == pytest.approx(1.0, abs=0.02)

    def test_degenerate_single_class_reported(self, tmp_path):
        rows = synthetic_rows(n=40, seed=1, delta_fn=lambda *a: 5)
        table = table_from(tmp_path, rows)
        design = build_design(table)
        with pytest.raises(ValueError, match="single-class"):
            classify_expansion(design, table)

    def test_random_baseline_near_half(self, tmp_path):
        rows = synthetic_rows(n=300, seed=2)
        table = table_from(tmp_path, rows)
        design = build_design(table)
        metrics = classify_expansion(design, table, seed=4)
        assert abs(metrics.baseline_accuracy - 0.5) < 0.1


class TestRegression:
    def test_constant_target_baseline_mae_zero(self, tmp_path):
        rows = synthetic_rows(n=60, seed=5, delta_fn=lambda *a: 42)
        table = table_from(tmp_path, rows)
        design = build_design(table)
        metrics = regress_delta(design, table, "SVR", Filter.EXPANDING, seed=0)
        assert metrics.baseline_mae == pytest.approx(0.0, abs=1e-9)

    def test_filter_too_small_rejected(self, tmp_path):
        def delta_fn(i, fans, k_in, rng):
            return 1 if i < 5 else -1  # five expanding rows < folds*2
        rows = synthetic_rows(n=40, seed=6, delta_fn=delta_fn)
        table = table_from(tmp_path, rows)
        design = build_design(table)
        with pytest.raises(ValueError, match="filter leaves"):
            regress_delta(design, table, "RFR", Filter.EXPANDING)

    def test_learnable_signal_gives_positive_r2(self, tmp_path):
        def delta_fn(i, fans, k_in, rng):
            return int(0.2 * fans + rng.normal(0, 20))
        rows = synthetic_rows(n=200, seed=7, delta_fn=delta_fn)
        table = table_from(tmp_path, rows)
        design = build_design(table)
        metrics = regress_delta(design, table, "SVR", Filter.EXPANDING, seed=1)
        assert metrics.r2 > 0.3
        assert metrics.mae < metrics.baseline_mae

    def test_unknown_model_rejected(self, tmp_path):
        rows = synthetic_rows(n=60, seed=8)
        table = table_from(tmp_path, rows)
        design = build_design(table)
        with pytest.raises(ValueError, match="unknown regressor"):
            regress_delta(design, table, "XGB", Filter.ALL)

    def test_out_of_fold_no_leakage(self, tmp_path):
        # pure-noise target: out-of-fold R2 must hover at/below zero, which
        # would not happen with in-sample leakage
        rows = synthetic_rows(n=200, seed=9,
                              delta_fn=lambda i, f, k, rng: int(rng.normal(100, 40)))
        table = table_from(tmp_path, rows)
        design = build_design(table)
        metrics = regress_delta(design, table, "RFR", Filter.ALL, seed=2)
        assert metrics.r2 < 0.1
