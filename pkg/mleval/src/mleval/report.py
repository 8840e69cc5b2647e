"""Feature-importance report: correlations, mutual information, SFFS counts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.feature_selection import mutual_info_regression
from sklearn.model_selection import KFold, cross_val_score

from .data import CATEGORICAL_FEATURES, NUMERIC_FEATURES, DesignMatrix, FeatureTable, Filter
from .models import _regressor
from .sffs import sffs

ALL_FEATURES = CATEGORICAL_FEATURES + NUMERIC_FEATURES
SUBSET_SIZE = 10


@dataclass
class FeatureReport:
    cc: dict[str, dict[str, float]]                 # filter -> numeric feature -> CC
    mi: dict[str, dict[str, float]]                 # filter -> feature -> mean MI
    sffs_counts: dict[str, dict[str, int]] = field(default_factory=dict)  # model -> feature -> times chosen
    runs: int = 0


def _codes(values: list) -> np.ndarray:
    mapping: dict[str, int] = {}
    return np.asarray([mapping.setdefault(v, len(mapping)) for v in values], dtype=float)


def correlation_table(table: FeatureTable) -> dict[str, dict[str, float]]:
    """Pearson CC of each numeric feature against fan_delta, per page filter.

    Undefined share values are excluded pairwise (not imputed) so the
    correlation reflects observed values only.
    """
    out: dict[str, dict[str, float]] = {}
    for flt in Filter:
        mask = table.mask(flt)
        delta = table.fan_delta[mask].astype(float)
        row: dict[str, float] = {}
        for feat in NUMERIC_FEATURES:
            vals = table.numeric(feat)[mask]
            ok = ~np.isnan(vals)
            if ok.sum() < 3 or vals[ok].std() == 0 or delta[ok].std() == 0:
                row[feat] = float("nan")
                continue
            row[feat] = float(np.corrcoef(vals[ok], delta[ok])[0, 1])
        out[flt.value] = row
    return out


def mutual_information(table: FeatureTable, runs: int, seed: int) -> dict[str, dict[str, float]]:
    """kNN mutual information with fan_delta, averaged over `runs` seeds.

    Numeric features use the continuous estimator; categoricals enter as
    discrete codes.
    """
    out: dict[str, dict[str, float]] = {}
    for flt in Filter:
        mask = table.mask(flt)
        delta = table.fan_delta[mask].astype(float)
        if mask.sum() < 8:  # too few rows for the kNN estimator
            out[flt.value] = {feat: float("nan") for feat in ALL_FEATURES}
            continue
        acc = {feat: 0.0 for feat in ALL_FEATURES}
        for r in range(runs):
            rs = seed * 1000 + r
            num = np.column_stack([
                np.nan_to_num(table.numeric(feat)[mask]) for feat in NUMERIC_FEATURES
            ])
            mi_num = mutual_info_regression(num, delta, random_state=rs)
            for feat, value in zip(NUMERIC_FEATURES, mi_num):
                acc[feat] += float(value)
            cat = np.column_stack([
                _codes(list(np.asarray(table.raw[feat], dtype=object)[mask]))
                for feat in CATEGORICAL_FEATURES
            ])
            mi_cat = mutual_info_regression(cat, delta, discrete_features=True, random_state=rs)
            for feat, value in zip(CATEGORICAL_FEATURES, mi_cat):
                acc[feat] += float(value)
        out[flt.value] = {feat: acc[feat] / runs for feat in ALL_FEATURES}
    return out


def sffs_counts(design: DesignMatrix, table: FeatureTable, runs: int, seed: int,
                models: tuple[str, ...] = ("SVR", "RFR")) -> dict[str, dict[str, int]]:
    """Times each feature enters the selected 10-feature subset, per model,
    over `runs` repetitions on the expanding pages."""
    mask = table.mask(Filter.EXPANDING)
    y = table.fan_delta[mask].astype(float)
    results: dict[str, dict[str, int]] = {}
    for model in models:
        counts = {feat: 0 for feat in ALL_FEATURES}
        for r in range(runs):
            cv = KFold(n_splits=5, shuffle=True, random_state=seed * 100 + r)

            def score(features: list[str]) -> float:
                sub = design.select(features)
                pipe, _ = _regressor(model)
                scores = cross_val_score(pipe, sub.X[mask], y, cv=cv,
                                         scoring="neg_mean_absolute_error", n_jobs=1)
                return float(scores.mean())

            chosen = sffs(ALL_FEATURES, SUBSET_SIZE, score)
            for feat in chosen:
                counts[feat] += 1
        results[model] = counts
    return results


def feature_report(design: DesignMatrix, table: FeatureTable, runs: int = 50,
                   seed: int = 0, with_sffs: bool = True,
                   sffs_runs: int | None = None) -> FeatureReport:
    report = FeatureReport(
        cc=correlation_table(table),
        mi=mutual_information(table, runs=runs, seed=seed),
        runs=runs,
    )
    if with_sffs:
        report.sffs_counts = sffs_counts(design, table, runs=sffs_runs or runs, seed=seed)
    return report
