"""Cross-validated classification and regression over the feature table.

Model and grid choices are fixed here (the source tables do not publish
them): logistic regression with a mild fixed down-weighting of the majority
class and a log-spaced regularization grid; epsilon-SVR over a small
C/gamma grid; random forests of 100/300 trees regularized by conservative
leaf sizes (a few hundred heavy-tailed rows per fit). All reported metrics
are out-of-fold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.ensemble import RandomForestRegressor
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import mean_absolute_error, mean_squared_error, r2_score
from sklearn.model_selection import GridSearchCV, KFold, StratifiedKFold, cross_val_predict
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVR

from .data import DesignMatrix, FeatureTable, Filter

FOLDS = 5

LR_GRID = {"model__C": [0.1, 0.3, 1.0, 3.0, 10.0]}
LR_CLASS_WEIGHT = {0: 1.6, 1: 1.0}   # mild re-penalization of the minority class
SVR_GRID = {"model__C": [1.0, 10.0, 100.0], "model__gamma": ["scale", 0.05, 0.01]}
RFR_GRID = {"model__n_estimators": [100, 300], "model__min_samples_leaf": [60, 100]}


@dataclass(frozen=True)
class ClassificationMetrics:
    accuracy: float
    sensitivity: float
    specificity: float
    baseline_accuracy: float
    chosen_params: dict


@dataclass(frozen=True)
class RegressionMetrics:
    r2: float
    mae: float
    rmse: float
    baseline_mae: float
    baseline_r2: float
    chosen_params: dict


def _lr_pipeline() -> Pipeline:
    return Pipeline([
        ("scale", StandardScaler()),
        ("model", LogisticRegression(max_iter=5000, class_weight=LR_CLASS_WEIGHT)),
    ])


def classify_expansion(design: DesignMatrix, table: FeatureTable, seed: int = 0) -> ClassificationMetrics:
    """Expanding (fan_delta > 0) vs not, with out-of-fold confusion metrics."""
    y = (table.fan_delta > 0).astype(int)
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate single-class data; nothing to fit")
    cv = StratifiedKFold(n_splits=FOLDS, shuffle=True, random_state=seed)
    search = GridSearchCV(_lr_pipeline(), LR_GRID, scoring="accuracy", cv=cv, n_jobs=1)
    search.fit(design.X, y)
    best = search.best_params_
    pipeline = _lr_pipeline().set_params(**best)
    pred = cross_val_predict(pipeline, design.X, y, cv=cv)
    tp = int(((pred == 1) & (y == 1)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    baseline = np.random.default_rng(seed).integers(0, 2, size=len(y))
    return ClassificationMetrics(
        accuracy=(tp + tn) / len(y),
        sensitivity=tp / (tp + fn) if tp + fn else float("nan"),
        specificity=tn / (tn + fp) if tn + fp else float("nan"),
        baseline_accuracy=float((baseline == y).mean()),
        chosen_params=best,
    )


def _regressor(model: str) -> tuple[Pipeline, dict]:
    if model == "SVR":
        pipe = Pipeline([("scale", StandardScaler()), ("model", SVR())])
        return pipe, SVR_GRID
    if model == "RFR":
        pipe = Pipeline([("model", RandomForestRegressor(random_state=0))])
        return pipe, RFR_GRID
    raise ValueError(f"unknown regressor {model!r}")


def regress_delta(design: DesignMatrix, table: FeatureTable, model: str,
                  page_filter: Filter = Filter.ALL, seed: int = 0) -> RegressionMetrics:
    """Fan-count change regression on the filtered pages, optimized on MAE."""
    mask = table.mask(page_filter)
    X = design.X[mask]
    y = table.fan_delta[mask].astype(float)
    if len(y) < FOLDS * 2:
        raise ValueError(f"filter leaves only {len(y)} rows; need at least {FOLDS * 2}")
    cv = KFold(n_splits=FOLDS, shuffle=True, random_state=seed)
    pipe, grid = _regressor(model)
    search = GridSearchCV(pipe, grid, scoring="neg_mean_absolute_error", cv=cv, n_jobs=1)
    search.fit(X, y)
    best = search.best_params_
    pipe, _ = _regressor(model)
    pred = cross_val_predict(pipe.set_params(**best), X, y, cv=cv)

    # mean-of-training-fold predictor, evaluated out of fold
    base_pred = np.empty_like(y)
    for train, test in cv.split(X):
        base_pred[test] = y[train].mean()
    return RegressionMetrics(
        r2=float(r2_score(y, pred)),
        mae=float(mean_absolute_error(y, pred)),
        rmse=float(np.sqrt(mean_squared_error(y, pred))),
        baseline_mae=float(mean_absolute_error(y, base_pred)),
        baseline_r2=float(r2_score(y, base_pred)),
        chosen_params=best,
    )
