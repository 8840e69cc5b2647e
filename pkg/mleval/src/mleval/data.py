"""Feature-table loading and design-matrix assembly.

The input is the analytics pipeline's per-page feature CSV (schema pinned
by its leading comment line). Categorical columns are one-hot encoded;
share columns with empty (undefined) values get a companion missingness
indicator and are imputed to zero afterwards, so no null ever silently
becomes a real zero without a flag.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

EXPECTED_SCHEMA = "bowtienet-features/1"

FEATURE_HEADER = ["id", "p", "c", "wbt", "abt", "f", "log_f", "k_in", "k_out",
                  "kps_in", "kps_out", "kcs_in", "kcs_out", "pagerank",
                  "betweenness", "fan_delta"]
NUMERIC_FEATURES = ["f", "k_in", "k_out", "kps_in", "kps_out", "kcs_in", "kcs_out",
                    "pagerank", "betweenness"]
CATEGORICAL_FEATURES = ["p", "c", "wbt", "abt"]
SHARE_FEATURES = ["kps_in", "kps_out", "kcs_in", "kcs_out"]
MIN_COMMUNITY_MEMBERS = 5


class SchemaError(ValueError):
    """Feature CSV does not match the pinned schema."""


class Filter(Enum):
    ALL = "all"
    EXPANDING = "expanding"
    NONEXPANDING = "nonexpanding"


@dataclass
class FeatureTable:
    ids: list[str]
    raw: dict[str, list]                  # column -> values (None for blanks)
    fan_delta: np.ndarray

    def mask(self, page_filter: Filter) -> np.ndarray:
        if page_filter is Filter.EXPANDING:
            return self.fan_delta > 0
        if page_filter is Filter.NONEXPANDING:
            return self.fan_delta <= 0
        return np.ones(len(self.ids), dtype=bool)

    def numeric(self, column: str) -> np.ndarray:
        vals = [np.nan if v is None else float(v) for v in self.raw[column]]
        return np.asarray(vals)


def load_features(path) -> FeatureTable:
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# {EXPECTED_SCHEMA}":
            raise SchemaError(f"{path}: expected schema marker '# {EXPECTED_SCHEMA}', got {first!r}")
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no feature rows")
    if set(rows[0]) != set(FEATURE_HEADER):
        raise SchemaError(f"{path}: column set mismatch")
    ids = [r["id"] for r in rows]
    raw: dict[str, list] = {}
    for col in FEATURE_HEADER[1:]:
        raw[col] = [r[col] if r[col] != "" else None for r in rows]
    fan_delta = np.asarray([int(r["fan_delta"]) for r in rows])
    return FeatureTable(ids=ids, raw=raw, fan_delta=fan_delta)


@dataclass
class DesignMatrix:
    X: np.ndarray
    columns: list[str]
    groups: dict[str, list[int]] = field(default_factory=dict)  # feature -> column idxs

    def select(self, features: list[str]) -> "DesignMatrix":
        idxs: list[int] = []
        groups: dict[str, list[int]] = {}
        for f in features:
            start = len(idxs)
            idxs.extend(self.groups[f])
            groups[f] = list(range(start, len(idxs)))
        return DesignMatrix(X=self.X[:, idxs],
                            columns=[self.columns[i] for i in idxs], groups=groups)


def build_design(table: FeatureTable) -> DesignMatrix:
    """Model matrix over all pages: log-fan count, raw numeric features with
    missingness indicators for the shares, one-hot categoricals."""
    n = len(table.ids)
    cols: list[np.ndarray] = []
    names: list[str] = []
    groups: dict[str, list[int]] = {}

    def add(feature: str, arr: np.ndarray, name: str):
        groups.setdefault(feature, []).append(len(names))
        names.append(name)
        cols.append(arr.astype(float))

    add("f", np.asarray([float(v) for v in table.raw["log_f"]]), "log_f")
    for col in ["k_in", "k_out"]:
        add(col, np.log1p(table.numeric(col)), f"log1p_{col}")
    for col in SHARE_FEATURES:
        vals = table.numeric(col)
        missing = np.isnan(vals)
        add(col, missing.astype(float), f"{col}_missing")
        imputed = vals.copy()
        imputed[missing] = 0.0
        add(col, imputed, col)
    for col in ["pagerank", "betweenness"]:
        add(col, table.numeric(col), col)

    counts: dict[str, int] = {}
    for v in table.raw["c"]:
        counts[v] = counts.get(v, 0) + 1
    for feature in CATEGORICAL_FEATURES:
        values = table.raw[feature]
        if feature == "c":
            values = [v if counts[v] >= MIN_COMMUNITY_MEMBERS or v == "UNASSIGNED" else "OTHER"
                      for v in values]
        for level in sorted(set(values)):
            onehot = np.asarray([1.0 if v == level else 0.0 for v in values])
            add(feature, onehot, f"{feature}={level}")

    X = np.column_stack(cols) if cols else np.zeros((n, 0))
    return DesignMatrix(X=X, columns=names, groups=groups)
