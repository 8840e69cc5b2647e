"""Evaluation runs over a feature CSV, emitting a metrics JSON."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .data import Filter, build_design, load_features
from .models import classify_expansion, regress_delta
from .report import feature_report


def evaluate(features_path, seed: int, runs: int, sffs_runs: int) -> dict:
    table = load_features(features_path)
    design = build_design(table)

    classification = classify_expansion(design, table, seed=seed)
    regression: dict[str, dict[str, dict]] = {}
    for model in ("SVR", "RFR"):
        regression[model] = {}
        for flt in Filter:
            metrics = regress_delta(design, table, model, page_filter=flt, seed=seed)
            regression[model][flt.value] = dataclasses.asdict(metrics)
    report = feature_report(design, table, runs=runs, seed=seed,
                            with_sffs=sffs_runs > 0, sffs_runs=sffs_runs)
    return {
        "classification": dataclasses.asdict(classification),
        "regression": regression,
        "features": {
            "cc": report.cc,
            "mean_mi": report.mi,
            "sffs_times_chosen": report.sffs_counts,
            "runs": report.runs,
        },
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mleval",
                                     description="learning harness over the feature table")
    parser.add_argument("--features", required=True, help="feature CSV from the analytics pipeline")
    parser.add_argument("--out", required=True, help="metrics JSON output path")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--runs", type=int, default=50, help="repetitions for MI averaging")
    parser.add_argument("--sffs-runs", type=int, default=0,
                        help="SFFS repetitions (0 skips the slow selection study)")
    args = parser.parse_args(argv)
    try:
        payload = evaluate(args.features, seed=args.seed, runs=args.runs,
                           sffs_runs=args.sffs_runs)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
