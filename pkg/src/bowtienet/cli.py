"""Command-line pipeline: seeded, reproducible runs of every analysis."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bowtie import BowtieRole, decompose, recursive_decompose, write_roles_csv, write_summary_json
from .cascade import (
    InfluenceKind,
    PageFilter,
    SirParams,
    component_influence_experiment,
    sweep_heatmap,
    write_heatmap_json,
    write_influence_csv,
)
from .community import (
    NumericalError,
    collapse_small,
    detect_communities,
    polarity_partition,
    read_partition_csv,
    write_partition_csv,
)
from .features import extract_features, write_features_csv, write_ternary_csv
from .graph import (
    GraphError,
    IngestionError,
    Polarity,
    SnapshotLabel,
    ValidationError,
    edge_summary,
    load_snapshot,
    write_graph_json,
)
from .nullmodel import component_rank, write_rank_csv, write_rank_json
from .stability import role_flows, write_sankey_json

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int):
        super().__init__(message)
        self.category = category
        self.code = code


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _out_dir(args) -> Path:
    out = Path(os.environ.get("BOWTIENET_OUTDIR", args.out))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _target(out: Path, name: str, force: bool) -> Path:
    path = out / name
    if path.exists() and not force:
        raise CliError("io", f"{path} exists; pass --force to overwrite", EXIT_IO)
    return path


def _write_manifest(out: Path, args, inputs: list[Path], force: bool) -> None:
    manifest = {
        "tool": {"name": "bowtienet", "version": __version__},
        "command": args.command,
        "parameters": {
            k: v for k, v in sorted(vars(args).items())
            if k not in {"command", "func"} and v is not None
        },
        "inputs": {str(p): _sha256(p) for p in sorted(set(map(str, inputs)))},
    }
    path = _target(out, f"{args.command}_manifest.json", force)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")


def _load(args, snapshot_arg="snapshot"):
    name = getattr(args, snapshot_arg)
    index = {"feb2019": 0, "oct2019": 1}.get(name, 0)
    try:
        return load_snapshot(args.nodes, getattr(args, "edges"), SnapshotLabel(name, index))
    except FileNotFoundError as exc:
        raise CliError("io", str(exc), EXIT_IO) from exc


def _partition_for(args, graph):
    kind = args.partition
    if kind == "groups":
        return polarity_partition(graph)
    if kind == "detect":
        detected = detect_communities(graph, trials=args.trials, seed=args.seed,
                                      damping=args.damping)
        return collapse_small(detected, args.min_size)
    if kind == "file":
        if not args.partition_file:
            raise CliError("validation", "--partition file requires --partition-file", EXIT_VALIDATION)
        return read_partition_csv(args.partition_file)
    raise CliError("validation", f"unknown partition source {kind!r}", EXIT_VALIDATION)


def cmd_ingest(args):
    graph = _load(args)
    out = _out_dir(args)
    write_graph_json(graph, _target(out, f"graph_{args.snapshot}.json", args.force))
    summary = edge_summary(graph)
    payload = {
        "nodes": graph.n_nodes,
        "edges": graph.n_edges,
        "two_way_share": summary.two_way_share,
        "self_share": summary.self_share,
        "polarity_pair_counts": {f"{a}->{b}": c for (a, b), c in sorted(summary.counts.items())},
    }
    with open(_target(out, f"summary_{args.snapshot}.json", args.force), "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges)], args.force)


def cmd_decompose(args):
    graph = _load(args)
    decomposition = decompose(graph)
    out = _out_dir(args)
    write_roles_csv(decomposition, graph, _target(out, f"roles_{args.snapshot}.csv", args.force))
    write_summary_json(decomposition, _target(out, f"decomposition_{args.snapshot}.json", args.force))
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges)], args.force)


def cmd_recursive(args):
    graph = _load(args)
    partition = _partition_for(args, graph)
    decomposition = recursive_decompose(graph, partition, min_size=args.min_size)
    out = _out_dir(args)
    stem = f"recursive_{args.partition}_{args.snapshot}"
    write_roles_csv(decomposition, graph, _target(out, f"{stem}_roles.csv", args.force))
    write_summary_json(decomposition, _target(out, f"{stem}_summary.json", args.force))
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges)], args.force)


def cmd_communities(args):
    graph = _load(args)
    partition = detect_communities(graph, trials=args.trials, seed=args.seed,
                                   damping=args.damping)
    out = _out_dir(args)
    write_partition_csv(partition, _target(out, f"partition_{args.snapshot}.csv", args.force))
    collapsed = collapse_small(partition, args.min_size)
    write_partition_csv(collapsed, _target(out, f"partition_{args.snapshot}_collapsed.csv", args.force))
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges)], args.force)


def cmd_significance(args):
    graph = _load(args)
    partition = _partition_for(args, graph) if args.partition else None
    reports = component_rank(graph, replicas=args.replicas, seed=args.seed, partition=partition)
    out = _out_dir(args)
    write_rank_json(reports, _target(out, f"ranks_{args.snapshot}.json", args.force))
    write_rank_csv(reports, _target(out, f"ranks_{args.snapshot}.csv", args.force))
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges)], args.force)


def cmd_simulate(args):
    graph = _load(args)
    partition = _partition_for(args, graph)
    roles = recursive_decompose(graph, partition, min_size=args.min_size)
    params = SirParams(beta=args.beta, gamma=args.gamma, seed=args.seed)
    results = component_influence_experiment(
        graph, roles, pieces_per_component=args.pieces, params=params,
        reverse=not args.forward)
    out = _out_dir(args)
    write_influence_csv(results, _target(out, f"influence_{args.partition}_{args.snapshot}.csv", args.force))
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges)], args.force)


def cmd_sweep(args):
    graph = _load(args)
    partition = _partition_for(args, graph)
    roles = recursive_decompose(graph, partition, min_size=args.min_size)
    next_label = SnapshotLabel(args.next_snapshot, 1)
    fan_delta = {}
    for nid in graph.node_ids:
        if graph.polarity(nid) is not Polarity.NEUTRAL:
            fan_delta[nid] = graph.node(nid).fans_at(next_label) - graph.fans(nid)
    kind = InfluenceKind.WITHIN if args.partition == "groups" else InfluenceKind.ACROSS
    result = sweep_heatmap(
        graph, roles,
        comp_x=BowtieRole(args.comp_x), comp_y=BowtieRole(args.comp_y),
        multipliers=tuple(float(x) for x in args.grid.split(",")),
        n_pieces=args.n, params=SirParams(beta=args.beta, gamma=args.gamma, seed=args.seed),
        fan_delta=fan_delta, page_filter=PageFilter(args.filter), kind=kind,
        reverse=not args.forward, workers=args.workers)
    out = _out_dir(args)
    write_heatmap_json(result, _target(
        out, f"heatmap_{args.partition}_{args.comp_x}_{args.comp_y}_{args.filter}.json", args.force))
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges)], args.force)


def cmd_features(args):
    graph = _load(args)
    detected = detect_communities(graph, trials=args.trials, seed=args.seed,
                                  damping=args.damping)
    wbt = recursive_decompose(graph, polarity_partition(graph), min_size=args.min_size)
    abt = recursive_decompose(graph, collapse_small(detected, args.min_size), min_size=args.min_size)
    next_label = SnapshotLabel(args.next_snapshot, 1)
    next_fans = {
        nid: graph.node(nid).fans_at(next_label)
        for nid in graph.node_ids
        if graph.polarity(nid) is not Polarity.NEUTRAL
    }
    records = extract_features(graph, detected, wbt, abt, next_fans,
                               damping=args.damping)
    out = _out_dir(args)
    write_features_csv(records, _target(out, f"features_{args.snapshot}.csv", args.force))
    write_ternary_csv(graph, _target(out, f"ternary_{args.snapshot}.csv", args.force))
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges)], args.force)


def cmd_stability(args):
    graph_t1 = _load(args)
    args2 = argparse.Namespace(**{**vars(args), "edges": args.edges_t2, "snapshot": args.snapshot_t2})
    graph_t2 = _load(args2)
    d1 = recursive_decompose(graph_t1, polarity_partition(graph_t1), min_size=args.min_size)
    d2 = recursive_decompose(graph_t2, polarity_partition(graph_t2), min_size=args.min_size)
    slices = [("all", role_flows(d1, d2))]
    for pol in Polarity:
        slices.append((pol.name.lower(),
                       role_flows(d1, d2, graph=graph_t1, polarity_filter=pol)))
    out = _out_dir(args)
    write_sankey_json(slices, _target(
        out, f"sankey_{args.snapshot}_{args.snapshot_t2}.json", args.force))
    _write_manifest(out, args, [Path(args.nodes), Path(args.edges), Path(args.edges_t2)], args.force)


def _add_common(p, needs_graph=True):
    if needs_graph:
        p.add_argument("--nodes", required=True, help="nodes CSV path")
        p.add_argument("--edges", required=True, help="edges CSV path")
        p.add_argument("--snapshot", default="feb2019", help="snapshot label (fans_<label> column)")
    p.add_argument("--out", default="out", help="output directory (env BOWTIENET_OUTDIR overrides)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")
    p.add_argument("--workers", type=int, default=1, help="worker processes where supported")


def _add_partition_opts(p, default=None):
    p.add_argument("--partition", default=default, choices=["groups", "detect", "file"],
                   help="partition source")
    p.add_argument("--partition-file", help="partition CSV (id,part_label) for --partition file")
    p.add_argument("--trials", type=int, default=10, help="detection trials for --partition detect")
    p.add_argument("--min-size", type=int, default=5, help="minimum community size")
    p.add_argument("--damping", type=float, default=0.85, help="walk damping for --partition detect")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bowtienet",
                                     description="bow-tie analytics for recommendation networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a snapshot, export graph JSON + edge summary")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("decompose", help="whole-graph bow-tie decomposition")
    _add_common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("recursive", help="per-part bow-tie decomposition")
    _add_common(p)
    _add_partition_opts(p, default="groups")
    p.set_defaults(func=cmd_recursive)

    p = sub.add_parser("communities", help="flow-based community detection")
    _add_common(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--min-size", type=int, default=5)
    p.add_argument("--damping", type=float, default=0.85)
    p.set_defaults(func=cmd_communities)

    p = sub.add_parser("significance", help="degree-preserving null-model ranks")
    _add_common(p)
    _add_partition_opts(p)
    p.add_argument("--replicas", type=int, default=1000)
    p.set_defaults(func=cmd_significance)

    p = sub.add_parser("simulate", help="per-component cascade influence experiment")
    _add_common(p)
    _add_partition_opts(p, default="groups")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--pieces", type=int, default=1000)
    p.add_argument("--forward", action="store_true",
                   help="propagate along stored edges instead of against them")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="seeding-multiplier correlation heatmap")
    _add_common(p)
    _add_partition_opts(p, default="groups")
    p.add_argument("--comp-x", default="SCC")
    p.add_argument("--comp-y", default="OUT")
    p.add_argument("--grid", default="0.1,0.5,1,2,10")
    p.add_argument("--n", type=int, default=3000)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--filter", default="all",
                   choices=[f.value for f in PageFilter])
    p.add_argument("--next-snapshot", default="oct2019")
    p.add_argument("--forward", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("features", help="per-page feature table for the learning harness")
    _add_common(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--min-size", type=int, default=5)
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--next-snapshot", default="oct2019")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("stability", help="role transitions between two snapshots")
    _add_common(p)
    p.add_argument("--edges-t2", required=True)
    p.add_argument("--snapshot-t2", default="oct2019")
    p.add_argument("--min-size", type=int, default=5)
    p.set_defaults(func=cmd_stability)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(json.dumps({"error": exc.category, "message": str(exc)}), file=sys.stderr)
        return exc.code
    except (IngestionError, ValidationError) as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}), file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(json.dumps({"error": "numerical", "message": str(exc)}), file=sys.stderr)
        return EXIT_NUMERICAL
    except GraphError as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}), file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
