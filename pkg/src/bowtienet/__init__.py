"""Bow-tie analytics for directed recommendation networks."""

from .bowtie import (
    ALL_ROLES,
    CORE_ROLES,
    BowtieDecomposition,
    BowtieRole,
    decompose,
    largest_scc,
    reachable_from,
    recursive_decompose,
    strongly_connected_components,
)
from .cascade import (
    CascadeOutcome,
    InfluenceKind,
    PageFilter,
    SirParams,
    component_influence_experiment,
    influence_of,
    run_sir,
    sweep_heatmap,
)
from .community import (
    UNASSIGNED,
    FlowDistribution,
    Partition,
    Provenance,
    collapse_small,
    detect_communities,
    map_equation_codelength,
    partition_agreement,
    polarity_partition,
    stationary_flow,
)
from .features import betweenness, extract_features, log_fan, write_features_csv
from .graph import (
    DirectedGraph,
    Direction,
    MultiGraphReplica,
    PageNode,
    Polarity,
    SnapshotLabel,
    edge_summary,
    induced_subgraph,
    load_snapshot,
    reverse,
    weighted_degree,
)
from .nullmodel import RankReport, component_rank, configuration_rewire
from .stability import RoleFlow, role_flows

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
