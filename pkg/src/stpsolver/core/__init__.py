from .graph import (
    INF,
    DisjointSets,
    DistanceLink,
    InfeasibleError,
    InvalidTreeError,
    ShortestPaths,
    VoronoiDiagram,
    check_tree,
    distance_network_edges,
    distance_network_mst,
    mst_edges,
    mst_on_induced,
    multi_source_dijkstra,
    path_to_base,
    prune_leaves,
    validate,
    voronoi,
)
from .instance import MAX_COST, Instance, SteinerTree, empty_tree
from .stp import (
    ParseError,
    format_solution,
    format_stats,
    format_stp,
    parse_solution,
    parse_stp,
    read_stp,
)

__all__ = [
    "INF", "MAX_COST", "DisjointSets", "DistanceLink", "InfeasibleError", "InvalidTreeError",
    "Instance", "ParseError", "ShortestPaths", "SteinerTree", "VoronoiDiagram", "check_tree",
    "distance_network_edges", "distance_network_mst", "empty_tree", "format_solution",
    "format_stats", "format_stp", "mst_edges", "mst_on_induced", "multi_source_dijkstra",
    "parse_solution", "parse_stp", "path_to_base", "prune_leaves", "read_stp", "validate",
    "voronoi",
]
