"""Scene graphs on the forward occupancy grid."""

from __future__ import annotations

from riskgraph.graphs.builder import (
    DEFAULT_GRID,
    assign_cell,
    build_frame_graphs,
    build_graph,
    build_scene_graph,
    grid_cell,
)
from riskgraph.graphs.exceptions import GraphError, GraphInvariantError, OutOfGridError
from riskgraph.graphs.graph_models import GraphNode, GridSpec, SceneGraph

__all__ = [
    "DEFAULT_GRID",
    "GraphError",
    "GraphInvariantError",
    "GraphNode",
    "GridSpec",
    "OutOfGridError",
    "SceneGraph",
    "assign_cell",
    "build_frame_graphs",
    "build_graph",
    "build_scene_graph",
    "grid_cell",
]
