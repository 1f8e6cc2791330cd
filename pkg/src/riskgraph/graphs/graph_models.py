"""Data models for the discretisation grid and scene graphs."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import networkx as nx

from riskgraph.graphs.exceptions import GraphError, GraphInvariantError


@dataclass(frozen=True)
class GridSpec:
    """Forward occupancy grid centred on the host lane.

    Cells are numbered from 1 row by row starting at the host row, left to
    right within a row.

    Attributes:
        lanes: Number of lanes (columns)
        rows: Number of longitudinal rows
        cell_length: Row length in metres
        sensing_range: Forward range covered by the grid in metres
    """

    lanes: int = 3
    rows: int = 10
    cell_length: float = 10.0
    sensing_range: float = 100.0

    def __post_init__(self) -> None:
        if self.lanes < 1 or self.rows < 1 or self.cell_length <= 0:
            raise GraphError(f"Grid dimensions must be positive: {self}")
        if not math.isclose(self.rows * self.cell_length, self.sensing_range):
            raise GraphError(
                f"Grid rows × cell_length ({self.rows} × {self.cell_length}) must "
                f"equal the sensing range {self.sensing_range} m."
            )

    @property
    def label_count(self) -> int:
        return self.lanes * self.rows

    @property
    def host_lane(self) -> int:
        return (self.lanes + 1) // 2

    def to_dict(self) -> dict[str, Any]:
        return {
            "lanes": self.lanes,
            "rows": self.rows,
            "cell_length": self.cell_length,
            "sensing_range": self.sensing_range,
        }


@dataclass(frozen=True)
class GraphNode:
    """A vehicle in a scene graph.

    Attributes:
        node_id: Position of the node in the graph, host first
        label: Grid cell the vehicle occupies
        is_host: True for the host vehicle
        track_id: Track identifier of a surrounding vehicle, None for the host
    """

    node_id: int
    label: int
    is_host: bool = False
    track_id: int | None = None


@dataclass(frozen=True)
class SceneGraph:
    """Labelled undirected graph of the vehicles in one frame.

    Every edge carries label 1 and is stored once as ``(u, v)`` with ``u < v``.
    No surrounding vehicle is isolated; the host may be.
    """

    nodes: tuple[GraphNode, ...]
    edges: tuple[tuple[int, int], ...]
    scene_ref: str = ""

    def __post_init__(self) -> None:
        problems: list[str] = []
        if [n.node_id for n in self.nodes] != list(range(len(self.nodes))):
            problems.append("node ids must be 0..n-1 in order")
        if sum(1 for n in self.nodes if n.is_host) != 1:
            problems.append("exactly one host node is required")
        if any(n.label < 1 for n in self.nodes):
            problems.append("node labels must be positive cell numbers")
        seen: set[tuple[int, int]] = set()
        degree = [0] * len(self.nodes)
        for u, v in self.edges:
            if u == v:
                problems.append(f"self-loop on node {u}")
            elif u > v:
                problems.append(f"edge ({u}, {v}) is not stored as (low, high)")
            elif not 0 <= u < len(self.nodes) or not 0 <= v < len(self.nodes):
                problems.append(f"edge ({u}, {v}) references a missing node")
            elif (u, v) in seen:
                problems.append(f"duplicate edge ({u}, {v})")
            else:
                seen.add((u, v))
                degree[u] += 1
                degree[v] += 1
        free = [
            n.node_id for n in self.nodes if not n.is_host and degree[n.node_id] == 0
        ]
        if free and not problems:
            problems.append(f"free nodes {free} must be removed")
        if problems:
            raise GraphInvariantError(
                f"Scene graph {self.scene_ref or '<unnamed>'} is invalid:\n"
                + "\n".join(f"  - {p}" for p in problems)
            )

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(n.label for n in self.nodes)

    @property
    def host(self) -> GraphNode:
        return next(n for n in self.nodes if n.is_host)

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists indexed by node id, each sorted."""
        adjacency: list[list[int]] = [[] for _ in self.nodes]
        for u, v in self.edges:
            adjacency[u].append(v)
            adjacency[v].append(u)
        return [sorted(a) for a in adjacency]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph(scene_ref=self.scene_ref)
        for node in self.nodes:
            graph.add_node(
                node.node_id,
                label=node.label,
                host=node.is_host,
                track_id=node.track_id,
            )
        graph.add_edges_from(self.edges, label=1)
        return graph

    def to_dict(self) -> dict[str, Any]:
        return {
            "scene_ref": self.scene_ref,
            "nodes": [
                {
                    "id": n.node_id,
                    "label": n.label,
                    "host": n.is_host,
                    "track_id": n.track_id,
                }
                for n in self.nodes
            ],
            "edges": [[u, v] for u, v in self.edges],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SceneGraph:
        try:
            nodes = tuple(
                GraphNode(
                    node_id=int(n["id"]),
                    label=int(n["label"]),
                    is_host=bool(n.get("host", False)),
                    track_id=None if n.get("track_id") is None else int(n["track_id"]),
                )
                for n in data["nodes"]
            )
            edges = tuple((int(u), int(v)) for u, v in data["edges"])
        except (KeyError, TypeError, ValueError) as e:
            raise GraphInvariantError(f"Malformed graph record: {e}") from e
        return cls(nodes=nodes, edges=edges, scene_ref=str(data.get("scene_ref", "")))
