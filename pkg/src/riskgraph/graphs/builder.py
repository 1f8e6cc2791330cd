"""Grid discretisation and scene-graph construction.

Vehicles become nodes labelled with the grid cell they occupy. Two vehicles
are joined when their cells touch, including diagonally, and surrounding
vehicles left without neighbours are removed as free nodes.
"""

from __future__ import annotations

import logging
import math

from riskgraph.graphs.exceptions import OutOfGridError
from riskgraph.graphs.graph_models import GraphNode, GridSpec, SceneGraph
from riskgraph.scenes.scene_models import Scene, SceneFrame

logger = logging.getLogger(__name__)

DEFAULT_GRID = GridSpec()


def grid_cell(
    lane_index: int, dy: float, grid: GridSpec = DEFAULT_GRID
) -> tuple[int, int]:
    """(lane, row) coordinates of a vehicle.

    Raises:
        OutOfGridError: If dy is outside [0, range) or the lane is unknown
    """
    if not 1 <= lane_index <= grid.lanes:
        raise OutOfGridError(f"Lane {lane_index} is outside 1..{grid.lanes}.")
    if not 0.0 <= dy < grid.sensing_range:
        raise OutOfGridError(
            f"dy={dy} m is outside the grid range [0, {grid.sensing_range})."
        )
    row = min(int(math.floor(dy / grid.cell_length)), grid.rows - 1)
    return lane_index, row


def assign_cell(lane_index: int, dy: float, grid: GridSpec = DEFAULT_GRID) -> int:
    """Cell label of a vehicle, numbered row-major from the host row.

    Args:
        lane_index: Lane 1..lanes, 1 leftmost
        dy: Longitudinal distance ahead of the host in metres
        grid: Grid geometry

    Returns:
        Label ``lanes * row + lane_index`` in 1..lanes×rows

    Raises:
        OutOfGridError: If the vehicle lies outside the grid

    Example:
        >>> assign_cell(1, 95.0)
        28
    """
    lane, row = grid_cell(lane_index, dy, grid)
    return grid.lanes * row + lane


def build_graph(
    frame: SceneFrame, grid: GridSpec = DEFAULT_GRID, scene_ref: str = ""
) -> SceneGraph:
    """Build the scene graph of one bird's-eye frame.

    Args:
        frame: Bird's-eye frame
        grid: Grid geometry
        scene_ref: Identifier stored on the graph

    Returns:
        SceneGraph whose node 0 is the host and whose remaining nodes are
        ordered by track id
    """
    host_cell = (grid.host_lane, 0)
    cells: list[tuple[int, int]] = [host_cell]
    members: list[GraphNode] = [
        GraphNode(node_id=0, label=grid.host_lane, is_host=True)
    ]
    ordered = sorted(zip(frame.tracks, frame.lane_indices), key=lambda p: p[0].track_id)
    for track, lane in ordered:
        try:
            cell = grid_cell(lane, track.dy, grid)
        except OutOfGridError as e:
            logger.debug("Dropping track %d from graph: %s", track.track_id, e)
            continue
        cells.append(cell)
        members.append(
            GraphNode(
                node_id=len(members),
                label=grid.lanes * cell[1] + cell[0],
                track_id=track.track_id,
            )
        )

    pairs = [
        (u, v)
        for u in range(len(cells))
        for v in range(u + 1, len(cells))
        if max(abs(cells[u][0] - cells[v][0]), abs(cells[u][1] - cells[v][1])) <= 1
    ]
    connected = {0} | {u for u, _ in pairs} | {v for _, v in pairs}
    kept = [i for i in range(len(members)) if i in connected]
    renumber = {old: new for new, old in enumerate(kept)}
    nodes = tuple(
        GraphNode(
            node_id=renumber[old],
            label=members[old].label,
            is_host=members[old].is_host,
            track_id=members[old].track_id,
        )
        for old in kept
    )
    edges = tuple((renumber[u], renumber[v]) for u, v in pairs)
    if len(kept) < len(members):
        logger.debug("Removed %d free nodes", len(members) - len(kept))
    return SceneGraph(nodes=nodes, edges=edges, scene_ref=scene_ref)


def build_scene_graph(scene: Scene, grid: GridSpec = DEFAULT_GRID) -> SceneGraph:
    """Scene graph of the anchor frame of a scene."""
    return build_graph(scene.anchor_frame, grid, scene_ref=scene.scene_id)


def build_frame_graphs(scene: Scene, grid: GridSpec = DEFAULT_GRID) -> list[SceneGraph]:
    """Scene graph of every frame of a scene, referenced as ``{scene_id}#{i}``."""
    return [
        build_graph(frame, grid, scene_ref=f"{scene.scene_id}#{i}")
        for i, frame in enumerate(scene.frames)
    ]
