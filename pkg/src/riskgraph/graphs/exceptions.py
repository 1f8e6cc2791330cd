"""Custom exceptions for the graphs module."""

from __future__ import annotations

from riskgraph.exceptions import RiskGraphError


class GraphError(RiskGraphError):
    """Base exception for scene-graph errors."""

    exit_code = 5


class OutOfGridError(GraphError):
    """Raised when a vehicle lies outside the discretisation grid."""

    pass


class GraphInvariantError(GraphError):
    """Raised when a scene graph breaks its structural invariants.

    Graphs loaded from JSON are re-checked, so this also reports hand-edited
    files with self-loops, duplicate edges, a missing host or free nodes.
    """

    pass
