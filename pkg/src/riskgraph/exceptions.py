"""Root exception for riskgraph.

Every sub-package derives its own exception family from
:class:`RiskGraphError`. The ``exit_code`` attribute is what the command-line
interface returns when the error reaches it.
"""

from __future__ import annotations


class RiskGraphError(Exception):
    """Base exception for all riskgraph errors."""

    exit_code: int = 1
