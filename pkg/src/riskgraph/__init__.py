"""riskgraph: driver-specific risk recognition for interactive traffic scenes."""

from __future__ import annotations

__version__ = "0.1.0"
