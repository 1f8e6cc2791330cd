"""Graph kernels and Gram matrices.

This module computes shortest-path and neighbourhood-hash similarities between
scene graphs, a linear kernel for feature vectors, and assembles validated,
persistable Gram matrices from them.
"""

from __future__ import annotations

from riskgraph.kernels.exceptions import (
    KernelConfigError,
    KernelError,
    KernelNotPSDError,
)
from riskgraph.kernels.graph_kernels import (
    hash_iterations,
    initial_label,
    nhgk,
    rotate_left,
    shortest_paths,
    spgk,
    spgk_raw,
)
from riskgraph.kernels.gram import (
    gram_frame,
    gram_matrix,
    linear_gram,
    load_gram,
    read_gram_header,
    save_gram,
)
from riskgraph.kernels.kernel_models import (
    KernelConfig,
    KernelMatrix,
    KernelName,
    ShortestPathGraph,
    check_psd,
)

__all__ = [
    "KernelConfig",
    "KernelConfigError",
    "KernelError",
    "KernelMatrix",
    "KernelName",
    "KernelNotPSDError",
    "ShortestPathGraph",
    "check_psd",
    "gram_frame",
    "gram_matrix",
    "hash_iterations",
    "initial_label",
    "linear_gram",
    "load_gram",
    "nhgk",
    "read_gram_header",
    "rotate_left",
    "save_gram",
    "shortest_paths",
    "spgk",
    "spgk_raw",
]
