"""Sphinx configuration for the riskgraph documentation."""

from __future__ import annotations

import sys
import tomllib
from pathlib import Path

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT / "src"))

_poetry = tomllib.loads((ROOT / "pyproject.toml").read_text(encoding="utf-8"))
project = "riskgraph"
author = "riskgraph contributors"
copyright = f"2026, {author}"
release = _poetry["tool"]["poetry"]["version"]

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx.ext.napoleon",
    "sphinx_autodoc_typehints",
]
exclude_patterns = ["_build"]

html_theme = "sphinx_rtd_theme"
html_title = f"riskgraph {release}"

# Data models are frozen dataclasses; their fields are documented under
# Attributes, so the generated __init__ adds nothing.
autodoc_default_options = {
    "members": True,
    "member-order": "bysource",
    "undoc-members": True,
}
autosummary_generate = True

napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_use_ivar = True

typehints_fully_qualified = False
always_document_param_types = True
# numpy.typing aliases expand to unreadable unions otherwise.
autodoc_type_aliases = {"npt.ArrayLike": "numpy.typing.ArrayLike"}
