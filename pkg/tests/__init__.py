"""Test package for riskgraph."""
