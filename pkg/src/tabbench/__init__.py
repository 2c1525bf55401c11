"""Benchmark orchestration and rank analysis for tabular ML framework adapters."""

__version__ = "0.1.0"
