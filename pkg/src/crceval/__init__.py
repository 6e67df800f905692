"""Criterion-based evaluation harness for code review comment generators."""

__version__ = "0.1.0"
