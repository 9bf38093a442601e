"""Autonomous REST API testing: scenario graphs, walk execution and log analysis."""

__version__ = "0.1.0"
