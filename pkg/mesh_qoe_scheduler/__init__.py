"""Mesh network DAG scheduling simulator with a QoE cost model."""

from importlib import metadata

try:
    __version__ = metadata.version("mesh-qoe-scheduler")
except metadata.PackageNotFoundError:
    __version__ = "0.0.0"
