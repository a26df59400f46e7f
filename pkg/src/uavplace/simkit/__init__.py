"""Experiment configuration, artifact persistence, figure datasets, CLI."""

from .artifacts import verify_artifact, write_csv, write_manifest
from .config import ExperimentSpec
from .figures import FIGURE_IDS, reproduce_figure
from .runner import run

__all__ = [
    "ExperimentSpec",
    "run",
    "reproduce_figure",
    "FIGURE_IDS",
    "write_csv",
    "write_manifest",
    "verify_artifact",
]
