"""Deterministic multi-agent dialogue simulations for agile process experiments."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def data_path(*parts: str) -> Path:
    """Path to a bundled example file, e.g. ``data_path("agents", "pm.agent.json")``."""
    return Path(str(resources.files("agilesim").joinpath("data", *parts)))
