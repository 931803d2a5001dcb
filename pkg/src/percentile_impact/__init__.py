"""Percentile-based citation impact analysis for comparing publication sets."""

from pathlib import Path

__version__ = "0.1.0"

DATA_DIR = Path(__file__).parent / "data"


def data_path(name: str = "synthetic.csv") -> Path:
    """Path of a file bundled with the package (synthetic data, report schema)."""
    return DATA_DIR / name
