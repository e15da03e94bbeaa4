"""Offline extraction of per-layer encoder embeddings into bundle files."""

from .extract import (
    ExtractionError,
    ExtractionJob,
    ExtractionReport,
    run_extraction,
)

__version__ = "0.1.0"

__all__ = [
    "ExtractionError",
    "ExtractionJob",
    "ExtractionReport",
    "run_extraction",
]
