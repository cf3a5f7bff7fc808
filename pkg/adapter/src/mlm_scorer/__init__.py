"""External masked-LM scorer for disambiguation JSONL datasets."""

from .scorer import (
    AdapterConfig,
    DatasetError,
    ModelLoadError,
    ScoreRun,
    Scorer,
    load_model,
    read_instances,
    score_file,
)

__all__ = [
    "AdapterConfig",
    "DatasetError",
    "ModelLoadError",
    "ScoreRun",
    "Scorer",
    "load_model",
    "read_instances",
    "score_file",
]

__version__ = "0.1.0"
