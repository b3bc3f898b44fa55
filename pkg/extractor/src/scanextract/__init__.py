"""scanextract: turn raw images and model outputs into the selection
engine's dataset files (items.json, embeddings.bin, probs/*.prb)."""

from .export import ExtractConfig, export_probabilities, extract_embeddings
from .preprocess import preprocess, zscore

__version__ = "0.1.0"

__all__ = [
    "ExtractConfig",
    "export_probabilities",
    "extract_embeddings",
    "preprocess",
    "zscore",
    "__version__",
]
