"""High-level export operations: images -> dataset dir, softmax -> .prb."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import formats
from .encoders import build_encoder, embed_images
from .errors import ShapeMismatch, UnreadableImage
from .preprocess import list_images


@dataclass(frozen=True)
class ExtractConfig:
    in_dir: str
    out_dir: str
    size: int = 256
    encoder: str = "auto"
    weights: str | None = None
    batch_size: int = 8

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError("target size must be positive")


def extract_embeddings(config: ExtractConfig) -> list[str]:
    """Encode every image under in_dir; write items.json + embeddings.bin.

    Ids are file stems, ordered by filename; sources are paths relative to
    the output dir when possible. Returns the ids written.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = list_images(config.in_dir)
    encoder = build_encoder(config.encoder, config.weights)
    features = embed_images(paths, encoder, size=config.size,
                            batch_size=config.batch_size)
    ids = [p.stem for p in paths]
    sources = []
    for p in paths:
        try:
            sources.append(str(p.resolve().relative_to(out.resolve())))
        except ValueError:
            sources.append(str(p))
    formats.write_items(out, ids, sources)
    formats.write_embeddings(out, features)
    return ids


def export_probabilities(model_out_dir, dataset_dir) -> list[str]:
    """Convert per-item softmax tensors (.npy, C x H x W) to probs/*.prb.

    Every id listed in the dataset's items.json must have a tensor; pixel
    sums are validated before writing. Returns the ids exported.
    """
    dataset = Path(dataset_dir)
    items_path = dataset / "items.json"
    if not items_path.exists():
        raise UnreadableImage(f"{items_path}: run extract first")
    with open(items_path) as f:
        ids = [rec["id"] for rec in json.load(f)["items"]]
    src = Path(model_out_dir)
    probs_dir = dataset / "probs"
    probs_dir.mkdir(exist_ok=True)
    for item_id in ids:
        tensor_path = src / f"{item_id}.npy"
        if not tensor_path.exists():
            raise ShapeMismatch(
                f"no model output for item '{item_id}' "
                f"(expected {tensor_path})"
            )
        probs = np.load(tensor_path)
        if probs.ndim != 3:
            raise ShapeMismatch(
                f"{tensor_path}: expected C x H x W, got {probs.shape}"
            )
        formats.write_probability_map(probs_dir / f"{item_id}.prb", probs)
    return ids
