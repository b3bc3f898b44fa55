"""Image loading, resizing, and per-image z-score normalization."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import UnreadableImage

EPSILON = 1e-8
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


def load_image(path) -> np.ndarray:
    """Read an image as float32 H x W (grayscale) or H x W x C."""
    try:
        with Image.open(path) as img:
            if img.mode in ("I;16", "I"):
                arr = np.asarray(img, dtype=np.float32)
            elif img.mode in ("L", "F"):
                arr = np.asarray(img.convert("F"), dtype=np.float32)
            else:
                arr = np.asarray(img.convert("RGB"), dtype=np.float32)
    except (UnidentifiedImageError, OSError) as exc:
        raise UnreadableImage(f"{path}: {exc}") from None
    return arr


def resize(image: np.ndarray, size: int) -> np.ndarray:
    """Bilinear resize to size x size, preserving channel count."""
    if image.ndim == 2:
        pil = Image.fromarray(image.astype(np.float32), mode="F")
        return np.asarray(pil.resize((size, size), Image.BILINEAR),
                          dtype=np.float32)
    chans = [
        np.asarray(
            Image.fromarray(image[..., c].astype(np.float32), mode="F")
            .resize((size, size), Image.BILINEAR),
            dtype=np.float32,
        )
        for c in range(image.shape[-1])
    ]
    return np.stack(chans, axis=-1)


def zscore(image: np.ndarray, epsilon: float = EPSILON) -> np.ndarray:
    """(I - mean) / (std + epsilon) with per-image statistics.

    A constant image maps to all zeros (the numerator vanishes).
    """
    arr = np.asarray(image, dtype=np.float64)
    mu = float(arr.mean())
    sigma = float(arr.std())
    return ((arr - mu) / (sigma + epsilon)).astype(np.float32)


def preprocess(path, size: int = 256) -> np.ndarray:
    """Load, resize to size x size, z-score. The model-input convention."""
    return zscore(resize(load_image(path), size))


def list_images(in_dir) -> list[Path]:
    """Image files under a directory, sorted by name (the canonical order)."""
    root = Path(in_dir)
    paths = sorted(p for p in root.iterdir()
                   if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise UnreadableImage(f"no image files found under {root}")
    stems = [p.stem for p in paths]
    dupes = {s for s in stems if stems.count(s) > 1}
    if dupes:
        raise UnreadableImage(
            f"duplicate image stems (ids must be unique): {sorted(dupes)}"
        )
    return paths
