"""Writers for the selection engine's dataset-directory wire formats.

Implemented here from the format definitions (little-endian, magic +
u32 header, f32 payload) so this package never imports the engine; the
files are the contract.

    items.json        {"items": [{"id": ..., "source": ...}, ...]}
    embeddings.bin    "EMB1" | u32 N | u32 D | f32 x N*D row-major
    probs/<id>.prb    "PRB1" | u32 C | u32 H | u32 W | f32 x C*H*W

Writes go to a temp file in the target directory, then rename, so readers
never observe partial files.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import NotNormalized, ShapeMismatch

PROB_SUM_TOL = 1e-3


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_items(out_dir, ids, sources=None) -> None:
    recs = []
    for i, item_id in enumerate(ids):
        rec = {"id": item_id}
        if sources is not None and sources[i] is not None:
            rec["source"] = str(sources[i])
        recs.append(rec)
    payload = (json.dumps({"items": recs}, indent=2) + "\n").encode()
    _atomic_write(Path(out_dir) / "items.json", payload)


def write_embeddings(out_dir, features: np.ndarray) -> None:
    features = np.ascontiguousarray(features, dtype="<f4")
    if features.ndim != 2:
        raise ShapeMismatch(f"embeddings must be N x D, got {features.shape}")
    n, d = features.shape
    payload = b"EMB1" + struct.pack("<II", n, d) + features.tobytes()
    _atomic_write(Path(out_dir) / "embeddings.bin", payload)


def write_probability_map(path, probs: np.ndarray) -> None:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 3:
        raise ShapeMismatch(f"{path}: probs must be C x H x W, "
                            f"got {probs.shape}")
    if probs.shape[0] < 2:
        raise ShapeMismatch(f"{path}: need at least 2 classes")
    sums = probs.sum(axis=0)
    worst = float(np.abs(sums - 1.0).max())
    if worst > PROB_SUM_TOL:
        raise NotNormalized(
            f"{path}: pixel sums deviate from 1 by up to {worst:.3g} "
            f"(pass softmax outputs, not logits)"
        )
    c, h, w = probs.shape
    payload = (b"PRB1" + struct.pack("<III", c, h, w)
               + np.ascontiguousarray(probs, dtype="<f4").tobytes())
    _atomic_write(Path(path), payload)
