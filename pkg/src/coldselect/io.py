"""File formats and dataset-directory persistence.

All binary formats are little-endian with a 4-byte magic: payloads are
float32 (or uint16 for label masks), so any ecosystem can produce them
bit-exactly. A dataset directory contains:

    items.json        ordered item list; order defines canonical indices
    embeddings.bin    "EMB1" | u32 N | u32 D | f32 x N*D, row-major
    coords.bin        "CRD1" | u32 N | f32 x N*2
    tsne.json         hyperparameters used to produce coords.bin
    probs/<id>.prb    "PRB1" | u32 C | u32 H | u32 W | f32 x C*H*W
    masks/<id>.msk    "MSK1" | u32 C | u32 H | u32 W | u16 x H*W

Manifests are canonical-order JSON and byte-identical across reruns of the
same computation. COLDSTART_THREADS caps the probability-map loader's
parallelism (0 or unset = auto); results are placed by index so the thread
count never changes output.
"""

from __future__ import annotations

import csv
import json
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (BadMagic, CountMismatch, IoError, NotNormalized,
                     TruncatedFile)
from .metrics import LabelMask
from .types import (EmbeddingSet, ItemId, ManifestEntry, ProbabilityMap,
                    Projection2D, RunConfig, Scores, SelectionManifest)

MAGIC_EMBEDDINGS = b"EMB1"
MAGIC_COORDS = b"CRD1"
MAGIC_PROBS = b"PRB1"
MAGIC_MASK = b"MSK1"

SPLIT_POOL = "pool"
SPLIT_TEST = "test"


@dataclass(frozen=True)
class Item:
    id: ItemId
    source: Optional[str] = None
    mask: Optional[str] = None
    split: str = SPLIT_POOL


# ---------------------------------------------------------------- binary

def _read_exact(f, count: int, path, what: str) -> bytes:
    data = f.read(count)
    if len(data) < count:
        raise TruncatedFile(f"{path}: {what} short by {count - len(data)} bytes")
    return data


def _read_header(f, path, magic: bytes, n_fields: int) -> tuple[int, ...]:
    got = _read_exact(f, 4, path, "magic")
    if got != magic:
        raise BadMagic(f"{path}: expected magic {magic!r}, got {got!r}")
    raw = _read_exact(f, 4 * n_fields, path, "header")
    return struct.unpack("<" + "I" * n_fields, raw)


def _read_payload(f, path, dtype, count: int) -> np.ndarray:
    data = _read_exact(f, count * dtype.itemsize, path, "payload")
    trailing = f.read(1)
    if trailing:
        raise CountMismatch(f"{path}: trailing bytes after payload")
    return np.frombuffer(data, dtype=dtype, count=count)


def write_matrix_f32(path, magic: bytes, dims: Sequence[int],
                     values: np.ndarray, count: Optional[int] = None) -> None:
    values = np.ascontiguousarray(values, dtype="<f4")
    expected = int(np.prod(dims)) if count is None else count
    if values.size != expected:
        raise CountMismatch(f"{path}: {values.size} values, expected {expected}")
    with open(path, "wb") as f:
        f.write(magic)
        f.write(struct.pack("<" + "I" * len(dims), *dims))
        f.write(values.tobytes())


def read_embeddings(root) -> EmbeddingSet:
    """Load embeddings.bin paired with items.json ids."""
    root = Path(root)
    items = read_items(root)
    path = root / "embeddings.bin"
    with open(path, "rb") as f:
        n, d = _read_header(f, path, MAGIC_EMBEDDINGS, 2)
        flat = _read_payload(f, path, np.dtype("<f4"), n * d)
    if n != len(items):
        raise CountMismatch(
            f"{path}: {n} rows but items.json lists {len(items)} items"
        )
    features = flat.astype(np.float64).reshape(n, d)
    return EmbeddingSet(ids=tuple(it.id for it in items), features=features)


def write_embeddings(root, embeddings: EmbeddingSet) -> None:
    write_matrix_f32(Path(root) / "embeddings.bin", MAGIC_EMBEDDINGS,
                     (embeddings.n_items, embeddings.dim), embeddings.features)


def read_coords(root, ids: Sequence[ItemId]) -> Projection2D:
    root = Path(root)
    path = root / "coords.bin"
    with open(path, "rb") as f:
        (n,) = _read_header(f, path, MAGIC_COORDS, 1)
        flat = _read_payload(f, path, np.dtype("<f4"), n * 2)
    if n != len(ids):
        raise CountMismatch(f"{path}: {n} rows but {len(ids)} items")
    return Projection2D(ids=tuple(ids),
                        coords=flat.astype(np.float64).reshape(n, 2))


def write_coords(root, projection: Projection2D) -> None:
    write_matrix_f32(Path(root) / "coords.bin", MAGIC_COORDS,
                     (projection.n_items,), projection.coords,
                     count=projection.n_items * 2)


def read_probability_map(path) -> ProbabilityMap:
    """Load a .prb file; pixel sums are validated to 1e-3, then the map is
    renormalized per pixel."""
    path = Path(path)
    with open(path, "rb") as f:
        c, h, w = _read_header(f, path, MAGIC_PROBS, 3)
        flat = _read_payload(f, path, np.dtype("<f4"), c * h * w)
    if c < 2:
        raise CountMismatch(f"{path}: need at least 2 classes, got {c}")
    probs = flat.astype(np.float64).reshape(c, h, w)
    if not np.isfinite(probs).all():
        raise NotNormalized(f"{path}: non-finite probabilities")
    if probs.min() < -ProbabilityMap.SUM_TOL:
        raise NotNormalized(f"{path}: negative probability {probs.min():.3g}")
    sums = probs.sum(axis=0)
    worst = float(np.abs(sums - 1.0).max())
    if worst > ProbabilityMap.SUM_TOL:
        raise NotNormalized(f"{path}: worst pixel sum deviates by {worst:.3g}")
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum(axis=0)
    return ProbabilityMap(id=path.stem, probs=probs)


def write_probability_map(path, probs: np.ndarray) -> None:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 3 or probs.shape[0] < 2:
        raise CountMismatch(f"{path}: probs must be C x H x W with C >= 2")
    sums = probs.sum(axis=0)
    worst = float(np.abs(sums - 1.0).max())
    if worst > ProbabilityMap.SUM_TOL:
        raise NotNormalized(f"{path}: worst pixel sum deviates by {worst:.3g}")
    write_matrix_f32(path, MAGIC_PROBS, probs.shape, probs)


def read_mask(path) -> LabelMask:
    path = Path(path)
    with open(path, "rb") as f:
        c, h, w = _read_header(f, path, MAGIC_MASK, 3)
        flat = _read_payload(f, path, np.dtype("<u2"), h * w)
    labels = flat.astype(np.int64).reshape(h, w)
    if labels.size and labels.max() >= c:
        raise CountMismatch(f"{path}: label {labels.max()} >= class count {c}")
    return LabelMask(id=path.stem, labels=labels, num_classes=int(c))


def write_mask(path, labels: np.ndarray, num_classes: int) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise CountMismatch(f"{path}: labels must be H x W")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise CountMismatch(f"{path}: label outside [0, {num_classes})")
    h, w = labels.shape
    with open(path, "wb") as f:
        f.write(MAGIC_MASK)
        f.write(struct.pack("<III", num_classes, h, w))
        f.write(np.ascontiguousarray(labels, dtype="<u2").tobytes())


# ----------------------------------------------------------------- items

def read_items(root) -> list[Item]:
    path = Path(root) / "items.json"
    try:
        with open(path) as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise IoError(f"{path}: missing items.json") from None
    except json.JSONDecodeError as exc:
        raise IoError(f"{path}: invalid JSON ({exc})") from None
    items = []
    for rec in doc.get("items", []):
        items.append(Item(id=rec["id"], source=rec.get("source"),
                          mask=rec.get("mask"),
                          split=rec.get("split", SPLIT_POOL)))
    if not items:
        raise IoError(f"{path}: no items listed")
    return items


def write_items(root, items: Sequence[Item]) -> None:
    recs = []
    for it in items:
        rec = {"id": it.id}
        if it.source is not None:
            rec["source"] = it.source
        if it.mask is not None:
            rec["mask"] = it.mask
        if it.split != SPLIT_POOL:
            rec["split"] = it.split
        recs.append(rec)
    with open(Path(root) / "items.json", "w") as f:
        json.dump({"items": recs}, f, indent=2)
        f.write("\n")


def read_tsne_sidecar(root) -> Optional[dict]:
    path = Path(root) / "tsne.json"
    if not path.exists():
        return None
    with open(path) as f:
        return json.load(f)


def write_tsne_sidecar(root, params: dict) -> None:
    with open(Path(root) / "tsne.json", "w") as f:
        json.dump(params, f, indent=2)
        f.write("\n")


# -------------------------------------------------------------- manifest

def write_manifest(manifest: SelectionManifest, path) -> None:
    """Canonical-order JSON; byte-identical across reruns."""
    rc = manifest.run_config
    doc = {
        "format_version": rc.format_version,
        "run_config": {
            "budget": rc.budget,
            "acquisition": rc.acquisition,
            "alpha": rc.alpha,
            "seed": rc.seed,
            "k_min": rc.k_min,
            "k_max": rc.k_max,
            "tsne": rc.tsne,
        },
        "entries": [
            {
                "id": e.id,
                "rank": e.rank,
                "reason": e.reason,
                "cluster": e.cluster,
                "scores": None if e.scores is None else {
                    "entropy": e.scores.entropy,
                    "diversity": e.scores.diversity,
                    "combined": e.scores.combined,
                },
            }
            for e in manifest.entries
        ],
    }
    try:
        with open(path, "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from None


def read_manifest(path) -> SelectionManifest:
    try:
        with open(path) as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise IoError(f"{path}: missing manifest") from None
    except json.JSONDecodeError as exc:
        raise IoError(f"{path}: invalid JSON ({exc})") from None
    rc = doc["run_config"]
    run_config = RunConfig(
        budget=rc["budget"], acquisition=rc.get("acquisition", 0),
        alpha=rc.get("alpha"), seed=rc.get("seed", 43),
        k_min=rc.get("k_min"), k_max=rc.get("k_max"), tsne=rc.get("tsne"),
        format_version=doc.get("format_version", "1"),
    )
    entries = []
    for rec in doc["entries"]:
        scores = rec.get("scores")
        entries.append(ManifestEntry(
            id=rec["id"], rank=rec["rank"], reason=rec["reason"],
            cluster=rec.get("cluster"),
            scores=None if scores is None else Scores(
                entropy=scores.get("entropy"),
                diversity=scores.get("diversity"),
                combined=scores.get("combined"),
            ),
        ))
    return SelectionManifest(run_config=run_config, entries=tuple(entries))


# --------------------------------------------------------------- scatter

def export_scatter(projection: Projection2D, clustering, manifest, path,
                   test_ids: Sequence[ItemId] = ()) -> None:
    """Per-item CSV (id, x, y, cluster, role) for plotting.

    `clustering` covers the non-test items in canonical order; `manifest`
    roles selected items as coldstart (any initial policy) or acquired.
    """
    test_set = set(test_ids)
    pool_ids = [i for i in projection.ids if i not in test_set]
    cluster_of = {}
    if clustering is not None:
        if len(pool_ids) != len(clustering.labels):
            raise CountMismatch(
                f"clustering covers {len(clustering.labels)} items but the "
                f"non-test pool has {len(pool_ids)}"
            )
        cluster_of = {i: int(c) for i, c in zip(pool_ids, clustering.labels)}
    role_of = {}
    if manifest is not None:
        for e in manifest.entries:
            role_of[e.id] = ("acquired" if e.reason == "acquisition"
                             else "coldstart")
    try:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["id", "x", "y", "cluster", "role"])
            for i, item_id in enumerate(projection.ids):
                if item_id in test_set:
                    role = "test"
                else:
                    role = role_of.get(item_id, "pool")
                cluster = cluster_of.get(item_id, "")
                writer.writerow([item_id,
                                 repr(float(projection.coords[i, 0])),
                                 repr(float(projection.coords[i, 1])),
                                 cluster, role])
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from None


# ----------------------------------------------------- probability maps

def _max_workers() -> int:
    raw = os.environ.get("COLDSTART_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def load_probability_maps(paths: Sequence) -> list[ProbabilityMap]:
    """Load .prb files, in parallel when COLDSTART_THREADS allows; output
    order always matches input order."""
    paths = [Path(p) for p in paths]
    workers = min(_max_workers(), max(len(paths), 1))
    if workers == 1 or len(paths) < 2:
        return [read_probability_map(p) for p in paths]
    out: list = [None] * len(paths)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(read_probability_map, p): i
                   for i, p in enumerate(paths)}
        for fut, i in futures.items():
            out[i] = fut.result()
    return out
