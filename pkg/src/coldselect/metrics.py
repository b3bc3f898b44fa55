"""Segmentation metrics (Dice, 95th-percentile Hausdorff) and the
selection-quality statistics used by the seeded comparison harness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import distance_transform_edt

from .clustering import euclidean_2d
from .errors import EmptyMask, EmptySelection, ShapeMismatch
from .types import DEFAULT_SEEDS, ItemId


@dataclass(frozen=True)
class LabelMask:
    """Integer class map with every label in [0, num_classes)."""

    id: ItemId
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels)
        if labels.ndim != 2:
            raise ValueError("labels must be H x W")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("labels must be integers")
        if self.num_classes < 1:
            raise ValueError("need at least one class")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValueError("label outside [0, num_classes)")
        labels = labels.astype(np.int64)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True)
class RunStats:
    """Per-seed metric values with population std and median."""

    seeds: tuple[int, ...]
    values: tuple[float, ...]
    mean: float
    std: float
    median: float

    @classmethod
    def from_values(cls, seeds: Sequence[int],
                    values: Sequence[float]) -> "RunStats":
        arr = np.asarray(values, dtype=np.float64)
        return cls(
            seeds=tuple(int(s) for s in seeds),
            values=tuple(float(v) for v in arr),
            mean=float(arr.mean()),
            std=float(arr.std()),
            median=float(np.median(arr)),
        )


def _check_pair(pred: LabelMask, truth: LabelMask):
    if pred.labels.shape != truth.labels.shape:
        raise ShapeMismatch(
            f"pred {pred.labels.shape} vs truth {truth.labels.shape}"
        )
    if pred.num_classes != truth.num_classes:
        raise ShapeMismatch(
            f"pred has {pred.num_classes} classes, truth {truth.num_classes}"
        )


def dice(pred: LabelMask, truth: LabelMask, cls: int) -> float:
    """Dice overlap of the binarized class-`cls` masks; 1.0 if both empty."""
    _check_pair(pred, truth)
    a = pred.labels == cls
    b = truth.labels == cls
    denom = int(a.sum()) + int(b.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / denom


def mean_dice(pred: LabelMask, truth: LabelMask,
              mode: str = "per_class_mean") -> float:
    """Aggregate Dice.

    per_class_mean averages over foreground classes present in the truth
    (absent classes are excluded; with no foreground at all this falls back
    to the union Dice). image_level scores the foreground union directly.
    """
    _check_pair(pred, truth)
    if mode == "image_level":
        return _union_dice(pred, truth)
    if mode != "per_class_mean":
        raise ValueError(f"unknown mode: {mode}")
    present = [c for c in range(1, truth.num_classes)
               if (truth.labels == c).any()]
    if not present:
        return _union_dice(pred, truth)
    return float(np.mean([dice(pred, truth, c) for c in present]))


def _union_dice(pred: LabelMask, truth: LabelMask) -> float:
    a = pred.labels > 0
    b = truth.labels > 0
    denom = int(a.sum()) + int(b.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / denom


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Mask pixels with a 4-neighbor outside the mask (image border counts
    as outside). Boolean map of the same shape."""
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1, mode="constant", constant_values=False)
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1]
                & padded[1:-1, :-2] & padded[1:-1, 2:])
    return mask & ~interior


def hd95(pred: LabelMask, truth: LabelMask, cls: int,
         spacing: tuple[float, float] = (1.0, 1.0)) -> float:
    """Symmetric 95th-percentile Hausdorff distance between class boundaries.

    max of the two directed 95th percentiles (linear-interpolation
    percentile), in physical units given (sy, sx) mm/pixel. Raises
    EmptyMask when either class mask is empty; callers exclude such cases.
    """
    _check_pair(pred, truth)
    a = pred.labels == cls
    b = truth.labels == cls
    if not a.any() or not b.any():
        raise EmptyMask(f"class {cls} empty in {'pred' if not a.any() else 'truth'}")
    ba = boundary_pixels(a)
    bb = boundary_pixels(b)
    # exact EDT: distance from every pixel to the nearest boundary pixel
    d_to_b = distance_transform_edt(~bb, sampling=spacing)
    d_to_a = distance_transform_edt(~ba, sampling=spacing)
    d_ab = d_to_b[ba]
    d_ba = d_to_a[bb]
    return float(max(np.percentile(d_ab, 95), np.percentile(d_ba, 95)))


def coverage_radius(selected: Sequence[int], coords: np.ndarray) -> float:
    """k-center objective: max over the pool of min-distance to the
    selected set. The proxy for how representative a seed set is."""
    sel = np.asarray(list(selected), dtype=np.int64)
    if sel.size == 0:
        raise EmptySelection("coverage radius needs a non-empty selection")
    d = euclidean_2d(coords, coords[sel])
    return float(d.min(axis=1).max())


def seeded_runs(metric_for_seed: Callable[[int], float],
                seeds: Sequence[int] = DEFAULT_SEEDS) -> RunStats:
    """Run a seeded policy+metric once per seed and aggregate.

    `metric_for_seed` does all the work for one seed (select, then score);
    this harness only fans out over the seed family and collects stats.
    Aggregation order is fixed by the seed sequence.
    """
    values = [float(metric_for_seed(int(s))) for s in seeds]
    return RunStats.from_values(seeds, values)
