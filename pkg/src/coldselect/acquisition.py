"""Active-learning acquisition: image entropy, spatial diversity, and the
greedy alpha-blended selection loop.

Raw entropies and their min-max normalization are taken over the round's
candidate pool only, once per round. The pool's max pairwise distance is
also frozen at round start so diversity scores stay comparable across
steps. The first pick is always the raw-entropy argmax, whatever alpha is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .clustering import euclidean_2d
from .errors import BudgetExceedsPool, EmptySelectedSet
from .types import (DEFAULT_EPSILON, REASON_ACQUISITION, ManifestEntry,
                    ProbabilityMap, Projection2D, ScoreBlend, Scores)


@dataclass(frozen=True)
class EntropyTable:
    """Raw and min-max-normalized image entropies for a candidate pool."""

    raw: np.ndarray
    normalized: np.ndarray
    indices: Optional[tuple[int, ...]] = None  # canonical candidate indices

    def __post_init__(self):
        raw = np.ascontiguousarray(self.raw, dtype=np.float64)
        norm = np.ascontiguousarray(self.normalized, dtype=np.float64)
        if raw.shape != norm.shape or raw.ndim != 1:
            raise ValueError("raw and normalized must be matching 1-D arrays")
        if self.indices is not None and len(self.indices) != raw.size:
            raise ValueError("indices must match the entropy arrays")
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "normalized", norm)


def pixel_entropy(pmap: ProbabilityMap,
                  epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Per-pixel predictive entropy (nats), clamped to >= 0 after the
    epsilon offset inside the log."""
    p = pmap.probs
    h = -(p * np.log(p + epsilon)).sum(axis=0)
    return np.maximum(h, 0.0)


def image_entropy(pmap: ProbabilityMap,
                  epsilon: float = DEFAULT_EPSILON) -> float:
    """Mean pixel entropy: the image-level uncertainty signal."""
    return float(np.mean(pixel_entropy(pmap, epsilon)))


def normalize_entropies(raw: Sequence[float],
                        epsilon: float = DEFAULT_EPSILON,
                        indices: Optional[Sequence[int]] = None) -> EntropyTable:
    """Min-max normalize raw entropies over the candidate pool.

    (h - min) / (max - min + epsilon); an all-equal pool normalizes to all
    zeros because the numerator vanishes.
    """
    raw = np.ascontiguousarray(raw, dtype=np.float64)
    if raw.size < 1:
        raise ValueError("need at least one candidate")
    lo = float(raw.min())
    hi = float(raw.max())
    norm = (raw - lo) / (hi - lo + epsilon)
    return EntropyTable(
        raw=raw, normalized=norm,
        indices=None if indices is None else tuple(int(i) for i in indices),
    )


def max_pairwise_distance(coords: np.ndarray) -> float:
    """Largest Euclidean distance between any two of the given points."""
    if coords.shape[0] < 2:
        return 0.0
    return float(euclidean_2d(coords, coords).max())


def diversity(candidate: int, selected: Sequence[int], coords: np.ndarray,
              d_max: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """Distance to the nearest selected neighbor, normalized by d_max."""
    sel = np.asarray(list(selected), dtype=np.int64)
    if sel.size == 0:
        raise EmptySelectedSet("diversity is undefined with nothing selected")
    d = euclidean_2d(coords[candidate:candidate + 1], coords[sel])
    return float(d.min() / (d_max + epsilon))


def acquisition_round(projection: Projection2D, table: EntropyTable,
                      already_selected: Sequence[int], count: int,
                      blend: ScoreBlend) -> list[ManifestEntry]:
    """Greedy selection of `count` items by S = alpha*D + (1-alpha)*H.

    Candidates are the pool minus `already_selected`, in canonical order;
    `table` must cover exactly those candidates in that order. Diversity is
    recomputed against the growing selected set after every pick. Returns
    acquisition entries ranked after the already-selected block.
    """
    coords = projection.coords
    n = projection.n_items
    sel_set = set(int(i) for i in already_selected)
    candidates = np.array([i for i in range(n) if i not in sel_set],
                          dtype=np.int64)
    if table.indices is not None and tuple(table.indices) != tuple(candidates):
        raise ValueError("entropy table does not cover the candidate pool")
    if table.raw.size != candidates.size:
        raise ValueError(
            f"{table.raw.size} entropies for {candidates.size} candidates"
        )
    if count > candidates.size:
        raise BudgetExceedsPool(
            f"cannot acquire {count} from {candidates.size} candidates"
        )

    d_max = max_pairwise_distance(coords[candidates])
    eps = blend.epsilon
    alpha = blend.alpha

    raw = table.raw.copy()
    norm = table.normalized.copy()
    selected = [int(i) for i in already_selected]
    rank = len(selected)
    entries = []

    # min-distance of every remaining candidate to the selected set
    if selected:
        dmin = euclidean_2d(coords[candidates],
                            coords[np.asarray(selected)]).min(axis=1)
    else:
        dmin = np.full(candidates.size, np.inf)

    for step in range(count):
        if step == 0:
            pos = int(np.argmax(raw))
            if selected:
                dtil = float(dmin[pos] / (d_max + eps))
                combined = alpha * dtil + (1.0 - alpha) * float(norm[pos])
                scores = Scores(entropy=float(norm[pos]), diversity=dtil,
                                combined=combined)
            else:
                scores = Scores(entropy=float(norm[pos]))
        else:
            dtil_all = dmin / (d_max + eps)
            s_all = alpha * dtil_all + (1.0 - alpha) * norm
            pos = int(np.argmax(s_all))
            scores = Scores(entropy=float(norm[pos]),
                            diversity=float(dtil_all[pos]),
                            combined=float(s_all[pos]))
        chosen = int(candidates[pos])
        entries.append(ManifestEntry(id=projection.ids[chosen], rank=rank,
                                     reason=REASON_ACQUISITION, scores=scores))
        rank += 1
        selected.append(chosen)
        candidates = np.delete(candidates, pos)
        raw = np.delete(raw, pos)
        norm = np.delete(norm, pos)
        dmin = np.delete(dmin, pos)
        if candidates.size:
            d_new = euclidean_2d(coords[candidates],
                                 coords[chosen:chosen + 1])[:, 0]
            dmin = np.minimum(dmin, d_new)

    return entries
