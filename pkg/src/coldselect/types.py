"""Shared domain types and their validation rules.

Items are identified by opaque strings (file stems, typically) and the
position of an id in ``EmbeddingSet.ids`` is the canonical index used by
every other module. All containers are frozen after construction and hold
read-only numpy arrays, so they are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import IdMismatch

ItemId = str

# One epsilon for every stabilizer in the scoring formulas.
DEFAULT_EPSILON = 1e-8
# Seed family starts at 42 + 1; CLIs default to the first member.
DEFAULT_SEED = 43
DEFAULT_SEEDS = tuple(range(43, 54))

REASON_MEDOID = "medoid"
REASON_FARTHEST_POINT = "farthest_point"
REASON_ACQUISITION = "acquisition"
REASON_RANDOM = "random_baseline"
VALID_REASONS = frozenset(
    {REASON_MEDOID, REASON_FARTHEST_POINT, REASON_ACQUISITION, REASON_RANDOM}
)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class EmbeddingSet:
    """The unlabeled pool: one D-dimensional feature row per item."""

    ids: tuple[ItemId, ...]
    features: np.ndarray

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {feats.shape}")
        if len(self.ids) != feats.shape[0]:
            raise ValueError(
                f"{len(self.ids)} ids but {feats.shape[0]} feature rows"
            )
        if feats.shape[0] < 1 or feats.shape[1] < 1:
            raise ValueError("need at least one item and one feature dim")
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "features", _freeze(feats))

    @property
    def n_items(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def index_of(self, item_id: ItemId) -> int:
        try:
            return self.ids.index(item_id)
        except ValueError:
            raise KeyError(f"unknown item id: {item_id}") from None


@dataclass(frozen=True)
class Projection2D:
    """Per-item 2D coordinates; the space all distances live in."""

    ids: tuple[ItemId, ...]
    coords: np.ndarray

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError(f"coords must be N x 2, got shape {coords.shape}")
        if len(self.ids) != coords.shape[0]:
            raise ValueError(
                f"{len(self.ids)} ids but {coords.shape[0]} coordinate rows"
            )
        if not np.isfinite(coords).all():
            raise ValueError("coords contain non-finite values")
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "coords", _freeze(coords))

    @property
    def n_items(self) -> int:
        return self.coords.shape[0]

    def subset(self, indices: Sequence[int]) -> "Projection2D":
        """Restricted view (new canonical order = order of `indices`)."""
        idx = list(indices)
        return Projection2D(
            ids=tuple(self.ids[i] for i in idx), coords=self.coords[idx]
        )


@dataclass(frozen=True)
class ClusteringResult:
    """Labels, the silhouette sweep, and per-cluster medoids."""

    labels: np.ndarray                     # per-item cluster index in [0, k_hat)
    k_hat: int
    sweep: tuple[tuple[int, float, float], ...]   # (k, silhouette, inertia)
    medoids: tuple[ItemId, ...]
    medoid_indices: tuple[int, ...]        # canonical indices of the medoids
    centroids: np.ndarray                  # k_hat x 2

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        centroids = np.ascontiguousarray(self.centroids, dtype=np.float64)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-D")
        counts = np.bincount(labels, minlength=self.k_hat)
        if labels.size and (labels.min() < 0 or labels.max() >= self.k_hat):
            raise ValueError("label outside [0, k_hat)")
        if (counts == 0).any():
            raise ValueError("every cluster index must be assigned to >= 1 item")
        if len(self.medoids) != self.k_hat or len(self.medoid_indices) != self.k_hat:
            raise ValueError("need exactly one medoid per cluster")
        for c, idx in enumerate(self.medoid_indices):
            if labels[idx] != c:
                raise ValueError(f"medoid of cluster {c} is not a member")
        if self.sweep:
            best = max(s for _, s, _ in self.sweep)
            k_best, s_best, _ = min(
                (entry for entry in self.sweep if entry[1] == best),
                key=lambda e: e[0],
            )
            if self.k_hat != k_best:
                raise ValueError(
                    f"k_hat={self.k_hat} but sweep maximum is k={k_best} (S={s_best})"
                )
        object.__setattr__(self, "labels", _freeze(labels))
        object.__setattr__(self, "centroids", _freeze(centroids))
        object.__setattr__(self, "sweep", tuple(tuple(e) for e in self.sweep))
        object.__setattr__(self, "medoids", tuple(self.medoids))
        object.__setattr__(self, "medoid_indices", tuple(self.medoid_indices))

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    def cluster_sizes(self) -> list[int]:
        return [int(n) for n in np.bincount(self.labels, minlength=self.k_hat)]


@dataclass(frozen=True)
class Budget:
    """Total selection budget B, of which A items come from the AL round."""

    total: int
    acquisition: int = 0

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError("budget must be positive")
        if not 0 <= self.acquisition <= self.total:
            raise ValueError("need 0 <= acquisition <= total")

    @property
    def cold_start(self) -> int:
        return self.total - self.acquisition


@dataclass(frozen=True)
class ProbabilityMap:
    """Per-item C x H x W class probabilities over the pixel grid."""

    id: ItemId
    probs: np.ndarray

    SUM_TOL = 1e-3

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        if probs.ndim != 3:
            raise ValueError(f"probs must be C x H x W, got shape {probs.shape}")
        if probs.shape[0] < 2:
            raise ValueError("need at least 2 classes")
        if not np.isfinite(probs).all():
            raise ValueError("probs contain non-finite values")
        if probs.min() < 0.0 or probs.max() > 1.0 + self.SUM_TOL:
            raise ValueError("probabilities outside [0, 1]")
        sums = probs.sum(axis=0)
        worst = float(np.abs(sums - 1.0).max())
        if worst > self.SUM_TOL:
            raise ValueError(f"pixel sums deviate from 1 by up to {worst:.3g}")
        object.__setattr__(self, "probs", _freeze(probs))

    @property
    def num_classes(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class ScoreBlend:
    """Trade-off alpha between diversity and normalized entropy."""

    alpha: float = 0.3
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class Scores:
    """Score components recorded at pick time (normalized to [0, 1])."""

    entropy: Optional[float] = None    # normalized image entropy
    diversity: Optional[float] = None  # normalized nearest-selected distance
    combined: Optional[float] = None


@dataclass(frozen=True)
class ManifestEntry:
    id: ItemId
    rank: int
    reason: str
    cluster: Optional[int] = None
    scores: Optional[Scores] = None

    def __post_init__(self):
        if self.reason not in VALID_REASONS:
            raise ValueError(f"unknown reason: {self.reason}")


@dataclass(frozen=True)
class RunConfig:
    budget: int
    acquisition: int = 0
    alpha: Optional[float] = None
    seed: int = DEFAULT_SEED
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    tsne: Optional[dict] = None
    format_version: str = "1"


# Cold-start reasons must precede acquisition entries; medoids precede
# farthest-point picks.
_REASON_PHASE = {
    REASON_MEDOID: 0,
    REASON_RANDOM: 0,
    REASON_FARTHEST_POINT: 1,
    REASON_ACQUISITION: 2,
}


@dataclass(frozen=True)
class SelectionManifest:
    """Ordered selected set with provenance and run configuration."""

    run_config: RunConfig
    entries: tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        entries = tuple(self.entries)
        if len(entries) != self.run_config.budget:
            raise ValueError(
                f"{len(entries)} entries but budget {self.run_config.budget}"
            )
        ids = [e.id for e in entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate item ids in manifest")
        if [e.rank for e in entries] != list(range(len(entries))):
            raise ValueError("ranks must be contiguous 0..B-1 in order")
        phases = [_REASON_PHASE[e.reason] for e in entries]
        if phases != sorted(phases):
            raise ValueError(
                "manifest order must be medoids, then farthest-point picks, "
                "then acquisitions"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def ids(self) -> tuple[ItemId, ...]:
        return tuple(e.id for e in self.entries)

    def extended(self, new_entries: Sequence[ManifestEntry],
                 run_config: RunConfig) -> "SelectionManifest":
        """Append-only extension (acquisition rounds extend the cold start)."""
        return SelectionManifest(
            run_config=run_config, entries=tuple(self.entries) + tuple(new_entries)
        )


def validate_pool(embeddings: EmbeddingSet) -> list[str]:
    """Report invariant violations; empty list means the pool is well formed.

    Never mutates input. Checks currently cover duplicate ids, empty ids,
    and non-finite feature values.
    """
    violations = []
    seen: set[str] = set()
    for i, item_id in enumerate(embeddings.ids):
        if item_id == "":
            violations.append(f"empty id at row {i}")
        if item_id in seen:
            violations.append(f"duplicate id: {item_id}")
        seen.add(item_id)
    finite = np.isfinite(embeddings.features).all(axis=1)
    for row in np.flatnonzero(~finite):
        violations.append(f"non-finite at row {row}")
    return violations


def align(projection: Projection2D, embeddings: EmbeddingSet) -> None:
    """Check that projection ids match embedding ids element-wise in order."""
    n = min(len(projection.ids), len(embeddings.ids))
    for i in range(n):
        if projection.ids[i] != embeddings.ids[i]:
            raise IdMismatch(i)
    if len(projection.ids) != len(embeddings.ids):
        raise IdMismatch(n, f"length mismatch at position {n}")
