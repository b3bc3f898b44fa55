"""k-means over 2D coordinates, silhouette-scored model selection, medoids.

Distances here (and in every selection step downstream) are plain
Euclidean in the projected 2D space, computed in the direct
sqrt(dx^2 + dy^2) form so independent reimplementations of the formulas
reproduce results bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, EmptyCluster, InvalidLabels
from .types import ClusteringResult, Projection2D


def euclidean_2d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distances between every row of `a` and every row of `b`."""
    dx = a[:, 0][:, None] - b[:, 0][None, :]
    dy = a[:, 1][:, None] - b[:, 1][None, :]
    return np.sqrt(dx * dx + dy * dy)


def _sq_dists_to_centers(coords: np.ndarray, centers: np.ndarray) -> np.ndarray:
    dx = coords[:, 0][:, None] - centers[:, 0][None, :]
    dy = coords[:, 1][:, None] - centers[:, 1][None, :]
    return dx * dx + dy * dy


@dataclass(frozen=True)
class KSweepConfig:
    """Sweep bounds and k-means knobs for choosing the cluster count."""

    k_min: int = 2
    k_max: int = 10
    restarts: int = 10
    max_iters: int = 300
    tol: float = 1e-6
    seed: int = 43

    def __post_init__(self):
        if self.k_min < 2:
            raise ValueError("k_min must be >= 2")
        if self.k_max < self.k_min:
            raise ValueError("k_max must be >= k_min")
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")

    @classmethod
    def default_for(cls, n_items: int, budget: int, seed: int = 43,
                    **kwargs) -> "KSweepConfig":
        """Sweep {2..min(budget, 10, N-1)}: caps keep R = B - k_hat >= 0."""
        k_max = min(budget, 10, n_items - 1)
        return cls(k_min=2, k_max=k_max, seed=seed, **kwargs)


def _kmeanspp_init(coords, k, rng):
    n = coords.shape[0]
    centers = np.empty((k, 2), dtype=np.float64)
    centers[0] = coords[rng.integers(n)]
    closest = _sq_dists_to_centers(coords, centers[:1])[:, 0]
    for m in range(1, k):
        probs = closest / closest.sum()
        idx = rng.choice(n, p=probs)
        centers[m] = coords[idx]
        closest = np.minimum(
            closest, _sq_dists_to_centers(coords, centers[m:m + 1])[:, 0]
        )
    return centers


def _repair_empty(coords, labels, k):
    """Give each empty cluster the point farthest from its own centroid.

    Donors are restricted to clusters that keep >= 2 members so the repair
    cannot cascade into new empties.
    """
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        donors = np.flatnonzero(counts[labels] >= 2)
        centroids = np.zeros((k, 2))
        for u in range(k):
            members = labels == u
            if members.any():
                centroids[u] = coords[members].mean(axis=0)
        d = np.sqrt(((coords[donors] - centroids[labels[donors]]) ** 2).sum(axis=1))
        moved = donors[np.argmax(d)]
        counts[labels[moved]] -= 1
        counts[c] += 1
        labels[moved] = c
    return labels


def _sse(coords, labels, centers):
    diff = coords - centers[labels]
    return float((diff * diff).sum())


def _lloyd(coords, centers, max_iters, tol):
    k = centers.shape[0]
    history = []
    labels = None
    for _ in range(max_iters):
        sq = _sq_dists_to_centers(coords, centers)
        labels = np.argmin(sq, axis=1)
        labels = _repair_empty(coords, labels, k)
        new_centers = np.empty_like(centers)
        for c in range(k):
            new_centers[c] = coords[labels == c].mean(axis=0)
        history.append(_sse(coords, labels, new_centers))
        shift = float(np.abs(new_centers - centers).max())
        centers = new_centers
        if shift <= tol:
            break
    return labels, centers, history[-1], history


def kmeans(coords: np.ndarray, k: int, seed, restarts: int = 10,
           max_iters: int = 300, tol: float = 1e-6,
           return_history: bool = False):
    """Best-of-`restarts` Lloyd k-means with k-means++ seeding.

    Restarts are independently seeded from the master seed by index and the
    winner is the (inertia, restart index) minimum, so results do not
    depend on evaluation order. Returns (labels, centroids, inertia), plus
    the winning restart's per-iteration inertia when `return_history`.
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    n = coords.shape[0]
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= {n}, got k={k}")
    if np.unique(coords, axis=0).shape[0] < k:
        raise DegenerateInput(f"fewer than k={k} distinct points")
    ss = seed if isinstance(seed, np.random.SeedSequence) \
        else np.random.SeedSequence(seed)
    best = None
    for child in ss.spawn(restarts):
        rng = np.random.default_rng(child)
        centers0 = _kmeanspp_init(coords, k, rng)
        labels, centers, inertia, history = _lloyd(coords, centers0,
                                                   max_iters, tol)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia, history)
    labels, centers, inertia, history = best
    if return_history:
        return labels, centers, inertia, history
    return labels, centers, inertia


def silhouette(coords: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette coefficient over all items.

    s(i) = (b(i) - a(i)) / max(a(i), b(i)), a(i) the mean distance to the
    rest of i's cluster, b(i) the smallest mean distance to another
    cluster. Singletons score 0 by convention.
    """
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    n = coords.shape[0]
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise InvalidLabels("silhouette needs at least 2 clusters")
    counts = {int(c): int((labels == c).sum()) for c in uniq}
    if min(counts.values()) < 1:
        raise InvalidLabels("empty cluster")
    d = euclidean_2d(coords, coords)
    s = np.zeros(n, dtype=np.float64)
    for i in range(n):
        own = labels[i]
        if counts[int(own)] == 1:
            s[i] = 0.0
            continue
        same = labels == own
        same[i] = False
        a = np.mean(d[i][same])
        b = np.inf
        for c in uniq:
            if c == own:
                continue
            m = np.mean(d[i][labels == c])
            if m < b:
                b = m
        denom = max(a, b)
        s[i] = (b - a) / denom if denom > 0 else 0.0
    return float(np.mean(s))


def medoid(coords: np.ndarray, members: np.ndarray) -> int:
    """Member index minimizing the summed Euclidean distance to the rest.

    Ties break toward the lowest canonical index.
    """
    members = np.sort(np.asarray(members, dtype=np.int64))
    if members.size == 0:
        raise EmptyCluster("cannot take the medoid of an empty cluster")
    pts = coords[members]
    sums = euclidean_2d(pts, pts).sum(axis=1)
    return int(members[np.argmin(sums)])


def pick_best_k(sweep) -> int:
    """Highest-silhouette k from a sweep table; ties go to the smaller k."""
    best_k, _, _ = max(sweep, key=lambda e: (e[1], -e[0]))
    return int(best_k)


def choose_k(projection: Projection2D, config: KSweepConfig) -> ClusteringResult:
    """Sweep k, score each clustering by silhouette, keep the argmax.

    Ties break toward the smaller k. The sweep table (k, S(k), inertia) is
    recorded in the result.
    """
    coords = projection.coords
    n = coords.shape[0]
    if config.k_max > n - 1:
        raise ValueError(f"k_max={config.k_max} must be <= N-1={n - 1}")
    ss = np.random.SeedSequence(config.seed)
    children = ss.spawn(config.k_max - config.k_min + 1)
    sweep = []
    solutions = {}
    for child, k in zip(children, range(config.k_min, config.k_max + 1)):
        labels, centers, inertia = kmeans(
            coords, k, child, restarts=config.restarts,
            max_iters=config.max_iters, tol=config.tol,
        )
        score = silhouette(coords, labels)
        sweep.append((k, score, inertia))
        solutions[k] = (labels, centers)
    best_k = pick_best_k(sweep)
    labels, centers = solutions[best_k]
    medoid_indices = []
    for c in range(best_k):
        medoid_indices.append(medoid(coords, np.flatnonzero(labels == c)))
    return ClusteringResult(
        labels=labels,
        k_hat=best_k,
        sweep=tuple(sweep),
        medoids=tuple(projection.ids[i] for i in medoid_indices),
        medoid_indices=tuple(medoid_indices),
        centroids=centers,
    )
