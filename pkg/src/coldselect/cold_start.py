"""Cold-start selection: medoid seeds, proportional quotas, farthest-point
augmentation, plus the random and k-means-to-budget baseline policies.

All selection happens over 2D projected coordinates. Candidates for a
cluster's farthest-point picks stay inside that cluster, but min-distances
are taken against everything selected so far (other clusters' medoids
included), which maximizes global spread. Clusters are augmented
round-robin in ascending index order, one pick per pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .clustering import euclidean_2d, kmeans, medoid
from .errors import (BudgetExceedsCluster, BudgetExceedsPool,
                     EmptySelectedSet, InfeasibleBudget)
from .types import (REASON_MEDOID, REASON_RANDOM, ClusteringResult, ItemId,
                    ManifestEntry, Projection2D, RunConfig, SelectionManifest,
                    REASON_FARTHEST_POINT)


@dataclass(frozen=True)
class Allocation:
    """Per-cluster share of the post-medoid remainder budget."""

    remainder: int
    per_cluster: tuple[int, ...]

    def __post_init__(self):
        if sum(self.per_cluster) != self.remainder:
            raise ValueError("per-cluster quotas must sum to the remainder")
        if any(r < 0 for r in self.per_cluster):
            raise ValueError("quotas must be non-negative")
        object.__setattr__(self, "per_cluster", tuple(self.per_cluster))


def allocate(cluster_sizes: Sequence[int], remainder: int) -> Allocation:
    """Split `remainder` across clusters proportionally to their sizes.

    Quotas are rounded half-away-from-zero, then repaired largest-remainder
    style until the total is exact (ties toward the lower cluster index).
    No cluster may supply more than its non-medoid members; overflow from
    that cap is redistributed by the same remainder rule.
    """
    sizes = [int(s) for s in cluster_sizes]
    if any(s < 1 for s in sizes):
        raise ValueError("cluster sizes must be positive")
    if remainder < 0:
        raise ValueError("remainder must be non-negative")
    capacity = sum(s - 1 for s in sizes)
    if remainder > capacity:
        raise InfeasibleBudget(
            f"remainder {remainder} exceeds non-medoid capacity {capacity}"
        )
    total = sum(sizes)
    quotas = [remainder * s / total for s in sizes]
    alloc = [math.floor(q + 0.5) for q in quotas]
    fracs = [q - math.floor(q) for q in quotas]

    excess = sum(alloc) - remainder
    if excess > 0:
        # drop the weakest rounded-up claims first
        order = sorted((f, c) for c, f in enumerate(fracs) if f >= 0.5)
        for _, c in order[:excess]:
            alloc[c] -= 1
    elif excess < 0:
        order = sorted(((-f, c) for c, f in enumerate(fracs) if f < 0.5))
        for _, c in order[:-excess]:
            alloc[c] += 1

    overflow = 0
    caps = [s - 1 for s in sizes]
    for c, cap in enumerate(caps):
        if alloc[c] > cap:
            overflow += alloc[c] - cap
            alloc[c] = cap
    while overflow > 0:
        recipients = sorted(
            ((-fracs[c], c) for c in range(len(sizes)) if alloc[c] < caps[c])
        )
        for _, c in recipients:
            if overflow == 0:
                break
            alloc[c] += 1
            overflow -= 1
    return Allocation(remainder=remainder, per_cluster=tuple(alloc))


def _fps_step(coords: np.ndarray, candidates: np.ndarray,
              selected: Sequence[int]) -> int:
    """Candidate maximizing its min-distance to the selected set.

    Candidates must be sorted ascending; ties then resolve to the lowest
    canonical index via argmax-first semantics.
    """
    sel = np.asarray(list(selected), dtype=np.int64)
    d = euclidean_2d(coords[candidates], coords[sel])
    return int(candidates[np.argmax(d.min(axis=1))])


def farthest_point_augment(coords: np.ndarray, members: Sequence[int],
                           selected: Sequence[int], r: int) -> list[int]:
    """Greedy farthest-point picks restricted to `members`.

    Each pick maximizes the min-distance to everything selected so far
    (`selected` plus earlier picks). Returns exactly `r` canonical indices.
    """
    if r == 0:
        return []
    selected = list(selected)
    if not selected:
        raise EmptySelectedSet("farthest-point sampling needs a seed set")
    members = np.sort(np.asarray(members, dtype=np.int64))
    candidates = np.array([m for m in members if m not in set(selected)],
                          dtype=np.int64)
    if r > candidates.size:
        raise BudgetExceedsCluster(
            f"asked for {r} picks but only {candidates.size} unselected members"
        )
    picks = []
    for _ in range(r):
        chosen = _fps_step(coords, candidates, selected)
        picks.append(chosen)
        selected.append(chosen)
        candidates = candidates[candidates != chosen]
    return picks


def cold_start_select(projection: Projection2D, clustering: ClusteringResult,
                      budget: int,
                      run_config: Optional[RunConfig] = None) -> SelectionManifest:
    """Medoid seeds plus proportional farthest-point augmentation.

    Produces exactly `budget` entries: the k_hat medoids (ranked by cluster
    index) followed by the allocated farthest-point picks, clusters visited
    round-robin.
    """
    coords = projection.coords
    k = clustering.k_hat
    if budget < k:
        raise InfeasibleBudget(f"budget {budget} below cluster count {k}")
    if budget > projection.n_items:
        raise BudgetExceedsPool(
            f"budget {budget} exceeds pool size {projection.n_items}"
        )
    sizes = clustering.cluster_sizes()
    allocation = allocate(sizes, budget - k)

    entries = []
    selected = []
    for c, idx in enumerate(clustering.medoid_indices):
        entries.append(ManifestEntry(id=projection.ids[idx], rank=c,
                                     reason=REASON_MEDOID, cluster=c))
        selected.append(idx)

    quotas = list(allocation.per_cluster)
    members = [clustering.members(c) for c in range(k)]
    rank = k
    while any(q > 0 for q in quotas):
        for c in range(k):
            if quotas[c] == 0:
                continue
            candidates = np.array(
                [m for m in members[c] if m not in set(selected)],
                dtype=np.int64,
            )
            chosen = _fps_step(coords, candidates, selected)
            entries.append(ManifestEntry(id=projection.ids[chosen], rank=rank,
                                         reason=REASON_FARTHEST_POINT,
                                         cluster=c))
            selected.append(chosen)
            quotas[c] -= 1
            rank += 1

    if run_config is None:
        run_config = RunConfig(budget=budget)
    return SelectionManifest(run_config=run_config, entries=tuple(entries))


def random_select(ids: Sequence[ItemId], budget: int, seed: int,
                  run_config: Optional[RunConfig] = None) -> SelectionManifest:
    """Uniform sample without replacement; the random baseline."""
    n = len(ids)
    if budget > n:
        raise BudgetExceedsPool(f"budget {budget} exceeds pool size {n}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(n, size=budget, replace=False)
    entries = tuple(
        ManifestEntry(id=ids[int(i)], rank=r, reason=REASON_RANDOM)
        for r, i in enumerate(picks)
    )
    if run_config is None:
        run_config = RunConfig(budget=budget, seed=seed)
    return SelectionManifest(run_config=run_config, entries=entries)


def kmeans_to_budget_select(projection: Projection2D, budget: int, seed: int,
                            restarts: int = 10,
                            run_config: Optional[RunConfig] = None
                            ) -> SelectionManifest:
    """Baseline: k-means with k = budget, then one medoid per cluster."""
    n = projection.n_items
    if budget > n:
        raise BudgetExceedsPool(f"budget {budget} exceeds pool size {n}")
    labels, _, _ = kmeans(projection.coords, budget, seed, restarts=restarts)
    entries = []
    for c in range(budget):
        idx = medoid(projection.coords, np.flatnonzero(labels == c))
        entries.append(ManifestEntry(id=projection.ids[idx], rank=c,
                                     reason=REASON_MEDOID, cluster=c))
    if run_config is None:
        run_config = RunConfig(budget=budget, seed=seed)
    return SelectionManifest(run_config=run_config, entries=tuple(entries))
