import itertools

import numpy as np
import pytest

from coldselect.clustering import KSweepConfig, choose_k
from coldselect.cold_start import (Allocation, allocate, cold_start_select,
                                   farthest_point_augment,
                                   kmeans_to_budget_select, random_select)
from coldselect.errors import (BudgetExceedsCluster, BudgetExceedsPool,
                               EmptySelectedSet, InfeasibleBudget)
from coldselect.types import Projection2D, REASON_FARTHEST_POINT, REASON_MEDOID

from oracles import fps_trace_check


def line(values):
    return np.array([[v, 0.0] for v in values])


def projection_of(coords):
    return Projection2D(ids=tuple(f"p{i:03d}" for i in range(len(coords))),
                        coords=coords)


def blob_projection(sizes, spread=18.0, seed=5, scale=1.0):
    k = len(sizes)
    centers = np.array([[spread * np.cos(2 * np.pi * c / k),
                         spread * np.sin(2 * np.pi * c / k)]
                        for c in range(k)])
    rng = np.random.default_rng(seed)
    xs, comp = [], []
    for c, (center, n) in enumerate(zip(centers, sizes)):
        xs.append(center + scale * rng.standard_normal((n, 2)))
        comp.extend([c] * n)
    return projection_of(np.vstack(xs)), np.array(comp)


# ------------------------------------------------------------ allocation

def test_allocate_worked_example():
    assert allocate([50, 30, 20], 8).per_cluster == (4, 2, 2)


def test_allocate_tie_goes_to_lowest_index():
    assert allocate([3, 3, 3], 4).per_cluster == (2, 1, 1)


def test_allocate_zero_remainder():
    assert allocate([7, 5, 9], 0).per_cluster == (0, 0, 0)


def test_allocate_infeasible():
    with pytest.raises(InfeasibleBudget):
        allocate([2, 2], 3)  # capacity is (2-1)+(2-1)=2


def test_allocate_respects_cluster_caps():
    # quotas round to [2, 8]; cluster 0 can only supply 1 non-medoid member
    alloc = allocate([2, 10], 9)
    assert alloc.per_cluster[0] <= 1
    assert sum(alloc.per_cluster) == 9


def test_allocate_randomized_properties(rng):
    for _ in range(1000):
        k = int(rng.integers(2, 9))
        sizes = [int(rng.integers(2, 61)) for _ in range(k)]
        total = sum(sizes)
        cap = sum(s - 1 for s in sizes)
        r = int(rng.integers(0, min(cap, total // 2) + 1))
        alloc = allocate(sizes, r)
        assert sum(alloc.per_cluster) == r
        for rc, s in zip(alloc.per_cluster, sizes):
            assert 0 <= rc <= s - 1
            assert abs(rc - r * s / total) <= 1.0


def test_allocation_type_checks_sum():
    with pytest.raises(ValueError):
        Allocation(remainder=3, per_cluster=(1, 1))


# ------------------------------------------------- farthest-point picks

def test_fps_line_tie_then_far_end():
    coords = line(range(11))
    picks = farthest_point_augment(coords, members=range(11), selected=[5],
                                   r=2)
    assert picks == [0, 10]


def test_fps_zero_budget():
    coords = line(range(4))
    assert farthest_point_augment(coords, range(4), [0], 0) == []


def test_fps_single_candidate():
    coords = line([0.0, 1.0])
    assert farthest_point_augment(coords, [0, 1], [0], 1) == [1]


def test_fps_budget_exceeds_cluster():
    coords = line(range(4))
    with pytest.raises(BudgetExceedsCluster):
        farthest_point_augment(coords, [0, 1], [0], 2)


def test_fps_needs_seed():
    coords = line(range(4))
    with pytest.raises(EmptySelectedSet):
        farthest_point_augment(coords, range(4), [], 1)


def test_fps_step_optimality_random(rng):
    for _ in range(20):
        n = int(rng.integers(10, 60))
        coords = rng.standard_normal((n, 2)) * 6
        members = list(range(n))
        seed = [int(rng.integers(n))]
        r = int(rng.integers(1, min(8, n - 1)))
        picks = farthest_point_augment(coords, members, seed, r)
        candidates0 = [m for m in members if m not in seed]
        assert fps_trace_check(coords, picks, candidates0, seed)


def test_fps_distances_use_full_selected_set():
    # candidates restricted to the right half, but the seed on the left
    # still repels picks: the pick is the far-right point, not the point
    # nearest the midline
    coords = line([0.0, 10.0, 11.0, 14.0])
    picks = farthest_point_augment(coords, members=[1, 2, 3], selected=[0, 2],
                                   r=1)
    assert picks == [3]


# ------------------------------------------------------------ cold start

def test_cold_start_budget_equals_k():
    proj, _ = blob_projection([20, 20, 20])
    clustering = choose_k(proj, KSweepConfig(k_min=2, k_max=8, seed=43))
    assert clustering.k_hat == 3
    manifest = cold_start_select(proj, clustering, budget=3)
    assert [e.reason for e in manifest.entries] == [REASON_MEDOID] * 3
    assert manifest.ids == clustering.medoids


def test_cold_start_three_even_blobs():
    proj, comp = blob_projection([20, 20, 20])
    clustering = choose_k(proj, KSweepConfig(k_min=2, k_max=8, seed=43))
    manifest = cold_start_select(proj, clustering, budget=9)
    assert len(manifest.entries) == 9
    reasons = [e.reason for e in manifest.entries]
    assert reasons == [REASON_MEDOID] * 3 + [REASON_FARTHEST_POINT] * 6
    per_cluster = {c: 0 for c in range(3)}
    for e in manifest.entries[3:]:
        per_cluster[e.cluster] += 1
    assert sorted(per_cluster.values()) == [2, 2, 2]


def test_cold_start_proportional_split():
    proj, comp = blob_projection([40, 20])
    clustering = choose_k(proj, KSweepConfig(k_min=2, k_max=5, seed=43))
    assert clustering.k_hat == 2
    manifest = cold_start_select(proj, clustering, budget=8)
    fp_counts = {0: 0, 1: 0}
    for e in manifest.entries[2:]:
        fp_counts[e.cluster] += 1
    # quota is proportional to cluster size: 6 * 40/60 = 4 and 6 * 20/60 = 2
    sizes = clustering.cluster_sizes()
    expected = {c: round(6 * sizes[c] / 60) for c in (0, 1)}
    assert fp_counts == expected
    assert sorted(fp_counts.values()) == [2, 4]


def test_cold_start_no_duplicates_exact_budget(rng):
    proj, _ = blob_projection([15, 25, 10, 30], seed=11)
    clustering = choose_k(proj, KSweepConfig(k_min=2, k_max=8, seed=43))
    for budget in range(clustering.k_hat, 26):
        manifest = cold_start_select(proj, clustering, budget=budget)
        assert len(manifest.entries) == budget
        assert len(set(manifest.ids)) == budget


def test_cold_start_infeasible_budget():
    proj, _ = blob_projection([20, 20, 20])
    clustering = choose_k(proj, KSweepConfig(k_min=2, k_max=8, seed=43))
    with pytest.raises(InfeasibleBudget):
        cold_start_select(proj, clustering, budget=clustering.k_hat - 1)


# ------------------------------------------------------------- baselines

def test_random_select_whole_pool():
    ids = tuple(f"x{i}" for i in range(6))
    manifest = random_select(ids, budget=6, seed=43)
    assert sorted(manifest.ids) == sorted(ids)


def test_random_select_deterministic():
    ids = tuple(f"x{i}" for i in range(100))
    a = random_select(ids, budget=5, seed=43)
    b = random_select(ids, budget=5, seed=43)
    assert a.ids == b.ids
    assert all(e.reason == "random_baseline" for e in a.entries)


def test_random_select_budget_check():
    with pytest.raises(BudgetExceedsPool):
        random_select(("a", "b"), budget=3, seed=43)


def test_kmeans_to_budget_full_pool(rng):
    coords = rng.standard_normal((8, 2)) * 5
    proj = projection_of(coords)
    manifest = kmeans_to_budget_select(proj, budget=8, seed=43)
    assert sorted(manifest.ids) == sorted(proj.ids)


def test_kmeans_to_budget_three_blobs():
    proj, comp = blob_projection([20, 20, 20])
    manifest = kmeans_to_budget_select(proj, budget=3, seed=43)
    picked_components = {comp[proj.ids.index(i)] for i in manifest.ids}
    assert picked_components == {0, 1, 2}


def test_kmeans_to_budget_square_opposite_pairs():
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    proj = projection_of(coords)
    manifest = kmeans_to_budget_select(proj, budget=2, seed=43)
    picked = [proj.ids.index(i) for i in manifest.ids]

    def sse_of(groups):
        total = 0.0
        for g in groups:
            pts = coords[list(g)]
            total += ((pts - pts.mean(axis=0)) ** 2).sum()
        return total

    best = min(
        sse_of([g, tuple(i for i in range(4) if i not in g)])
        for r in (1, 2) for g in itertools.combinations(range(4), r)
    )
    # optimal 2-clustering pairs adjacent corners; the two medoids must
    # come from different pairs
    assert best == pytest.approx(1.0)
    d = np.abs(coords[picked[0]] - coords[picked[1]]).sum()
    assert d >= 1.0  # not the same corner, not within one optimal pair
