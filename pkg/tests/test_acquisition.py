import numpy as np
import pytest

from coldselect.acquisition import (EntropyTable, acquisition_round,
                                    diversity, image_entropy,
                                    max_pairwise_distance,
                                    normalize_entropies, pixel_entropy)
from coldselect.errors import BudgetExceedsPool, EmptySelectedSet
from coldselect.types import ProbabilityMap, Projection2D, ScoreBlend
from oracles import entropy_seeded_fps, top_a_by_entropy


def binary_map(p_fg, shape=(4, 4)):
    fg = np.full(shape, p_fg)
    return ProbabilityMap(id="m", probs=np.stack([1.0 - fg, fg]))


def projection_of(coords):
    return Projection2D(ids=tuple(f"p{i:03d}" for i in range(len(coords))),
                        coords=np.asarray(coords, dtype=float))


# --------------------------------------------------------------- entropy

def test_pixel_entropy_uniform_binary():
    h = pixel_entropy(binary_map(0.5))
    assert np.allclose(h, np.log(2.0), atol=1e-6)


def test_pixel_entropy_one_hot():
    h = pixel_entropy(binary_map(1.0))
    assert np.all(h >= 0.0)
    assert np.all(h <= 1e-7)


def test_pixel_entropy_09_01():
    h = pixel_entropy(binary_map(0.1))
    expected = -(0.9 * np.log(0.9) + 0.1 * np.log(0.1))
    assert np.allclose(h, expected, atol=1e-4)
    assert h[0, 0] == pytest.approx(0.3251, abs=1e-4)


def test_image_entropy_uniform_binary():
    assert image_entropy(binary_map(0.5)) == pytest.approx(np.log(2.0),
                                                           abs=1e-6)


def test_image_entropy_half_and_half():
    fg = np.full((2, 4), 0.5)
    fg[:, :2] = 1.0  # half the pixels one-hot, half uniform
    pmap = ProbabilityMap(id="m", probs=np.stack([1.0 - fg, fg]))
    assert image_entropy(pmap) == pytest.approx(np.log(2.0) / 2, abs=1e-6)


def test_image_entropy_three_class_uniform():
    probs = np.full((3, 5, 5), 1.0 / 3.0)
    assert image_entropy(ProbabilityMap(id="m", probs=probs)) == \
        pytest.approx(np.log(3.0), abs=1e-6)


# --------------------------------------------------------- normalization

def test_normalize_affine():
    table = normalize_entropies([0.2, 0.5, 0.8])
    assert np.allclose(table.normalized, [0.0, 0.5, 1.0], atol=1e-6)
    assert table.normalized[0] == 0.0


def test_normalize_degenerate_pool():
    assert np.array_equal(normalize_entropies([0.4, 0.4]).normalized, [0, 0])


def test_normalize_single_candidate():
    assert np.array_equal(normalize_entropies([0.7]).normalized, [0.0])


# ------------------------------------------------------------- diversity

def test_diversity_simple():
    coords = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert diversity(1, [0], coords, d_max=10.0) == pytest.approx(0.5,
                                                                  abs=1e-6)


def test_diversity_coincident_is_zero():
    coords = np.array([[1.0, 1.0], [1.0, 1.0]])
    assert diversity(1, [0], coords, d_max=10.0) == 0.0


def test_diversity_nearest_of_two():
    coords = np.array([[0.0, 0.0], [10.0, 0.0], [4.0, 0.0]])
    assert diversity(2, [0, 1], coords, d_max=10.0) == pytest.approx(0.4,
                                                                     abs=1e-9)


def test_diversity_needs_selection():
    with pytest.raises(EmptySelectedSet):
        diversity(0, [], np.zeros((2, 2)), d_max=1.0)


# ----------------------------------------------------------- acquisition

def test_acquisition_worked_example():
    #        a        b         c         d
    coords = [[0, 0], [10, 0], [2, 0], [1, 1]]
    raw = [1.0, 0.4, 0.5, 0.0]
    proj = projection_of(coords)
    table = normalize_entropies(raw)
    entries = acquisition_round(proj, table, [], 2, ScoreBlend(alpha=0.3))
    assert [e.id for e in entries] == ["p000", "p001"]
    assert entries[1].scores.combined == pytest.approx(0.58, abs=1e-6)
    assert entries[1].scores.diversity == pytest.approx(1.0, abs=1e-6)
    assert entries[1].scores.entropy == pytest.approx(0.4, abs=1e-6)


def test_alpha_zero_is_entropy_ranking(rng):
    n = 40
    proj = projection_of(rng.standard_normal((n, 2)) * 5)
    raw = rng.random(n)
    table = normalize_entropies(raw)
    entries = acquisition_round(proj, table, [], 7, ScoreBlend(alpha=0.0))
    expected = [proj.ids[i] for i in top_a_by_entropy(raw, 7)]
    assert [e.id for e in entries] == expected


def test_alpha_one_is_entropy_seeded_fps(rng):
    n = 30
    proj = projection_of(rng.standard_normal((n, 2)) * 5)
    selected0 = [0, 5]
    candidates = [i for i in range(n) if i not in selected0]
    raw = rng.random(len(candidates))
    table = normalize_entropies(raw, indices=candidates)
    entries = acquisition_round(proj, table, selected0, 6,
                                ScoreBlend(alpha=1.0))
    oracle = entropy_seeded_fps(proj.coords, candidates, selected0, raw, 6)
    assert [e.id for e in entries] == [proj.ids[candidates[i]] for i in oracle]


def test_per_step_argmax_property(rng):
    n = 50
    proj = projection_of(rng.standard_normal((n, 2)) * 4)
    selected0 = [3, 17]
    candidates = [i for i in range(n) if i not in selected0]
    raw = rng.random(len(candidates))
    blend = ScoreBlend(alpha=0.3)
    table = normalize_entropies(raw, epsilon=blend.epsilon,
                                indices=candidates)
    entries = acquisition_round(proj, table, selected0, 8, blend)

    # recompute greedily from scratch and check every recorded pick + score
    d_max = max_pairwise_distance(proj.coords[candidates])
    norm = dict(zip(candidates, table.normalized))
    rawmap = dict(zip(candidates, table.raw))
    selected = list(selected0)
    remaining = list(candidates)
    for step, e in enumerate(entries):
        idx = proj.ids.index(e.id)
        if step == 0:
            best = max(remaining, key=lambda i: (rawmap[i], -i))
            assert idx == best
        else:
            def score(i):
                dmin = min(np.sqrt(((proj.coords[i] - proj.coords[s]) ** 2).sum())
                           for s in selected)
                return blend.alpha * dmin / (d_max + blend.epsilon) + \
                    (1 - blend.alpha) * norm[i]
            scores = {i: score(i) for i in remaining}
            best = max(remaining, key=lambda i: (scores[i], -i))
            assert idx == best
            assert e.scores.combined == pytest.approx(scores[idx], rel=1e-12)
        selected.append(idx)
        remaining.remove(idx)


def test_scores_stay_in_unit_range(rng):
    n = 60
    proj = projection_of(rng.standard_normal((n, 2)) * 3)
    selected0 = list(range(5))
    candidates = [i for i in range(n) if i not in selected0]
    raw = rng.random(len(candidates))
    table = normalize_entropies(raw, indices=candidates)
    entries = acquisition_round(proj, table, selected0, 10,
                                ScoreBlend(alpha=0.3))
    for e in entries:
        for v in (e.scores.entropy, e.scores.diversity, e.scores.combined):
            assert v is not None and 0.0 <= v <= 1.0


def test_permutation_stability(rng):
    n = 25
    coords = rng.standard_normal((n, 2)) * 5
    raw = rng.random(n)
    ids = tuple(f"id{i:02d}" for i in range(n))

    base = acquisition_round(
        Projection2D(ids=ids, coords=coords),
        normalize_entropies(raw), [], 6, ScoreBlend(alpha=0.3))

    perm = rng.permutation(n)
    shuffled = acquisition_round(
        Projection2D(ids=tuple(ids[i] for i in perm), coords=coords[perm]),
        normalize_entropies(raw[perm]), [], 6, ScoreBlend(alpha=0.3))

    assert [e.id for e in base] == [e.id for e in shuffled]


def test_acquisition_budget_check(rng):
    proj = projection_of(rng.standard_normal((5, 2)))
    table = normalize_entropies(rng.random(3), indices=[2, 3, 4])
    with pytest.raises(BudgetExceedsPool):
        acquisition_round(proj, table, [0, 1], 4, ScoreBlend())


def test_acquisition_table_alignment(rng):
    proj = projection_of(rng.standard_normal((5, 2)))
    bad = normalize_entropies(rng.random(3), indices=[1, 3, 4])
    with pytest.raises(ValueError):
        acquisition_round(proj, bad, [0, 1], 2, ScoreBlend())


def test_entropy_table_validation():
    with pytest.raises(ValueError):
        EntropyTable(raw=np.ones(3), normalized=np.ones(2))
