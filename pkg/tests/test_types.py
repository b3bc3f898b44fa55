import numpy as np
import pytest

from coldselect.errors import IdMismatch
from coldselect.types import (Budget, EmbeddingSet, ManifestEntry,
                              ProbabilityMap, Projection2D, RunConfig,
                              ScoreBlend, SelectionManifest, align,
                              validate_pool)


def test_validate_pool_ok():
    emb = EmbeddingSet(ids=("a", "b", "c"),
                       features=np.arange(6, dtype=float).reshape(3, 2))
    assert validate_pool(emb) == []


def test_validate_pool_duplicate_id():
    emb = EmbeddingSet(ids=("a", "a"), features=np.ones((2, 2)))
    assert any("duplicate id: a" in v for v in validate_pool(emb))


def test_validate_pool_nonfinite():
    feats = np.ones((2, 2))
    feats[0, 1] = np.nan
    emb = EmbeddingSet(ids=("a", "b"), features=feats)
    assert any("non-finite at row 0" in v for v in validate_pool(emb))


def test_align_ok():
    emb = EmbeddingSet(ids=("a", "b"), features=np.ones((2, 2)))
    proj = Projection2D(ids=("a", "b"), coords=np.zeros((2, 2)))
    align(proj, emb)  # no raise


def test_align_reordered():
    emb = EmbeddingSet(ids=("a", "b"), features=np.ones((2, 2)))
    proj = Projection2D(ids=("b", "a"), coords=np.zeros((2, 2)))
    with pytest.raises(IdMismatch) as exc:
        align(proj, emb)
    assert exc.value.position == 0


def test_align_length_mismatch():
    emb = EmbeddingSet(ids=("a", "b", "c"), features=np.ones((3, 2)))
    proj = Projection2D(ids=("a", "b"), coords=np.zeros((2, 2)))
    with pytest.raises(IdMismatch) as exc:
        align(proj, emb)
    assert exc.value.position == 2


def test_embeddings_frozen():
    emb = EmbeddingSet(ids=("a", "b"), features=np.ones((2, 2)))
    with pytest.raises(ValueError):
        emb.features[0, 0] = 5.0


def test_budget_cold_start_size():
    b = Budget(total=26, acquisition=13)
    assert b.cold_start == 13
    with pytest.raises(ValueError):
        Budget(total=5, acquisition=6)


def test_probability_map_sum_tolerance():
    good = np.full((2, 2, 2), 0.5)
    ProbabilityMap(id="x", probs=good)
    bad = good.copy()
    bad[0, 0, 0] = 0.7  # pixel sums to 1.2
    with pytest.raises(ValueError):
        ProbabilityMap(id="x", probs=bad)
    with pytest.raises(ValueError):
        ProbabilityMap(id="x", probs=np.ones((1, 2, 2)))  # C < 2


def test_score_blend_bounds():
    ScoreBlend(alpha=0.0)
    ScoreBlend(alpha=1.0)
    with pytest.raises(ValueError):
        ScoreBlend(alpha=1.5)
    with pytest.raises(ValueError):
        ScoreBlend(alpha=0.3, epsilon=0.0)


def _entry(i, rank, reason, cluster=None):
    return ManifestEntry(id=f"i{i}", rank=rank, reason=reason, cluster=cluster)


def test_manifest_invariants():
    rc = RunConfig(budget=3)
    good = SelectionManifest(run_config=rc, entries=(
        _entry(0, 0, "medoid", 0),
        _entry(1, 1, "farthest_point", 0),
        _entry(2, 2, "acquisition"),
    ))
    assert good.ids == ("i0", "i1", "i2")

    with pytest.raises(ValueError):  # duplicate ids
        SelectionManifest(run_config=rc, entries=(
            _entry(0, 0, "medoid", 0),
            _entry(0, 1, "medoid", 1),
            _entry(2, 2, "medoid", 2),
        ))
    with pytest.raises(ValueError):  # entry count != budget
        SelectionManifest(run_config=rc, entries=(_entry(0, 0, "medoid", 0),))
    with pytest.raises(ValueError):  # acquisition before cold start
        SelectionManifest(run_config=rc, entries=(
            _entry(0, 0, "acquisition"),
            _entry(1, 1, "medoid", 0),
            _entry(2, 2, "medoid", 1),
        ))
    with pytest.raises(ValueError):  # farthest_point before medoid
        SelectionManifest(run_config=rc, entries=(
            _entry(0, 0, "farthest_point", 0),
            _entry(1, 1, "medoid", 0),
            _entry(2, 2, "acquisition"),
        ))
    with pytest.raises(ValueError):  # non-contiguous ranks
        SelectionManifest(run_config=rc, entries=(
            _entry(0, 0, "medoid", 0),
            _entry(1, 2, "medoid", 1),
            _entry(2, 3, "medoid", 2),
        ))
