import numpy as np
import pytest

from coldselect import io as cio
from coldselect.types import EmbeddingSet


def make_blobs(centers, n_per, dim, scale=1.0, seed=0):
    """Gaussian blobs around explicit centers; returns (X, component_ids)."""
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=np.float64)
    xs, comp = [], []
    for c, center in enumerate(centers):
        pts = center[None, :dim] + scale * rng.standard_normal((n_per, dim))
        xs.append(pts)
        comp.extend([c] * n_per)
    return np.vstack(xs), np.array(comp)


def grid_centers(k, dim, spread=20.0):
    """k well-separated centers on coordinate axes of a dim-space."""
    centers = np.zeros((k, dim))
    for c in range(k):
        centers[c, c % dim] = spread * (1 + c // dim)
        if c % 2 == 1:
            centers[c] = -centers[c]
    return centers


def embedding_set(features, prefix="item"):
    n = features.shape[0]
    return EmbeddingSet(
        ids=tuple(f"{prefix}{i:04d}" for i in range(n)),
        features=features,
    )


def build_dataset_dir(root, n_per=12, k=3, dim=8, n_test=4, seed=2):
    """Dataset dir with blobby embeddings, a test split, and prob maps.

    Returns (ids, component_labels, test_ids).
    """
    x, comp = make_blobs(grid_centers(k, dim, spread=12.0), n_per, dim,
                         scale=1.0, seed=seed)
    n = x.shape[0]
    ids = [f"img{i:03d}" for i in range(n)]
    rng = np.random.default_rng(seed + 1)
    test_idx = set(int(i) for i in rng.choice(n, size=n_test, replace=False))
    items = [cio.Item(id=ids[i], split="test" if i in test_idx else "pool")
             for i in range(n)]
    cio.write_items(root, items)
    cio.write_embeddings(root, EmbeddingSet(ids=tuple(ids), features=x))
    probs_dir = root / "probs"
    probs_dir.mkdir()
    for i, item_id in enumerate(ids):
        fg = np.full((6, 6), 0.05 + 0.9 * (i / n))
        cio.write_probability_map(probs_dir / f"{item_id}.prb",
                                  np.stack([1.0 - fg, fg]))
    return ids, comp, sorted(ids[i] for i in test_idx)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
