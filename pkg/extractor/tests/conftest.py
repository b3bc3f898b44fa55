import numpy as np
import pytest
from PIL import Image


def write_toy_images(folder, n=10, size=64, seed=0, duplicate_of=None):
    """PNG toy images with varying structure; returns the sorted stems.

    `duplicate_of=(src, dst)` writes image `dst` as a byte copy of `src`.
    """
    folder.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    stems = [f"scan{i:03d}" for i in range(n)]
    for i, stem in enumerate(stems):
        yy, xx = np.mgrid[0:size, 0:size]
        img = (
            120 + 60 * np.sin(xx / (3 + i)) + 40 * np.cos(yy / (2 + i))
            + rng.normal(0, 12, size=(size, size))
        )
        arr = np.clip(img, 0, 255).astype(np.uint8)
        Image.fromarray(arr, mode="L").save(folder / f"{stem}.png")
    if duplicate_of is not None:
        src, dst = duplicate_of
        data = (folder / f"{src}.png").read_bytes()
        (folder / f"{dst}.png").write_bytes(data)
        stems = sorted(stems + [dst])
    return stems


@pytest.fixture
def toy_images(tmp_path):
    folder = tmp_path / "images"
    stems = write_toy_images(folder)
    return folder, stems
