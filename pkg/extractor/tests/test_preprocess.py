import numpy as np
import pytest
from PIL import Image

from scanextract.errors import UnreadableImage
from scanextract.preprocess import (list_images, load_image, preprocess,
                                    resize, zscore)


def test_zscore_constant_image():
    assert np.array_equal(zscore(np.full((8, 8), 7.0)), np.zeros((8, 8)))


def test_zscore_statistics():
    rng = np.random.default_rng(3)
    img = rng.uniform(0, 255, size=(32, 32))
    out = zscore(img)
    assert abs(float(out.mean())) < 1e-3
    assert abs(float(out.std()) - 1.0) < 1e-3


def test_zscore_idempotent_within_tolerance():
    rng = np.random.default_rng(4)
    img = rng.uniform(0, 255, size=(32, 32))
    once = zscore(img)
    twice = zscore(once)
    assert np.abs(twice - once).max() < 1e-6


def test_resize_512_to_256(tmp_path):
    arr = np.zeros((512, 512), dtype=np.uint8)
    arr[:256] = 200
    Image.fromarray(arr, mode="L").save(tmp_path / "big.png")
    out = preprocess(tmp_path / "big.png", size=256)
    assert out.shape == (256, 256)


def test_resize_preserves_channels():
    rgb = np.random.default_rng(0).uniform(0, 255, size=(64, 48, 3))
    assert resize(rgb, 32).shape == (32, 32, 3)


def test_load_image_unreadable(tmp_path):
    bogus = tmp_path / "x.png"
    bogus.write_bytes(b"not an image")
    with pytest.raises(UnreadableImage):
        load_image(bogus)


def test_list_images_sorted_and_unique(tmp_path):
    for name in ("b.png", "a.png", "c.png"):
        Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(tmp_path / name)
    paths = list_images(tmp_path)
    assert [p.stem for p in paths] == ["a", "b", "c"]
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(tmp_path / "a.jpg")
    with pytest.raises(UnreadableImage):
        list_images(tmp_path)


def test_list_images_empty(tmp_path):
    with pytest.raises(UnreadableImage):
        list_images(tmp_path)
