"""Encoder registry: pretrained backbones that pool images to feature rows.

Specs:
    radimagenet-resnet50   ResNet-50 with RadImageNet weights loaded from a
                           local state-dict file (--weights or the
                           SCANEXTRACT_WEIGHTS env var)
    imagenet-resnet50      torchvision's pretrained ResNet-50 (downloads)
    tiny                   small conv net with seed-fixed weights; needs no
                           downloads, so it works fully offline
    auto                   radimagenet-resnet50 when weights are available,
                           otherwise tiny (with a warning)

All encoders end in global average pooling over the final feature map.
"""

from __future__ import annotations

import os
import sys

import numpy as np
import torch
from torch import nn

from .errors import EncoderLoadError
from .preprocess import preprocess

WEIGHTS_ENV = "SCANEXTRACT_WEIGHTS"
_TINY_SEED = 0xC0FFEE


class TinyEncoder(nn.Module):
    """Three strided conv blocks + GAP; 64-dim features.

    Weights are drawn once from a fixed seed, so every install produces
    the same random-projection features.
    """

    dim = 64

    def __init__(self):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(3, 16, 5, stride=2, padding=2), nn.ReLU(),
            nn.Conv2d(16, 32, 3, stride=2, padding=1), nn.ReLU(),
            nn.Conv2d(32, 64, 3, stride=2, padding=1), nn.ReLU(),
            nn.AdaptiveAvgPool2d(1),
        )

    def forward(self, x):
        return self.net(x).flatten(1)


class ResNet50Encoder(nn.Module):
    """ResNet-50 backbone up to the final conv stage, GAP-pooled."""

    dim = 2048

    def __init__(self, state_dict=None):
        super().__init__()
        from torchvision.models import resnet50
        backbone = resnet50(weights=None)
        if state_dict is not None:
            missing, unexpected = backbone.load_state_dict(state_dict,
                                                           strict=False)
            core_missing = [k for k in missing if not k.startswith("fc.")]
            if core_missing:
                raise EncoderLoadError(
                    f"state dict is missing backbone keys: "
                    f"{core_missing[:5]}..."
                )
        backbone.fc = nn.Identity()
        self.net = backbone

    def forward(self, x):
        return self.net(x)


def _load_local_state_dict(weights_path):
    if weights_path is None:
        weights_path = os.environ.get(WEIGHTS_ENV)
    if not weights_path:
        raise EncoderLoadError(
            "no weights file given (use --weights or set "
            f"{WEIGHTS_ENV})"
        )
    if not os.path.exists(weights_path):
        raise EncoderLoadError(f"weights file not found: {weights_path}")
    try:
        return torch.load(weights_path, map_location="cpu",
                          weights_only=True)
    except Exception as exc:
        raise EncoderLoadError(f"{weights_path}: {exc}") from None


def build_encoder(spec: str, weights=None):
    """Return an eval-mode encoder module for the given spec."""
    if spec == "tiny":
        torch.manual_seed(_TINY_SEED)
        model = TinyEncoder()
    elif spec == "radimagenet-resnet50":
        model = ResNet50Encoder(_load_local_state_dict(weights))
    elif spec == "imagenet-resnet50":
        try:
            from torchvision.models import ResNet50_Weights, resnet50
            backbone = resnet50(weights=ResNet50_Weights.IMAGENET1K_V2)
        except Exception as exc:
            raise EncoderLoadError(
                f"could not fetch imagenet weights: {exc}") from None
        backbone.fc = nn.Identity()
        model = ResNet50Encoder.__new__(ResNet50Encoder)
        nn.Module.__init__(model)
        model.net = backbone
    elif spec == "auto":
        try:
            return build_encoder("radimagenet-resnet50", weights)
        except EncoderLoadError as exc:
            print(f"warning: {exc}; falling back to the offline 'tiny' "
                  f"encoder", file=sys.stderr)
            return build_encoder("tiny")
    else:
        raise EncoderLoadError(f"unknown encoder spec: {spec}")
    model.eval()
    return model


def _to_three_channel(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 2:
        return np.repeat(arr[None, :, :], 3, axis=0)
    return np.transpose(arr, (2, 0, 1))


def embed_images(paths, encoder, size: int = 256,
                 batch_size: int = 8) -> np.ndarray:
    """Preprocess and encode images; one float32 feature row per path.

    Single-threaded inference keeps reruns byte-identical.
    """
    torch.set_num_threads(1)
    rows = []
    with torch.no_grad():
        for start in range(0, len(paths), batch_size):
            chunk = paths[start:start + batch_size]
            batch = np.stack([_to_three_channel(preprocess(p, size))
                              for p in chunk])
            feats = encoder(torch.from_numpy(batch).float())
            rows.append(feats.numpy().astype(np.float32))
    return np.vstack(rows)
