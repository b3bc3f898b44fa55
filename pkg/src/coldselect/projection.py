"""Exact t-SNE projection of embeddings to 2D.

Pools here are small (a few hundred items), so the O(N^2) exact method is
used rather than a tree approximation. Affinity calibration and the
gradient loop run on the active kernel backend; everything is a pure
function of (input, config), including the seed, so reruns are
bit-identical on a given install.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import CalibrationFailed, NonFinite
from .types import DEFAULT_SEED, EmbeddingSet, Projection2D

# Tighter than the 1e-4 contract so calibrated rows verify with margin.
_ENTROPY_TOL_BITS = 1e-5
_MAX_SEARCH_ITERS = 200
_DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class TsneConfig:
    """Hyperparameters of the 2D projection.

    ``perplexity=None`` derives max(2, min(30, (N-1)//3)) from the pool
    size; ``learning_rate=None`` derives max(N/12, 50). Explicit
    perplexities are clamped to N-1 (the conditional distribution has only
    N-1 support points).
    """

    perplexity: Optional[float] = None
    iterations: int = 1000
    early_exaggeration_factor: float = 12.0
    early_exaggeration_iters: int = 250
    learning_rate: Optional[float] = None
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    seed: int = DEFAULT_SEED
    init: str = "pca"

    def __post_init__(self):
        if self.perplexity is not None and self.perplexity <= 0:
            raise ValueError("perplexity must be positive")
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if self.iterations < self.early_exaggeration_iters:
            raise ValueError("iterations must cover the exaggeration phase")
        if self.early_exaggeration_factor <= 0:
            raise ValueError("early exaggeration factor must be positive")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        for m in (self.momentum_initial, self.momentum_final):
            if not 0.0 <= m < 1.0:
                raise ValueError("momentum must lie in [0, 1)")
        if self.init not in ("pca", "random-gaussian"):
            raise ValueError(f"unknown init: {self.init}")

    def resolved_perplexity(self, n: int) -> float:
        if self.perplexity is None:
            perp = max(2.0, min(30.0, float((n - 1) // 3)))
        else:
            perp = float(self.perplexity)
        return min(perp, float(n - 1))

    def resolved_learning_rate(self, n: int) -> float:
        if self.learning_rate is None:
            return max(n / 12.0, 50.0)
        return float(self.learning_rate)

    def to_dict(self, n: Optional[int] = None) -> dict:
        """JSON-ready form; resolves derived defaults when n is given."""
        return {
            "perplexity": self.resolved_perplexity(n) if n else self.perplexity,
            "iterations": self.iterations,
            "early_exaggeration_factor": self.early_exaggeration_factor,
            "early_exaggeration_iters": self.early_exaggeration_iters,
            "learning_rate": self.resolved_learning_rate(n) if n else self.learning_rate,
            "momentum_initial": self.momentum_initial,
            "momentum_final": self.momentum_final,
            "momentum_switch_iter": self.momentum_switch_iter,
            "seed": self.seed,
            "init": self.init,
        }


def pairwise_sq_distances(features: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance matrix (symmetric, zero diagonal)."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be 2-D")
    if not np.isfinite(x).all():
        raise ValueError("features contain non-finite values")
    return _kernels.pairwise_sq_dists(x)


def conditional_affinities(sq_dists: np.ndarray, perplexity: float) -> np.ndarray:
    """Row-stochastic conditional affinities at the given perplexity.

    Each row's Shannon entropy (bits) matches log2(perplexity) within
    1e-4 wherever that target is reachable; rows with all-equal distances
    are uniform by symmetry.
    """
    sq_dists = np.ascontiguousarray(sq_dists, dtype=np.float64)
    n = sq_dists.shape[0]
    if n < 3:
        raise ValueError("need at least 3 items to calibrate affinities")
    target = float(np.log2(min(float(perplexity), float(n - 1))))
    p_cond, fail_row = _kernels.conditional_affinities(
        sq_dists, target, _ENTROPY_TOL_BITS, _MAX_SEARCH_ITERS
    )
    if fail_row >= 0:
        raise CalibrationFailed(fail_row)
    return p_cond


def calibrate_affinities(sq_dists: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized joint affinities P = (P(j|i) + P(i|j)) / 2N; sums to 1."""
    p_cond = conditional_affinities(sq_dists, perplexity)
    n = p_cond.shape[0]
    return (p_cond + p_cond.T) / (2.0 * n)


def kl_divergence(p: np.ndarray, coords: np.ndarray) -> float:
    """KL(P || Q) with Q the student-t affinities of the coordinates."""
    _, kl = _kernels.tsne_grad_kl(
        np.ascontiguousarray(p, dtype=np.float64),
        np.ascontiguousarray(coords, dtype=np.float64),
        1.0,
    )
    return float(kl)


def tsne_gradient(p: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Analytic gradient of the KL objective at the given coordinates."""
    grad, _ = _kernels.tsne_grad_kl(
        np.ascontiguousarray(p, dtype=np.float64),
        np.ascontiguousarray(coords, dtype=np.float64),
        1.0,
    )
    return grad


def _pca_init(features: np.ndarray) -> np.ndarray:
    x = features - features.mean(axis=0)
    # Deterministic sign convention: largest-magnitude loading positive.
    _, _, vt = np.linalg.svd(x, full_matrices=False)
    comps = vt[:2]
    for r in range(comps.shape[0]):
        pivot = np.argmax(np.abs(comps[r]))
        if comps[r, pivot] < 0:
            comps[r] = -comps[r]
    y = x @ comps.T
    if y.shape[1] < 2:  # D == 1 input
        y = np.hstack([y, np.zeros((y.shape[0], 1))])
    return y


def _initial_coords(features: np.ndarray, config: TsneConfig,
                    rng: np.random.Generator) -> np.ndarray:
    n = features.shape[0]
    if config.init == "pca":
        y = _pca_init(features)
        spread = float(np.std(y[:, 0]))
        if spread > 0.0:
            return y / spread * 1e-4
        # all points identical along PC1: fall through to random
    return rng.standard_normal((n, 2)) * 1e-4


def run_tsne_traced(embeddings: EmbeddingSet,
                    config: TsneConfig) -> tuple[Projection2D, np.ndarray]:
    """Project to 2D; also return the KL trace (length iterations + 1).

    trace[t] is the true KL(P||Q) after t gradient updates, so trace[0]
    scores the initialization and trace[-1] the returned coordinates.
    """
    n = embeddings.n_items
    if n < 3:
        raise ValueError("need at least 3 items for a t-SNE projection")
    perplexity = config.resolved_perplexity(n)
    lr = config.resolved_learning_rate(n)
    rng = np.random.default_rng(config.seed)

    sq_dists = pairwise_sq_distances(embeddings.features)
    p = calibrate_affinities(sq_dists, perplexity)

    y = _initial_coords(embeddings.features, config, rng)
    velocity = np.zeros_like(y)
    trace = np.empty(config.iterations + 1, dtype=np.float64)

    for it in range(config.iterations):
        exag = (config.early_exaggeration_factor
                if it < config.early_exaggeration_iters else 1.0)
        momentum = (config.momentum_initial
                    if it < config.momentum_switch_iter else config.momentum_final)
        grad, kl = _kernels.tsne_grad_kl(p, y, exag)
        trace[it] = kl  # true KL at the coords entering this iteration
        velocity = momentum * velocity - lr * grad
        y = y + velocity
        y = y - y.mean(axis=0)
        if not np.isfinite(y).all() or np.abs(y).max() > _DIVERGENCE_LIMIT:
            raise NonFinite(f"coordinates diverged at iteration {it}")
    trace[config.iterations] = kl_divergence(p, y)

    return Projection2D(ids=embeddings.ids, coords=y), trace


def run_tsne(embeddings: EmbeddingSet, config: TsneConfig) -> Projection2D:
    """Deterministic 2D projection of the pool (see run_tsne_traced)."""
    projection, _ = run_tsne_traced(embeddings, config)
    return projection
