"""coldselect: annotation-budget sample selection for segmentation pools.

Cold start: project embeddings to 2D, pick the cluster count by silhouette,
seed with medoids, and fill the remaining budget by proportional
farthest-point sampling. Acquisition: blend normalized image entropy with
spatial diversity and pick greedily.
"""

from ._kernels import BACKEND as kernel_backend
from .types import (Budget, ClusteringResult, EmbeddingSet, ItemId,
                    ProbabilityMap, Projection2D, RunConfig, ScoreBlend,
                    SelectionManifest, align, validate_pool)

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "ClusteringResult",
    "EmbeddingSet",
    "ItemId",
    "ProbabilityMap",
    "Projection2D",
    "RunConfig",
    "ScoreBlend",
    "SelectionManifest",
    "align",
    "validate_pool",
    "kernel_backend",
    "__version__",
]
