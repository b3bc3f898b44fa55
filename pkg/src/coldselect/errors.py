"""Exception types raised across the package.

Everything derives from ColdselectError so callers (and the CLI) can catch
one base class. Data/format problems and algorithmic preconditions get
their own named classes because tests and pipelines branch on them.
"""


class ColdselectError(Exception):
    """Base class for all package errors."""


class IdMismatch(ColdselectError):
    """Projection and embedding id sequences diverge.

    `position` is the first differing index (or min length on a length
    mismatch).
    """

    def __init__(self, position, message=None):
        self.position = position
        super().__init__(message or f"id mismatch at position {position}")


class CalibrationFailed(ColdselectError):
    """Affinity bandwidth search could not reach the target entropy."""

    def __init__(self, row, message=None):
        self.row = row
        super().__init__(message or f"affinity calibration failed for row {row}")


class NonFinite(ColdselectError):
    """Coordinates diverged during optimization (learning rate too high)."""


class DegenerateInput(ColdselectError):
    """Fewer distinct points than requested clusters."""


class InvalidLabels(ColdselectError):
    """Cluster labels violate a precondition (empty cluster, k < 2)."""


class EmptyCluster(ColdselectError):
    """Operation needs a non-empty cluster."""


class InfeasibleBudget(ColdselectError):
    """Requested selection count cannot be satisfied by the clusters."""


class BudgetExceedsCluster(ColdselectError):
    """Farthest-point quota larger than the cluster's unselected members."""


class BudgetExceedsPool(ColdselectError):
    """Selection budget larger than the candidate pool."""


class EmptySelectedSet(ColdselectError):
    """Diversity is undefined without at least one selected item."""


class ShapeMismatch(ColdselectError):
    """Arrays that must agree in shape (or class count) do not."""


class EmptyMask(ColdselectError):
    """Boundary metric undefined for an empty mask; caller excludes the case."""


class EmptySelection(ColdselectError):
    """Coverage radius needs a non-empty selected set."""


class IoError(ColdselectError):
    """File could not be written or read."""


class BadMagic(IoError):
    """File does not start with the expected magic bytes."""


class TruncatedFile(IoError):
    """File ends before the payload announced by its header."""


class CountMismatch(IoError):
    """Header counts disagree with items.json or with invariants."""


class NotNormalized(IoError):
    """Probability map pixels do not sum to 1 within tolerance."""
