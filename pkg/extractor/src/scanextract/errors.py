class ScanextractError(Exception):
    """Base class for extractor errors."""


class UnreadableImage(ScanextractError):
    """Image file missing, corrupt, or in an unsupported format."""


class EncoderLoadError(ScanextractError):
    """Encoder weights unavailable or incompatible."""


class ShapeMismatch(ScanextractError):
    """Tensor shape or class count disagrees with expectations."""


class NotNormalized(ScanextractError):
    """Per-pixel class probabilities do not sum to 1 within tolerance."""
