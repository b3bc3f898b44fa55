"""Kernel backend selection.

The compiled core (``_core``, Cython) is used when importable; otherwise
the numpy fallback (``_python``) takes over transparently. Set
``COLDSELECT_KERNELS=python`` or ``=ext`` to force a backend (forcing
``ext`` raises if the extension is missing; the benchmark uses this).

Only the projection hot loops live here. Clustering, selection, and
metrics are plain numpy on 2D coordinates, so selection results never
depend on the backend for a given projection.
"""

import os

from . import _python

_choice = os.environ.get("COLDSELECT_KERNELS", "auto").strip().lower()

if _choice == "python":
    _impl = _python
elif _choice == "ext":
    from . import _core as _impl  # ImportError here is intentional
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _python

BACKEND = _impl.BACKEND_NAME

pairwise_sq_dists = _impl.pairwise_sq_dists
conditional_affinities = _impl.conditional_affinities
tsne_grad_kl = _impl.tsne_grad_kl


def available_backends():
    """Names of importable backends (used by tests and the benchmark)."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401
        names.insert(0, "ext")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return a specific backend module by name ('ext' or 'python')."""
    if name == "python":
        return _python
    if name == "ext":
        from . import _core
        return _core
    raise ValueError(f"unknown backend: {name}")
