"""Kernel backend selection.

The compiled Cython core is preferred when built; otherwise the pure
numpy/fsum fallback (identical semantics) is used. ``fusekit bench``
times both when both are present.
"""

from fusekit.errors import InvalidConfigError
from fusekit.kernels import pure

try:
    from fusekit.kernels import _core as _active

    HAS_COMPILED = True
except ImportError:
    _active = pure
    HAS_COMPILED = False

VARIANT_TSALLIS = pure.VARIANT_TSALLIS
VARIANT_SHANNON = pure.VARIANT_SHANNON


def active_backend():
    """Name of the backend selected at import ('compiled' or 'pure')."""
    return _active.name


def available_backends():
    names = ["pure"]
    if HAS_COMPILED:
        names.insert(0, "compiled")
    return names


def get_kernels(backend=None):
    """Kernel namespace for a backend name; None means the active one."""
    if backend is None:
        return _active
    if backend == "pure":
        return pure
    if backend == "compiled":
        if not HAS_COMPILED:
            raise InvalidConfigError("compiled kernel backend is not available")
        return _active
    raise InvalidConfigError(f"unknown kernel backend: {backend!r}")
