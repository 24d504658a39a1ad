"""Backend selection for the aggregate-projector kernel.

The compiled kernel is used when it built; otherwise the numpy reference
implementation takes over. Set ALGQST_KERNELS=python or =cython to force
a backend (forcing an unavailable one raises ImportError at import).
"""

from __future__ import annotations

import os

from . import _fusion_py

_BACKENDS = {"python": _fusion_py}
try:
    from . import _fusion_cy
    _BACKENDS["cython"] = _fusion_cy
except ImportError:
    _fusion_cy = None

_forced = os.environ.get("ALGQST_KERNELS", "").strip().lower()
if _forced:
    if _forced not in _BACKENDS:
        raise ImportError(
            f"ALGQST_KERNELS={_forced!r} but available backends are {sorted(_BACKENDS)}")
    _active = _forced
else:
    _active = "cython" if "cython" in _BACKENDS else "python"

ptot_apply = _BACKENDS[_active].ptot_apply

__all__ = ["ptot_apply", "backend_name", "available_backends", "get_backend"]


def backend_name() -> str:
    """Name of the kernel backend in use: "cython" or "python"."""
    return _active


def available_backends() -> list:
    """Backends importable in this environment."""
    return sorted(_BACKENDS)


def get_backend(name: str):
    """Return a named backend's kernel function (for comparisons)."""
    if name not in _BACKENDS:
        raise KeyError(f"unknown backend {name!r}; available {sorted(_BACKENDS)}")
    return _BACKENDS[name].ptot_apply
