"""Kernel backend selection: compiled extension when available, pure Python otherwise.

Set ``LEXSCHED_PURE=1`` to force the pure backend.  ``use()`` switches at
runtime (benchmarks and equivalence tests rely on it).  The compiled kernel
works in C int64, so instances whose magnitudes could overflow a cross
multiplication are routed to the pure backend regardless of selection.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built; pure fallback
    _ckernels = None

_INT64_SAFE = 2**61


def available_backends() -> dict:
    backends = {"pure": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    return backends


def _default_backend():
    if os.environ.get("LEXSCHED_PURE", "").strip() in ("1", "true", "yes"):
        return _pykernels
    return _ckernels if _ckernels is not None else _pykernels


active = _default_backend()


def use(name: str) -> None:
    """Select the kernel backend by name ('pure' or 'cython')."""
    global active
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(backends)}")
    active = backends[name]


def backend_name() -> str:
    return active.BACKEND


def kernel_for(m: int, total_p: int, p_max: int):
    """Kernel module to use for an instance of the given magnitude.

    The compiled kernel requires every intermediate product to fit in
    int64; oversized instances silently fall back to the pure kernel.
    """
    if active is _pykernels:
        return _pykernels
    if m > _ckernels.MAX_MACHINES:
        return _pykernels
    if (total_p + p_max + 1) * (m + 1) >= _INT64_SAFE:
        return _pykernels
    return active
