"""Hot kernels with a compiled core and a pure-numpy fallback.

The compiled extension ``_ckernels`` is used when it can be imported; set the
environment variable ``GCVLASOV_PURE_PYTHON=1`` to force the numpy versions.
Both expose ``boris_push``, ``deposit_cic``, ``gather_cic`` and
``lagrange3_rows`` with identical signatures.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` ("cython", "python" or None=auto)."""
    if name is None:
        if _ckernels is not None and not os.environ.get("GCVLASOV_PURE_PYTHON"):
            return _ckernels
        return _pykernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


_active = get_backend()
BACKEND = "cython" if _active is _ckernels and _ckernels is not None else "python"

boris_push = _active.boris_push
deposit_cic = _active.deposit_cic
gather_cic = _active.gather_cic
lagrange3_rows = _active.lagrange3_rows

__all__ = [
    "BACKEND",
    "get_backend",
    "boris_push",
    "deposit_cic",
    "gather_cic",
    "lagrange3_rows",
]
