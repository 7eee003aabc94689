"""Kernel backend selection.

The compiled :mod:`extstab._ckernels` extension is used when it was built;
otherwise the numpy fallback in :mod:`extstab._pykernels` is loaded. Set
``EXTSTAB_KERNELS=python`` to force the fallback (``cython`` makes a missing
extension an import error instead of a silent fallback).
"""

from __future__ import annotations

import os

_choice = os.environ.get("EXTSTAB_KERNELS", "auto").lower()

if _choice == "python":
    from . import _pykernels as _impl
elif _choice == "cython":
    from . import _ckernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        from . import _pykernels as _impl

BACKEND: str = _impl.BACKEND
GATE_CODES: dict[str, int] = _impl.GATE_CODES

omega_rows = _impl.omega_rows
mul_phase = _impl.mul_phase
right_mul_rows = _impl.right_mul_rows
left_mul_rows = _impl.left_mul_rows
row_product = _impl.row_product
apply_gate = _impl.apply_gate


def available_backends() -> dict:
    """Both kernel modules that can be imported in this environment."""
    from . import _pykernels

    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
