"""Kernel backend selection.

The compiled extension is used when importable; ``FERMIVQE_KERNELS=python``
forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("FERMIVQE_KERNELS", "").lower() not in ("python", "py", "numpy"):
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

apply_gates = _impl.apply_gates
apply_gates_dagger = _impl.apply_gates_dagger
adjoint_sums = _impl.adjoint_sums


def available_backends() -> dict[str, object]:
    out: dict[str, object] = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        return out
    out["cython"] = _ckernels
    return out
