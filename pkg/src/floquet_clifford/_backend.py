"""Kernel backend selection.

The compiled extension is used when importable; setting
``FLOQUET_CLIFFORD_BACKEND=python`` forces the numpy fallback.
"""

import os

from . import _pykernels

if os.environ.get("FLOQUET_CLIFFORD_BACKEND", "").lower() == "python":
    kernels = _pykernels
else:
    try:
        from . import _ckernels as kernels
    except ImportError:
        kernels = _pykernels

BACKEND: str = kernels.BACKEND
