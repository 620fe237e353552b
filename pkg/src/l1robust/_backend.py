"""Select the kernel backend at import time.

The compiled extension is used when it imports cleanly, unless the
environment variable ``L1ROBUST_PURE_PYTHON`` is set to a non-empty value
other than ``0``.
"""
import os

from . import _kernels_py

_force_py = os.environ.get("L1ROBUST_PURE_PYTHON", "") not in ("", "0")

kernels = _kernels_py
BACKEND = "python"
if not _force_py:
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"

python_kernels = _kernels_py


def compiled_kernels():
    """Return the compiled kernel module, or None if it was not built."""
    try:
        from . import _kernels as mod
    except ImportError:
        return None
    return mod
