"""Select the compiled kernel module, falling back to pure Python.

Set ``ZETAGOF_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("ZETAGOF_PURE", "") not in ("", "0"):
    from . import _pykernels as kernels
else:
    try:
        from . import _ckernels as kernels
    except ImportError:  # extension not built
        from . import _pykernels as kernels

BACKEND = kernels.BACKEND
