"""Kernel backend selection.

The compiled extension is used when it imports cleanly; set ``GDOPS_PURE=1``
to force the pure-Python kernels (the test-suite runs both).
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("GDOPS_PURE", "") not in ("", "0"):
    _impl = _fallback
    NAME = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        NAME = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
        NAME = "python"

jacobi_eigh = _impl.jacobi_eigh
elementary_all = _impl.elementary_all
pfold_product = _impl.pfold_product
signed_sum_product = _impl.signed_sum_product

BACKENDS = {"python": _fallback}
if NAME == "cython":
    BACKENDS["cython"] = _impl
else:
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]

        BACKENDS["cython"] = _compiled
    except ImportError:
        pass
