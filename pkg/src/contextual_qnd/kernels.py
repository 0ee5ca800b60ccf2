"""Grid-scan kernels, compiled when available.

The Cython extension ``_kernels`` is preferred; set ``CONTEXTUAL_QND_PURE=1``
to force the numpy fallback.  ``BACKEND`` names the implementation in use.
"""

import os

from . import _kernels_py

_compiled = None
if os.environ.get("CONTEXTUAL_QND_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "python"

linear_region_scan = _impl.linear_region_scan
bloch_ratio_scan = _impl.bloch_ratio_scan


def available_backends():
    """Mapping of backend name to kernel module, for benchmarks and tests."""
    out = {"python": _kernels_py}
    if _compiled is None:
        try:
            from . import _kernels as compiled
        except ImportError:
            compiled = None
    else:
        compiled = _compiled
    if compiled is not None:
        out["cython"] = compiled
    return out
