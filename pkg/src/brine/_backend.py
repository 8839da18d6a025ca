"""Kernel backend selection: compiled extension if available, else Python.

Set BRINE_FORCE_PURE=1 to force the pure-Python kernel (used by the
benchmark and the backend-equivalence test).
"""

import os

if os.environ.get("BRINE_FORCE_PURE") == "1":
    from brine import _kernels_py as _impl
    HAVE_COMPILED = False
else:
    try:
        from brine import _kernels as _impl  # type: ignore[attr-defined]
        HAVE_COMPILED = True
    except ImportError:
        from brine import _kernels_py as _impl
        HAVE_COMPILED = False

run_sweeps = _impl.run_sweeps
BACKEND = "compiled" if HAVE_COMPILED else "pure-python"
