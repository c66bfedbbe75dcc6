"""Kernel lane selection.

The compiled extension is preferred when importable; set
LEADOPT_PURE_PYTHON=1 to force the numpy fallback (used by the
benchmark and by tests that assert lane parity).
"""

import os

from . import _fused_py

if os.environ.get("LEADOPT_PURE_PYTHON"):
    impl = _fused_py
else:
    try:
        from . import _fused as impl  # type: ignore[no-redef]
    except ImportError:
        impl = _fused_py

BACKEND = impl.BACKEND

lsgd_update = impl.lsgd_update
sgd_update = impl.sgd_update
pull_update = impl.pull_update
eagd_worker_update = impl.eagd_worker_update
eagd_center_update = impl.eagd_center_update
