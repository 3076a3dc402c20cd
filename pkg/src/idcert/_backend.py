"""Select the compiled kernels when available, else the pure-Python ones.

Set ``IDCERT_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

kernels = _kernels_py

if not os.environ.get("IDCERT_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        kernels = _compiled

BACKEND = kernels.BACKEND
python_kernels = _kernels_py
