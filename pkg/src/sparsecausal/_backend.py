"""Pick the compiled kernels when available, the numpy fallback otherwise.

Set ``SPARSECAUSAL_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

fallback = _fallback

if os.environ.get("SPARSECAUSAL_PURE_PYTHON", "").strip() not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else fallback
NAME = "compiled" if compiled is not None else "python"
