"""Selects the compiled kernels when available, else the numpy fallback.

Set ``MMIBOOST_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
best_split = _pykernels.best_split
pivot = _pykernels.pivot

if not os.environ.get("MMIBOOST_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        best_split = _ckernels.best_split
        pivot = _ckernels.pivot
        BACKEND = "cython"
