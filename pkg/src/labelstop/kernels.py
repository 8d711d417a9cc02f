"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise, or when
``LABELSTOP_PURE_PYTHON`` is set, the numpy fallback is used.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

python_best_stump = _kernels_py.best_stump
compiled_best_stump = _compiled.best_stump if _compiled is not None else None

if _compiled is not None and not os.environ.get("LABELSTOP_PURE_PYTHON"):
    BACKEND = "cython"
    best_stump = compiled_best_stump
else:
    BACKEND = "python"
    best_stump = python_best_stump
