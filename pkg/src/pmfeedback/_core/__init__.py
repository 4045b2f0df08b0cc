"""Hot loops for discrete-channel trials.

The compiled extension ``_ccore`` is used when it was built; otherwise the
pure-Python ``_pycore`` is selected.  Setting ``PMFEEDBACK_PURE_PYTHON=1``
forces the fallback.  ``BACKEND`` names the active implementation.
"""

import os

from . import _pycore

if os.environ.get("PMFEEDBACK_PURE_PYTHON"):
    _impl = _pycore
else:
    try:
        from . import _ccore as _impl
    except ImportError:
        _impl = _pycore

BACKEND = "cython" if _impl is not _pycore else "python"

dmc_encode = _impl.dmc_encode
dmc_decode = _impl.dmc_decode

__all__ = ["BACKEND", "dmc_encode", "dmc_decode", "_pycore"]
