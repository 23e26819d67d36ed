"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is used when it was built and imports cleanly; set
``REC_SIZER_PURE=1`` to force the fallback.  ``BACKEND`` names the active one.
"""

import os

from . import _pykernels as py
from ._pykernels import AT_LOWER, AT_UPPER, BASIC, FIXED, FREE

compiled = None
if os.environ.get("REC_SIZER_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else py
BACKEND = "cython" if compiled is not None else "python"

soft_threshold = _impl.soft_threshold
ftran_etas = _impl.ftran_etas
btran_etas = _impl.btran_etas
price = _impl.price
ratio_test = _impl.ratio_test
lasso_cd = _impl.lasso_cd

__all__ = [
    "AT_LOWER", "AT_UPPER", "BACKEND", "BASIC", "FIXED", "FREE",
    "btran_etas", "compiled", "ftran_etas", "lasso_cd", "price", "py",
    "ratio_test", "soft_threshold",
]
