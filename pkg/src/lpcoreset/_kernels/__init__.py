"""Kernel dispatch: compiled extension when available, numpy fallback otherwise.

Set LPCORESET_PURE_PYTHON=1 to force the fallback (useful for benchmarking
and for debugging the compiled path against the reference implementation).
"""

import os

from . import py_fallback

if os.environ.get("LPCORESET_PURE_PYTHON"):
    _impl = py_fallback
    HAVE_COMPILED = False
else:
    try:
        from . import _core as _impl

        HAVE_COMPILED = True
    except ImportError:
        _impl = py_fallback
        HAVE_COMPILED = False

BACKEND = "compiled" if HAVE_COMPILED else "python"

vander_matrix = _impl.vander_matrix
weighted_gram = _impl.weighted_gram
tau_from_cholesky = _impl.tau_from_cholesky
