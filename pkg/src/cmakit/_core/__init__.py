"""Backend selection for the hot numerical kernels.

Prefers the compiled Cython module; falls back to the numpy/LAPACK
implementation when the extension was not built. Set CMAKIT_PURE_PYTHON=1 to
force the fallback (used by the benchmark and the backend-equivalence tests).
"""

import os

if os.environ.get("CMAKIT_PURE_PYTHON"):
    from cmakit._core import _fallback as _impl
else:
    try:
        from cmakit._core import _recursions as _impl  # type: ignore[no-redef]
    except ImportError:
        from cmakit._core import _fallback as _impl

BACKEND = _impl.BACKEND
innovations_recursion = _impl.innovations_recursion
levinson_recursion = _impl.levinson_recursion
ma_expansion = _impl.ma_expansion
hurwitz_zeta_scalar = _impl.hurwitz_zeta_scalar
hurwitz_zeta_array = _impl.hurwitz_zeta_array

__all__ = [
    "BACKEND",
    "innovations_recursion",
    "levinson_recursion",
    "ma_expansion",
    "hurwitz_zeta_scalar",
    "hurwitz_zeta_array",
]
