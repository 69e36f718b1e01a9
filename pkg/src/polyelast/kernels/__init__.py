"""Assembly kernels: compiled core with a pure-Python fallback.

The hot loops of the assembly (per-cell consistency/stabilisation blocks and
per-face jump-penalty blocks) are implemented twice with identical contracts:
in Cython (``_ckernels``) and in numpy (``_pykernels``).  The compiled module
is preferred when importable; set ``POLYELAST_PURE_PYTHON=1`` to force the
fallback.  ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _pykernels

if os.environ.get("POLYELAST_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

cell_triplets = _impl.cell_triplets
face_triplets = _impl.face_triplets

__all__ = ["BACKEND", "cell_triplets", "face_triplets", "_pykernels"]
