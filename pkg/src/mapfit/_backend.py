"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when the
extension is unavailable or when MAPFIT_PURE_PYTHON=1 is set.  Both expose
the same functions with identical semantics (see _kernels_py docstrings).
"""

import os

if os.environ.get("MAPFIT_PURE_PYTHON", "") == "1":
    from mapfit import _kernels_py as kernels
else:
    try:
        from mapfit import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from mapfit import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND = kernels.BACKEND_NAME

blur_3d = kernels.blur_3d
laplacian_3d = kernels.laplacian_3d
overlap_dot = kernels.overlap_dot
sa_minimize = kernels.sa_minimize
brute_force_min = kernels.brute_force_min
