"""Array kernels with a compiled core and a pure-numpy fallback.

The implementation is chosen once at import: the Cython extension when it
built, numpy otherwise.  Setting PROXPOINT_PURE_KERNELS=1 forces the
fallback (used by the parity tests and the benchmark).  Both
implementations are bit-identical, including tie-break witnesses, so
nothing downstream depends on which one loaded; ``IMPLEMENTATION`` reports
the choice for diagnostics.
"""
import os

import numpy as np

from . import pure

if os.environ.get("PROXPOINT_PURE_KERNELS") == "1":
    _impl = pure
    IMPLEMENTATION = "pure"
else:
    try:
        from . import _core as _impl

        IMPLEMENTATION = "compiled"
    except ImportError:
        _impl = pure
        IMPLEMENTATION = "pure"


def _mat(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def min_entry(d):
    """Smallest entry of a matrix with its (row, col) witness."""
    return _impl.min_entry(_mat(d))


def max_diff(a, b):
    """Largest entry of a - b with its (row, col) witness."""
    return _impl.max_diff(_mat(a), _mat(b))


def max_abs_diff(a, b):
    """Largest entry of |a - b| with its (row, col) witness."""
    return _impl.max_abs_diff(_mat(a), _mat(b))


def row_mins(d):
    """Per-row minimum and first attaining column index."""
    return _impl.row_mins(_mat(d))


def hausdorff_value(d):
    """Symmetric Hausdorff value of a cross-distance matrix."""
    return _impl.hausdorff_value(_mat(d))


def triangle_scan(d):
    """Worst triangle defect (defect, i, j, k, n_violations) over ordered triples."""
    return _impl.triangle_scan(_mat(d))
