"""Pure numpy implementations of the array kernels.

These back the metric/proximity/map layers when the compiled extension is
unavailable (or disabled via PROXPOINT_PURE_KERNELS=1).  Contract shared
with ``_core.pyx``:

- inputs are C-contiguous float64 matrices, NaN-free;
- witness indices are deterministic: among all entries attaining the
  reported extremum, the first in row-major order wins;
- floating arithmetic matches the compiled twin expression-for-expression,
  so results are bit-identical across implementations.
"""
import numpy as np


def min_entry(d):
    """Smallest entry of a matrix with its (row, col) witness."""
    flat = int(np.argmin(d))
    i, j = divmod(flat, d.shape[1])
    return float(d[i, j]), i, j


def max_diff(a, b):
    """Largest entry of a - b with its (row, col) witness."""
    diff = a - b
    flat = int(np.argmax(diff))
    i, j = divmod(flat, a.shape[1])
    return float(diff[i, j]), i, j


def max_abs_diff(a, b):
    """Largest entry of |a - b| with its (row, col) witness."""
    diff = np.abs(a - b)
    flat = int(np.argmax(diff))
    i, j = divmod(flat, a.shape[1])
    return float(diff[i, j]), i, j


def row_mins(d):
    """Per-row minimum and first attaining column index."""
    return d.min(axis=1), d.argmin(axis=1).astype(np.int64)


def hausdorff_value(d):
    """Symmetric Hausdorff value of a cross-distance matrix.

    max(largest row-min, largest column-min): rows index the first set,
    columns the second.
    """
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def triangle_scan(d):
    """Worst triangle-inequality defect over all ordered triples.

    Scans d[i,k] - (d[i,j] + d[j,k]) for every (i, j, k); returns
    (defect, i, j, k, n_violations) where n_violations counts strictly
    positive defects.  The witness is the lexicographically first triple
    attaining the maximum.
    """
    n = d.shape[0]
    best = -np.inf
    bi = bj = bk = 0
    count = 0
    for j in range(n):
        slack = d - (d[:, j : j + 1] + d[j : j + 1, :])
        count += int(np.count_nonzero(slack > 0.0))
        flat = int(np.argmax(slack))
        i, k = divmod(flat, n)
        v = float(slack[i, k])
        if v > best or (v == best and (i, j, k) < (bi, bj, bk)):
            best, bi, bj, bk = v, i, j, k
    return best, bi, bj, bk, count
