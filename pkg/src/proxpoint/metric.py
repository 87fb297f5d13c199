"""Metric backends and point-set plumbing.

Two backends share one interface: ``FiniteSpace`` wraps an explicit n-by-n
distance matrix, ``EuclideanSpace`` wraps a registry of coordinate rows
and derives distances on demand.  Points are addressed everywhere by
integer ids into the backend; ``IndexedSet`` is an ordered, duplicate-free
selection of those ids.  All higher layers (proximity scans, certifiers,
solvers, oracle) consume only this interface, so they are backend-blind.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels as kernels

# Cap on entries per pairwise block: large scans stream over row chunks
# instead of materializing the full cross-distance matrix.
CHUNK_ENTRIES = 1 << 22


def _as_ids(ids):
    arr = np.asarray(ids, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("point ids must form a one-dimensional sequence")
    return arr


class FiniteSpace:
    """Finite metric space given by an explicit symmetric distance matrix."""

    kind = "finite"

    def __init__(self, dmat):
        dmat = np.ascontiguousarray(dmat, dtype=np.float64)
        if dmat.ndim != 2 or dmat.shape[0] != dmat.shape[1]:
            raise ValueError("distance matrix must be square")
        if dmat.shape[0] == 0:
            raise ValueError("distance matrix must be nonempty")
        if not np.isfinite(dmat).all():
            raise ValueError("distance matrix entries must be finite")
        self.dmat = dmat
        self.size = dmat.shape[0]

    def check_ids(self, ids):
        ids = _as_ids(ids)
        if ids.size and (ids.min() < 0 or ids.max() >= self.size):
            bad = ids[(ids < 0) | (ids >= self.size)][0]
            raise ValueError(f"point id {bad} out of range for backend of size {self.size}")
        return ids

    def distance(self, p, q):
        """Distance between two point ids."""
        self.check_ids([p, q])
        return float(self.dmat[p, q])

    def pairwise(self, ids_a, ids_b):
        """Cross-distance matrix between two id arrays."""
        ids_a = self.check_ids(ids_a)
        ids_b = self.check_ids(ids_b)
        return np.ascontiguousarray(self.dmat[np.ix_(ids_a, ids_b)])

    def aligned_distances(self, ids_p, ids_q):
        """Row-aligned distances d(p_i, q_i)."""
        ids_p = self.check_ids(ids_p)
        ids_q = self.check_ids(ids_q)
        return self.dmat[ids_p, ids_q].astype(np.float64, copy=False)


class EuclideanSpace:
    """Points in R^n; distances are Euclidean norms of coordinate differences."""

    kind = "euclidean"

    def __init__(self, points):
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise ValueError("points must form an (n, dim) array")
        if points.shape[0] == 0 or points.shape[1] == 0:
            raise ValueError("point registry must be nonempty with dimension >= 1")
        if not np.isfinite(points).all():
            raise ValueError("point coordinates must be finite")
        self.points = points
        self.size = points.shape[0]
        self.dimension = points.shape[1]

    def check_ids(self, ids):
        ids = _as_ids(ids)
        if ids.size and (ids.min() < 0 or ids.max() >= self.size):
            bad = ids[(ids < 0) | (ids >= self.size)][0]
            raise ValueError(f"point id {bad} out of range for backend of size {self.size}")
        return ids

    def coords(self, ids):
        return self.points[self.check_ids(ids)]

    def distance(self, p, q):
        """Distance between two point ids."""
        self.check_ids([p, q])
        delta = self.points[p] - self.points[q]
        return float(np.sqrt(np.sum(delta * delta)))

    def pairwise(self, ids_a, ids_b):
        """Cross-distance matrix between two id arrays."""
        return cdist(self.coords(ids_a), self.coords(ids_b))

    def aligned_distances(self, ids_p, ids_q):
        """Row-aligned distances d(p_i, q_i)."""
        delta = self.coords(ids_p) - self.coords(ids_q)
        return np.sqrt(np.sum(delta * delta, axis=1))


def distance(space, p, q):
    """Distance between point ids ``p`` and ``q`` of a backend."""
    return space.distance(p, q)


def iter_pairwise(space, ids_a, ids_b):
    """Yield (lo, hi, block) row chunks of the cross-distance matrix.

    Blocks cover rows ids_a[lo:hi] against all of ids_b and stay under
    CHUNK_ENTRIES entries each, so callers can scan arbitrarily large
    products at bounded memory.
    """
    n_cols = max(len(ids_b), 1)
    step = max(1, CHUNK_ENTRIES // n_cols)
    for lo in range(0, len(ids_a), step):
        hi = min(lo + step, len(ids_a))
        yield lo, hi, space.pairwise(ids_a[lo:hi], ids_b)


def distance_stats(space, ids):
    """(smallest positive pairwise distance, diameter) over an id array.

    The smallest positive distance is +inf when all pairs coincide or the
    set is a singleton.
    """
    min_pos = np.inf
    diam = 0.0
    for _, _, block in iter_pairwise(space, ids, ids):
        positive = block[block > 0.0]
        if positive.size:
            min_pos = min(min_pos, float(positive.min()))
        diam = max(diam, float(block.max()))
    return min_pos, diam


class IndexedSet:
    """Ordered, duplicate-free selection of backend points.

    Members are backend ids; positions (0-based ranks in member order) are
    how solvers and maps address them internally.  Two distinct members at
    exact distance zero are rejected: the proximal pairing logic needs
    member identity to be point identity.
    """

    def __init__(self, space, members):
        members = space.check_ids(members)
        if members.size == 0:
            raise ValueError("an indexed set must have at least one member")
        unique_ids, first = np.unique(members, return_index=True)
        if unique_ids.size != members.size:
            dup = members[np.setdiff1d(np.arange(members.size), first)[0]]
            raise ValueError(f"duplicate member id {dup}")
        self.space = space
        self.ids = members.copy()
        self._pos = {int(pid): i for i, pid in enumerate(members)}
        self._reject_coincident()

    def _reject_coincident(self):
        if isinstance(self.space, EuclideanSpace):
            rows = self.space.coords(self.ids)
            _, inverse, counts = np.unique(rows, axis=0, return_inverse=True, return_counts=True)
            if counts.max(initial=1) > 1:
                group = int(np.argmax(counts > 1))
                first_two = np.nonzero(inverse == group)[0][:2]
                a, b = self.ids[first_two]
                raise ValueError(f"members {a} and {b} coincide (distance 0)")
        else:
            sub = self.space.pairwise(self.ids, self.ids)
            np.fill_diagonal(sub, np.inf)
            if sub.min() <= 0.0:
                i, j = np.unravel_index(np.argmin(sub), sub.shape)
                a, b = self.ids[i], self.ids[j]
                raise ValueError(f"members {a} and {b} coincide (distance 0)")

    @classmethod
    def _subset(cls, parent, ids):
        """Selection of already-validated members; skips the coincidence scan."""
        obj = object.__new__(cls)
        obj.space = parent.space
        obj.ids = _as_ids(ids).copy()
        obj._pos = {int(pid): i for i, pid in enumerate(obj.ids)}
        return obj

    def __len__(self):
        return int(self.ids.size)

    def __contains__(self, pid):
        return int(pid) in self._pos

    def position(self, pid):
        """Rank of a member id within the set's order."""
        try:
            return self._pos[int(pid)]
        except KeyError:
            raise KeyError(f"point id {pid} is not a member of this set") from None

    def member(self, pos):
        return int(self.ids[pos])


@dataclass(frozen=True)
class AxiomViolation:
    """One violated metric axiom with its worst witness."""

    axiom: str  # "nonnegativity" | "identity" | "symmetry" | "triangle"
    witness: tuple
    defect: float
    count: int


@dataclass(frozen=True)
class MetricAxiomReport:
    """Outcome of checking a distance matrix against the metric axioms."""

    violations: tuple

    @property
    def ok(self):
        return not self.violations


def verify_metric_axioms(space):
    """Check a FiniteSpace matrix for all four metric axioms.

    Returns a report listing one entry per violated axiom, each carrying
    the worst witness (first in row-major order on ties) and the count of
    violating entries/pairs/triples.  Triangle witnesses are ordered
    triples (i, j, k) measuring d(i,k) - d(i,j) - d(j,k).
    """
    if not isinstance(space, FiniteSpace):
        raise TypeError("axiom verification applies to FiniteSpace backends")
    d = space.dmat
    violations = []

    value, i, j = kernels.min_entry(d)
    if value < 0.0:
        count = int(np.count_nonzero(d < 0.0))
        violations.append(AxiomViolation("nonnegativity", (i, j), -value, count))

    diag = np.abs(np.diag(d))
    if diag.max() > 0.0:
        worst = int(np.argmax(diag))
        violations.append(
            AxiomViolation("identity", (worst, worst), float(diag[worst]), int(np.count_nonzero(diag > 0.0)))
        )

    defect, i, j = kernels.max_abs_diff(d, d.T)
    if defect > 0.0:
        count = int(np.count_nonzero(d != d.T)) // 2
        violations.append(AxiomViolation("symmetry", (i, j), defect, count))

    defect, i, j, k, count = kernels.triangle_scan(d)
    if defect > 0.0:
        violations.append(AxiomViolation("triangle", (i, j, k), defect, count))

    return MetricAxiomReport(tuple(violations))
