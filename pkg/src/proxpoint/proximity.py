"""Proximal structure of a pair of sets.

For sets A and B in one backend, the scan below finds dist(A, B), the
subsets a0 of A and b0 of B where that distance is attained, and every
attaining pair.  When the attaining pairs preserve distances (the
pairwise-isometry condition checked by ``check_p_property``), they define
a bijection g: a0 -> b0 moving every point by exactly dist(A, B);
``build_isometry`` constructs it and ``verify_isometry`` re-measures its
guarantees from scratch.  That g is what lets solvers pull a map A -> B
back to a self-map of a0.

All comparisons are tolerance-gated: a pair is "attaining" when its
distance is within ``tol`` of the minimum, and g must preserve distances
within the same ``tol``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .errors import NonFunctionalPairingError, NotPPropertyError
from .metric import IndexedSet, iter_pairwise


def _require_same_space(a, b):
    if a.space is not b.space:
        raise ValueError("sets must live in the same backend")
    return a.space


def point_set_distance(x, s):
    """Distance from point id ``x`` to the nearest member of set ``s``."""
    block = s.space.pairwise(np.asarray([x], dtype=np.int64), s.ids)
    return float(block.min())


def set_distance(a, b):
    """dist(A, B): smallest distance between members of the two sets."""
    space = _require_same_space(a, b)
    best = np.inf
    for _, _, block in iter_pairwise(space, a.ids, b.ids):
        value, _, _ = kernels.min_entry(block)
        best = min(best, value)
    return float(best)


@dataclass(frozen=True)
class ProximityStructure:
    """dist(A, B) together with everything that attains it.

    ``pairs`` holds attaining (x, y) backend ids ordered by (position in
    A, position in B); ``pair_positions`` is the same data as positions
    into ``set_a``/``set_b``.  a0 and b0 keep the parent sets' member
    order.
    """

    set_a: IndexedSet
    set_b: IndexedSet
    dist_ab: float
    a0: IndexedSet
    b0: IndexedSet
    pairs: np.ndarray
    pair_positions: np.ndarray
    tol: float


def proximal_sets(a, b, tol):
    """Scan A x B for dist(A, B) and all pairs within ``tol`` of it."""
    space = _require_same_space(a, b)
    if tol < 0:
        raise ValueError("tol must be nonnegative")

    dist_ab = set_distance(a, b)

    rows = []
    cols = []
    cutoff = dist_ab + tol
    for lo, _, block in iter_pairwise(space, a.ids, b.ids):
        hit_r, hit_c = np.nonzero(block <= cutoff)
        rows.append(hit_r + lo)
        cols.append(hit_c)
    a_pos = np.concatenate(rows)
    b_pos = np.concatenate(cols)

    pair_positions = np.column_stack([a_pos, b_pos]).astype(np.int64)
    pairs = np.column_stack([a.ids[a_pos], b.ids[b_pos]]).astype(np.int64)
    a0 = IndexedSet._subset(a, a.ids[np.unique(a_pos)])
    b0 = IndexedSet._subset(b, b.ids[np.unique(b_pos)])
    return ProximityStructure(a, b, dist_ab, a0, b0, pairs, pair_positions, float(tol))


@dataclass(frozen=True)
class PPropertyVerdict:
    """Outcome of the pairwise distance-preservation check on attaining pairs."""

    holds: bool
    defect: float
    witness: tuple | None  # (x1, y1, x2, y2) backend ids at the worst defect
    tol: float
    n_pairs: int


def check_p_property(structure, tol=None):
    """Check that attaining pairs preserve distances pairwise.

    For every two attaining pairs (x1, y1), (x2, y2) the defect
    |d(x1, x2) - d(y1, y2)| must stay within tolerance.  Returns the
    maximal defect; on failure the witness is the worst (first in scan
    order) offending pair of pairs.
    """
    if tol is None:
        tol = structure.tol
    space = structure.set_a.space
    xs = structure.pairs[:, 0]
    ys = structure.pairs[:, 1]

    best = -np.inf
    bi = bj = 0
    for lo, hi, dxx in iter_pairwise(space, xs, xs):
        dyy = space.pairwise(ys[lo:hi], ys)
        value, i, j = kernels.max_abs_diff(dxx, dyy)
        gi = lo + i
        if value > best or (value == best and (gi, j) < (bi, bj)):
            best, bi, bj = value, gi, j

    defect = max(best, 0.0)
    holds = defect <= tol
    witness = None
    if not holds:
        witness = (int(xs[bi]), int(ys[bi]), int(xs[bj]), int(ys[bj]))
    return PPropertyVerdict(holds, float(defect), witness, float(tol), int(xs.size))


class ProximityIsometry:
    """Bijection g: a0 -> b0 moving every member by exactly dist(A, B).

    The constructor only stores; guarantees come from ``build_isometry``
    (which selects and validates) and can be re-measured at any time with
    ``verify_isometry``.
    """

    def __init__(self, structure, image_ids, warnings=()):
        image_ids = np.asarray(image_ids, dtype=np.int64)
        if image_ids.shape != structure.a0.ids.shape:
            raise ValueError("one image per a0 member required")
        self.structure = structure
        self.a0 = structure.a0
        self.image_ids = image_ids.copy()
        self.warnings = tuple(warnings)
        self._inverse = {int(y): int(x) for x, y in zip(structure.a0.ids, image_ids)}

    @property
    def tol(self):
        return self.structure.tol

    def apply(self, pid):
        """Image of an a0 member."""
        return int(self.image_ids[self.a0.position(pid)])

    def can_invert(self, pid):
        return int(pid) in self._inverse

    def invert(self, pid):
        """Preimage of an image member."""
        try:
            return self._inverse[int(pid)]
        except KeyError:
            raise KeyError(f"point id {pid} is not an image of this pairing") from None


@dataclass(frozen=True)
class IsometryReport:
    """Re-measured guarantees of a pairing, independent of its construction."""

    isometry_defect: float
    isometry_witness: tuple | None  # (x1, x2) ids at the worst defect
    pair_defect: float
    pair_witness: int | None  # a0 member id at the worst defect
    bijective: bool
    tol: float

    @property
    def ok(self):
        return self.bijective and self.isometry_defect <= self.tol and self.pair_defect <= self.tol


def verify_isometry(g):
    """Measure distance preservation, pair distances, and bijectivity of g.

    Everything is recomputed from the stored arrays: the isometry defect
    max |d(x1, x2) - d(g x1, g x2)|, the pair defect
    max |d(x, g x) - dist(A, B)|, and exact round-trip bijectivity.
    """
    space = g.a0.space
    xs = g.a0.ids
    ys = g.image_ids

    best = -np.inf
    bi = bj = 0
    for lo, hi, dxx in iter_pairwise(space, xs, xs):
        dyy = space.pairwise(ys[lo:hi], ys)
        value, i, j = kernels.max_abs_diff(dxx, dyy)
        gi = lo + i
        if value > best or (value == best and (gi, j) < (bi, bj)):
            best, bi, bj = value, gi, j
    iso_defect = max(float(best), 0.0)
    iso_witness = (int(xs[bi]), int(xs[bj])) if iso_defect > g.tol else None

    moved = space.aligned_distances(xs, ys)
    pair_gaps = np.abs(moved - g.structure.dist_ab)
    worst = int(np.argmax(pair_gaps))
    pair_defect = float(pair_gaps[worst])
    pair_witness = int(xs[worst]) if pair_defect > g.tol else None

    forward_injective = np.unique(ys).size == ys.size
    roundtrip = forward_injective and all(g.invert(int(y)) == int(x) for x, y in zip(xs, ys))

    return IsometryReport(iso_defect, iso_witness, pair_defect, pair_witness, bool(roundtrip), g.tol)


def build_isometry(structure, verdict=None):
    """Select the proximal pairing g: a0 -> b0 and validate it.

    Requires the P-property (raises NotPPropertyError otherwise).  A
    member with several attaining partners gets the nearest one (ties to
    the lowest B position) and a warning is recorded; partners further
    than ``tol`` apart mean the pairing is not a function at this
    tolerance and raise NonFunctionalPairingError, as does any collision
    between selected images.
    """
    if verdict is None:
        verdict = check_p_property(structure)
    if not verdict.holds:
        x1, y1, x2, y2 = verdict.witness
        raise NotPPropertyError(
            f"attaining pairs ({x1},{y1}) and ({x2},{y2}) change mutual distance "
            f"by {verdict.defect:.6g} (tol {verdict.tol:.6g})"
        )

    space = structure.set_a.space
    a_pos = structure.pair_positions[:, 0]
    b_pos = structure.pair_positions[:, 1]
    warnings = []
    chosen = np.empty(len(structure.a0), dtype=np.int64)

    for rank, apos in enumerate(np.unique(a_pos)):
        x_id = structure.set_a.ids[apos]
        cand_pos = np.sort(b_pos[a_pos == apos])
        cand_ids = structure.set_b.ids[cand_pos]
        if cand_ids.size > 1:
            spread = space.pairwise(cand_ids, cand_ids)
            worst = float(spread.max())
            if worst > structure.tol:
                i, j = np.unravel_index(np.argmax(spread), spread.shape)
                raise NonFunctionalPairingError(
                    f"A member {x_id} has attaining partners {cand_ids[i]} and "
                    f"{cand_ids[j]} separated by {worst:.6g} (tol {structure.tol:.6g})"
                )
            dists = space.pairwise(np.asarray([x_id]), cand_ids)[0]
            pick = int(np.argmin(dists))
            warnings.append(
                f"A member {x_id}: {cand_ids.size} attaining partners within tolerance; kept {cand_ids[pick]}"
            )
            chosen[rank] = cand_ids[pick]
        else:
            chosen[rank] = cand_ids[0]

    unique_images, counts = np.unique(chosen, return_counts=True)
    if unique_images.size != chosen.size:
        y = int(unique_images[np.argmax(counts)])
        owners = structure.a0.ids[chosen == y][:2]
        raise NonFunctionalPairingError(
            f"members {owners[0]} and {owners[1]} both pair with {y}; pairing is not injective"
        )
    if unique_images.size != len(structure.b0):
        leftover = np.setdiff1d(structure.b0.ids, unique_images)
        warnings.append(
            f"{leftover.size} b0 member(s) left unpaired after nearest-partner selection: {leftover[:4].tolist()}"
        )

    g = ProximityIsometry(structure, chosen, warnings)
    report = verify_isometry(g)
    if not report.ok:
        raise NonFunctionalPairingError(
            "selected pairing violates its own tolerance bounds "
            f"(isometry defect {report.isometry_defect:.6g}, pair defect {report.pair_defect:.6g})"
        )
    return g
