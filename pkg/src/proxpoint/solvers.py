"""Reduction of maps A -> B to self-maps of a0, and the fixed-point solvers.

Once a proximal pairing g exists, any T with T(a0) inside g's image pulls
back to F = g^-1 . T on a0, and F preserves image distances:
d(F x, F y) = d(Tx, Ty) because g is an isometry.  A fixed point of F is
then a point whose T-image sits exactly dist(A, B) away, which is the
object the pipeline is after.  Residuals therefore always measure the
original map: residual(x) = d(x, Tx) - dist(A, B) (with the nearest image
member for multivalued T).

Three iterations cover the supported map classes:

- ``picard_solve``       x_{n+1} = F(x_n)   (weakly contractive, Meir-Keeler)
- ``krasnoselskii_solve`` averages x_n with F(x_n) and snaps back to the
  set (nonexpansive maps; Euclidean backend only, and meaningful when the
  domain fills out a convex region finely enough for snapping to stay
  faithful -- the snap distance is recorded in the trace)
- ``nadler_solve``       steps to the nearest member of F(x_n)
  (multivalued contractions; ties to the lowest member position)

Stopping is shared: after each step, the step criterion is checked first,
then the residual criterion; hitting the iteration cap reports MAX_ITERS.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    BackendUnsupportedError,
    CertificationFailedError,
    ImageOutsideB0Error,
)
from .maps import certify_map
from .metric import EuclideanSpace, IndexedSet
from .proximity import build_isometry, check_p_property, proximal_sets

CONVERGED_STEP = "CONVERGED_STEP"
CONVERGED_RESIDUAL = "CONVERGED_RESIDUAL"
MAX_ITERS = "MAX_ITERS"

SOLVER_FOR_CLASS = {
    "weakly_contractive": "picard",
    "meir_keeler": "picard",
    "nonexpansive": "krasnoselskii",
    "multivalued_contraction": "nadler",
}


@dataclass(frozen=True)
class StoppingRule:
    """Iteration limits: step/residual thresholds and the iteration cap."""

    step_tol: float = 1e-10
    residual_tol: float = 1e-8
    max_iters: int = 100_000

    def __post_init__(self):
        if self.step_tol < 0 or self.residual_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class TraceRow:
    """State after one iteration: new iterate id, step size, residual, snap error."""

    iterate: int
    step: float
    residual: float
    snap: float = 0.0


@dataclass(frozen=True)
class BestProximityResult:
    """Terminal state of a solver run.

    ``residual`` is d(x*, T x*) - dist(A, B) measured against the
    original map; ``iterations`` equals the number of trace rows.
    """

    x_star: int
    residual: float
    iterations: int
    trace: tuple
    termination: str
    dist_ab: float


class SelfMap:
    """Self-map of a0 in position form, with residuals of the source map.

    ``table`` maps member positions to member positions (to position
    arrays when multivalued).  ``residuals[p]`` caches
    d(member p, T member p) - dist(A, B), so solvers never re-evaluate
    the original map inside the loop.
    """

    def __init__(self, domain, table, t_images, dist_ab, residuals, multivalued):
        self.domain = domain
        self.space = domain.space
        self.table = table
        self.t_images = t_images
        self.dist_ab = float(dist_ab)
        self.residuals = np.asarray(residuals, dtype=np.float64)
        self.multivalued = multivalued

    @classmethod
    def direct(cls, domain, positions):
        """Self-map given directly as a position table (for tests/benchmarks)."""
        table = np.asarray(positions, dtype=np.int64)
        images = domain.ids[table]
        residuals = domain.space.aligned_distances(domain.ids, images)
        return cls(domain, table, images, 0.0, residuals, False)

    @classmethod
    def direct_multi(cls, domain, position_sets):
        """Multivalued self-map given directly as position arrays."""
        table = tuple(np.sort(np.asarray(s, dtype=np.int64)) for s in position_sets)
        images = tuple(domain.ids[s] for s in table)
        residuals = [
            float(domain.space.pairwise(domain.ids[p : p + 1], imgs).min())
            for p, imgs in enumerate(images)
        ]
        return cls(domain, table, images, 0.0, residuals, True)

    def apply_position(self, pos):
        return self.table[pos]


def reduce_map(tmap, g):
    """Pull a single-valued T: A -> B back to g^-1 . T on a0.

    Every a0 member's image must land in g's image (the proximal part of
    B actually paired); the first member violating that raises
    ImageOutsideB0Error.
    """
    a0 = g.a0
    ids = a0.ids
    t_imgs = tmap.images_for(ids)
    table = np.empty(ids.size, dtype=np.int64)
    for p, (x, y) in enumerate(zip(ids, t_imgs)):
        if not g.can_invert(y):
            raise ImageOutsideB0Error(
                f"T({x}) = {y} is not in the paired proximal part of B; the map does not reduce"
            )
        table[p] = a0.position(g.invert(y))
    residuals = a0.space.aligned_distances(ids, t_imgs) - g.structure.dist_ab
    return SelfMap(a0, table, t_imgs, g.structure.dist_ab, residuals, False)


def reduce_multi_map(tmap, g):
    """Pull a multivalued T: A -> subsets of B back to position sets on a0."""
    a0 = g.a0
    ids = a0.ids
    table = []
    images = []
    residuals = np.empty(ids.size, dtype=np.float64)
    for p, x in enumerate(ids):
        ys = tmap.image_of(x)
        for y in ys:
            if not g.can_invert(int(y)):
                raise ImageOutsideB0Error(
                    f"T({x}) contains {y}, which is not in the paired proximal part of B; "
                    "the map does not reduce"
                )
        positions = np.sort(np.asarray([a0.position(g.invert(int(y))) for y in ys], dtype=np.int64))
        table.append(positions)
        images.append(ys)
        residuals[p] = float(a0.space.pairwise(ids[p : p + 1], ys).min()) - g.structure.dist_ab
    return SelfMap(a0, tuple(table), tuple(images), g.structure.dist_ab, residuals, True)


def _iterate(selfmap, x0, stop, advance):
    domain = selfmap.domain
    pos = domain.position(domain.member(0) if x0 is None else x0)
    trace = []
    termination = MAX_ITERS
    for _ in range(stop.max_iters):
        nxt, step, snap = advance(pos)
        residual = float(selfmap.residuals[nxt])
        trace.append(TraceRow(domain.member(nxt), float(step), residual, float(snap)))
        pos = nxt
        if step <= stop.step_tol:
            termination = CONVERGED_STEP
            break
        if residual <= stop.residual_tol:
            termination = CONVERGED_RESIDUAL
            break
    return BestProximityResult(
        domain.member(pos),
        float(selfmap.residuals[pos]),
        len(trace),
        tuple(trace),
        termination,
        selfmap.dist_ab,
    )


def picard_solve(selfmap, x0=None, stop=StoppingRule()):
    """Iterate x_{n+1} = F(x_n) from x0 (default: lowest-position member)."""
    if selfmap.multivalued:
        raise ValueError("picard iteration needs a single-valued self-map")
    space = selfmap.space
    domain = selfmap.domain

    def advance(pos):
        nxt = int(selfmap.table[pos])
        step = space.distance(domain.member(pos), domain.member(nxt))
        return nxt, step, 0.0

    return _iterate(selfmap, x0, stop, advance)


def krasnoselskii_solve(selfmap, x0=None, lam=0.5, stop=StoppingRule()):
    """Iterate the snapped average x_{n+1} = snap((1-lam) x_n + lam F(x_n)).

    Euclidean backend only.  The average generally falls between members,
    so it snaps to the nearest one (ties to the lowest position); the
    snap distance lands in the trace.
    """
    if selfmap.multivalued:
        raise ValueError("krasnoselskii iteration needs a single-valued self-map")
    if not isinstance(selfmap.space, EuclideanSpace):
        raise BackendUnsupportedError("krasnoselskii averaging needs the euclidean backend")
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie strictly between 0 and 1")
    space = selfmap.space
    domain = selfmap.domain
    coords = space.coords(domain.ids)

    def advance(pos):
        f = int(selfmap.table[pos])
        target = (1.0 - lam) * coords[pos] + lam * coords[f]
        dvec = cdist(target[None, :], coords)[0]
        nxt = int(np.argmin(dvec))
        step = space.distance(domain.member(pos), domain.member(nxt))
        return nxt, step, float(dvec[nxt])

    return _iterate(selfmap, x0, stop, advance)


def nadler_solve(selfmap, x0=None, stop=StoppingRule()):
    """Iterate to the nearest member of F(x_n) (lowest position on ties)."""
    if not selfmap.multivalued:
        raise ValueError("nadler iteration needs a multivalued self-map")
    space = selfmap.space
    domain = selfmap.domain

    def advance(pos):
        cand = selfmap.table[pos]
        dvec = space.pairwise(domain.ids[pos : pos + 1], domain.ids[cand])[0]
        k = int(np.argmin(dvec))
        return int(cand[k]), float(dvec[k]), 0.0

    return _iterate(selfmap, x0, stop, advance)


_SOLVER_FN = {
    "picard": picard_solve,
    "krasnoselskii": krasnoselskii_solve,
    "nadler": nadler_solve,
}


@dataclass
class PreparedSolve:
    """Pipeline state after reduction: ready to iterate from any start."""

    structure: object
    verdict: object
    isometry: object
    certification: object
    selfmap: SelfMap
    solver: str
    stop: StoppingRule
    lam: float
    warnings: tuple

    def run(self, start=None):
        """Solve from a start id in a0 (default: lowest-position member)."""
        if self.solver == "krasnoselskii":
            return krasnoselskii_solve(self.selfmap, start, self.lam, self.stop)
        return _SOLVER_FN[self.solver](self.selfmap, start, stop=self.stop)


@dataclass
class SolveOutcome:
    """PreparedSolve plus the result of one run."""

    structure: object
    verdict: object
    isometry: object
    certification: object
    selfmap: SelfMap
    solver: str
    result: BestProximityResult
    warnings: tuple


def prepare_solve(
    set_a,
    set_b,
    tmap,
    map_class,
    *,
    tol,
    stop=StoppingRule(),
    phi=None,
    delta=None,
    alpha=None,
    lam=0.5,
    eps_grid=None,
    on_certification_failure="abort",
):
    """Run the pipeline up to the reduced self-map.

    Stages: proximal scan, pairwise-isometry check on the attaining pairs
    (refusing on failure), pairing construction, class certification on
    a0 (abort or warn per ``on_certification_failure``), reduction, and
    solver selection by declared class.
    """
    if map_class not in SOLVER_FOR_CLASS:
        raise ValueError(f"unknown map class {map_class!r}")
    if on_certification_failure not in ("abort", "warn"):
        raise ValueError("on_certification_failure must be 'abort' or 'warn'")
    if tmap.multivalued != (map_class == "multivalued_contraction"):
        raise ValueError(f"map arity does not match class {map_class!r}")

    structure = proximal_sets(set_a, set_b, tol)
    verdict = check_p_property(structure)
    g = build_isometry(structure, verdict)
    warnings = list(g.warnings)

    certification = certify_map(
        tmap,
        map_class,
        phi=phi,
        delta=delta,
        alpha=alpha,
        domain=structure.a0,
        eps_grid=eps_grid,
        tol=tol,
    )
    if not certification.holds:
        detail = f"declared class {map_class} refuted on a0"
        if certification.witness is not None:
            detail += f" (witness {certification.witness}, lhs {certification.lhs:.6g} > rhs {certification.rhs:.6g})"
        if certification.note:
            detail += f"; {certification.note}"
        if on_certification_failure == "abort":
            raise CertificationFailedError(detail)
        warnings.append(f"proceeding despite failed certification: {detail}")

    solver = SOLVER_FOR_CLASS[map_class]
    if solver == "krasnoselskii" and not isinstance(set_a.space, EuclideanSpace):
        raise BackendUnsupportedError("krasnoselskii averaging needs the euclidean backend")
    selfmap = reduce_multi_map(tmap, g) if tmap.multivalued else reduce_map(tmap, g)
    return PreparedSolve(structure, verdict, g, certification, selfmap, solver, stop, lam, tuple(warnings))


def best_proximity_solve(set_a, set_b, tmap, map_class, *, start=None, **kwargs):
    """Full pipeline: prepare, iterate, and return everything measured."""
    prepared = prepare_solve(set_a, set_b, tmap, map_class, **kwargs)
    result = prepared.run(start)
    return SolveOutcome(
        prepared.structure,
        prepared.verdict,
        prepared.isometry,
        prepared.certification,
        prepared.selfmap,
        prepared.solver,
        result,
        prepared.warnings,
    )


def strided_starts(n_members, k):
    """k start positions spread evenly over member ranks (deduplicated)."""
    k = max(1, min(int(k), n_members))
    return np.unique((np.arange(k) * n_members) // k)


def seeded_starts(n_members, seeds):
    """One independently seeded random start position per seed (deduplicated)."""
    positions = [int(np.random.default_rng(int(s)).integers(n_members)) for s in seeds]
    return np.unique(np.asarray(positions, dtype=np.int64))


def multi_start_run(prepared, k=0, seeds=()):
    """Run from k strided starts plus one seeded start per seed.

    Returns the results and the max pairwise distance between the found
    points.  At least one start must come from either source.
    """
    domain = prepared.selfmap.domain
    parts = []
    if k:
        parts.append(strided_starts(len(domain), k))
    if len(seeds):
        parts.append(seeded_starts(len(domain), seeds))
    if not parts:
        raise ValueError("multi-start needs a strided count or seeds")
    positions = np.unique(np.concatenate(parts))
    results = [prepared.run(domain.member(int(p))) for p in positions]
    stars = np.asarray([r.x_star for r in results], dtype=np.int64)
    spread = float(domain.space.pairwise(stars, stars).max())
    return results, spread
