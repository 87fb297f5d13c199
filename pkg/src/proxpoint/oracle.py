"""Brute-force ground truth, independent of the solver pipeline.

Two exhaustive scans: ``brute_force_bpp`` minimizes d(x, Tx) over a
domain against the original map (nearest image member when multivalued),
and ``brute_force_fixed_points`` thresholds d(x, F x) over a reduced
self-map.  Neither shares logic with the iterative solvers beyond the
metric backend, so agreement between the two routes is evidence, not
tautology.  ``cross_check`` compares a solver result against an oracle
scan; disagreement is reported, never repaired.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OracleResult:
    """Minimizer set of an exhaustive scan.

    ``minimizers`` holds ids in ascending order; ``objective`` is the
    scan minimum and ``runner_up`` the best objective outside the
    minimizer set (inf when the set covers the whole domain), which is
    what uniqueness guards measure.
    """

    kind: str  # "best_proximity" | "fixed_point"
    minimizers: np.ndarray
    objective: float
    runner_up: float
    tol: float
    domain_size: int


def _collect(kind, ids, objective, mask, tol):
    minimizers = np.sort(ids[mask])
    rest = objective[~mask]
    runner_up = float(rest.min()) if rest.size else np.inf
    best = float(objective.min()) if objective.size else np.inf
    return OracleResult(kind, minimizers, best, runner_up, float(tol), int(ids.size))


def brute_force_bpp(tmap, domain=None, tol=1e-9):
    """Scan a domain for minimizers of d(x, Tx).

    Accepts single- or multivalued maps (the latter measure the nearest
    image-set member).  Minimizers are every x within ``tol`` of the
    scan minimum.
    """
    ids = tmap.domain.ids if domain is None else domain.ids
    space = tmap.domain.space
    if tmap.multivalued:
        objective = np.asarray(
            [float(space.pairwise(ids[i : i + 1], tmap.image_of(x)).min()) for i, x in enumerate(ids)]
        )
    else:
        objective = space.aligned_distances(ids, tmap.images_for(ids))
    mask = objective <= objective.min() + tol
    return _collect("best_proximity", ids, objective, mask, tol)


def brute_force_fixed_points(selfmap, tol=1e-9):
    """Scan a reduced self-map for members with d(x, F x) <= tol.

    The threshold is absolute (a fixed point is a fixed point), so the
    minimizer set may be empty.
    """
    domain = selfmap.domain
    ids = domain.ids
    space = domain.space
    if selfmap.multivalued:
        objective = np.asarray(
            [
                float(space.pairwise(ids[p : p + 1], ids[cand]).min())
                for p, cand in enumerate(selfmap.table)
            ]
        )
    else:
        objective = space.aligned_distances(ids, ids[np.asarray(selfmap.table, dtype=np.int64)])
    mask = objective <= tol
    return _collect("fixed_point", ids, objective, mask, tol)


@dataclass(frozen=True)
class AgreementReport:
    """Solver-vs-oracle comparison."""

    ok: bool
    x_star: int
    nearest_minimizer: int | None
    min_distance: float
    solver_residual: float
    oracle_residual: float
    residual_gap: float
    tol: float
    note: str = ""


def cross_check(result, oracle, space, tol=1e-9):
    """Compare a solver result with an oracle scan.

    Agreement means the solver's x* lies within ``tol`` of some oracle
    minimizer and the two residuals agree within 2 * tol.  The oracle
    residual is objective - dist(A, B) for best-proximity scans and the
    raw objective for fixed-point scans.
    """
    if oracle.kind == "best_proximity":
        oracle_residual = oracle.objective - result.dist_ab
    else:
        oracle_residual = oracle.objective
    if oracle.minimizers.size == 0:
        return AgreementReport(
            False, result.x_star, None, np.inf, result.residual, oracle_residual,
            abs(result.residual - oracle_residual), float(tol), note="oracle found no qualifying point",
        )
    dvec = space.pairwise(np.asarray([result.x_star], dtype=np.int64), oracle.minimizers)[0]
    k = int(np.argmin(dvec))
    min_distance = float(dvec[k])
    residual_gap = abs(result.residual - oracle_residual)
    ok = min_distance <= tol and residual_gap <= 2.0 * tol
    return AgreementReport(
        ok, result.x_star, int(oracle.minimizers[k]), min_distance,
        result.residual, float(oracle_residual), float(residual_gap), float(tol),
    )


def unique_minimizer(oracle, separation):
    """The single minimizer id, if it beats everything else by ``separation``."""
    if oracle.minimizers.size == 1 and oracle.runner_up - oracle.objective > separation:
        return int(oracle.minimizers[0])
    return None
