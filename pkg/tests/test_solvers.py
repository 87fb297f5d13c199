import numpy as np
import pytest

from proxpoint import (
    CONVERGED_RESIDUAL,
    CONVERGED_STEP,
    MAX_ITERS,
    BackendUnsupportedError,
    CertificationFailedError,
    ComparisonFunction,
    EuclideanSpace,
    FiniteSpace,
    ImageOutsideB0Error,
    IndexedSet,
    SelfMap,
    SingleValuedMap,
    StoppingRule,
    best_proximity_solve,
    build_isometry,
    krasnoselskii_solve,
    multi_start_run,
    seeded_starts,
    nadler_solve,
    picard_solve,
    prepare_solve,
    proximal_sets,
    reduce_map,
    strided_starts,
)


def _segments(count, spacing=None):
    t = np.arange(count) / (count - 1) if spacing is None else np.arange(count) * spacing
    pts = np.vstack(
        [
            np.column_stack([np.zeros(t.size), t]),
            np.column_stack([np.ones(t.size), t]),
        ]
    )
    space = EuclideanSpace(pts)
    return space, IndexedSet(space, range(t.size)), IndexedSet(space, range(t.size, 2 * t.size))


def _geometric_line():
    pos = [8.0, 4.0, 2.0, 1.0]
    dmat = [[abs(p - q) for q in pos] for p in pos]
    space = FiniteSpace(dmat)
    return space, IndexedSet(space, range(4))


def test_stopping_rule_validation():
    with pytest.raises(ValueError):
        StoppingRule(step_tol=-1.0)
    with pytest.raises(ValueError):
        StoppingRule(max_iters=0)


def test_reduce_map_floor_halving():
    _, set_a, set_b = _segments(5)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], 0.2)
    g = build_isometry(proximal_sets(set_a, set_b, 1e-9))
    selfmap = reduce_map(tmap, g)
    assert selfmap.table.tolist() == [0, 0, 1, 1, 2]
    assert selfmap.dist_ab == 1.0
    assert selfmap.residuals[0] == 0.0
    assert (selfmap.residuals[1:] > 0).all()


def test_reduce_map_image_outside_b0():
    # Domain covers [0, 1/2] but doubling sends its top half past the
    # paired part of B.
    space_pts = np.vstack(
        [
            np.column_stack([np.zeros(5), np.arange(5) / 8.0]),
            np.column_stack([np.ones(9), np.arange(9) / 8.0]),
        ]
    )
    space = EuclideanSpace(space_pts)
    set_a = IndexedSet(space, range(5))
    set_b = IndexedSet(space, range(5, 14))
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, 2.0]], [1.0, 0.0], 1e-9)
    g = build_isometry(proximal_sets(set_a, set_b, 1e-9))
    with pytest.raises(ImageOutsideB0Error):
        reduce_map(tmap, g)


def test_picard_on_geometric_line():
    _, domain = _geometric_line()
    selfmap = SelfMap.direct(domain, [1, 2, 3, 3])
    result = picard_solve(selfmap, 0)
    assert result.x_star == 3
    assert result.termination == CONVERGED_RESIDUAL
    assert result.iterations == 3
    assert len(result.trace) == result.iterations
    assert [row.iterate for row in result.trace] == [1, 2, 3]
    assert [row.step for row in result.trace] == [4.0, 2.0, 1.0]


def test_converged_step_at_fixed_point():
    _, domain = _geometric_line()
    selfmap = SelfMap.direct(domain, [1, 2, 3, 3])
    result = picard_solve(selfmap, 3)
    assert result.termination == CONVERGED_STEP
    assert result.iterations == 1
    assert result.x_star == 3


def test_step_checked_before_residual():
    # A stalled iterate terminates on the step criterion even when its
    # residual is still large, surfacing the stall instead of masking it.
    _, domain = _geometric_line()
    selfmap = SelfMap(domain, np.asarray([0, 0, 0, 0]), domain.ids[[0, 0, 0, 0]], 0.0,
                      [0.7, 0.7, 0.7, 0.7], False)
    result = picard_solve(selfmap, 0)
    assert result.termination == CONVERGED_STEP
    assert result.residual == 0.7


def test_max_iters_on_two_cycle():
    _, domain = _geometric_line()
    selfmap = SelfMap.direct(domain, [3, 2, 1, 0])
    result = picard_solve(selfmap, 0, StoppingRule(max_iters=50))
    assert result.termination == MAX_ITERS
    assert result.iterations == 50


def test_picard_rejects_multivalued():
    _, domain = _geometric_line()
    multi = SelfMap.direct_multi(domain, [[1], [2], [3], [3]])
    with pytest.raises(ValueError):
        picard_solve(multi)
    single = SelfMap.direct(domain, [1, 2, 3, 3])
    with pytest.raises(ValueError):
        nadler_solve(single)


def test_krasnoselskii_reaches_midpoint():
    _, set_a, set_b = _segments(17)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, -1.0]], [1.0, 1.0], 1e-9)
    g = build_isometry(proximal_sets(set_a, set_b, 1e-9))
    selfmap = reduce_map(tmap, g)
    result = krasnoselskii_solve(selfmap, 0, 0.5)
    assert result.x_star == 8
    assert result.iterations == 1
    assert result.termination == CONVERGED_RESIDUAL
    # Plain Picard on the same reduced map oscillates between the ends.
    picard = picard_solve(selfmap, 0, StoppingRule(max_iters=200))
    assert picard.termination == MAX_ITERS


def test_krasnoselskii_snap_recorded():
    # With lambda = 1/4 the average from the end lands between members:
    # from t=0 the target is 1/4 of the way to 1, off the 1/3-spaced
    # grid, so a nonzero snap distance must appear in the trace.
    _, set_a, set_b = _segments(4)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, -1.0]], [1.0, 1.0], 1e-9)
    g = build_isometry(proximal_sets(set_a, set_b, 1e-9))
    selfmap = reduce_map(tmap, g)
    result = krasnoselskii_solve(selfmap, 0, 0.25, StoppingRule(max_iters=10))
    assert any(row.snap > 0 for row in result.trace)


def test_krasnoselskii_guards():
    _, domain = _geometric_line()
    selfmap = SelfMap.direct(domain, [1, 2, 3, 3])
    with pytest.raises(BackendUnsupportedError):
        krasnoselskii_solve(selfmap, 0)
    _, set_a, set_b = _segments(5)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, -1.0]], [1.0, 1.0], 1e-9)
    g = build_isometry(proximal_sets(set_a, set_b, 1e-9))
    euclid = reduce_map(tmap, g)
    with pytest.raises(ValueError):
        krasnoselskii_solve(euclid, 0, lam=1.0)


def test_nadler_descends_chain_with_tie_break():
    space = EuclideanSpace([[0.0], [1.0], [-1.0], [0.25]])
    domain = IndexedSet(space, [0, 1, 2, 3])
    selfmap = SelfMap.direct_multi(domain, [[1, 2], [3], [3], [3]])
    result = nadler_solve(selfmap, 0, StoppingRule(max_iters=5))
    # Members 1 and -1 are equidistant from 0; the lower position wins.
    assert result.trace[0].iterate == 1
    assert result.x_star == 3
    assert result.termination == CONVERGED_RESIDUAL


def test_prepare_solve_certification_abort_and_warn():
    _, set_a, set_b = _segments(17)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, -1.0]], [1.0, 1.0], 1e-9)
    phi = ComparisonFunction.linear(0.5)
    with pytest.raises(CertificationFailedError):
        prepare_solve(set_a, set_b, tmap, "weakly_contractive", tol=1e-9, phi=phi)
    prepared = prepare_solve(
        set_a, set_b, tmap, "weakly_contractive", tol=1e-9, phi=phi,
        on_certification_failure="warn",
    )
    assert not prepared.certification.holds
    assert any("refuted" in w for w in prepared.warnings)
    assert prepared.solver == "picard"


def test_prepare_solve_rejects_mismatched_arity():
    _, set_a, set_b = _segments(5)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], 0.2)
    with pytest.raises(ValueError):
        prepare_solve(set_a, set_b, tmap, "multivalued_contraction", tol=1e-9, alpha=0.5)
    with pytest.raises(ValueError):
        prepare_solve(set_a, set_b, tmap, "no_such_class", tol=1e-9)


def test_best_proximity_solve_segments_small():
    _, set_a, set_b = _segments(5)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], 0.2)
    outcome = best_proximity_solve(
        set_a, set_b, tmap, "weakly_contractive",
        phi=ComparisonFunction.linear(0.5), tol=1e-9, start=4,
    )
    assert outcome.result.x_star == 0
    assert outcome.result.residual == 0.0
    assert outcome.result.dist_ab == 1.0
    assert outcome.solver == "picard"


def test_strided_starts_spread():
    assert strided_starts(10, 3).tolist() == [0, 3, 6]
    assert strided_starts(4, 100).tolist() == [0, 1, 2, 3]
    assert strided_starts(7, 1).tolist() == [0]


def test_multi_start_agreement():
    _, set_a, set_b = _segments(9)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], 0.1)
    prepared = prepare_solve(
        set_a, set_b, tmap, "weakly_contractive",
        phi=ComparisonFunction.linear(0.5), tol=1e-9,
    )
    results, spread = multi_start_run(prepared, 5)
    assert len(results) == 5
    assert spread == 0.0
    assert {r.x_star for r in results} == {0}


def test_seeded_starts_are_reproducible():
    first = seeded_starts(100, (7, 21, 7))
    assert first.tolist() == seeded_starts(100, (7, 21, 7)).tolist()
    assert np.all(first >= 0) and np.all(first < 100)
    assert first.size <= 3  # duplicates collapse


def test_multi_start_accepts_seeds_without_striding():
    _, set_a, set_b = _segments(9)
    tmap = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], 0.1)
    prepared = prepare_solve(
        set_a, set_b, tmap, "weakly_contractive",
        phi=ComparisonFunction.linear(0.5), tol=1e-9,
    )
    results, spread = multi_start_run(prepared, seeds=(1, 2, 3))
    assert 1 <= len(results) <= 3
    assert spread == 0.0
    with pytest.raises(ValueError, match="strided count or seeds"):
        multi_start_run(prepared)
