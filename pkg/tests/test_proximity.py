import numpy as np
import pytest

from proxpoint import (
    EuclideanSpace,
    IndexedSet,
    NonFunctionalPairingError,
    NotPPropertyError,
    ProximityIsometry,
    build_isometry,
    check_p_property,
    point_set_distance,
    proximal_sets,
    set_distance,
    verify_isometry,
)
from proxpoint.proximity import PPropertyVerdict

from _instances import lifted_translate


def _segments(count):
    t = np.arange(count) / (count - 1)
    pts = np.vstack(
        [
            np.column_stack([np.zeros(count), t]),
            np.column_stack([np.ones(count), t]),
        ]
    )
    space = EuclideanSpace(pts)
    return space, IndexedSet(space, range(count)), IndexedSet(space, range(count, 2 * count))


def test_set_distance_and_point_set_distance():
    space, set_a, set_b = _segments(5)
    assert set_distance(set_a, set_b) == 1.0
    assert point_set_distance(0, set_b) == 1.0
    assert point_set_distance(0, IndexedSet(space, [9])) == space.distance(0, 9)


def test_proximal_sets_segments():
    space, set_a, set_b = _segments(5)
    structure = proximal_sets(set_a, set_b, 1e-9)
    assert structure.dist_ab == 1.0
    assert len(structure.a0) == 5 and len(structure.b0) == 5
    assert structure.pairs.shape == (5, 2)
    assert structure.pairs[:, 0].tolist() == list(range(5))
    assert structure.pairs[:, 1].tolist() == list(range(5, 10))


def test_proximal_sets_strict_subset():
    # Only the closest pair attains the distance.
    space = EuclideanSpace([[0.0, 0.0], [0.0, 3.0], [1.0, 0.0], [1.0, 5.0]])
    structure = proximal_sets(IndexedSet(space, [0, 1]), IndexedSet(space, [2, 3]), 1e-9)
    assert structure.dist_ab == 1.0
    assert structure.a0.ids.tolist() == [0]
    assert structure.b0.ids.tolist() == [2]


def test_p_property_holds_on_translates():
    rng = np.random.default_rng(11)
    for _ in range(5):
        _, set_a, set_b, _ = lifted_translate(rng, 20)
        verdict = check_p_property(proximal_sets(set_a, set_b, 1e-9))
        assert verdict.holds
        assert verdict.defect == 0.0


def test_p_property_fails_two_points_vs_center():
    space = EuclideanSpace([[-1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
    structure = proximal_sets(IndexedSet(space, [0, 1]), IndexedSet(space, [2]), 1e-9)
    verdict = check_p_property(structure)
    assert not verdict.holds
    assert verdict.defect == 2.0
    assert verdict.witness == (0, 2, 1, 2)
    with pytest.raises(NotPPropertyError):
        build_isometry(structure, verdict)


def test_build_isometry_identity_pairing():
    rng = np.random.default_rng(3)
    _, set_a, set_b, gap = lifted_translate(rng, 25)
    structure = proximal_sets(set_a, set_b, 1e-9)
    g = build_isometry(structure)
    assert g.image_ids.tolist() == set_b.ids.tolist()
    assert g.warnings == ()
    report = verify_isometry(g)
    assert report.ok
    assert report.isometry_defect == 0.0
    assert report.pair_defect == 0.0
    assert report.bijective
    x = int(set_a.ids[7])
    assert g.invert(g.apply(x)) == x
    assert not g.can_invert(x)  # x is an A id, not an image


def test_build_isometry_near_tie_warns_and_picks_nearest():
    space = EuclideanSpace([[0.0, 0.0], [1.0, 0.0], [1.0 + 5e-10, 0.0]])
    structure = proximal_sets(IndexedSet(space, [0]), IndexedSet(space, [1, 2]), 1e-9)
    assert structure.pairs.shape[0] == 2
    g = build_isometry(structure)
    assert g.apply(0) == 1
    assert any("partner" in w for w in g.warnings)


def test_build_isometry_non_functional_guard():
    # A forged verdict bypasses the P check so the spread guard itself
    # is exercised; on this geometry the pairing cannot be a function.
    space = EuclideanSpace([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    structure = proximal_sets(IndexedSet(space, [0]), IndexedSet(space, [1, 2]), 1e-9)
    forged = PPropertyVerdict(True, 0.0, None, 1e-9, structure.pairs.shape[0])
    with pytest.raises(NonFunctionalPairingError):
        build_isometry(structure, forged)


def test_verify_isometry_detects_corrupted_pairing():
    rng = np.random.default_rng(5)
    _, set_a, set_b, _ = lifted_translate(rng, 10)
    structure = proximal_sets(set_a, set_b, 1e-9)
    good = build_isometry(structure)
    swapped = good.image_ids.copy()
    swapped[[0, 1]] = swapped[[1, 0]]
    bad = ProximityIsometry(structure, swapped)
    report = verify_isometry(bad)
    assert not report.ok
    assert report.pair_defect > 1e-3
    assert report.pair_witness is not None


def test_verify_isometry_detects_collision():
    rng = np.random.default_rng(9)
    _, set_a, set_b, _ = lifted_translate(rng, 6)
    structure = proximal_sets(set_a, set_b, 1e-9)
    good = build_isometry(structure)
    collided = good.image_ids.copy()
    collided[1] = collided[0]
    report = verify_isometry(ProximityIsometry(structure, collided))
    assert not report.bijective
    assert not report.ok
