import numpy as np
import pytest

from proxpoint import (
    ComparisonFunction,
    EuclideanSpace,
    IndexedSet,
    MeirKeelerModulus,
    MultiValuedMap,
    SingleValuedMap,
    certify_map,
    certify_meir_keeler,
    certify_multivalued_contraction,
    certify_nonexpansive,
    certify_weakly_contractive,
    evaluate,
    hausdorff,
)


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


def _chain(levels):
    vals = 2.0 ** -np.arange(levels)
    pts = np.vstack(
        [
            np.column_stack([np.zeros(levels), vals]),
            np.column_stack([np.ones(levels), vals]),
        ]
    )
    space = EuclideanSpace(pts)
    set_a = IndexedSet(space, range(levels))
    set_b = IndexedSet(space, range(levels, 2 * levels))
    table = [
        (j, sorted({levels + min(j + 1, levels - 1), levels + min(j + 2, levels - 1)}))
        for j in range(levels)
    ]
    return space, set_a, set_b, MultiValuedMap.from_table(set_a, set_b, table)


def test_comparison_function_validation_and_values():
    with pytest.raises(ValueError):
        ComparisonFunction.linear(0.0)
    with pytest.raises(ValueError):
        ComparisonFunction.linear(1.0)
    phi = ComparisonFunction.rational()
    assert phi(1.0) == 0.5
    assert phi(0.0) == 0.0
    lin = ComparisonFunction.linear(0.25)
    assert lin.apply([0.0, 4.0]).tolist() == [0.0, 1.0]


def test_gauge_defects_catch_broken_gauges():
    zero = ComparisonFunction(lambda t: 0.0 * np.asarray(t), vectorized=True)
    assert any("positive" in d for d in zero.gauge_defects(0.1, 1.0))
    shifted = ComparisonFunction(lambda t: np.asarray(t) * 0.5 + 1.0, vectorized=True)
    assert any("phi(0)" in d for d in shifted.gauge_defects(0.1, 1.0))
    capped = ComparisonFunction(lambda t: np.minimum(np.asarray(t) * 0.5, 0.1), vectorized=True)
    assert any("exceed" in d for d in capped.gauge_defects(0.1, 1.0))
    assert ComparisonFunction.linear(0.5).gauge_defects(0.1, 1.0) == []


def test_meir_keeler_modulus_validation():
    with pytest.raises(ValueError):
        MeirKeelerModulus.linear(0.0)
    assert MeirKeelerModulus.linear(2.0)(0.5) == 1.0


def test_from_table_validation():
    _, set_a, set_b = _segments(3)
    good = [(0, 3), (1, 4), (2, 5)]
    tmap = SingleValuedMap.from_table(set_a, set_b, good)
    assert evaluate(tmap, 1) == 4
    with pytest.raises(ValueError):
        SingleValuedMap.from_table(set_a, set_b, good[:2])
    with pytest.raises(ValueError):
        SingleValuedMap.from_table(set_a, set_b, good + [(5, 3)])
    with pytest.raises(ValueError):
        SingleValuedMap.from_table(set_a, set_b, [(0, 3), (0, 4), (2, 5)])
    with pytest.raises(ValueError):
        SingleValuedMap.from_table(set_a, set_b, [(0, 3), (1, 4), (2, 2)])


def test_from_affine_snapping_and_gate():
    _, set_a, set_b = _segments(17)
    halving = SingleValuedMap.from_affine(
        set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], tol_snap=0.0625
    )
    # Images snap to the nearest grid member; exact midpoints take the
    # lower position, so index k maps to floor(k / 2).
    assert halving.images_for(set_a.ids).tolist() == [17 + k // 2 for k in range(17)]
    assert float(halving.snap_dists.max()) == 1.0 / 32.0
    exact = halving.exact_images([16])
    assert exact.tolist() == [[1.0, 0.5]]
    with pytest.raises(ValueError):
        SingleValuedMap.from_affine(
            set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], tol_snap=1e-3
        )


def test_certify_weakly_contractive_affine_vs_table():
    _, set_a, set_b = _segments(17)
    phi = ComparisonFunction.linear(0.5)
    affine = SingleValuedMap.from_affine(
        set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], tol_snap=0.0625
    )
    cert = certify_weakly_contractive(affine, phi)
    assert cert.holds
    assert cert.mode == "affine-exact"
    assert cert.defect == 0.0
    # The same map frozen into a table certifies against its snapped
    # images, where grid rounding breaks the inequality at odd pairs.
    table = SingleValuedMap.from_table(
        set_a, set_b, list(zip(set_a.ids.tolist(), affine.images_for(set_a.ids).tolist()))
    )
    cert_table = certify_weakly_contractive(table, phi)
    assert cert_table.mode == "table-exhaustive"
    assert not cert_table.holds
    assert cert_table.defect == 1.0 / 32.0
    assert cert_table.lhs > cert_table.rhs


def test_certify_nonexpansive_flip_and_doubling():
    _, set_a, set_b = _segments(17)
    flip = SingleValuedMap.from_affine(set_a, set_b, [[0.0, 0.0], [0.0, -1.0]], [1.0, 1.0], 1e-9)
    cert = certify_nonexpansive(flip)
    assert cert.holds and cert.defect == 0.0
    half = IndexedSet(set_a.space, range(9))  # t in [0, 1/2]
    doubling = SingleValuedMap.from_affine(half, set_b, [[0.0, 0.0], [0.0, 2.0]], [1.0, 0.0], 1e-9)
    cert = certify_nonexpansive(doubling)
    assert not cert.holds
    assert cert.defect == 0.5
    assert cert.witness == (0, 8)


def test_certify_meir_keeler_halving_and_doubling():
    _, set_a, set_b = _segments(17)
    delta = MeirKeelerModulus.linear(1.0)
    halving = SingleValuedMap.from_affine(
        set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], tol_snap=0.0625
    )
    cert = certify_meir_keeler(halving, delta)
    assert cert.holds
    assert cert.defect <= 0.0
    half = IndexedSet(set_a.space, range(9))
    doubling = SingleValuedMap.from_affine(half, set_b, [[0.0, 0.0], [0.0, 2.0]], [1.0, 0.0], 1e-9)
    cert = certify_meir_keeler(doubling, delta)
    assert not cert.holds
    assert cert.witness is not None and len(cert.witness) == 3
    x, y, eps = cert.witness
    assert cert.lhs > eps
    with pytest.raises(ValueError):
        certify_meir_keeler(halving, delta, eps_grid=[0.0, 1.0])


def test_certify_meir_keeler_nonpositive_modulus():
    _, set_a, set_b = _segments(5)
    halving = SingleValuedMap.from_affine(
        set_a, set_b, [[0.0, 0.0], [0.0, 0.5]], [1.0, 0.0], tol_snap=0.2
    )
    cert = certify_meir_keeler(halving, MeirKeelerModulus(lambda e: e - e), eps_grid=[1.0])
    assert not cert.holds
    assert "not positive" in cert.note


def test_multivalued_normalization_and_eval():
    _, set_a, set_b, tmap = _chain(5)
    assert evaluate(tmap, 0).tolist() == [6, 7]
    assert evaluate(tmap, 4).tolist() == [9]
    with pytest.raises(ValueError):
        MultiValuedMap.from_table(set_a, set_b, [(j, []) for j in range(5)])


def test_hausdorff_line_examples():
    space = EuclideanSpace([[0.0], [1.0], [2.0], [3.0]])
    assert hausdorff(space, [0], [3]) == 3.0
    assert hausdorff(space, [0, 2], [1]) == 1.0
    assert hausdorff(space, [0, 1], [0, 1]) == 0.0


def test_certify_multivalued_contraction_chain():
    _, _, _, tmap = _chain(13)
    cert = certify_multivalued_contraction(tmap, 0.5)
    assert cert.holds
    assert cert.defect <= 0.0
    assert cert.n_pairs == 13 * 13


def test_certify_multivalued_contraction_refuted():
    space = EuclideanSpace([[0.0, 0.0], [0.1, 0.0], [1.0, 1.0], [1.0, -1.0]])
    set_a = IndexedSet(space, [0, 1])
    set_b = IndexedSet(space, [2, 3])
    tmap = MultiValuedMap.from_table(set_a, set_b, [(0, [2]), (1, [3])])
    cert = certify_multivalued_contraction(tmap, 0.5)
    assert not cert.holds
    assert cert.witness == (0, 1)
    assert cert.lhs == hausdorff(space, [2], [3])
    assert cert.rhs == 0.5 * space.distance(0, 1)


def test_certify_map_dispatch():
    _, set_a, set_b = _segments(5)
    tmap = SingleValuedMap.from_table(set_a, set_b, [(k, 5 + k) for k in range(5)])
    with pytest.raises(ValueError):
        certify_map(tmap, "weakly_contractive")
    with pytest.raises(ValueError):
        certify_map(tmap, "meir_keeler")
    with pytest.raises(ValueError):
        certify_map(tmap, "no_such_class")
    cert = certify_map(tmap, "nonexpansive")
    assert cert.holds
