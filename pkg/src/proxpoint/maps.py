"""Maps between indexed sets, and certification of declared map classes.

A map sends members of a domain set A to members (single-valued) or
member subsets (multivalued) of a codomain set B.  Tables store images
directly; affine maps on the Euclidean backend compute x @ M^T + c and
snap to the nearest codomain member within ``tol_snap``.

Certification checks a declared contraction class exhaustively over all
ordered pairs of a finite domain:

- weakly contractive:  d(Tx, Ty) <= d(x, y) - phi(d(x, y)) for a gauge
  phi that vanishes only at 0, does not decrease, and grows without
  bound (the gauge properties are spot-checked on a sampled grid);
- nonexpansive:        d(Tx, Ty) <= d(x, y)  (compactness of the domain
  is automatic here: domains are finite);
- Meir-Keeler:         for every eps in a grid, d(x, y) < eps + delta(eps)
  implies d(Tx, Ty) <= eps;
- multivalued contraction:  H(Tx, Ty) <= alpha * d(x, y) with H the
  symmetric Hausdorff distance between image sets.

For affine maps the certifiers measure exact images rather than their
snapped representatives; the snap error is a property of the grid, not
of the map, and would otherwise drown tight inequalities.  Reports state
which route was measured in ``mode``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels as kernels
from .metric import EuclideanSpace, distance_stats, iter_pairwise

# Gauge values below this are treated as zero when checking phi(0) = 0.
_GAUGE_ZERO = 1e-15

MAP_CLASSES = ("weakly_contractive", "nonexpansive", "meir_keeler", "multivalued_contraction")


class ComparisonFunction:
    """Gauge phi for the weakly contractive inequality."""

    def __init__(self, fn, name="custom", vectorized=False):
        self.name = name
        self._fn = fn if vectorized else np.vectorize(fn, otypes=[np.float64])

    @classmethod
    def linear(cls, c=0.5):
        """phi(t) = c * t with 0 < c < 1."""
        if not 0.0 < c < 1.0:
            raise ValueError("linear gauge slope must lie strictly between 0 and 1")
        return cls(lambda t: c * np.asarray(t, dtype=np.float64), f"linear(c={c:g})", vectorized=True)

    @classmethod
    def rational(cls):
        """phi(t) = t^2 / (1 + t)."""

        def fn(t):
            t = np.asarray(t, dtype=np.float64)
            return t * t / (1.0 + t)

        return cls(fn, "rational", vectorized=True)

    def __call__(self, t):
        return float(self._fn(t))

    def apply(self, values):
        return np.asarray(self._fn(values), dtype=np.float64)

    def gauge_defects(self, min_positive, diameter):
        """Spot-check the gauge properties on a sampled grid.

        Returns human-readable defect strings; empty means the sampled
        checks passed.  Checked: phi(0) = 0, positivity and monotonicity
        on a log grid spanning the domain's distance range, and growth
        past the diameter at t = 2^20 * diameter.
        """
        defects = []
        if abs(self(0.0)) > _GAUGE_ZERO:
            defects.append(f"phi(0) = {self(0.0):.6g} != 0")
        if diameter > 0.0:
            lo = min(min_positive, diameter) / 2.0
            grid = np.geomspace(max(lo, 1e-15), diameter, 64)
            vals = self.apply(grid)
            if (vals <= 0.0).any():
                t = float(grid[int(np.argmax(vals <= 0.0))])
                defects.append(f"phi not positive at t = {t:.6g}")
            if np.diff(vals).min(initial=0.0) < -_GAUGE_ZERO:
                defects.append("phi decreases on the sampled grid")
            t_far = (2.0**20) * diameter
            if self(t_far) <= diameter:
                defects.append(f"phi({t_far:.6g}) = {self(t_far):.6g} does not exceed the diameter")
        return defects


class MeirKeelerModulus:
    """Modulus delta(eps) > 0 for the Meir-Keeler condition."""

    def __init__(self, fn, name="custom", vectorized=False):
        self.name = name
        self._fn = fn if vectorized else np.vectorize(fn, otypes=[np.float64])

    @classmethod
    def linear(cls, c=1.0):
        """delta(eps) = c * eps with c > 0."""
        if not c > 0.0:
            raise ValueError("modulus slope must be positive")
        return cls(lambda e: c * np.asarray(e, dtype=np.float64), f"linear(c={c:g})", vectorized=True)

    def __call__(self, eps):
        return float(self._fn(eps))


class SingleValuedMap:
    """Map from a domain set into a codomain set, one image per member."""

    multivalued = False

    def __init__(self, domain, codomain, image_ids, *, form="table", matrix=None, offset=None, snap_dists=None):
        image_ids = np.asarray(image_ids, dtype=np.int64)
        if image_ids.shape != domain.ids.shape:
            raise ValueError("one image per domain member required")
        for y in image_ids:
            if int(y) not in codomain:
                raise ValueError(f"image id {y} is not a member of the codomain")
        self.domain = domain
        self.codomain = codomain
        self.image_ids = image_ids.copy()
        self.form = form
        self.matrix = matrix
        self.offset = offset
        self.snap_dists = snap_dists if snap_dists is not None else np.zeros(image_ids.size)
        self._image_by_id = {int(x): int(y) for x, y in zip(domain.ids, image_ids)}

    @classmethod
    def from_table(cls, domain, codomain, table):
        """Build from explicit (member, image) rows covering the domain exactly."""
        mapping = dict(table)
        if not isinstance(table, dict) and len(mapping) != len(table):
            raise ValueError("table lists some domain member twice")
        images = []
        for x in domain.ids:
            try:
                images.append(mapping.pop(int(x)))
            except KeyError:
                raise ValueError(f"table has no image for domain member {x}") from None
        if mapping:
            extra = next(iter(mapping))
            raise ValueError(f"table maps id {extra}, which is not a domain member")
        return cls(domain, codomain, images)

    @classmethod
    def from_affine(cls, domain, codomain, matrix, offset, tol_snap):
        """Build x -> M x + c snapped to the nearest codomain member.

        Each exact image must land within ``tol_snap`` of some codomain
        member; ties snap to the lowest codomain position.
        """
        space = domain.space
        if not isinstance(space, EuclideanSpace):
            raise ValueError("affine maps require the euclidean backend")
        matrix = np.asarray(matrix, dtype=np.float64)
        offset = np.asarray(offset, dtype=np.float64)
        dim = space.dimension
        if matrix.shape != (dim, dim) or offset.shape != (dim,):
            raise ValueError(f"affine data must be a {dim}x{dim} matrix and length-{dim} offset")
        exact = space.coords(domain.ids) @ matrix.T + offset
        codo_coords = space.coords(codomain.ids)
        images = np.empty(len(domain), dtype=np.int64)
        snap = np.empty(len(domain), dtype=np.float64)
        step = max(1, int(np.ceil(2**22 / max(len(codomain), 1))))
        for lo in range(0, exact.shape[0], step):
            block = cdist(exact[lo : lo + step], codo_coords)
            picks = np.argmin(block, axis=1)
            images[lo : lo + step] = codomain.ids[picks]
            snap[lo : lo + step] = block[np.arange(block.shape[0]), picks]
        if snap.max() > tol_snap:
            worst = int(np.argmax(snap))
            raise ValueError(
                f"affine image of member {domain.ids[worst]} lies {snap[worst]:.6g} "
                f"from the nearest codomain member (tol_snap {tol_snap:.6g})"
            )
        out = cls(
            domain, codomain, images, form="affine", matrix=matrix, offset=offset, snap_dists=snap
        )
        return out

    def image_of(self, x):
        """Image id of a domain member."""
        try:
            return self._image_by_id[int(x)]
        except KeyError:
            raise KeyError(f"point id {x} is not a domain member of this map") from None

    def images_for(self, ids):
        return np.asarray([self.image_of(x) for x in ids], dtype=np.int64)

    def exact_images(self, ids):
        """Un-snapped affine image coordinates (affine form only)."""
        if self.form != "affine":
            raise ValueError("exact images exist only for affine maps")
        return self.domain.space.coords(ids) @ self.matrix.T + self.offset


class MultiValuedMap:
    """Map assigning each domain member a nonempty subset of the codomain.

    Image sets are normalized to ascending codomain position with
    duplicates dropped, which fixes the order that solvers use for
    lowest-index tie-breaking.
    """

    multivalued = True

    def __init__(self, domain, codomain, image_sets):
        if len(image_sets) != len(domain):
            raise ValueError("one image set per domain member required")
        normalized = []
        for x, raw in zip(domain.ids, image_sets):
            arr = np.unique(np.asarray(raw, dtype=np.int64))
            if arr.size == 0:
                raise ValueError(f"image set of member {x} is empty")
            positions = []
            for y in arr:
                if int(y) not in codomain:
                    raise ValueError(f"image id {y} is not a member of the codomain")
                positions.append(codomain.position(y))
            arr = arr[np.argsort(positions, kind="stable")]
            normalized.append(arr)
        self.domain = domain
        self.codomain = codomain
        self.image_sets = tuple(normalized)
        self._set_by_id = {int(x): s for x, s in zip(domain.ids, self.image_sets)}

    @classmethod
    def from_table(cls, domain, codomain, table):
        """Build from explicit (member, [images]) rows covering the domain exactly."""
        mapping = {}
        for x, ys in table:
            if int(x) in mapping:
                raise ValueError(f"table lists domain member {x} twice")
            mapping[int(x)] = ys
        sets = []
        for x in domain.ids:
            try:
                sets.append(mapping.pop(int(x)))
            except KeyError:
                raise ValueError(f"table has no image set for domain member {x}") from None
        if mapping:
            extra = next(iter(mapping))
            raise ValueError(f"table maps id {extra}, which is not a domain member")
        return cls(domain, codomain, sets)

    def image_of(self, x):
        """Image set (id array) of a domain member."""
        try:
            return self._set_by_id[int(x)]
        except KeyError:
            raise KeyError(f"point id {x} is not a domain member of this map") from None

    def sets_for(self, ids):
        return [self.image_of(x) for x in ids]


def evaluate(tmap, x):
    """Image of ``x`` under the map: an id, or an id array when multivalued."""
    return tmap.image_of(x)


def hausdorff(space, xs, ys):
    """Symmetric Hausdorff distance between two nonempty id collections."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.size == 0 or ys.size == 0:
        raise ValueError("hausdorff distance needs nonempty sets")
    return kernels.hausdorff_value(space.pairwise(xs, ys))


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of an exhaustive map-class check on a finite domain.

    ``defect`` is the largest measured lhs - rhs over the scan (negative
    values are margin); ``witness`` carries the attaining pair (plus the
    eps level for Meir-Keeler) with its measured lhs and allowed rhs.
    """

    map_class: str
    holds: bool
    defect: float
    witness: tuple | None
    lhs: float | None
    rhs: float | None
    n_pairs: int
    mode: str
    tol: float
    note: str = ""


def _domain_ids(tmap, domain):
    ids = tmap.domain.ids if domain is None else domain.ids
    return np.asarray(ids, dtype=np.int64)


def _lhs_chunk(tmap, ids, exact, lo, hi):
    if exact is not None:
        return cdist(exact[lo:hi], exact)
    images = tmap.images_for(ids)
    return tmap.domain.space.pairwise(images[lo:hi], images)


def _scan_pairs(tmap, ids, allowed_fn):
    """Max of d(Tx,Ty) - allowed(d(x,y)) over ordered pairs, with witness."""
    space = tmap.domain.space
    exact = tmap.exact_images(ids) if getattr(tmap, "form", "table") == "affine" else None
    mode = "affine-exact" if exact is not None else "table-exhaustive"
    best = -np.inf
    bi = bj = 0
    for lo, hi, dxy in iter_pairwise(space, ids, ids):
        lhs = _lhs_chunk(tmap, ids, exact, lo, hi)
        value, i, j = kernels.max_diff(lhs, allowed_fn(dxy))
        gi = lo + i
        if value > best or (value == best and (gi, j) < (bi, bj)):
            best, bi, bj = value, gi, j
    return float(best), int(ids[bi]), int(ids[bj]), mode


def _pair_values(tmap, x, y, phi=None):
    space = tmap.domain.space
    dxy = space.distance(x, y)
    if getattr(tmap, "form", "table") == "affine":
        pts = tmap.exact_images(np.asarray([x, y], dtype=np.int64))
        lhs = float(cdist(pts[:1], pts[1:])[0, 0])
    else:
        lhs = space.distance(tmap.image_of(x), tmap.image_of(y))
    rhs = dxy - phi(dxy) if phi is not None else dxy
    return lhs, rhs


def certify_weakly_contractive(tmap, phi, domain=None, tol=1e-9):
    """Exhaustively check d(Tx,Ty) <= d(x,y) - phi(d(x,y)) on a finite domain."""
    ids = _domain_ids(tmap, domain)
    min_pos, diam = distance_stats(tmap.domain.space, ids)
    gauge_issues = phi.gauge_defects(min_pos, diam)
    if gauge_issues:
        return CertificationReport(
            "weakly_contractive", False, np.inf, None, None, None, int(ids.size) ** 2,
            "table-exhaustive", float(tol), note="; ".join(gauge_issues),
        )
    defect, x, y, mode = _scan_pairs(tmap, ids, lambda dxy: dxy - phi.apply(dxy))
    lhs, rhs = _pair_values(tmap, x, y, phi)
    return CertificationReport(
        "weakly_contractive", defect <= tol, defect, (x, y), lhs, rhs,
        int(ids.size) ** 2, mode, float(tol), note=f"gauge {phi.name}",
    )


def certify_nonexpansive(tmap, domain=None, tol=1e-9):
    """Exhaustively check d(Tx,Ty) <= d(x,y) on a finite domain."""
    ids = _domain_ids(tmap, domain)
    defect, x, y, mode = _scan_pairs(tmap, ids, lambda dxy: dxy)
    lhs, rhs = _pair_values(tmap, x, y)
    return CertificationReport(
        "nonexpansive", defect <= tol, defect, (x, y), lhs, rhs,
        int(ids.size) ** 2, mode, float(tol),
    )


def default_eps_grid(space, ids, size=32):
    """Log-spaced eps levels from half the smallest positive distance to twice the diameter."""
    min_pos, diam = distance_stats(space, ids)
    if not np.isfinite(min_pos) or diam <= 0.0:
        return np.asarray([1.0])
    return np.geomspace(min_pos / 2.0, 2.0 * diam, size)


def certify_meir_keeler(tmap, delta, domain=None, eps_grid=None, tol=1e-9):
    """Check the Meir-Keeler implication at every eps of a grid.

    For each eps: every ordered pair with d(x,y) < eps + delta(eps) must
    satisfy d(Tx,Ty) <= eps.  Levels with no qualifying pair hold
    vacuously.  The witness records (x, y, eps) for the worst violation.
    """
    ids = _domain_ids(tmap, domain)
    space = tmap.domain.space
    if eps_grid is None:
        eps_grid = default_eps_grid(space, ids)
    eps_grid = np.asarray(eps_grid, dtype=np.float64)
    if eps_grid.size == 0 or eps_grid.min() <= 0.0:
        raise ValueError("eps grid must be nonempty and strictly positive")
    deltas = np.asarray([delta(e) for e in eps_grid])
    if deltas.min() <= 0.0:
        bad = float(eps_grid[int(np.argmin(deltas))])
        return CertificationReport(
            "meir_keeler", False, np.inf, None, None, None, int(ids.size) ** 2,
            "table-exhaustive", float(tol), note=f"delta(eps) not positive at eps = {bad:.6g}",
        )

    exact = tmap.exact_images(ids) if getattr(tmap, "form", "table") == "affine" else None
    mode = "affine-exact" if exact is not None else "table-exhaustive"
    best = -np.inf
    bw = None
    for lo, hi, dxy in iter_pairwise(space, ids, ids):
        lhs = _lhs_chunk(tmap, ids, exact, lo, hi)
        for e_idx, (eps, de) in enumerate(zip(eps_grid, deltas)):
            qualifying = dxy < eps + de
            if not qualifying.any():
                continue
            viol = np.where(qualifying, lhs - eps, -np.inf)
            flat = int(np.argmax(viol))
            i, j = divmod(flat, viol.shape[1])
            value = float(viol[i, j])
            key = (e_idx, lo + i, j)
            if value > best or (value == best and (bw is None or key < bw)):
                best, bw = value, key
    if bw is None:
        return CertificationReport(
            "meir_keeler", True, -np.inf, None, None, None, int(ids.size) ** 2,
            mode, float(tol), note=f"vacuous on all {eps_grid.size} eps levels",
        )
    e_idx, gi, j = bw
    x, y = int(ids[gi]), int(ids[j])
    eps = float(eps_grid[e_idx])
    lhs, _ = _pair_values(tmap, x, y)
    return CertificationReport(
        "meir_keeler", best <= tol, float(best), (x, y, eps), lhs, eps,
        int(ids.size) ** 2, mode, float(tol), note=f"{eps_grid.size} eps levels, modulus {delta.name}",
    )


def certify_multivalued_contraction(tmap, alpha, domain=None, tol=1e-9):
    """Exhaustively check H(Tx, Ty) <= alpha * d(x, y) on a finite domain."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    ids = _domain_ids(tmap, domain)
    space = tmap.domain.space
    sets = tmap.sets_for(ids)

    union = np.unique(np.concatenate(sets))
    u_pos = {int(y): i for i, y in enumerate(union)}
    d_union = space.pairwise(union, union)
    width = max(s.size for s in sets)
    # Pad each image set with its own first member: repeats change neither
    # the inner min nor the outer max of the Hausdorff reduction.
    padded = np.empty((ids.size, width), dtype=np.int64)
    for r, s in enumerate(sets):
        padded[r, : s.size] = [u_pos[int(y)] for y in s]
        padded[r, s.size :] = padded[r, 0]

    best = -np.inf
    bi = bj = 0
    step = max(1, int(np.ceil(2**22 / max(ids.size * width * width, 1))))
    for lo in range(0, ids.size, step):
        hi = min(lo + step, ids.size)
        tensor = d_union[padded[lo:hi, None, :, None], padded[None, :, None, :]]
        h_block = np.maximum(tensor.min(axis=3).max(axis=2), tensor.min(axis=2).max(axis=2))
        dxy = space.pairwise(ids[lo:hi], ids)
        value, i, j = kernels.max_diff(h_block, alpha * dxy)
        gi = lo + i
        if value > best or (value == best and (gi, j) < (bi, bj)):
            best, bi, bj = value, gi, j

    x, y = int(ids[bi]), int(ids[bj])
    lhs = hausdorff(space, tmap.image_of(x), tmap.image_of(y))
    rhs = alpha * space.distance(x, y)
    return CertificationReport(
        "multivalued_contraction", float(best) <= tol, float(best), (x, y), lhs, rhs,
        int(ids.size) ** 2, "table-exhaustive", float(tol), note=f"alpha = {alpha:g}",
    )


def certify_map(tmap, map_class, *, phi=None, delta=None, alpha=None, domain=None, eps_grid=None, tol=1e-9):
    """Run the certifier matching a declared map class."""
    if map_class == "weakly_contractive":
        if phi is None:
            raise ValueError("weakly_contractive certification needs a gauge phi")
        return certify_weakly_contractive(tmap, phi, domain=domain, tol=tol)
    if map_class == "nonexpansive":
        return certify_nonexpansive(tmap, domain=domain, tol=tol)
    if map_class == "meir_keeler":
        if delta is None:
            raise ValueError("meir_keeler certification needs a modulus delta")
        return certify_meir_keeler(tmap, delta, domain=domain, eps_grid=eps_grid, tol=tol)
    if map_class == "multivalued_contraction":
        if alpha is None:
            raise ValueError("multivalued certification needs a ratio alpha")
        return certify_multivalued_contraction(tmap, alpha, domain=domain, tol=tol)
    raise ValueError(f"unknown map class {map_class!r}")
