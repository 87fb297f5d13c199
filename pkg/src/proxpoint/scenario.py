"""Scenario files: a JSON document describing one solvable instance.

A scenario is a single JSON object:

    {
      "schema": "proxpoint/1",
      "backend": {"kind": "euclidean", "dimension": 2,
                  "points": [[...], ...],               # optional
                  "generators": [{"name": "A", "kind": "segment",
                                  "start": [0,0], "end": [0,1],
                                  "count": 1025}, ...]},  # optional
      "sets": {"A": {"generator": "A"} | {"ids": [..]}, "B": ...},
      "map": {"arity": "single", "form": "affine"|"table", ...,
              "class": "...", "params": {...}},           # optional
      "tolerances": {"tol": .., "step_tol": .., "residual_tol": .., "tol_snap": ..},
      "max_iters": 100000,
      "start": 1024 | null,
      "seeds": [..],           # extra seeded multi-start runs
      "on_certification_failure": "abort"|"warn"
    }

The finite backend replaces ``dimension``/``points``/``generators`` with
``dmat``.  Generators (segment, box, circle) append points to the
registry after any explicit ``points`` rows, so ids are stable and the
serialized form can keep the generator description instead of thousands
of rows.  Parsing is strict: unknown fields anywhere are schema errors.
``serialize_scenario`` emits the canonical form (defaults materialized),
and parse -> serialize -> parse is the identity on that form.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import MetricAxiomError, ResolutionError, SchemaError
from .maps import (
    MAP_CLASSES,
    ComparisonFunction,
    MeirKeelerModulus,
    MultiValuedMap,
    SingleValuedMap,
)
from .metric import EuclideanSpace, FiniteSpace, IndexedSet, verify_metric_axioms
from .solvers import StoppingRule

SCHEMA_VERSION = "proxpoint/1"

_DEFAULT_TOL = {"euclidean": 1e-7, "finite": 1e-9}
_DEFAULT_STEP_TOL = 1e-10
_DEFAULT_RESIDUAL_TOL = 1e-8
_DEFAULT_TOL_SNAP = 1e-3
_DEFAULT_MAX_ITERS = 100_000


def _require_dict(value, path, allowed):
    if not isinstance(value, dict):
        raise SchemaError(f"{path}: expected an object")
    unknown = set(value) - set(allowed)
    if unknown:
        raise SchemaError(f"{path}: unknown field {sorted(unknown)[0]!r}")
    return value


def _get(obj, key, path, required=True, default=None):
    if key not in obj:
        if required:
            raise SchemaError(f"{path}.{key}: missing required field")
        return default
    return obj[key]


def _as_int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}: expected an integer")
    if minimum is not None and value < minimum:
        raise SchemaError(f"{path}: must be >= {minimum}")
    return int(value)


def _as_float(value, path, positive=False, nonnegative=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"{path}: must be finite")
    if positive and value <= 0:
        raise SchemaError(f"{path}: must be positive")
    if nonnegative and value < 0:
        raise SchemaError(f"{path}: must be nonnegative")
    return value


def _as_vector(value, path, length):
    if not isinstance(value, list) or len(value) != length:
        raise SchemaError(f"{path}: expected a list of {length} numbers")
    return [_as_float(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _gen_segment(gen, path, dim):
    start = np.asarray(_as_vector(_get(gen, "start", path), f"{path}.start", dim))
    end = np.asarray(_as_vector(_get(gen, "end", path), f"{path}.end", dim))
    count = _as_int(_get(gen, "count", path), f"{path}.count", minimum=1)
    if count == 1:
        return start[None, :]
    frac = np.arange(count, dtype=np.float64) / (count - 1)
    return start[None, :] + (end - start)[None, :] * frac[:, None]


def _gen_box(gen, path, dim):
    low = np.asarray(_as_vector(_get(gen, "low", path), f"{path}.low", dim))
    high = np.asarray(_as_vector(_get(gen, "high", path), f"{path}.high", dim))
    counts_raw = _get(gen, "counts", path)
    if not isinstance(counts_raw, list) or len(counts_raw) != dim:
        raise SchemaError(f"{path}.counts: expected a list of {dim} integers")
    counts = [_as_int(c, f"{path}.counts[{i}]", minimum=1) for i, c in enumerate(counts_raw)]
    axes = []
    for lo_v, hi_v, c in zip(low, high, counts):
        axes.append(np.asarray([lo_v]) if c == 1 else lo_v + (hi_v - lo_v) * np.arange(c) / (c - 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.reshape(-1) for m in mesh])


def _gen_circle(gen, path, dim):
    if dim != 2:
        raise SchemaError(f"{path}: circle generators need dimension 2")
    center = np.asarray(_as_vector(_get(gen, "center", path), f"{path}.center", 2))
    radius = _as_float(_get(gen, "radius", path), f"{path}.radius", positive=True)
    count = _as_int(_get(gen, "count", path), f"{path}.count", minimum=1)
    theta = 2.0 * np.pi * np.arange(count) / count
    return center[None, :] + radius * np.column_stack([np.cos(theta), np.sin(theta)])


_GEN_FIELDS = {
    "segment": ("name", "kind", "start", "end", "count"),
    "box": ("name", "kind", "low", "high", "counts"),
    "circle": ("name", "kind", "center", "radius", "count"),
}
_GEN_BUILDERS = {"segment": _gen_segment, "box": _gen_box, "circle": _gen_circle}


def _build_backend(cfg):
    kind = _get(cfg, "kind", "backend")
    if kind == "finite":
        _require_dict(cfg, "backend", ("kind", "dmat"))
        dmat = _get(cfg, "dmat", "backend")
        if not isinstance(dmat, list) or not dmat:
            raise SchemaError("backend.dmat: expected a nonempty list of rows")
        n = len(dmat)
        rows = [_as_vector(row, f"backend.dmat[{i}]", n) for i, row in enumerate(dmat)]
        try:
            space = FiniteSpace(rows)
        except ValueError as e:
            raise SchemaError(f"backend.dmat: {e}") from None
        report = verify_metric_axioms(space)
        if not report.ok:
            parts = [
                f"{v.axiom} violated at {v.witness} by {v.defect:.6g} ({v.count} case(s))"
                for v in report.violations
            ]
            raise MetricAxiomError("backend.dmat: " + "; ".join(parts))
        return space, {}, {"kind": "finite", "dmat": rows}

    if kind != "euclidean":
        raise SchemaError("backend.kind: expected 'euclidean' or 'finite'")
    _require_dict(cfg, "backend", ("kind", "dimension", "points", "generators"))
    dim = _as_int(_get(cfg, "dimension", "backend"), "backend.dimension", minimum=1)
    blocks = []
    norm_points = None
    if "points" in cfg:
        raw = cfg["points"]
        if not isinstance(raw, list):
            raise SchemaError("backend.points: expected a list of coordinate rows")
        norm_points = [_as_vector(row, f"backend.points[{i}]", dim) for i, row in enumerate(raw)]
        if norm_points:
            blocks.append(np.asarray(norm_points))
    ranges = {}
    norm_gens = None
    if "generators" in cfg:
        raw = cfg["generators"]
        if not isinstance(raw, list):
            raise SchemaError("backend.generators: expected a list")
        norm_gens = []
        offset = sum(b.shape[0] for b in blocks)
        for i, gen in enumerate(raw):
            path = f"backend.generators[{i}]"
            if not isinstance(gen, dict):
                raise SchemaError(f"{path}: expected an object")
            gkind = _get(gen, "kind", path)
            if gkind not in _GEN_BUILDERS:
                raise SchemaError(f"{path}.kind: expected one of {sorted(_GEN_BUILDERS)}")
            _require_dict(gen, path, _GEN_FIELDS[gkind])
            name = _get(gen, "name", path)
            if not isinstance(name, str) or not name:
                raise SchemaError(f"{path}.name: expected a nonempty string")
            if name in ranges:
                raise SchemaError(f"{path}.name: duplicate generator name {name!r}")
            pts = _GEN_BUILDERS[gkind](gen, path, dim)
            ranges[name] = (offset, pts.shape[0])
            offset += pts.shape[0]
            blocks.append(pts)
            norm = {"name": name, "kind": gkind}
            for key in _GEN_FIELDS[gkind][2:]:
                value = gen[key]
                if key in ("count",):
                    norm[key] = _as_int(value, path)
                elif key == "counts":
                    norm[key] = [int(v) for v in value]
                elif key == "radius":
                    norm[key] = float(value)
                else:
                    norm[key] = [float(v) for v in value]
            norm_gens.append(norm)
    if not blocks:
        raise SchemaError("backend: needs points and/or generators")
    try:
        space = EuclideanSpace(np.vstack(blocks))
    except ValueError as e:
        raise SchemaError(f"backend: {e}") from None
    norm_cfg = {"kind": "euclidean", "dimension": dim}
    if norm_points is not None:
        norm_cfg["points"] = norm_points
    if norm_gens is not None:
        norm_cfg["generators"] = norm_gens
    return space, ranges, norm_cfg


def _build_set(cfg, label, space, ranges):
    path = f"sets.{label}"
    if not isinstance(cfg, dict):
        raise SchemaError(f"{path}: expected an object")
    _require_dict(cfg, path, ("ids", "generator"))
    if ("ids" in cfg) == ("generator" in cfg):
        raise SchemaError(f"{path}: give exactly one of 'ids' or 'generator'")
    if "generator" in cfg:
        name = cfg["generator"]
        if name not in ranges:
            raise ResolutionError(f"{path}.generator: no generator named {name!r}")
        lo, count = ranges[name]
        ids = np.arange(lo, lo + count)
        norm = {"generator": name}
    else:
        raw = cfg["ids"]
        if not isinstance(raw, list) or not raw:
            raise SchemaError(f"{path}.ids: expected a nonempty list of integers")
        ids = [_as_int(v, f"{path}.ids[{i}]", minimum=0) for i, v in enumerate(raw)]
        norm = {"ids": list(ids)}
    try:
        return IndexedSet(space, ids), norm
    except ValueError as e:
        raise ResolutionError(f"{path}: {e}") from None


def _build_params(cfg, path, map_class):
    allowed = {
        "weakly_contractive": ("phi",),
        "nonexpansive": ("lambda",),
        "meir_keeler": ("delta", "eps_grid"),
        "multivalued_contraction": ("alpha",),
    }[map_class]
    _require_dict(cfg, path, allowed)
    phi = delta = alpha = eps_grid = None
    lam = 0.5
    norm = {}
    if map_class == "weakly_contractive":
        spec = _get(cfg, "phi", path)
        spec = _require_dict(spec, f"{path}.phi", ("kind", "c"))
        kind = _get(spec, "kind", f"{path}.phi")
        if kind == "linear":
            c = _as_float(_get(spec, "c", f"{path}.phi", required=False, default=0.5), f"{path}.phi.c")
            try:
                phi = ComparisonFunction.linear(c)
            except ValueError as e:
                raise SchemaError(f"{path}.phi.c: {e}") from None
            norm["phi"] = {"kind": "linear", "c": c}
        elif kind == "rational":
            if "c" in spec:
                raise SchemaError(f"{path}.phi: rational gauge takes no 'c'")
            phi = ComparisonFunction.rational()
            norm["phi"] = {"kind": "rational"}
        else:
            raise SchemaError(f"{path}.phi.kind: expected 'linear' or 'rational'")
    elif map_class == "nonexpansive":
        lam = _as_float(_get(cfg, "lambda", path, required=False, default=0.5), f"{path}.lambda")
        if not 0.0 < lam < 1.0:
            raise SchemaError(f"{path}.lambda: must lie strictly between 0 and 1")
        norm["lambda"] = lam
    elif map_class == "meir_keeler":
        spec = _get(cfg, "delta", path)
        spec = _require_dict(spec, f"{path}.delta", ("kind", "c"))
        if _get(spec, "kind", f"{path}.delta") != "linear":
            raise SchemaError(f"{path}.delta.kind: expected 'linear'")
        c = _as_float(_get(spec, "c", f"{path}.delta", required=False, default=1.0), f"{path}.delta.c", positive=True)
        delta = MeirKeelerModulus.linear(c)
        norm["delta"] = {"kind": "linear", "c": c}
        if "eps_grid" in cfg:
            raw = cfg["eps_grid"]
            if not isinstance(raw, list) or not raw:
                raise SchemaError(f"{path}.eps_grid: expected a nonempty list of numbers")
            eps_grid = [_as_float(v, f"{path}.eps_grid[{i}]", positive=True) for i, v in enumerate(raw)]
            norm["eps_grid"] = eps_grid
    else:
        alpha = _as_float(_get(cfg, "alpha", path), f"{path}.alpha")
        if not 0.0 < alpha < 1.0:
            raise SchemaError(f"{path}.alpha: must lie strictly between 0 and 1")
        norm["alpha"] = alpha
    return phi, delta, alpha, lam, eps_grid, norm


def _build_map(cfg, set_a, set_b, tol_snap):
    path = "map"
    _require_dict(cfg, path, ("arity", "form", "table", "matrix", "offset", "class", "params"))
    arity = _get(cfg, "arity", path)
    if arity not in ("single", "multi"):
        raise SchemaError(f"{path}.arity: expected 'single' or 'multi'")
    map_class = _get(cfg, "class", path)
    if map_class not in MAP_CLASSES:
        raise SchemaError(f"{path}.class: expected one of {sorted(MAP_CLASSES)}")
    if (arity == "multi") != (map_class == "multivalued_contraction"):
        raise SchemaError(f"{path}: arity {arity!r} does not fit class {map_class!r}")
    form = _get(cfg, "form", path)
    norm = {"arity": arity, "form": form}

    if form == "affine":
        if arity == "multi":
            raise SchemaError(f"{path}.form: multivalued maps must use 'table'")
        if "table" in cfg:
            raise SchemaError(f"{path}.table: not allowed with the affine form")
        space = set_a.space
        if space.kind != "euclidean":
            raise SchemaError(f"{path}.form: affine maps need the euclidean backend")
        dim = space.dimension
        raw_m = _get(cfg, "matrix", path)
        if not isinstance(raw_m, list) or len(raw_m) != dim:
            raise SchemaError(f"{path}.matrix: expected {dim} rows")
        matrix = [_as_vector(row, f"{path}.matrix[{i}]", dim) for i, row in enumerate(raw_m)]
        offset = _as_vector(_get(cfg, "offset", path), f"{path}.offset", dim)
        try:
            tmap = SingleValuedMap.from_affine(set_a, set_b, matrix, offset, tol_snap)
        except ValueError as e:
            raise ResolutionError(f"{path}: {e}") from None
        norm["matrix"] = matrix
        norm["offset"] = offset
    elif form == "table":
        for banned in ("matrix", "offset"):
            if banned in cfg:
                raise SchemaError(f"{path}.{banned}: not allowed with the table form")
        raw = _get(cfg, "table", path)
        if not isinstance(raw, list) or not raw:
            raise SchemaError(f"{path}.table: expected a nonempty list of rows")
        rows = []
        for i, row in enumerate(raw):
            if not isinstance(row, list) or len(row) != 2:
                raise SchemaError(f"{path}.table[{i}]: expected [member, image]")
            x = _as_int(row[0], f"{path}.table[{i}][0]", minimum=0)
            if arity == "single":
                rows.append((x, _as_int(row[1], f"{path}.table[{i}][1]", minimum=0)))
            else:
                if not isinstance(row[1], list) or not row[1]:
                    raise SchemaError(f"{path}.table[{i}][1]: expected a nonempty id list")
                ys = [_as_int(v, f"{path}.table[{i}][1][{k}]", minimum=0) for k, v in enumerate(row[1])]
                rows.append((x, ys))
        try:
            if arity == "single":
                tmap = SingleValuedMap.from_table(set_a, set_b, rows)
            else:
                tmap = MultiValuedMap.from_table(set_a, set_b, rows)
        except ValueError as e:
            raise ResolutionError(f"{path}.table: {e}") from None
        norm["table"] = [[x, ys] for x, ys in rows] if arity == "multi" else [[x, y] for x, y in rows]
    else:
        raise SchemaError(f"{path}.form: expected 'affine' or 'table'")

    phi, delta, alpha, lam, eps_grid, norm_params = _build_params(
        _get(cfg, "params", path, required=False, default={}), f"{path}.params", map_class
    )
    norm["class"] = map_class
    norm["params"] = norm_params
    return tmap, map_class, phi, delta, alpha, lam, eps_grid, norm


@dataclass(frozen=True)
class Tolerances:
    tol: float
    step_tol: float
    residual_tol: float
    tol_snap: float


@dataclass(frozen=True)
class ScenarioDocument:
    """A parsed, validated scenario with all referenced objects built."""

    name: str
    digest: str
    space: object
    set_a: IndexedSet
    set_b: IndexedSet
    tmap: object
    map_class: str | None
    phi: object
    delta: object
    alpha: float | None
    lam: float
    eps_grid: object
    tolerances: Tolerances
    max_iters: int
    start: int | None
    seeds: tuple
    on_certification_failure: str
    config: dict

    def stopping_rule(self):
        return StoppingRule(self.tolerances.step_tol, self.tolerances.residual_tol, self.max_iters)

    def solve_kwargs(self):
        """Keyword arguments for prepare_solve/best_proximity_solve."""
        return {
            "tol": self.tolerances.tol,
            "stop": self.stopping_rule(),
            "phi": self.phi,
            "delta": self.delta,
            "alpha": self.alpha,
            "lam": self.lam,
            "eps_grid": self.eps_grid,
            "on_certification_failure": self.on_certification_failure,
        }

    def with_tol(self, tol):
        """Copy with the proximity tolerance overridden."""
        config = json.loads(json.dumps(self.config))
        config["tolerances"]["tol"] = float(tol)
        return replace(self, tolerances=replace(self.tolerances, tol=float(tol)), config=config)

    def require_map(self):
        if self.tmap is None:
            raise SchemaError("map: this command needs a scenario with a map")
        return self.tmap


_TOP_FIELDS = (
    "schema",
    "backend",
    "sets",
    "map",
    "tolerances",
    "max_iters",
    "start",
    "seeds",
    "on_certification_failure",
)


def parse_scenario(text, name="<memory>"):
    """Parse and validate scenario JSON, building every referenced object."""
    digest = hashlib.sha256(text.encode()).hexdigest()[:12]
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise SchemaError("top level: expected an object")
    _require_dict(doc, "top level", _TOP_FIELDS)
    schema = _get(doc, "schema", "top level")
    if schema != SCHEMA_VERSION:
        raise SchemaError(f"schema: expected {SCHEMA_VERSION!r}, got {schema!r}")

    space, ranges, norm_backend = _build_backend(
        _require_dict(_get(doc, "backend", "top level"), "backend", ("kind", "dmat", "dimension", "points", "generators"))
    )
    sets_cfg = _require_dict(_get(doc, "sets", "top level"), "sets", ("A", "B"))
    set_a, norm_a = _build_set(_get(sets_cfg, "A", "sets"), "A", space, ranges)
    set_b, norm_b = _build_set(_get(sets_cfg, "B", "sets"), "B", space, ranges)

    tol_cfg = _get(doc, "tolerances", "top level", required=False, default={})
    _require_dict(tol_cfg, "tolerances", ("tol", "step_tol", "residual_tol", "tol_snap"))
    tolerances = Tolerances(
        _as_float(
            _get(tol_cfg, "tol", "tolerances", required=False, default=_DEFAULT_TOL[space.kind]),
            "tolerances.tol",
            nonnegative=True,
        ),
        _as_float(
            _get(tol_cfg, "step_tol", "tolerances", required=False, default=_DEFAULT_STEP_TOL),
            "tolerances.step_tol",
            nonnegative=True,
        ),
        _as_float(
            _get(tol_cfg, "residual_tol", "tolerances", required=False, default=_DEFAULT_RESIDUAL_TOL),
            "tolerances.residual_tol",
            nonnegative=True,
        ),
        _as_float(
            _get(tol_cfg, "tol_snap", "tolerances", required=False, default=_DEFAULT_TOL_SNAP),
            "tolerances.tol_snap",
            positive=True,
        ),
    )

    tmap = map_class = phi = delta = alpha = eps_grid = None
    lam = 0.5
    norm_map = None
    if "map" in doc:
        tmap, map_class, phi, delta, alpha, lam, eps_grid, norm_map = _build_map(
            doc["map"], set_a, set_b, tolerances.tol_snap
        )

    max_iters = _as_int(
        _get(doc, "max_iters", "top level", required=False, default=_DEFAULT_MAX_ITERS),
        "max_iters",
        minimum=1,
    )
    start = _get(doc, "start", "top level", required=False, default=None)
    if start is not None:
        start = _as_int(start, "start", minimum=0)
        if start not in set_a:
            raise ResolutionError(f"start: id {start} is not a member of A")
    seeds_raw = _get(doc, "seeds", "top level", required=False, default=[])
    if not isinstance(seeds_raw, list):
        raise SchemaError("seeds: expected a list of integers")
    seeds = tuple(_as_int(v, f"seeds[{i}]", minimum=0) for i, v in enumerate(seeds_raw))
    on_fail = _get(doc, "on_certification_failure", "top level", required=False, default="abort")
    if on_fail not in ("abort", "warn"):
        raise SchemaError("on_certification_failure: expected 'abort' or 'warn'")

    config = {
        "schema": SCHEMA_VERSION,
        "backend": norm_backend,
        "sets": {"A": norm_a, "B": norm_b},
        "tolerances": {
            "tol": tolerances.tol,
            "step_tol": tolerances.step_tol,
            "residual_tol": tolerances.residual_tol,
            "tol_snap": tolerances.tol_snap,
        },
        "max_iters": max_iters,
        "start": start,
        "seeds": list(seeds),
        "on_certification_failure": on_fail,
    }
    if norm_map is not None:
        config["map"] = norm_map

    return ScenarioDocument(
        name,
        digest,
        space,
        set_a,
        set_b,
        tmap,
        map_class,
        phi,
        delta,
        alpha,
        lam,
        eps_grid,
        tolerances,
        max_iters,
        start,
        seeds,
        on_fail,
        config,
    )


def load_scenario(path):
    """Read and parse a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ResolutionError(f"cannot read scenario file: {e}") from None
    return parse_scenario(text, name=os.path.basename(path))


def serialize_scenario(doc):
    """Canonical JSON text of a scenario (defaults materialized)."""
    return json.dumps(doc.config, indent=2) + "\n"
