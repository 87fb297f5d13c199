"""Command line interface.

Four subcommands operate on a scenario file:

    proxpoint analyze  <scenario>   proximity structure and pairing
    proxpoint certify  <scenario>   declared map class on a0
    proxpoint solve    <scenario>   full pipeline + iteration
    proxpoint verify   <scenario>   solve vs exhaustive oracle scans

Exit codes: 0 success, 2 scenario/validation problems, 3 hypothesis
failures (P-property, certification, image leaving b0), 4 iteration
budget exhausted without --allow-maxiters, 5 solver/oracle disagreement.
Reports are byte-stable for a given scenario when --no-timings is set.
"""
from __future__ import annotations

import argparse
import sys
import time

from .errors import ProxpointError, ResolutionError, SchemaError
from .maps import certify_map
from .oracle import brute_force_bpp, brute_force_fixed_points, cross_check
from .proximity import build_isometry, check_p_property, proximal_sets, verify_isometry
from .report import Report, fmt, fmt_point, write_trace_csv
from .scenario import load_scenario
from .solvers import MAX_ITERS, best_proximity_solve, multi_start_run, prepare_solve


def _header(rep, command, doc):
    rep.field("command", command)
    rep.field("scenario", doc.name)
    rep.field("digest", doc.digest)
    rep.field("backend", doc.space.kind)
    rep.field("points", doc.space.size)
    rep.field("size_a", len(doc.set_a))
    rep.field("size_b", len(doc.set_b))
    rep.field("tol", doc.tolerances.tol)


def _proximity_block(rep, structure, verdict):
    space = structure.set_a.space
    rep.line("[proximity]")
    rep.field("dist_ab", structure.dist_ab)
    rep.field("size_a0", len(structure.a0))
    rep.field("size_b0", len(structure.b0))
    rep.field("attaining_pairs", structure.pairs.shape[0])
    rep.field("p_property", "holds" if verdict.holds else "fails")
    rep.field("p_defect", verdict.defect)
    if verdict.witness is not None:
        x1, y1, x2, y2 = verdict.witness
        rep.field(
            "p_witness",
            f"x1={fmt_point(space, x1)} y1={fmt_point(space, y1)} "
            f"x2={fmt_point(space, x2)} y2={fmt_point(space, y2)}",
        )


def _witness_text(space, witness):
    if len(witness) == 3:
        x, y, eps = witness
        return f"x={fmt_point(space, x)} y={fmt_point(space, y)} eps={fmt(eps)}"
    x, y = witness
    return f"x={fmt_point(space, x)} y={fmt_point(space, y)}"


def _certification_block(rep, space, cert):
    rep.line("[certification]")
    rep.field("class", cert.map_class)
    rep.field("mode", cert.mode)
    rep.field("pairs_checked", cert.n_pairs)
    rep.field("holds", cert.holds)
    rep.field("defect", cert.defect)
    if cert.witness is not None:
        rep.field("witness", _witness_text(space, cert.witness))
        rep.field("lhs", cert.lhs)
        rep.field("rhs", cert.rhs)
    if cert.note:
        rep.field("note", cert.note)


def _solve_block(rep, doc, solver, result, start_id):
    rep.line("[solve]")
    rep.field("solver", solver)
    rep.field("start_id", int(start_id))
    rep.field("start", fmt_point(doc.space, start_id))
    rep.field("iterations", result.iterations)
    rep.field("termination", result.termination)
    rep.field("x_star_id", int(result.x_star))
    rep.field("x_star", fmt_point(doc.space, result.x_star))
    rep.field("residual", result.residual)
    rep.field("dist_ab", result.dist_ab)


def cmd_analyze(rep, doc, args):
    structure = proximal_sets(doc.set_a, doc.set_b, doc.tolerances.tol)
    verdict = check_p_property(structure)
    _proximity_block(rep, structure, verdict)
    if not verdict.holds:
        return 3
    pairing = build_isometry(structure, verdict)
    iso = verify_isometry(pairing)
    rep.line("[pairing]")
    rep.field("bijective", iso.bijective)
    rep.field("isometry_defect", iso.isometry_defect)
    rep.field("pair_defect", iso.pair_defect)
    for w in pairing.warnings:
        rep.field("warning", w)
    return 0


def cmd_certify(rep, doc, args):
    tmap = doc.require_map()
    structure = proximal_sets(doc.set_a, doc.set_b, doc.tolerances.tol)
    cert = certify_map(
        tmap,
        doc.map_class,
        phi=doc.phi,
        delta=doc.delta,
        alpha=doc.alpha,
        domain=structure.a0,
        eps_grid=doc.eps_grid,
        tol=doc.tolerances.tol,
    )
    _certification_block(rep, doc.space, cert)
    return 0 if cert.holds else 3


def cmd_solve(rep, doc, args):
    tmap = doc.require_map()
    prepared = prepare_solve(doc.set_a, doc.set_b, tmap, doc.map_class, **doc.solve_kwargs())
    _proximity_block(rep, prepared.structure, prepared.verdict)
    _certification_block(rep, doc.space, prepared.certification)
    for w in prepared.warnings:
        rep.field("warning", w)
    start_id = doc.start if doc.start is not None else int(prepared.selfmap.domain.member(0))
    if start_id not in prepared.selfmap.domain:
        raise ResolutionError(f"start: id {start_id} is not in the reduced domain a0")
    result = prepared.run(start_id)
    _solve_block(rep, doc, prepared.solver, result, start_id)
    if args.trace_csv:
        write_trace_csv(args.trace_csv, result.trace)
        rep.field("trace_rows", len(result.trace))
    hit_budget = result.termination == MAX_ITERS
    if args.starts or doc.seeds:
        results, spread = multi_start_run(prepared, args.starts or 0, seeds=doc.seeds)
        rep.line("[starts]")
        rep.field("starts_run", len(results))
        if doc.seeds:
            rep.field("seeded", len(doc.seeds))
        rep.field("max_disagreement", spread)
        rep.field("terminations", ",".join(sorted({r.termination for r in results})))
        hit_budget = hit_budget or any(r.termination == MAX_ITERS for r in results)
    return 4 if hit_budget and not args.allow_maxiters else 0


def cmd_verify(rep, doc, args):
    tmap = doc.require_map()
    outcome = best_proximity_solve(
        doc.set_a, doc.set_b, tmap, doc.map_class, start=doc.start, **doc.solve_kwargs()
    )
    for w in outcome.warnings:
        rep.field("warning", w)
    result = outcome.result
    rep.line("[solve]")
    rep.field("solver", outcome.solver)
    rep.field("iterations", result.iterations)
    rep.field("termination", result.termination)
    rep.field("x_star_id", int(result.x_star))
    rep.field("x_star", fmt_point(doc.space, result.x_star))
    rep.field("residual", result.residual)

    tol = doc.tolerances.tol
    oracle = brute_force_bpp(tmap, tol=tol)
    rep.line("[oracle]")
    rep.field("bpp_minimizers", int(oracle.minimizers.size))
    rep.field("bpp_best_id", int(oracle.minimizers[0]))
    rep.field("bpp_best", fmt_point(doc.space, oracle.minimizers[0]))
    rep.field("bpp_objective", oracle.objective)
    rep.field("bpp_runner_up", oracle.runner_up)
    fixed = brute_force_fixed_points(outcome.selfmap, tol=tol)
    rep.field("fixed_points", int(fixed.minimizers.size))
    if fixed.minimizers.size:
        rep.field("fixed_first_id", int(fixed.minimizers[0]))
        rep.field("fixed_first", fmt_point(doc.space, fixed.minimizers[0]))

    agreement = cross_check(result, oracle, doc.space, tol=tol)
    rep.line("[agreement]")
    rep.field("agreement", agreement.ok)
    if agreement.nearest_minimizer is not None:
        rep.field("nearest_minimizer_id", int(agreement.nearest_minimizer))
        rep.field("nearest_minimizer", fmt_point(doc.space, agreement.nearest_minimizer))
    rep.field("min_distance", agreement.min_distance)
    rep.field("solver_residual", agreement.solver_residual)
    rep.field("oracle_residual", agreement.oracle_residual)
    rep.field("residual_gap", agreement.residual_gap)
    if agreement.note:
        rep.field("note", agreement.note)
    return 0 if agreement.ok else 5


_COMMANDS = {
    "analyze": cmd_analyze,
    "certify": cmd_certify,
    "solve": cmd_solve,
    "verify": cmd_verify,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="proxpoint",
        description="Best-proximity-point solving on finite scenario files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "proximity structure, P-property, pairing"),
        ("certify", "check the declared map class on a0"),
        ("solve", "run the full pipeline and iterate"),
        ("verify", "cross-check a solve against exhaustive scans"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("scenario", help="path to a scenario JSON file")
        cmd.add_argument("--trace-csv", metavar="PATH", help="write iteration history as CSV (solve)")
        cmd.add_argument("--starts", type=int, metavar="K", help="run K strided starts (solve)")
        cmd.add_argument("--tol", type=float, metavar="X", help="override the proximity tolerance")
        cmd.add_argument("--no-timings", action="store_true", help="omit wall-clock lines (stable bytes)")
        cmd.add_argument("--allow-maxiters", action="store_true", help="exit 0 even when the budget runs out")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    rep = Report()
    t0 = time.perf_counter()
    try:
        if args.tol is not None and args.tol < 0.0:
            raise SchemaError("--tol must be nonnegative")
        if args.starts is not None and args.starts < 1:
            raise SchemaError("--starts must be at least 1")
        doc = load_scenario(args.scenario)
        if args.tol is not None:
            doc = doc.with_tol(args.tol)
        _header(rep, args.command, doc)
        code = _COMMANDS[args.command](rep, doc, args)
    except ProxpointError as e:
        rep.field("error", e.code)
        rep.field("detail", str(e))
        code = e.exit_code
    else:
        if not args.no_timings:
            rep.field("elapsed_ms", (time.perf_counter() - t0) * 1e3)
    sys.stdout.write(rep.text())
    return code


if __name__ == "__main__":
    raise SystemExit(main())
