"""Command-line driver.

Three subcommands share one reporting format:

* ``solve``        - track a square homogeneous system directly,
* ``equivalence``  - draw random ideal elements of requested degrees and
                     measure the residual scheme,
* ``chern``        - run the full pipeline and solve for the Chern numbers.

Reports are JSON (default) or a human table; identical invocations with the
same seed produce byte-identical JSON up to the ``timings`` block.  Exit
codes: 0 success, 2 input error, 3 numerical failure, 4 assumption violation
(junk component found).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from .chern import (
    PipelineConfig,
    SquareRunAnalysis,
    analyze_square_system,
    chern_numbers_with_analyses,
    dimension_of_z,
    draw_square_system,
)
from .corpus import degree_histogram, load_ideal
from .errors import (
    AssumptionViolationError,
    ChernumError,
    InputError,
    NumericalError,
    TrackingError,
)
from .polysys import PolySystem
from .tracker import HomotopyConfig
from .zerodim import ClassifyConfig, ISOLATED

SCHEMA_VERSION = "chernum-report/1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_ASSUMPTION = 4


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("system", help="system file in the canonical format")
    p.add_argument("--seed", type=int, default=0, help="master random seed")
    p.add_argument("--tol-track", type=float, default=1e-8, dest="tol_track")
    p.add_argument("--tol-newton", type=float, default=1e-10, dest="tol_newton")
    p.add_argument("--tol-cluster", type=float, default=1e-6, dest="tol_cluster")
    p.add_argument("--tol-rank", type=float, default=1e-8, dest="tol_rank")
    p.add_argument(
        "--macaulay-max-order", type=int, default=10, dest="macaulay_max_order"
    )
    p.add_argument(
        "--allow-low-degrees",
        action="store_true",
        help="permit element degrees below the maximal generator degree "
        "(asserts the scheme is cut out in that lower degree)",
    )
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", choices=("json", "table"), default="json")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chernum",
        description="Chern numbers of smooth projective varieties by homotopy "
        "continuation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="track a square system directly")
    _add_common_flags(p_solve)

    p_eq = sub.add_parser(
        "equivalence", help="residual scheme of random ideal elements"
    )
    _add_common_flags(p_eq)
    p_eq.add_argument(
        "--degrees",
        required=True,
        help="comma-separated degrees of the random elements, e.g. 2,2,3",
    )
    p_eq.add_argument(
        "--fixed-gens",
        default="",
        dest="fixed_gens",
        help="comma-separated generator indices included verbatim in the "
        "square system",
    )

    p_ch = sub.add_parser("chern", help="full Chern number pipeline")
    _add_common_flags(p_ch)
    p_ch.add_argument(
        "--schedule",
        default=None,
        help="semicolon-separated degree rows, e.g. '2,2,2;2,2,3'",
    )
    p_ch.add_argument("--fixed-gens", default="", dest="fixed_gens")
    return parser


def _config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        tracking=HomotopyConfig(
            track_tol=args.tol_track, newton_tol=args.tol_newton
        ),
        classify=ClassifyConfig(
            cluster_tol=args.tol_cluster,
            rank_tol=args.tol_rank,
            macaulay_max_order=args.macaulay_max_order,
        ),
        threads=args.threads,
        allow_low_degrees=args.allow_low_degrees,
    )


def _parse_int_list(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _parse_schedule(text: str) -> list[list[int]]:
    rows = [row for row in text.split(";") if row.strip()]
    if not rows:
        raise InputError("empty schedule")
    return [_parse_int_list(row) for row in rows]


def _complex_pairs(vec: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in vec]


def _cluster_block(c) -> dict:
    return {
        "representative": _complex_pairs(c.representative),
        "path_indices": list(c.path_indices),
        "classification": c.classification,
        "multiplicity": c.multiplicity,
        "nullity_sequence": list(c.nullity_sequence),
    }


def _analysis_block(a: SquareRunAnalysis) -> dict:
    histogram: dict[str, int] = {}
    for pr in a.path_results:
        histogram[pr.status.value] = histogram.get(pr.status.value, 0) + 1
    return {
        "degrees": list(a.degrees),
        "bezout": a.bezout,
        "mu_s": a.mu_s,
        "equivalence": a.equivalence,
        "isolated_points": a.isolated_count(),
        "paths": {"total": len(a.path_results), "status_histogram": histogram},
        "clusters": [_cluster_block(c) for c in a.clusters],
    }


def _config_block(args) -> dict:
    block = {
        "seed": args.seed,
        "tol_track": args.tol_track,
        "tol_newton": args.tol_newton,
        "tol_cluster": args.tol_cluster,
        "tol_rank": args.tol_rank,
        "macaulay_max_order": args.macaulay_max_order,
        "allow_low_degrees": bool(args.allow_low_degrees),
        "threads": args.threads,
    }
    if getattr(args, "degrees", None) is not None:
        block["degrees"] = _parse_int_list(args.degrees)
    if getattr(args, "schedule", None):
        block["schedule"] = _parse_schedule(args.schedule)
    if getattr(args, "fixed_gens", ""):
        block["fixed_gens"] = _parse_int_list(args.fixed_gens)
    return block


def _input_block(path: Path, system: PolySystem) -> dict:
    return {
        "path": str(path),
        "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
        "num_vars": system.num_vars,
        "var_names": list(system.names()),
        "generator_degrees": list(system.degrees()),
        "degree_histogram": {str(k): v for k, v in degree_histogram(system).items()},
    }


def _fixed_forms(system: PolySystem, args):
    indices = _parse_int_list(getattr(args, "fixed_gens", "") or "")
    forms = []
    for i in indices:
        if not 0 <= i < len(system.polys):
            raise InputError(f"fixed generator index {i} out of range")
        forms.append(system.polys[i])
    return forms


def _print_report(report: dict, mode: str, stream):
    if mode == "json":
        print(json.dumps(report, indent=2, sort_keys=True), file=stream)
        return
    _print_table(report, stream)


def _print_table(report: dict, stream):
    print(f"command: {report['command']}", file=stream)
    print(f"input:   {report['input']['path']}", file=stream)
    print(f"seed:    {report['config']['seed']}", file=stream)
    runs = report.get("runs", [])
    if runs:
        width = max(len(str(tuple(r["degrees"]))) for r in runs)
        head = f"{'degrees':<{width}} | non-singular points | singular points"
        print(head, file=stream)
        print("-" * len(head), file=stream)
        for r in runs:
            print(
                f"{str(tuple(r['degrees'])):<{width}} | "
                f"{r['isolated_points']:>19} | {r['equivalence']:>15}",
                file=stream,
            )
    chern = report.get("chern")
    if chern:
        print(f"dimension:     {chern['dimension']}", file=stream)
        print(f"chern degrees: {chern['chern_degrees']}", file=stream)
        if "genus" in chern:
            print(f"genus:         {chern['genus']}", file=stream)
    error = report.get("error")
    if error:
        print(f"error[{error['type']}]: {error['message']}", file=stream)


def _relation_block(rel) -> dict:
    return {
        "coeffs": list(rel.coeffs),
        "rhs": rel.rhs,
        "degrees": list(rel.degrees_used),
    }


def _run_solve(args, system: PolySystem, cfg, rng, report, timings):
    if len(system.polys) != system.num_vars - 1:
        raise InputError(
            f"solve needs a square system ({system.num_vars - 1} forms in "
            f"{system.num_vars} variables); file has {len(system.polys)}"
        )
    t0 = time.perf_counter()
    analysis = analyze_square_system(system, system, cfg, rng)
    timings["solve_seconds"] = time.perf_counter() - t0
    block = _analysis_block(analysis)
    report["runs"] = [block]
    report["paths"] = block["paths"]
    report["clusters"] = block["clusters"]
    report["equivalence"] = {
        "degrees": block["degrees"],
        "bezout": block["bezout"],
        "mu_s": block["mu_s"],
        "D": block["equivalence"],
    }


def _run_equivalence(args, system: PolySystem, cfg, rng, report, timings):
    degrees = _parse_int_list(args.degrees)
    fixed = _fixed_forms(system, args)
    t0 = time.perf_counter()
    square = draw_square_system(system, degrees, cfg, rng, fixed_forms=fixed)
    analysis = analyze_square_system(square, system, cfg, rng)
    timings["solve_seconds"] = time.perf_counter() - t0
    block = _analysis_block(analysis)
    report["runs"] = [block]
    report["paths"] = block["paths"]
    report["clusters"] = block["clusters"]
    report["equivalence"] = {
        "degrees": block["degrees"],
        "bezout": block["bezout"],
        "mu_s": block["mu_s"],
        "D": block["equivalence"],
    }


def _run_chern(args, system: PolySystem, cfg, rng, report, timings):
    fixed = _fixed_forms(system, args)
    schedule = _parse_schedule(args.schedule) if args.schedule else None
    t0 = time.perf_counter()
    result, analyses = chern_numbers_with_analyses(
        system, cfg, rng, schedule=schedule, fixed_forms=fixed
    )
    timings["pipeline_seconds"] = time.perf_counter() - t0
    report["runs"] = [_analysis_block(a) for a in analyses]
    report["relations"] = [_relation_block(rel) for rel in result.relations]
    chern_block = {
        "dimension": result.dimension,
        "chern_degrees": list(result.chern_degrees),
        "det_M": result.det_m,
        "residual_of_solve": result.residual_of_solve,
    }
    if result.dimension == 1:
        chern_block["genus"] = result.genus()
    report["chern"] = chern_block


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    timings: dict[str, float] = {}
    t_start = time.perf_counter()
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
    }
    try:
        report["config"] = _config_block(args)
        path = Path(args.system)
        if not path.is_file():
            raise InputError(f"no such file: {path}")
        system = load_ideal(path)
        report["input"] = _input_block(path, system)
        cfg = _config_from_args(args)
        rng = np.random.default_rng(args.seed)
        if args.command == "solve":
            _run_solve(args, system, cfg, rng, report, timings)
        elif args.command == "equivalence":
            _run_equivalence(args, system, cfg, rng, report, timings)
        else:
            _run_chern(args, system, cfg, rng, report, timings)
        code = EXIT_OK
    except AssumptionViolationError as exc:
        report["error"] = {
            "type": "assumption_violation",
            "message": str(exc),
            "clusters": [_cluster_block(c) for c in exc.clusters],
        }
        code = EXIT_ASSUMPTION
    except (TrackingError, NumericalError) as exc:
        report["error"] = {"type": "numerical_failure", "message": str(exc)}
        code = EXIT_NUMERICAL
    except (InputError, OSError) as exc:
        report["error"] = {"type": "input_error", "message": str(exc)}
        code = EXIT_INPUT
    timings["total_seconds"] = time.perf_counter() - t_start
    report["timings"] = timings
    _print_report(report, args.output, sys.stdout)
    return code


def console_entry():  # pragma: no cover - thin wrapper
    raise SystemExit(main())


if __name__ == "__main__":  # pragma: no cover
    console_entry()
