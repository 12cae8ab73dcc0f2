"""Command-line interface: asg1-iga <command> <geometry file> [options]."""
import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from dotenv import load_dotenv

from . import __version__
from .analysis import MassMatrixReport
from .cache import Cache, make_key
from .c1_basis import dimension
from .cli_io import (
    FLOAT_FORMAT,
    parse_geometry,
    read_geometry_bytes,
    sample_function,
    write_basis,
    write_matrices,
    write_samples,
)
from .errors import ASG1Exception, GeometryError, NotASG1Error, NumericalError
from .metrics import get_metrics
from .pipeline import (
    Problem,
    build_basis,
    coefficient_matrices,
    condition_number,
    condition_table,
    dimension_report,
    load_problem,
)
from .summaries import (
    summarize_basis,
    summarize_condition_table,
    summarize_dimension,
    summarize_gluing,
    summarize_mass_report,
    summarize_matrices,
)
from .validation import MAX_QUADRATURE_ORDER, ValidationError, validate_numeric_range, validate_rational
from .verification import run_verification
from .workload_warnings import estimate_workload, format_workload_warning, generate_explain_output

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2


def _configure_logging(verbose: bool = False) -> None:
    """Configure logging from ASG1_LOG_LEVEL; --verbose forces DEBUG."""
    log_level_str = "DEBUG" if verbose else os.getenv("ASG1_LOG_LEVEL", "WARNING").upper()
    log_level = getattr(logging, log_level_str, logging.WARNING)
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    logging.getLogger("asg1_iga").setLevel(log_level)


def _breakpoints(text: str) -> list[float]:
    try:
        return [validate_rational(item.strip(), "breakpoints") for item in text.split(",") if item.strip()]
    except ValidationError as e:
        raise argparse.ArgumentTypeError(e.error.message)


def _ks(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", type=Path, help="geometry file (JSON)")
    common.add_argument("--k", type=int, default=None,
                        help="refine to k uniform inner breakpoints")
    common.add_argument("--breakpoints", type=_breakpoints, default=None,
                        help="comma-separated inner breakpoints, e.g. 1/3,2/3")
    common.add_argument("--solve", action="store_true",
                        help="ignore the gluing block of the file and solve for the gluing data")
    common.add_argument("--explain", action="store_true",
                        help="print the plan and size estimates without computing")
    common.add_argument("--timings", action="store_true", help="print stage timings to stderr")
    common.add_argument("--no-cache", action="store_true", help="bypass cached results")
    common.add_argument("--json", action="store_true", help="print machine-readable JSON")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="asg1-iga",
        description="C1 isogeometric spaces on AS-G1 two-patch geometries",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("check", parents=[common], help="AS-G1 verdict and gluing data")
    commands.add_parser("dim", parents=[common], help="dimension of V1 and its parts")

    basis = commands.add_parser("basis", parents=[common], help="write basis coefficient grids")
    basis.add_argument("--out", type=Path, required=True)
    basis.add_argument("--space", choices=["V0", "V1"], default="V1")
    basis.add_argument("--format", choices=["csv", "parquet"], default="csv")

    matrices = commands.add_parser("matrices", parents=[common],
                                   help="write the interface coefficient matrices")
    matrices.add_argument("--out", type=Path, required=True)
    matrices.add_argument("--method", choices=["blossom", "greville"], default="blossom")
    matrices.add_argument("--format", choices=["csv", "parquet"], default="csv")

    sample = commands.add_parser("sample", parents=[common], help="sample one basis function")
    sample.add_argument("--function", type=int, required=True, dest="function_index")
    sample.add_argument("--grid", type=int, default=21)
    sample.add_argument("--out", type=Path, default=None,
                        help="output table; prints CSV to stdout when omitted")
    sample.add_argument("--space", choices=["V0", "V1"], default="V1")
    sample.add_argument("--format", choices=["csv", "parquet"], default="csv")

    condition = commands.add_parser("condition", parents=[common],
                                    help="condition number of the scaled mass matrix")
    condition.add_argument("--space", choices=["V0", "V1"], default="V1")
    condition.add_argument("--table", type=_ks, default=None,
                           help="comma-separated k values; prints V1 and V0 rows")
    condition.add_argument("--quadrature-order", type=int, default=None)
    condition.add_argument("--eigen", choices=["auto", "jacobi", "lapack"], default="auto")

    commands.add_parser("verify", parents=[common], help="run the invariant suite")
    return parser


def _problem(args: argparse.Namespace) -> Problem:
    return load_problem(args.file, args.k, args.breakpoints, args.solve)


def _cache_params(args: argparse.Namespace, **extra) -> dict:
    params = {"k": args.k, "breakpoints": args.breakpoints, "solve": args.solve}
    params.update(extra)
    return params


def _cached(args: argparse.Namespace, command: str, params: dict, compute: Callable[[], dict]) -> dict:
    """Look up a JSON result in the cache, computing and storing it on a miss."""
    cache = Cache()
    key = make_key(read_geometry_bytes(args.file), command, params)
    value, info = cache.get_with_info(key, force_refresh=args.no_cache)
    if value is not None and info is not None:
        get_metrics().record_cache_hit()
        logger.debug("cache hit for %s %s", command, info.format_feedback())
        return value
    get_metrics().record_cache_miss()
    value = compute()
    cache.set(key, value)
    return value


def _explain(args: argparse.Namespace) -> int:
    G, _ = parse_geometry(args.file)
    k = args.k if args.k is not None else (
        len(args.breakpoints) if args.breakpoints is not None else G.space.k
    )
    space = getattr(args, "space", "V1")
    method = getattr(args, "eigen", "auto")
    print(generate_explain_output(args.command, G.degree, G.regularity, k, space, method))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    try:
        problem = _problem(args)
    except NotASG1Error as e:
        if args.json:
            print(json.dumps({"asg1": False, "reason": e.error.message}))
        else:
            print(f"🔴 Verdict: not AS-G1\n\n{e.error.to_response()}")
        return EXIT_VERIFY_FAILED
    if args.json:
        print(json.dumps({"asg1": True, **problem.gluing.to_dict()}, indent=2))
    else:
        print(summarize_gluing(problem.gluing))
    return EXIT_OK


def cmd_dim(args: argparse.Namespace) -> int:
    def compute() -> dict:
        return dimension_report(_problem(args)).to_dict()

    report = _cached(args, "dim", _cache_params(args), compute)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(summarize_dimension(dimension(
            report["p"], report["r"], report["k"], report["d_alpha"], report["z_beta"],
            report["beta_is_zero"],
        )))
    return EXIT_OK


def cmd_basis(args: argparse.Namespace) -> int:
    problem = _problem(args)
    warning = format_workload_warning(
        estimate_workload(problem.geometry.degree, problem.geometry.regularity, problem.k, args.space)
    )
    if warning:
        logger.warning(warning)
    basis = build_basis(problem, args.space)
    paths = write_basis(basis, args.out, args.format)
    if args.json:
        print(json.dumps({"count": len(basis), "files": [str(p) for p in paths]}, indent=2))
    else:
        print(summarize_basis(basis))
        print("\n💾 Written: " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def cmd_matrices(args: argparse.Namespace) -> int:
    problem = _problem(args)
    matrices = coefficient_matrices(problem, args.method)
    paths = write_matrices(matrices, args.out, args.format)
    if args.json:
        print(json.dumps({"case": matrices.case, "files": [str(p) for p in paths]}, indent=2))
    else:
        print(summarize_matrices(matrices))
        print("\n💾 Written: " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    problem = _problem(args)
    basis = build_basis(problem, args.space)
    df = sample_function(problem.geometry, basis, args.function_index, args.grid)
    if args.out is None:
        df.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT)
        return EXIT_OK
    path = write_samples(df, args.out, args.format)
    print(f"💾 Written {len(df):,} samples of function {args.function_index} "
          f"({basis[args.function_index].kind}) to {path}")
    return EXIT_OK


def cmd_condition(args: argparse.Namespace) -> int:
    if args.quadrature_order is not None:
        validate_numeric_range(args.quadrature_order, "quadrature order", 1, MAX_QUADRATURE_ORDER)
    if args.table is not None:
        table = condition_table(args.file, args.table, ("V1", "V0"), args.quadrature_order, args.eigen)
        if args.json:
            print(table.to_json(orient="records", indent=2))
        else:
            print("🧮 **Condition numbers (diagonally scaled mass matrix)**\n")
            print("\n".join(summarize_condition_table(table)))
        return EXIT_OK

    def compute() -> dict:
        problem = _problem(args)
        warning = format_workload_warning(
            estimate_workload(problem.geometry.degree, problem.geometry.regularity, problem.k,
                              args.space),
            args.eigen,
        )
        if warning:
            logger.warning(warning)
        return condition_number(problem, args.space, args.quadrature_order, args.eigen).to_dict()

    params = _cache_params(args, space=args.space, quadrature_order=args.quadrature_order,
                           eigen=args.eigen)
    report = _cached(args, "condition", params, compute)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(summarize_mass_report(MassMatrixReport(**report)))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    problem = _problem(args)
    report = run_verification(problem.geometry, problem.gluing)
    if args.json:
        print(json.dumps({
            "passed": report.passed,
            "score": report.score,
            "issues": report.issues,
            "warnings": report.warnings,
        }, indent=2))
    else:
        print(report.to_string())
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "check": cmd_check,
    "dim": cmd_dim,
    "basis": cmd_basis,
    "matrices": cmd_matrices,
    "sample": cmd_sample,
    "condition": cmd_condition,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    logger.info("Command: %s %s", args.command, args.file)
    try:
        if args.explain:
            return _explain(args)
        return COMMANDS[args.command](args)
    except (ValidationError, GeometryError) as e:
        logger.warning("Input rejected: %s", e)
        print(e.error.to_response(), file=sys.stderr)
        return EXIT_INPUT_ERROR
    except NumericalError as e:
        logger.error("Numerical failure: %s", e)
        print(e.error.to_response(), file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except ASG1Exception as e:
        print(e.error.to_response(), file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception as e:
        logger.error("Unexpected error in %s: %s", args.command, e, exc_info=True)
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    finally:
        if args.timings:
            print(get_metrics().format_summary(), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
