"""asg1-iga MCP server - C1 isogeometric spaces as Model Context Protocol tools."""
import asyncio
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv
from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import (
    GetPromptResult,
    Prompt,
    PromptMessage,
    Resource,
    TextContent,
    TextResourceContents,
    Tool,
)

from .analysis import MassMatrixReport
from .async_io import run_blocking, write_table_async
from .c1_basis import dimension
from .cache import Cache, make_key
from .cli_io import (
    example_path,
    prepare_output_dir,
    read_geometry_bytes,
    sample_function,
    write_basis,
    write_matrices,
)
from .errors import ASG1Exception, ErrorCode, NotASG1Error
from .metrics import get_metrics
from .pipeline import (
    Problem,
    build_basis,
    coefficient_matrices,
    condition_number,
    dimension_report,
    load_problem,
)
from .summaries import (
    summarize_basis,
    summarize_dimension,
    summarize_gluing,
    summarize_mass_report,
    summarize_matrices,
)
from .validation import (
    MAX_QUADRATURE_ORDER,
    ValidationError,
    validate_numeric_range,
    validate_output_format,
    validate_rational,
    validate_space,
)
from .verification import run_verification
from .workload_warnings import estimate_workload, format_workload_warning, generate_explain_output

# Load environment variables
load_dotenv()


def _configure_logging() -> logging.Logger:
    """Configure logging based on ASG1_LOG_LEVEL environment variable."""
    log_level_str = os.getenv("ASG1_LOG_LEVEL", "INFO").upper()
    log_level = getattr(logging, log_level_str, logging.INFO)

    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    logger = logging.getLogger("asg1_iga")
    logger.setLevel(log_level)
    logging.getLogger("asyncio").setLevel(logging.WARNING)

    logger.info(f"asg1-iga MCP server logging initialized at level: {log_level_str}")
    return logger


logger = _configure_logging()

cache = Cache()

app = Server("asg1-iga")

EXAMPLE_URI = "asg1://examples/bicubic_two_patch"
ERROR_CODES_URI = "asg1://error-codes"

# Rows of sampled data echoed back in the sample_function response
MAX_SAMPLE_ROWS_DISPLAY = 10


def validate_geometry_path(file_path: Optional[str]) -> Path:
    """
    Resolve the geometry argument; the bundled example when omitted.

    Raises:
        ValidationError: On directory traversal outside the working directory
    """
    if not file_path:
        return example_path()
    path = Path(file_path)
    resolved = path.resolve()
    try:
        resolved.relative_to(Path.cwd().resolve())
    except ValueError:
        if ".." in path.parts:
            raise ValidationError(
                "Directory traversal (..) not allowed in file paths",
                code=ErrorCode.E3002_INVALID_PATH,
            )
    return resolved


def _problem_arguments(arguments: dict) -> dict:
    """Validated keyword arguments for load_problem."""
    k = arguments.get("k")
    if k is not None:
        validate_numeric_range(k, "k", min_value=0, max_value=200)
    breakpoints = arguments.get("breakpoints")
    if breakpoints is not None:
        breakpoints = [validate_rational(b, f"breakpoints[{m}]") for m, b in enumerate(breakpoints)]
    return {
        "path": validate_geometry_path(arguments.get("file")),
        "k": k,
        "breakpoints": breakpoints,
        "solve": bool(arguments.get("solve", False)),
    }


async def _load(arguments: dict) -> Problem:
    return await run_blocking(load_problem, **_problem_arguments(arguments))


def _text(text: str) -> list[TextContent]:
    return [TextContent(type="text", text=text)]


PROBLEM_PROPERTIES = {
    "file": {
        "type": "string",
        "description": "Geometry file (JSON). Defaults to the bundled bicubic example.",
    },
    "k": {
        "type": "integer",
        "description": "Refine to k uniform inner breakpoints (e.g. 0, 2, 5, 10)",
    },
    "breakpoints": {
        "type": "array",
        "items": {"type": ["string", "number"]},
        "description": "Explicit inner breakpoints, rationals allowed (e.g. [\"1/3\", \"2/3\"])",
    },
    "solve": {
        "type": "boolean",
        "description": "Ignore the gluing block of the file and solve for the gluing data",
        "default": False,
    },
}


@app.list_resources()
async def list_resources() -> list[Resource]:
    """List available resources."""
    return [
        Resource(
            uri=EXAMPLE_URI,
            name="Bicubic two-patch example",
            description="AS-G1 two-patch geometry with exact rational control points and gluing data",
            mimeType="application/json",
        ),
        Resource(
            uri=ERROR_CODES_URI,
            name="Error Code Reference",
            description="Complete list of error codes and their meanings",
            mimeType="text/markdown",
        ),
    ]


@app.read_resource()
async def read_resource(uri: str) -> list[TextResourceContents]:
    """Read a resource by URI."""
    if str(uri) == EXAMPLE_URI:
        content = example_path().read_text(encoding="utf-8")
        return [TextResourceContents(uri=uri, mimeType="application/json", text=content)]

    elif str(uri) == ERROR_CODES_URI:
        lines = ["# Error Code Reference", ""]
        families = {"E1": "Validation", "E2": "Geometry", "E3": "File", "E4": "Numerical"}
        for prefix, family in families.items():
            lines.append(f"## {prefix}xxx - {family} Errors")
            for code in ErrorCode:
                if code.value.startswith(prefix):
                    label = code.name.split("_", 1)[1].replace("_", " ").lower()
                    lines.append(f"- {code.value}: {label}")
            lines.append("")
        return [TextResourceContents(uri=uri, mimeType="text/markdown", text="\n".join(lines))]

    else:
        raise ValueError(f"Unknown resource: {uri}")


@app.list_prompts()
async def list_prompts() -> list[Prompt]:
    """List available prompts."""
    return [
        Prompt(
            name="condition-study",
            description="Compare mass-matrix conditioning of the C1 and C0 spaces under refinement",
            arguments=[],
        )
    ]


@app.get_prompt()
async def get_prompt(name: str, arguments: Optional[dict] = None) -> GetPromptResult:
    """Get a prompt by name."""
    if name == "condition-study":
        return GetPromptResult(
            messages=[
                PromptMessage(
                    role="user",
                    content=TextContent(
                        type="text",
                        text="""# Conditioning Study

## Step 1: Check the geometry
Use `check_geometry` to confirm the geometry is AS-G1 and inspect its gluing data.

## Step 2: Size the problem
Use `dimension` for each k you plan to run, or `condition_number` with `explain=true`.

## Step 3: Compute
Call `condition_number` with space="V1" and space="V0" for k = 0, 2, 5, 10.
Results are cached; use `force_refresh=true` to recompute.

## Step 4: Validate
Run `verify_geometry` at the largest k to confirm the C1 invariants hold.""",
                    ),
                )
            ]
        )
    raise ValueError(f"Unknown prompt: {name}")


@app.list_tools()
async def list_tools() -> list[Tool]:
    """List available tools."""
    return [
        Tool(
            name="check_geometry",
            description="""Decide whether a two-patch geometry is AS-G1 and report its gluing data.

**Returns:** alpha_L, alpha_R, beta, beta_L, beta_R, d_alpha, z_beta and the beta case.""",
            inputSchema={"type": "object", "properties": dict(PROBLEM_PROPERTIES)},
        ),
        Tool(
            name="dimension",
            description="""Dimension of the C1 space V1 and of its interior and interface parts.

Either pass a geometry (file/k) or the parameters p, r, k, d_alpha, z_beta directly.

**Example:** dimension(k=2) on the bundled example gives 107""",
            inputSchema={
                "type": "object",
                "properties": {
                    **PROBLEM_PROPERTIES,
                    "p": {"type": "integer", "description": "Degree (formula mode)"},
                    "r": {"type": "integer", "description": "Regularity (formula mode)"},
                    "d_alpha": {"type": "integer", "description": "Degree of alpha, 0 or 1"},
                    "z_beta": {"type": "integer", "description": "Roots of beta at breakpoints"},
                    "beta_is_zero": {"type": "boolean", "default": False},
                },
            },
        ),
        Tool(
            name="build_basis",
            description="Build the C1 basis (V1) or the standard C0 basis (V0) and write its coefficient grids",
            inputSchema={
                "type": "object",
                "properties": {
                    **PROBLEM_PROPERTIES,
                    "space": {"type": "string", "enum": ["V0", "V1"], "default": "V1"},
                    "out_dir": {"type": "string", "description": "Output directory"},
                    "format": {"type": "string", "enum": ["csv", "parquet"], "default": "csv"},
                    "explain": {"type": "boolean", "default": False},
                },
                "required": ["out_dir"],
            },
        ),
        Tool(
            name="export_matrices",
            description="Write the interface coefficient matrices A1, A2_L, A2_R, A3_L, A3_R as sparse triplets",
            inputSchema={
                "type": "object",
                "properties": {
                    **PROBLEM_PROPERTIES,
                    "out_dir": {"type": "string", "description": "Output directory"},
                    "method": {"type": "string", "enum": ["blossom", "greville"], "default": "blossom"},
                    "format": {"type": "string", "enum": ["csv", "parquet"], "default": "csv"},
                },
                "required": ["out_dir"],
            },
        ),
        Tool(
            name="sample_function",
            description="Sample one basis function on a uniform grid of both patches (u, v, x, y, value)",
            inputSchema={
                "type": "object",
                "properties": {
                    **PROBLEM_PROPERTIES,
                    "function": {"type": "integer", "description": "Basis function index"},
                    "grid": {"type": "integer", "default": 21},
                    "space": {"type": "string", "enum": ["V0", "V1"], "default": "V1"},
                    "out_path": {"type": "string", "description": "Optional output table"},
                    "format": {"type": "string", "enum": ["csv", "parquet"], "default": "csv"},
                },
                "required": ["function"],
            },
        ),
        Tool(
            name="condition_number",
            description="""Condition number of the diagonally scaled mass matrix of V1 or V0.

**Tips:**
- Use `explain=true` to see sizes before computing
- Use `force_refresh=true` to bypass the cache""",
            inputSchema={
                "type": "object",
                "properties": {
                    **PROBLEM_PROPERTIES,
                    "space": {"type": "string", "enum": ["V0", "V1"], "default": "V1"},
                    "quadrature_order": {"type": "integer"},
                    "eigen": {"type": "string", "enum": ["auto", "jacobi", "lapack"], "default": "auto"},
                    "explain": {"type": "boolean", "default": False},
                    "force_refresh": {"type": "boolean", "default": False},
                },
            },
        ),
        Tool(
            name="verify_geometry",
            description="Run the invariant suite: gluing residuals, dimension count, kernel oracle, C1 gradients, interpolation, block identity",
            inputSchema={"type": "object", "properties": dict(PROBLEM_PROPERTIES)},
        ),
        Tool(
            name="get_metrics",
            description="Get stage timings and cache statistics",
            inputSchema={
                "type": "object",
                "properties": {
                    "reset": {
                        "type": "boolean",
                        "description": "Reset metrics after retrieval",
                        "default": False,
                    }
                },
            },
        ),
        Tool(
            name="clear_cache",
            description="Clear cached dimension and condition-number results",
            inputSchema={"type": "object", "properties": {}},
        ),
    ]


@app.call_tool()
async def call_tool(name: str, arguments: Any) -> list[TextContent]:
    """Handle tool calls."""
    logger.info(f"Tool call: {name} with arguments: {arguments}")
    arguments = arguments or {}

    try:
        if name == "check_geometry":
            try:
                problem = await _load(arguments)
            except NotASG1Error as e:
                return _text(f"🔴 Verdict: not AS-G1\n\n{e.error.to_response()}")
            return _text(summarize_gluing(problem.gluing))

        elif name == "dimension":
            if "p" in arguments:
                report = dimension(
                    arguments["p"], arguments["r"], arguments.get("k") or 0,
                    arguments.get("d_alpha", 1), arguments.get("z_beta", 0),
                    bool(arguments.get("beta_is_zero", False)),
                )
                return _text(summarize_dimension(report))
            problem_args = _problem_arguments(arguments)
            key = make_key(read_geometry_bytes(problem_args["path"]), "dim",
                           {k: v for k, v in problem_args.items() if k != "path"})
            cached, info = cache.get_with_info(key)
            if cached is not None and info is not None:
                get_metrics().record_cache_hit()
                report = dimension(cached["p"], cached["r"], cached["k"], cached["d_alpha"],
                                   cached["z_beta"], cached["beta_is_zero"])
                return _text(f"{info.format_feedback()} {summarize_dimension(report)}")
            get_metrics().record_cache_miss()
            report = dimension_report(await run_blocking(load_problem, **problem_args))
            cache.set(key, report.to_dict())
            return _text(summarize_dimension(report))

        elif name == "build_basis":
            space = arguments.get("space", "V1")
            validate_space(space)
            fmt = arguments.get("format", "csv")
            validate_output_format(fmt)
            problem = await _load(arguments)
            geometry = problem.geometry
            if arguments.get("explain", False):
                return _text(generate_explain_output(
                    "build_basis", geometry.degree, geometry.regularity, problem.k, space
                ))
            basis = await run_blocking(build_basis, problem, space)
            paths = await run_blocking(write_basis, basis, arguments["out_dir"], fmt)
            result = summarize_basis(basis)
            result += "\n\n💾 Written:\n" + "\n".join(f"  - {p}" for p in paths)
            return _text(result)

        elif name == "export_matrices":
            fmt = arguments.get("format", "csv")
            validate_output_format(fmt)
            method = arguments.get("method", "blossom")
            if method not in ("blossom", "greville"):
                raise ValidationError(f"Unknown method: {method}")
            problem = await _load(arguments)
            matrices = await run_blocking(coefficient_matrices, problem, method)
            paths = await run_blocking(write_matrices, matrices, arguments["out_dir"], fmt)
            result = summarize_matrices(matrices)
            result += "\n\n💾 Written:\n" + "\n".join(f"  - {p}" for p in paths)
            return _text(result)

        elif name == "sample_function":
            space = arguments.get("space", "V1")
            validate_space(space)
            grid = arguments.get("grid", 21)
            validate_numeric_range(grid, "grid", min_value=2, max_value=1000)
            problem = await _load(arguments)
            basis = await run_blocking(build_basis, problem, space)
            df = await run_blocking(
                sample_function, problem.geometry, basis, arguments["function"], grid
            )
            result = (
                f"📈 Function {arguments['function']} ({basis[arguments['function']].kind}), "
                f"{len(df):,} samples\n"
                f"  value range: [{df['value'].min():.6g}, {df['value'].max():.6g}]\n\n"
                f"{df.head(MAX_SAMPLE_ROWS_DISPLAY).to_string(index=False)}"
            )
            if arguments.get("out_path"):
                out_path = Path(arguments["out_path"])
                prepare_output_dir(out_path.parent)
                size = await write_table_async(df, out_path, arguments.get("format", "csv"))
                result += f"\n\n💾 Written {size:,} bytes to {out_path}"
            return _text(result)

        elif name == "condition_number":
            space = arguments.get("space", "V1")
            validate_space(space)
            order = arguments.get("quadrature_order")
            if order is not None:
                validate_numeric_range(order, "quadrature_order", 1, MAX_QUADRATURE_ORDER)
            eigen = arguments.get("eigen", "auto")
            problem_args = _problem_arguments(arguments)
            params = {k: v for k, v in problem_args.items() if k != "path"}
            params.update(space=space, quadrature_order=order, eigen=eigen)
            key = make_key(read_geometry_bytes(problem_args["path"]), "condition", params)

            if arguments.get("explain", False):
                problem = await run_blocking(load_problem, **problem_args)
                return _text(generate_explain_output(
                    "condition_number", problem.geometry.degree, problem.geometry.regularity,
                    problem.k, space, eigen, cache.get_cache_status(key),
                ))

            cached, info = cache.get_with_info(key, force_refresh=arguments.get("force_refresh", False))
            if cached is not None and info is not None:
                get_metrics().record_cache_hit()
                return _text(f"{info.format_feedback()} {summarize_mass_report(MassMatrixReport(**cached))}")
            get_metrics().record_cache_miss()

            problem = await run_blocking(load_problem, **problem_args)
            warning = format_workload_warning(
                estimate_workload(problem.geometry.degree, problem.geometry.regularity,
                                  problem.k, space),
                eigen,
            )
            report = await run_blocking(condition_number, problem, space, order, eigen)
            cache.set(key, report.to_dict())
            result = summarize_mass_report(report)
            if warning:
                result += "\n" + warning
            return _text(result)

        elif name == "verify_geometry":
            problem = await _load(arguments)
            report = await run_blocking(run_verification, problem.geometry, problem.gluing)
            return _text(report.to_string())

        elif name == "get_metrics":
            collector = get_metrics()
            result = "📊 Server Metrics:\n\n" + json.dumps(collector.get_summary(), indent=2)
            if arguments.get("reset", False):
                collector.reset()
                result += "\n\n🔄 Metrics have been reset."
            return _text(result)

        elif name == "clear_cache":
            removed = cache.clear()
            logger.info("Cleared %d cache entries", removed)
            return _text(f"Cleared {removed} cache entries.")

        else:
            logger.warning(f"Unknown tool called: {name}")
            return _text(f"Unknown tool: {name}")

    except ASG1Exception as e:
        logger.warning(f"{name} rejected: {e.error.message}")
        return _text(e.error.to_response())
    except KeyError as e:
        logger.warning(f"Missing argument in {name}: {e}")
        return _text(f"Validation error: missing required argument {e}")
    except Exception as e:
        logger.error(f"Error in {name}: {e}", exc_info=True)
        return _text(f"Error in {name}: {str(e)}")


async def _async_main():
    """Run the MCP server (async version)."""
    logger.info("Starting asg1-iga MCP server")
    async with stdio_server() as (read_stream, write_stream):
        await app.run(
            read_stream,
            write_stream,
            app.create_initialization_options()
        )


def main():
    """Entry point for the MCP server."""
    asyncio.run(_async_main())


if __name__ == "__main__":
    main()
