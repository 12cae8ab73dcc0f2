"""
Geometry files and result tables.

A geometry file is a UTF-8 JSON document::

    {
      "degree": 3, "regularity": 1, "breakpoints": [],
      "patch_L": [[[x, y], ...], ...],     # patch_L[i][j]: i along u, j along v
      "patch_R": [[[x, y], ...], ...],
      "gluing": {"alpha_L": [...], "alpha_R": [...], "beta": [...],
                 "beta_L": [...], "beta_R": [...]}  # optional, monomial coefficients
    }

Numbers may be integers, decimals or rational strings such as "3/50"; rationals are
parsed exactly and converted to double once.
"""
import json
import logging
import os
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from .c1_basis import C1BasisFunction, IsogeometricBasis
from .coeff_matrices import CoefficientMatrices
from .errors import (
    ASG1Exception,
    SchemaError,
    file_not_found_error,
    invalid_path_error,
    read_error,
    schema_error,
    write_error,
)
from .gluing import GluingData, TwoPatchGeometry, accept_gluing, gluing_from_polynomials
from .spline_core import KnotVector, Polynomial
from .validation import (
    ValidationError,
    validate_breakpoints,
    validate_degree_regularity,
    validate_output_format,
    validate_rational,
)

logger = logging.getLogger(__name__)

EXAMPLE_NAME = "bicubic_two_patch.json"

# 17 significant digits reproduce every double exactly
FLOAT_FORMAT = "%.17g"

BASIS_COLUMNS = ["function", "kind", "patch", "i", "j", "value"]
SAMPLE_COLUMNS = ["function", "patch", "u", "v", "x", "y", "value"]


def example_path() -> Path:
    """Path of the bundled two-patch example geometry."""
    return Path(str(resources.files("asg1_iga").joinpath("data", EXAMPLE_NAME)))


def _require(document: dict, name: str) -> Any:
    if name not in document:
        raise SchemaError(schema_error(name, "required field is missing"))
    return document[name]


def _number(value: Any, field_name: str) -> float:
    try:
        return validate_rational(value, field_name)
    except ValidationError as e:
        raise SchemaError(schema_error(field_name, e.error.message)) from e


def _polynomial(values: Any, field_name: str, max_degree: int) -> Polynomial:
    if not isinstance(values, list) or not 1 <= len(values) <= max_degree + 1:
        raise SchemaError(
            schema_error(field_name, f"expected a list of 1 to {max_degree + 1} coefficients")
        )
    return Polynomial(tuple(_number(v, f"{field_name}[{m}]") for m, v in enumerate(values)))


def _grid(values: Any, field_name: str, n: int) -> np.ndarray:
    if not isinstance(values, list) or len(values) != n:
        raise SchemaError(schema_error(field_name, f"expected {n} rows of control points"))
    grid = np.zeros((n, n, 2))
    for i, row in enumerate(values):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(schema_error(f"{field_name}[{i}]", f"expected {n} control points"))
        for j, point in enumerate(row):
            if not isinstance(point, list) or len(point) != 2:
                raise SchemaError(
                    schema_error(f"{field_name}[{i}][{j}]", "control points are [x, y] pairs")
                )
            grid[i, j] = [_number(c, f"{field_name}[{i}][{j}]") for c in point]
    return grid


def parse_geometry_text(
    text: str, source: str = "<string>"
) -> tuple[TwoPatchGeometry, Optional[GluingData]]:
    """
    Parse a geometry document.

    Raises:
        SchemaError: On malformed JSON or fields that violate the schema
        GeometryError: If the patches do not share the interface or the supplied gluing
            does not fit the geometry
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(schema_error("document", f"invalid JSON in {source}: {e.msg}", e.lineno))
    if not isinstance(document, dict):
        raise SchemaError(schema_error("document", "top level must be an object"))

    p = _require(document, "degree")
    r = _require(document, "regularity")
    if not isinstance(p, int) or not isinstance(r, int):
        raise SchemaError(schema_error("degree", "degree and regularity must be integers"))
    validate_degree_regularity(p, r)
    breakpoints = [
        _number(b, f"breakpoints[{m}]") for m, b in enumerate(document.get("breakpoints", []))
    ]
    try:
        validate_breakpoints(breakpoints)
        space = KnotVector.uniform(p, r, breakpoints)
    except ValidationError as e:
        raise SchemaError(schema_error("breakpoints", e.error.message)) from e

    n = space.dimension
    points_L = _grid(_require(document, "patch_L"), "patch_L", n)
    points_R = _grid(_require(document, "patch_R"), "patch_R", n)
    geometry = TwoPatchGeometry.from_control_points(space, points_L, points_R, r)

    gluing = None
    block = document.get("gluing")
    if block is not None:
        if not isinstance(block, dict):
            raise SchemaError(schema_error("gluing", "must be an object"))
        alpha_L = _polynomial(_require(block, "alpha_L"), "gluing.alpha_L", 1)
        alpha_R = _polynomial(_require(block, "alpha_R"), "gluing.alpha_R", 1)
        beta = _polynomial(_require(block, "beta"), "gluing.beta", 2)
        beta_L = beta_R = None
        if "beta_L" in block or "beta_R" in block:
            beta_L = _polynomial(_require(block, "beta_L"), "gluing.beta_L", 1)
            beta_R = _polynomial(_require(block, "beta_R"), "gluing.beta_R", 1)
        gluing = gluing_from_polynomials(
            alpha_L, alpha_R, beta, breakpoints, beta_L, beta_R, source="file"
        )
        accept_gluing(geometry, gluing)
    logger.info("Parsed %s: p=%d, r=%d, k=%d, gluing %s", source, p, r, space.k,
                "supplied" if gluing else "absent")
    return geometry, gluing


def read_geometry_bytes(path: str | Path) -> bytes:
    path = Path(path)
    if not path.exists():
        raise ASG1Exception(file_not_found_error(str(path)))
    try:
        return path.read_bytes()
    except OSError as e:
        raise ASG1Exception(read_error(str(path), str(e))) from e


def parse_geometry(path: str | Path) -> tuple[TwoPatchGeometry, Optional[GluingData]]:
    """
    Parse a geometry file.

    Raises:
        ASG1Exception: If the file is missing or unreadable
        SchemaError: On schema violations
        GeometryError: On inconsistent geometry or gluing data
    """
    return parse_geometry_bytes(read_geometry_bytes(path), str(path))


def parse_geometry_bytes(
    content: bytes, source: str = "<bytes>"
) -> tuple[TwoPatchGeometry, Optional[GluingData]]:
    try:
        text = content.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ASG1Exception(read_error(source, f"not UTF-8: {e}")) from e
    return parse_geometry_text(text, source)


def prepare_output_dir(out_dir: str | Path) -> Path:
    """
    Create an output directory, enforcing ASG1_OUTPUT_DIR when it is set.

    Raises:
        ASG1Exception: If the directory is outside ASG1_OUTPUT_DIR or cannot be created
    """
    path = Path(out_dir).resolve()
    allowed = os.getenv("ASG1_OUTPUT_DIR")
    if allowed:
        root = Path(allowed).resolve()
        try:
            path.relative_to(root)
        except ValueError:
            raise ASG1Exception(
                invalid_path_error(str(path), f"output must live under ASG1_OUTPUT_DIR={root}")
            )
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ASG1Exception(write_error(str(path), str(e))) from e
    return path


def _write_table(df: pd.DataFrame, path: Path, fmt: str) -> Path:
    validate_output_format(fmt)
    try:
        if fmt == "parquet":
            path = path.with_suffix(".parquet")
            df.to_parquet(path, index=False)
        else:
            path = path.with_suffix(".csv")
            df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise ASG1Exception(write_error(str(path), str(e))) from e
    return path


def _read_table(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise ASG1Exception(file_not_found_error(str(path)))
    if path.suffix == ".parquet":
        return pd.read_parquet(path)
    return pd.read_csv(path, float_precision="round_trip")


def basis_table(basis: IsogeometricBasis) -> pd.DataFrame:
    """Nonzero coefficients of all functions in long form."""
    records = []
    for index, function in enumerate(basis):
        for label in ("L", "R"):
            grid = function.grid(label)
            for i, j in zip(*np.nonzero(grid)):
                records.append((index, function.kind, label, int(i), int(j), float(grid[i, j])))
    return pd.DataFrame.from_records(records, columns=BASIS_COLUMNS)


def write_manifest(path: str | Path, manifest: dict) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(manifest, indent=2, default=str), encoding="utf-8")
    except OSError as e:
        raise ASG1Exception(write_error(str(path), str(e))) from e
    return path


def basis_manifest(basis: IsogeometricBasis) -> dict:
    return {
        "label": basis.label,
        "degree": basis.space.degree,
        "breakpoints": list(basis.space.breakpoints),
        "multiplicities": list(basis.space.multiplicities),
        "count": len(basis),
        "census": basis.census(),
        "functions": [{"kind": f.kind, "index": list(f.index)} for f in basis],
        "gluing": basis.gluing.to_dict() if basis.gluing else None,
    }


def write_basis(basis: IsogeometricBasis, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """Write the coefficient table and manifest.json; returns the written paths."""
    out = prepare_output_dir(out_dir)
    table = _write_table(basis_table(basis), out / "basis", fmt)
    manifest = basis_manifest(basis)
    manifest["table"] = table.name
    return [table, write_manifest(out / "manifest.json", manifest)]


def read_basis(out_dir: str | Path) -> IsogeometricBasis:
    """Rebuild a basis written by write_basis."""
    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise ASG1Exception(file_not_found_error(str(manifest_path)))
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    space = KnotVector(manifest["degree"], tuple(manifest["breakpoints"]),
                       tuple(manifest["multiplicities"]))
    n = space.dimension
    table = _read_table(out / manifest["table"])
    grids = {(index, label): np.zeros((n, n))
             for index in range(manifest["count"]) for label in ("L", "R")}
    for row in table.itertuples(index=False):
        grids[(int(row.function), row.patch)][int(row.i), int(row.j)] = float(row.value)
    functions = tuple(
        C1BasisFunction(entry["kind"], tuple(entry["index"]), grids[(index, "L")], grids[(index, "R")])
        for index, entry in enumerate(manifest["functions"])
    )
    return IsogeometricBasis(space, functions, manifest["label"])


def write_matrices(
    matrices: CoefficientMatrices, out_dir: str | Path, fmt: str = "csv"
) -> list[Path]:
    """One sparse triplet table (row, col, value) per block plus manifest.json."""
    out = prepare_output_dir(out_dir)
    paths = []
    shapes = {}
    for name, matrix in matrices.named().items():
        df = pd.DataFrame.from_records(matrices.triplets(name), columns=["row", "col", "value"])
        paths.append(_write_table(df, out / name, fmt))
        shapes[name] = list(matrix.shape)
    manifest = {
        "p": matrices.p,
        "r": matrices.r,
        "k": matrices.k,
        "case": matrices.case,
        "method": matrices.method,
        "lambda": matrices.lam,
        "shapes": shapes,
        "tables": [path.name for path in paths],
    }
    paths.append(write_manifest(out / "manifest.json", manifest))
    return paths


def sample_function(
    G: TwoPatchGeometry, basis: IsogeometricBasis, index: int, grid: int
) -> pd.DataFrame:
    """Values of one function on a uniform grid x grid of both patches with physical points."""
    if grid < 2:
        raise ValidationError(f"grid must be at least 2, got: {grid}")
    t = np.linspace(0.0, 1.0, grid)
    frames = []
    for label in ("L", "R"):
        values = basis.evaluate(index, label, t, t)
        points = G.patch(label).evaluate_grid(t, t)
        uu, vv = np.meshgrid(t, t, indexing="ij")
        frames.append(pd.DataFrame({
            "function": index,
            "patch": label,
            "u": uu.ravel(),
            "v": vv.ravel(),
            "x": points[..., 0].ravel(),
            "y": points[..., 1].ravel(),
            "value": values.ravel(),
        }, columns=SAMPLE_COLUMNS))
    return pd.concat(frames, ignore_index=True)


def write_samples(df: pd.DataFrame, path: str | Path, fmt: str = "csv") -> Path:
    path = Path(path)
    prepare_output_dir(path.parent)
    return _write_table(df, path, fmt)
