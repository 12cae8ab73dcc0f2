"""
End-to-end workflows shared by the command line and the MCP server.

A Problem is a parsed geometry file, refined to the requested spline space and
paired with accepted or solved gluing data.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Optional, Sequence

import pandas as pd

from .analysis import MassMatrixReport, mass_matrix_report
from .c1_basis import (
    DimensionReport,
    IsogeometricBasis,
    build_c0_basis,
    build_full_basis,
    dimension_for,
)
from .cli_io import parse_geometry_bytes, read_geometry_bytes
from .coeff_matrices import CoefficientMatrices, assemble_blocks, fit_blocks
from .gluing import (
    GluingData,
    TwoPatchGeometry,
    accept_gluing,
    compute_alphabar_betabar,
    reclassify,
    refine_geometry,
    solve_asg1_gluing,
)
from .metrics import TimedOperation
from .validation import validate_space

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Problem:
    """Refined geometry with its gluing data and the raw file content used for cache keys."""

    geometry: TwoPatchGeometry
    gluing: GluingData
    source: str
    content: bytes

    @property
    def k(self) -> int:
        return self.geometry.space.k


def load_problem(
    path: str | Path,
    k: Optional[int] = None,
    breakpoints: Optional[Sequence[float]] = None,
    solve: bool = False,
) -> Problem:
    """
    Parse a geometry file, refine it and settle the gluing data.

    Supplied gluing data is used unless ``solve`` is set or the file has none; it is
    re-checked on the refined geometry.

    Raises:
        ASG1Exception: On unreadable files, schema violations or geometries that are not AS-G1
    """
    content = read_geometry_bytes(path)
    geometry, supplied = parse_geometry_bytes(content, str(path))

    if breakpoints is not None and k is None:
        k = len(breakpoints)
    if k is not None:
        geometry = refine_geometry(geometry, k, breakpoints)

    with TimedOperation("gluing"):
        if supplied is not None and not solve:
            gluing = accept_gluing(geometry, reclassify(supplied, geometry.space.breakpoints))
        else:
            gluing = solve_asg1_gluing(*compute_alphabar_betabar(geometry), geometry.space.breakpoints)
    logger.info("Loaded %s with k=%d, gluing case %s (%s)", path, geometry.space.k, gluing.case,
                gluing.source)
    return Problem(geometry, gluing, str(path), content)


def dimension_report(problem: Problem) -> DimensionReport:
    return dimension_for(problem.geometry, problem.gluing)


def build_basis(problem: Problem, space: str = "V1") -> IsogeometricBasis:
    """The C1 basis (V1) or the standard C0 basis (V0) of the problem."""
    validate_space(space)
    with TimedOperation("basis") as timer:
        if space == "V0":
            basis = build_c0_basis(problem.geometry)
        else:
            basis = build_full_basis(problem.geometry, problem.gluing)
        timer.size = len(basis)
    return basis


def coefficient_matrices(
    problem: Problem, method: Literal["blossom", "greville"] = "blossom"
) -> CoefficientMatrices:
    with TimedOperation("matrices"):
        if method == "greville":
            return fit_blocks(problem.gluing, problem.geometry.space)
        return assemble_blocks(problem.gluing, problem.geometry.space)


def condition_number(
    problem: Problem,
    space: str = "V1",
    quadrature_order: Optional[int] = None,
    method: Literal["auto", "jacobi", "lapack"] = "auto",
) -> MassMatrixReport:
    """Diagonally scaled condition number of the mass matrix of V0 or V1."""
    basis = build_basis(problem, space)
    with TimedOperation("condition", size=len(basis)):
        return mass_matrix_report(problem.geometry, basis, quadrature_order, method)


def condition_table(
    path: str | Path,
    ks: Iterable[int],
    spaces: Sequence[str] = ("V1", "V0"),
    quadrature_order: Optional[int] = None,
    method: Literal["auto", "jacobi", "lapack"] = "auto",
) -> pd.DataFrame:
    """
    Condition numbers over a range of k, one row per (k, space).

    Columns: k, space, dimension, kappa, quadrature_order.
    """
    rows = []
    for k in ks:
        problem = load_problem(path, k=k)
        for space in spaces:
            report = condition_number(problem, space, quadrature_order, method)
            rows.append({
                "k": k,
                "space": space,
                "dimension": report.dimension,
                "kappa": report.kappa,
                "quadrature_order": report.quadrature_order,
            })
    return pd.DataFrame(rows, columns=["k", "space", "dimension", "kappa", "quadrature_order"])
