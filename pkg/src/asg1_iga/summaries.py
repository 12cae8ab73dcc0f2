"""Human-readable summaries of gluing data, dimensions, bases and matrices."""
from typing import List

import numpy as np
import pandas as pd

from .analysis import MassMatrixReport
from .c1_basis import DimensionReport, IsogeometricBasis
from .coeff_matrices import CoefficientMatrices
from .gluing import GluingData

CASE_DESCRIPTIONS = {
    "beta0": "beta vanishes identically",
    "z0": "beta has no root at a breakpoint",
    "z1": "beta vanishes at one breakpoint",
    "z2": "beta vanishes at two breakpoints",
}


def summarize_gluing(gluing: GluingData, verdict: str = "AS-G1") -> str:
    """
    Verdict, gluing polynomials and classification.

    Args:
        gluing: Accepted or solved gluing data
        verdict: Headline label
    """
    parts = [f"🔗 **Gluing Data** ({gluing.source})\n"]
    parts.append(f"✅ Verdict: {verdict}")
    parts.append(f"  alpha_L(v) = {gluing.alpha_L}")
    parts.append(f"  alpha_R(v) = {gluing.alpha_R}")
    parts.append(f"  beta(v)    = {gluing.beta}")
    parts.append(f"  beta_L(v)  = {gluing.beta_L}")
    parts.append(f"  beta_R(v)  = {gluing.beta_R}")
    parts.append("\n📐 **Classification**")
    parts.append(f"  d_alpha: {gluing.d_alpha}")
    parts.append(f"  z_beta: {gluing.z_beta}" + ("" if not gluing.beta_is_zero else " (informational)"))
    parts.append(f"  Case: {gluing.case} ({CASE_DESCRIPTIONS.get(gluing.case, 'unknown')})")
    if gluing.root_indices:
        parts.append(f"  Roots at breakpoints: {', '.join(str(i) for i in gluing.root_indices)}")
    return "\n".join(parts)


def summarize_dimension(report: DimensionReport) -> str:
    parts = ["📊 **Dimension**\n"]
    parts.append(f"  p={report.p}, r={report.r}, k={report.k}, n={report.n}")
    parts.append(f"  d_alpha={report.d_alpha}, z_beta={report.z_beta}, beta=0: {report.beta_is_zero}")
    parts.append(f"\n  dim V1     = {report.dim_V1:,}")
    parts.append(f"  dim V1_1   = {report.dim_V1_1:,} (interior)")
    parts.append(f"  dim V1_2   = {report.dim_V1_2:,} (interface)")
    parts.append(f"  dim Gamma0 = {report.dim_Gamma0:,} (trace)")
    parts.append(f"  dim Gamma1 = {report.dim_Gamma1:,} (transversal)")
    return "\n".join(parts)


def summarize_mass_report(report: MassMatrixReport) -> str:
    parts = [f"🧮 **Mass Matrix ({report.label})**\n"]
    parts.append(f"  Dimension: {report.dimension:,}")
    parts.append(f"  Quadrature order: {report.quadrature_order}")
    parts.append(f"  Eigenvalues (scaled): [{report.min_eigenvalue:.6e}, {report.max_eigenvalue:.6e}]")
    parts.append(f"\n🎯 kappa = {report.kappa:.2f}")
    return "\n".join(parts)


def summarize_matrices(matrices: CoefficientMatrices) -> str:
    parts = [f"🧩 **Coefficient Matrices** (case {matrices.case}, {matrices.method})\n"]
    parts.append(f"  p={matrices.p}, r={matrices.r}, k={matrices.k}, lambda={matrices.lam:.6g}")
    for name, matrix in matrices.named().items():
        density = matrix.nnz / max(1, matrix.shape[0] * matrix.shape[1])
        parts.append(
            f"  {name:<5} {matrix.shape[0]}x{matrix.shape[1]}  nnz={matrix.nnz:<6} "
            f"density={density:.1%}"
        )
    return "\n".join(parts)


def basis_census(basis: IsogeometricBasis) -> pd.DataFrame:
    """
    Counts and sparsity per kind of basis function.

    Columns: kind, count, nnz_mean, nnz_max, max_row.
    """
    records = []
    for function in basis:
        nnz = int(np.count_nonzero(function.coeff_L) + np.count_nonzero(function.coeff_R))
        rows = function.nonzero_rows
        records.append((function.kind, nnz, max(rows) if rows else -1))
    df = pd.DataFrame.from_records(records, columns=["kind", "nnz", "max_row"])
    if df.empty:
        return pd.DataFrame(columns=["kind", "count", "nnz_mean", "nnz_max", "max_row"])
    census = df.groupby("kind", sort=False).agg(
        count=("nnz", "size"),
        nnz_mean=("nnz", "mean"),
        nnz_max=("nnz", "max"),
        max_row=("max_row", "max"),
    )
    return census.reset_index()


def summarize_basis(basis: IsogeometricBasis) -> str:
    parts = [f"🧱 **Basis {basis.label}**\n"]
    parts.append(f"📈 Functions: {len(basis):,} (n = {basis.n})")
    census = basis_census(basis)
    if census.empty:
        return "\n".join(parts)
    parts.append("\n📋 **Census**")
    for row in census.itertuples(index=False):
        parts.append(
            f"  {row.kind:<12} {row.count:>6}  nnz avg {row.nnz_mean:.1f}, max {row.nnz_max}, "
            f"rows <= {row.max_row}"
        )
    return "\n".join(parts)


def summarize_condition_table(table: pd.DataFrame) -> List[str]:
    """One line per k with the kappa of every space in the table."""
    lines = []
    pivot = table.pivot(index="k", columns="space", values="kappa")
    for k, row in pivot.iterrows():
        values = ", ".join(f"{space}: {row[space]:.2f}" for space in pivot.columns)
        lines.append(f"  k={k:<3} {values}")
    return lines
