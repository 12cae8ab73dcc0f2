"""Workload estimates and warnings for large spline spaces.

Estimates the size of the dense objects a command will build before building
them, and produces the --explain output.
"""
from typing import Dict, List, Optional

from .analysis import JACOBI_AUTO_LIMIT, default_quadrature_order

BYTES_PER_FLOAT = 8

# Thresholds for warnings
WARNING_THRESHOLDS = {
    "dimension": 2000,
    "dense_bytes": 512 * 1024 * 1024,  # 512 MB
    "jacobi_size": JACOBI_AUTO_LIMIT,
}


def estimate_workload(p: int, r: int, k: int, space: str = "V1") -> Dict[str, float]:
    """
    Estimate the size of a basis and its mass matrix.

    The V1 count is an upper bound (beta = 0 and constant alpha); the exact value
    depends on the gluing data.
    """
    n = p + 1 + k * (p - r)
    dimension = 2 * n * n - n if space == "V0" else 2 * (n - 2) * n + 2 * n
    points = (k + 1) * default_quadrature_order(p)
    # values of all tensor B-splines at all quadrature points, per patch
    collocation_bytes = points * points * n * n * BYTES_PER_FLOAT
    mass_bytes = dimension * dimension * BYTES_PER_FLOAT
    return {
        "n": n,
        "dimension": dimension,
        "quadrature_points": points * points,
        "mass_entries": dimension * dimension,
        "dense_bytes": collocation_bytes + mass_bytes,
        "dense_mb": (collocation_bytes + mass_bytes) / (1024 * 1024),
    }


def check_workload_warnings(estimate: Dict[str, float], method: str = "auto") -> List[str]:
    """
    Check an estimate against the warning thresholds.

    Args:
        estimate: Output of estimate_workload
        method: Eigenvalue method that will be used
    """
    warnings = []

    if estimate["dimension"] > WARNING_THRESHOLDS["dimension"]:
        warnings.append(
            f"⚠️ Large space: {int(estimate['dimension']):,} basis functions "
            f"(threshold: {WARNING_THRESHOLDS['dimension']:,})"
        )

    if estimate["dense_bytes"] > WARNING_THRESHOLDS["dense_bytes"]:
        threshold_mb = WARNING_THRESHOLDS["dense_bytes"] / (1024 * 1024)
        warnings.append(
            f"⚠️ Large dense storage: {estimate['dense_mb']:.1f} MB "
            f"(threshold: {threshold_mb:.0f} MB)"
        )

    if method == "jacobi" and estimate["dimension"] > WARNING_THRESHOLDS["jacobi_size"]:
        warnings.append(
            f"⚠️ Jacobi eigenvalues requested for a {int(estimate['dimension'])}x"
            f"{int(estimate['dimension'])} matrix; expect a long run"
        )

    return warnings


def generate_alternatives(estimate: Dict[str, float], method: str = "auto") -> List[str]:
    suggestions = []
    if method == "jacobi" and estimate["dimension"] > WARNING_THRESHOLDS["jacobi_size"]:
        suggestions.append("💡 Use --eigen auto or lapack for matrices of this size")
    if estimate["dimension"] > WARNING_THRESHOLDS["dimension"]:
        suggestions.append("💡 Try a smaller --k first to check the setup")
    return suggestions


def format_workload_warning(estimate: Dict[str, float], method: str = "auto") -> Optional[str]:
    """Complete warning message, or None when the workload is unremarkable."""
    warnings = check_workload_warnings(estimate, method)
    if not warnings:
        return None

    message_parts = ["\n🚨 **Workload Warnings**\n"]
    message_parts.extend(warnings)
    alternatives = generate_alternatives(estimate, method)
    if alternatives:
        message_parts.append("\n💡 **Alternatives**")
        message_parts.extend(alternatives)
    return "\n".join(message_parts)


def generate_explain_output(
    command: str,
    p: int,
    r: int,
    k: int,
    space: str = "V1",
    method: str = "auto",
    cache_status: str = "miss",
) -> str:
    """Plan of a command without running it."""
    estimate = estimate_workload(p, r, k, space)
    output_parts = ["🔍 **Explain Mode** (nothing computed)\n"]

    output_parts.append("📋 **Problem**")
    output_parts.append(f"  Command: {command}")
    output_parts.append(f"  Degree p={p}, regularity r={r}, inner breakpoints k={k}")
    output_parts.append(f"  Space: {space}")

    output_parts.append("\n📊 **Estimates**")
    output_parts.append(f"  Univariate dimension n: {int(estimate['n'])}")
    output_parts.append(f"  Basis functions: <= {int(estimate['dimension']):,}")
    output_parts.append(f"  Quadrature points per patch: {int(estimate['quadrature_points']):,}")
    output_parts.append(f"  Dense storage: ~{estimate['dense_mb']:.1f} MB")

    output_parts.append("\n📦 **Cache Status**")
    output_parts.append(f"  Status: {cache_status}")

    warnings = check_workload_warnings(estimate, method)
    if warnings:
        output_parts.append("\n⚠️ **Warnings**")
        for warning in warnings:
            output_parts.append(f"  {warning}")

    return "\n".join(output_parts)
