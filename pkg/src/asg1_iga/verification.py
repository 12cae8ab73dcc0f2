"""Invariant suite for a geometry, its gluing data and its C1 basis.

Runs interface and Jacobian checks, gluing residuals, the dimension count, the
kernel-rank oracle, the C1 gradient check, trace and transversal interpolation
and the block identity, and scores the result like a quality report.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .analysis import c1_residual
from .c1_basis import (
    IsogeometricBasis,
    build_full_basis,
    dimension_for,
    interface_kernel_dimension,
    physical_gradient,
)
from .coeff_matrices import assemble_blocks, block_residual
from .errors import ASG1Exception
from .gluing import (
    ASG1_RESIDUAL_TOL,
    GluingData,
    TwoPatchGeometry,
    gluing_residuals,
    transversal_vector,
    verify_regularity,
)
from .metrics import TimedOperation

logger = logging.getLogger(__name__)

C1_TOL = 1e-8
TRACE_TOL = 1e-12
TRANSVERSAL_TOL = 1e-8
BLOCK_TOL = 1e-8
INTERFACE_SAMPLES = 50


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""

    def to_string(self) -> str:
        mark = "✅" if self.passed else "❌"
        text = f"{mark} {self.name}"
        if self.value is not None:
            text += f": {self.value:.3e}"
            if self.tolerance is not None:
                text += f" (tol {self.tolerance:.0e})"
        if self.detail:
            text += f" - {self.detail}"
        return text


@dataclass
class VerificationReport:
    """Outcome of the invariant suite."""

    score: int  # 0-100, share of passed checks
    issues: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)
    case: str = ""
    dimension: int = 0

    @property
    def passed(self) -> bool:
        return not self.issues

    def to_string(self) -> str:
        """Format report as human-readable string."""
        parts = ["🔬 **Verification Report**\n"]
        parts.append(f"🎯 Score: {self.score}/100")
        parts.append(" ✅ All invariants hold" if self.passed else " 🔴 Invariants violated")
        if self.case:
            parts.append(f"\n📐 Case: {self.case}, dim V1 = {self.dimension:,}\n")

        parts.append("\n📋 **Checks**")
        for check in self.checks:
            parts.append(f"  {check.to_string()}")

        if self.issues:
            parts.append("\n❌ **Issues Found**")
            for issue in self.issues:
                parts.append(f"  • {issue}")

        if self.warnings:
            parts.append("\n⚠️ **Warnings**")
            for warning in self.warnings:
                parts.append(f"  • {warning}")

        return "\n".join(parts)

    def add(self, check: CheckResult) -> None:
        self.checks.append(check)
        if not check.passed:
            self.issues.append(check.to_string()[2:])


def interface_deviation(G: TwoPatchGeometry) -> float:
    return float(np.abs(G.patch_L.coefficients[0] - G.patch_R.coefficients[0]).max())


def trace_interpolation_error(G: TwoPatchGeometry, basis: IsogeometricBasis, v: np.ndarray) -> float:
    """Largest |phi(F0(v)) - g0(v)| over the interface functions, seen from both patches."""
    worst = 0.0
    for index in basis.indices("trace") + basis.indices("transversal"):
        g0, _ = basis[index].trace_data
        expected = g0(v)
        for label in ("L", "R"):
            values = basis.evaluate(index, label, [0.0], v)[0]
            worst = max(worst, float(np.abs(values - expected).max()))
    return worst


def transversal_interpolation_error(
    G: TwoPatchGeometry, gluing: GluingData, basis: IsogeometricBasis, v: np.ndarray
) -> float:
    """Largest |(grad phi . d)(F0(v)) - g1(v)| relative to max |g1|, seen from both patches."""
    worst, scale = 0.0, 0.0
    for index in basis.indices("trace") + basis.indices("transversal"):
        function = basis[index]
        _, g1 = function.trace_data
        expected = g1(v)
        scale = max(scale, float(np.abs(expected).max()))
        for label in ("L", "R"):
            gradient = physical_gradient(G, label, function.grid(label), [0.0], v)[0]
            d = transversal_vector(G, gluing, v, label)
            worst = max(worst, float(np.abs(np.sum(gradient * d, axis=-1) - expected).max()))
    return worst / scale if scale > 0.0 else worst


def run_verification(
    G: TwoPatchGeometry,
    gluing: GluingData,
    basis: Optional[IsogeometricBasis] = None,
    samples: int = 100,
) -> VerificationReport:
    """
    Run every invariant check and collect the results.

    Args:
        G: Geometry in its final spline space
        gluing: Accepted or solved gluing data
        basis: Prebuilt C1 basis; built here when omitted
        samples: Interface samples for the C1 gradient check

    Returns:
        VerificationReport; ``passed`` is False iff a check failed
    """
    report = VerificationReport(score=100, case=gluing.case)
    v = np.linspace(0.0, 1.0, INTERFACE_SAMPLES)

    with TimedOperation("verify"):
        deviation = interface_deviation(G)
        report.add(CheckResult("interface match", deviation <= 1e-12, deviation, 1e-12))

        regularity = verify_regularity(G)
        report.add(CheckResult(
            "Jacobian regularity",
            not regularity.flagged,
            min(regularity.min_abs_det.values()),
            detail="min |det J| on Gauss grid",
        ))

        residuals = gluing_residuals(G, gluing)
        report.add(CheckResult("G1 condition on the map", residuals["g1_condition"] <= ASG1_RESIDUAL_TOL,
                               residuals["g1_condition"], ASG1_RESIDUAL_TOL))
        report.add(CheckResult("beta split", residuals["beta_split"] <= ASG1_RESIDUAL_TOL,
                               residuals["beta_split"], ASG1_RESIDUAL_TOL))
        report.add(CheckResult("alpha sign condition", residuals["sign_condition"] == 0.0,
                               detail="alpha_L * alpha_R < 0 on [0, 1]"))

        expected = dimension_for(G, gluing)
        report.dimension = expected.dim_V1
        try:
            kernel = interface_kernel_dimension(gluing, G.space)
            report.add(CheckResult("kernel-rank oracle", kernel == expected.dim_V1_2,
                                   detail=f"kernel {kernel}, formula {expected.dim_V1_2}"))
        except ASG1Exception as e:
            report.add(CheckResult("kernel-rank oracle", False, detail=e.error.message))

        if basis is None:
            try:
                basis = build_full_basis(G, gluing)
            except ASG1Exception as e:
                report.add(CheckResult("basis construction", False, detail=e.error.message))
        if basis is not None:
            report.add(CheckResult("basis count", len(basis) == expected.dim_V1,
                                   detail=f"{len(basis)} functions, formula {expected.dim_V1}"))
            c1 = c1_residual(G, basis, samples)
            report.add(CheckResult("C1 gradient match", c1 <= C1_TOL, c1, C1_TOL))
            trace = trace_interpolation_error(G, basis, v)
            report.add(CheckResult("trace interpolation", trace <= TRACE_TOL, trace, TRACE_TOL))
            transversal = transversal_interpolation_error(G, gluing, basis, v)
            report.add(CheckResult("transversal interpolation", transversal <= TRANSVERSAL_TOL,
                                   transversal, TRANSVERSAL_TOL))
            blocks = block_residual(G, assemble_blocks(gluing, G.space), basis)
            report.add(CheckResult("block identity", blocks <= BLOCK_TOL, blocks, BLOCK_TOL))

    if min(regularity.min_abs_det.values()) < 100 * regularity.threshold:
        report.warnings.append("Jacobian determinant is close to zero somewhere on the patches")
    if basis is not None and len(basis) > 2000:
        report.warnings.append(f"large basis ({len(basis):,} functions); checks sample a fixed grid")

    passed = sum(1 for check in report.checks if check.passed)
    report.score = int(round(100 * passed / len(report.checks)))
    logger.info("Verification: %d/%d checks passed", passed, len(report.checks))
    return report
