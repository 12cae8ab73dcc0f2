"""
Coefficient matrices of the interface basis functions.

For both patches the trace and transversal functions satisfy

    B0_S = A1 B0* + A2_S B1*,    B1_S = A3_S B1*,

with B0* = N_0(u) N_j(v) and B1* = N_1(u) N_j(v). The matrices are computed by
blossoming (knot insertion, differentiation and products) or, as an independent
check, by interpolation at Greville abscissae.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse

from .analysis import solve_least_squares
from .blossom import derivative_coeffs, insertion_matrix, knot_insertion_coeffs, product_coeffs
from .c1_basis import (
    IsogeometricBasis,
    assemble_pair,
    build_g1_companions,
    build_tilde_space,
    transversal_space,
    unit_splines,
)
from .errors import IncompatibleSpaceError, incompatible_spaces_error
from .gluing import GluingData, TwoPatchGeometry
from .spline_core import KnotVector, Polynomial, SplineFunction1D, collocation_matrix
from .validation import ValidationError, validate_patch

logger = logging.getLogger(__name__)

# Entries below this fraction of the largest entry are dropped from the sparse storage
SPARSITY_TOL = 1e-14


def _sparse(matrix: np.ndarray) -> scipy.sparse.csr_matrix:
    matrix = np.array(matrix, dtype=float)
    scale = np.abs(matrix).max() if matrix.size else 0.0
    matrix[np.abs(matrix) <= SPARSITY_TOL * scale] = 0.0
    return scipy.sparse.csr_matrix(matrix)


@dataclass(frozen=True, eq=False)
class CoefficientMatrices:
    """Blocks A1, A2_S, A3_S; stored sparse."""

    A1: scipy.sparse.csr_matrix
    A2_L: scipy.sparse.csr_matrix
    A2_R: scipy.sparse.csr_matrix
    A3_L: scipy.sparse.csr_matrix
    A3_R: scipy.sparse.csr_matrix
    p: int
    r: Optional[int]
    k: int
    case: str
    method: str = "blossom"
    lam: float = field(default=0.0)

    def A2(self, patch: str) -> scipy.sparse.csr_matrix:
        validate_patch(patch)
        return self.A2_L if patch == "L" else self.A2_R

    def A3(self, patch: str) -> scipy.sparse.csr_matrix:
        validate_patch(patch)
        return self.A3_L if patch == "L" else self.A3_R

    def named(self) -> dict[str, scipy.sparse.csr_matrix]:
        return {
            "A1": self.A1,
            "A2_L": self.A2_L,
            "A2_R": self.A2_R,
            "A3_L": self.A3_L,
            "A3_R": self.A3_R,
        }

    def dense(self, name: str) -> np.ndarray:
        return self.named()[name].toarray()

    def triplets(self, name: str) -> list[tuple[int, int, float]]:
        """Nonzero entries as (row, column, value) sorted row-major."""
        coo = self.named()[name].tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[q]), int(coo.col[q]), float(coo.data[q])) for q in order]

    def max_difference(self, other: "CoefficientMatrices") -> float:
        return max(
            float(np.abs(a.toarray() - other.dense(name)).max(initial=0.0))
            for name, a in self.named().items()
        )


def matrix_Abar(T_tilde: KnotVector, T: KnotVector) -> np.ndarray:
    """
    Row i holds the S(T)-coefficients of the i-th B-spline of S(T_tilde).

    Raises:
        IncompatibleSpaceError: If T does not refine T_tilde
    """
    return insertion_matrix(T_tilde, T).T


def _lowered(T: KnotVector) -> KnotVector:
    """T^{p-1,r} on the breakpoints of T."""
    if not T.k:
        return KnotVector(T.degree - 1)
    if T.regularity is None:
        raise IncompatibleSpaceError(incompatible_spaces_error("space needs a uniform regularity"))
    return T.with_degree(T.degree - 1, T.regularity)


def matrix_Atilde(T_tilde: KnotVector, T: KnotVector) -> np.ndarray:
    """
    Row i holds the S(T^{p-1,r})-coefficients of the derivative of the i-th B-spline of S(T_tilde).

    Raises:
        IncompatibleSpaceError: If the derivatives do not lie in S(T^{p-1,r})
    """
    derivative = derivative_coeffs(SplineFunction1D(T_tilde, np.eye(T_tilde.dimension)))
    return knot_insertion_coeffs(derivative, _lowered(T)).coefficients.T


def matrix_Ahat(w: Polynomial, T_source: KnotVector, T: KnotVector) -> np.ndarray:
    """
    Row i holds the S(T)-coefficients of w M_i with M_i the B-splines of T_source.

    Args:
        w: Polynomial of degree at most one
        T_source: Space of degree p-1
        T: Target space of degree p
    """
    if w.degree > 1:
        raise ValidationError(f"w must be linear, got degree {w.degree}")
    if T_source.degree + 1 != T.degree:
        raise IncompatibleSpaceError(
            incompatible_spaces_error(
                "source degree must be one below the target degree",
                {"source": T_source.degree, "target": T.degree},
            )
        )
    product = product_coeffs(w.to_spline(1), SplineFunction1D(T_source, np.eye(T_source.dimension)))
    return knot_insertion_coeffs(product, T).coefficients.T


def _transversal_block(gluing: GluingData, patch: str, T: KnotVector, lam: float) -> np.ndarray:
    alpha = gluing.alpha(patch)
    if gluing.d_alpha == 0:
        return lam * alpha.coefficient(0) * np.eye(T.dimension)
    return lam * matrix_Ahat(alpha, transversal_space(T, gluing), T)


def _generic_blocks(gluing: GluingData, T: KnotVector) -> dict[str, np.ndarray]:
    """Blocks read off the control grids of assemble_pair."""
    _, tilde = build_tilde_space(T, gluing)
    companions = build_g1_companions(tilde, gluing)
    traces = [assemble_pair(g0, g1, gluing, T) for g0, g1 in zip(tilde, companions)]
    zero = SplineFunction1D(T, np.zeros(T.dimension))
    transversals = [
        assemble_pair(zero, g1, gluing, T, "transversal")
        for g1 in unit_splines(transversal_space(T, gluing))
    ]
    return {
        "A1": np.array([f.coeff_L[0] for f in traces]),
        "A2_L": np.array([f.coeff_L[1] for f in traces]),
        "A2_R": np.array([f.coeff_R[1] for f in traces]),
        "A3_L": np.array([f.coeff_L[1] for f in transversals]),
        "A3_R": np.array([f.coeff_R[1] for f in transversals]),
    }


def assemble_blocks(gluing: GluingData, T: KnotVector) -> CoefficientMatrices:
    """
    Coefficient matrices by blossoming.

    For beta = 0 and z_beta = 0 the closed forms are used:
    beta = 0 gives A1 = A2_S = I; z_beta = 0 gives A1 = Abar and
    A2_S = Abar + lam * Atilde @ Ahat(beta_S). In both cases A3_S = lam * alpha_S * I
    for d_alpha = 0 and lam * Ahat(alpha_S) otherwise. Other cases are read off the
    assembled basis functions.
    """
    p = T.degree
    lam = T.first_span_length / p
    if gluing.beta_is_zero:
        identity = np.eye(T.dimension)
        blocks = {"A1": identity, "A2_L": identity, "A2_R": identity}
        method = "blossom"
    elif gluing.z_beta == 0:
        T_tilde, _ = build_tilde_space(T, gluing)
        abar = matrix_Abar(T_tilde, T)
        atilde = matrix_Atilde(T_tilde, T)
        lowered = _lowered(T)
        blocks = {"A1": abar}
        for label in ("L", "R"):
            ahat = matrix_Ahat(gluing.beta_side(label), lowered, T)
            blocks[f"A2_{label}"] = abar + lam * atilde @ ahat
        method = "blossom"
    else:
        logger.debug("case %s: blocks read off the assembled functions", gluing.case)
        blocks = _generic_blocks(gluing, T)
        method = "generic"
    if "A3_L" not in blocks:
        for label in ("L", "R"):
            blocks[f"A3_{label}"] = _transversal_block(gluing, label, T, lam)
    return CoefficientMatrices(
        **{name: _sparse(matrix) for name, matrix in blocks.items()},
        p=p, r=T.regularity, k=T.k, case=gluing.case, method=method, lam=lam,
    )


def fit_rows_greville(values: np.ndarray, T: KnotVector) -> np.ndarray:
    """
    Coefficients in S(T) of the spline taking ``values`` at the Greville abscissae of T.

    ``values`` may carry several columns.

    Raises:
        NumericalError: If the collocation matrix is singular
    """
    collocation = collocation_matrix(T, T.greville)
    return solve_least_squares(collocation, np.asarray(values, dtype=float))


def fit_interface_rows(
    g0: SplineFunction1D, g1: SplineFunction1D, gluing: GluingData, T: KnotVector, patch: str
) -> tuple[np.ndarray, np.ndarray]:
    """
    Rows 0 and 1 of a patch grid from pointwise data at the Greville abscissae:
    row 0 interpolates g(0, xi), row 1 interpolates g(0, xi) + lam D_u g(0, xi).
    """
    xi = T.greville
    lam = T.first_span_length / T.degree
    trace = g0(xi)
    du = gluing.alpha(patch)(xi) * g1(xi) + gluing.beta_side(patch)(xi) * g0.derivative(xi)
    return fit_rows_greville(trace, T), fit_rows_greville(trace + lam * du, T)


def fit_blocks(gluing: GluingData, T: KnotVector) -> CoefficientMatrices:
    """Coefficient matrices by Greville interpolation of the interface data."""
    _, tilde = build_tilde_space(T, gluing)
    companions = build_g1_companions(tilde, gluing)
    zero = SplineFunction1D(T, np.zeros(T.dimension))
    transversals = unit_splines(transversal_space(T, gluing))
    blocks: dict[str, list[np.ndarray]] = {name: [] for name in ("A1", "A2_L", "A2_R", "A3_L", "A3_R")}
    for label in ("L", "R"):
        for g0, g1 in zip(tilde, companions):
            row0, row1 = fit_interface_rows(g0, g1, gluing, T, label)
            if label == "L":
                blocks["A1"].append(row0)
            blocks[f"A2_{label}"].append(row1)
        for g1 in transversals:
            _, row1 = fit_interface_rows(zero, g1, gluing, T, label)
            blocks[f"A3_{label}"].append(row1)
    return CoefficientMatrices(
        **{name: _sparse(np.array(rows)) for name, rows in blocks.items()},
        p=T.degree, r=T.regularity, k=T.k, case=gluing.case, method="greville",
        lam=T.first_span_length / T.degree,
    )


def block_residual(
    G: TwoPatchGeometry, matrices: CoefficientMatrices, basis: IsogeometricBasis, samples: int = 20
) -> float:
    """
    Sampled residual of the block identity, relative to the largest sampled value.
    """
    u = np.linspace(0.0, 1.0, samples)
    v = np.linspace(0.0, 1.0, samples)
    T = basis.space
    bu = collocation_matrix(T, u)
    bv = collocation_matrix(T, v)
    # star[a, b, j] = N_a(u) N_j(v) for a = 0, 1
    star0 = bu[:, 0][:, None, None] * bv[None, :, :]
    star1 = bu[:, 1][:, None, None] * bv[None, :, :]
    traces = basis.indices("trace")
    transversals = basis.indices("transversal")
    worst, scale = 0.0, 0.0
    for label in ("L", "R"):
        predicted_0 = star0 @ matrices.A1.toarray().T + star1 @ matrices.A2(label).toarray().T
        predicted_1 = star1 @ matrices.A3(label).toarray().T
        for column, index in enumerate(traces):
            values = basis.evaluate(index, label, u, v)
            worst = max(worst, float(np.abs(values - predicted_0[..., column]).max()))
            scale = max(scale, float(np.abs(values).max()))
        for column, index in enumerate(transversals):
            values = basis.evaluate(index, label, u, v)
            worst = max(worst, float(np.abs(values - predicted_1[..., column]).max()))
            scale = max(scale, float(np.abs(values).max()))
    residual = worst / scale if scale > 0.0 else worst
    logger.debug("block identity residual %.3e", residual)
    return residual
