"""Quadrature, mass matrices, condition numbers and small dense linear algebra."""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal, Optional

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import (
    GeometryError,
    NumericalError,
    inconsistent_constraints_error,
    not_spd_error,
    rank_deficient_error,
    singular_jacobian_error,
)
from .metrics import TimedOperation
from .spline_core import collocation_matrix
from .validation import MAX_QUADRATURE_ORDER, ValidationError, validate_numeric_range

if TYPE_CHECKING:
    from .c1_basis import IsogeometricBasis
    from .gluing import TwoPatchGeometry

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 60
# Matrices up to this size use the Jacobi solver under method="auto"
JACOBI_AUTO_LIMIT = 100
KERNEL_TOL = 1e-8
# Relative violation of C x = d accepted after the constrained solve
CONSTRAINT_TOL = 1e-8


def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights on [0, 1].

    Raises:
        ValidationError: If order is outside [1, 30]
    """
    validate_numeric_range(order, "quadrature order", 1, MAX_QUADRATURE_ORDER)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def composite_rule(elements: list[tuple[float, float]], order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule of the given order on every element, concatenated."""
    nodes, weights = gauss_rule(order)
    points = np.concatenate([a + (b - a) * nodes for a, b in elements])
    scaled = np.concatenate([(b - a) * weights for a, b in elements])
    return points, scaled


def default_quadrature_order(degree: int) -> int:
    """
    Gauss points per direction for the mass integrals on degree-p patches.

    The integrand N_i N_j |det J| has degree 4p - 1 per direction, which 2p points
    integrate exactly. p + 1 points would not, so p + 1 is only the floor for p = 1.
    """
    return max(degree + 1, 2 * degree)


def _patch_jacobian(geometry: "TwoPatchGeometry", label: str, points: np.ndarray) -> np.ndarray:
    patch = geometry.patch(label)
    fu = patch.evaluate_grid(points, points, 1, 0)
    fv = patch.evaluate_grid(points, points, 0, 1)
    return np.stack([fu, fv], axis=-1)  # [..., component, direction]


def assemble_mass(
    geometry: "TwoPatchGeometry",
    basis: "IsogeometricBasis",
    quadrature_order: Optional[int] = None,
) -> np.ndarray:
    """
    Mass matrix sum_S C_S (Phi^T W_S Phi) C_S^T with element-wise tensor Gauss rules.

    Raises:
        GeometryError: If det J vanishes or changes sign inside a patch
    """
    order = quadrature_order or default_quadrature_order(geometry.degree)
    space = geometry.space
    points, weights = composite_rule(space.elements, order)
    values = collocation_matrix(space, points)
    phi = np.kron(values, values)
    mass = np.zeros((len(basis), len(basis)))
    for label in ("L", "R"):
        jac = _patch_jacobian(geometry, label, points)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        if det.min() * det.max() <= 0.0:
            a, b = np.unravel_index(np.argmin(np.abs(det)), det.shape)
            raise GeometryError(
                singular_jacobian_error(label, points[a], points[b], float(det[a, b]))
            )
        w = (np.outer(weights, weights) * np.abs(det)).ravel()
        local = phi.T @ (phi * w[:, None])
        coefficients = basis.coefficient_matrix(label)
        mass += np.asarray((coefficients @ scipy.sparse.csr_matrix(local) @ coefficients.T).todense())
    mass = 0.5 * (mass + mass.T)
    logger.info("Assembled %s mass matrix of size %d (order %d)", basis.label, len(basis), order)
    return mass


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = JACOBI_TOL,
                       max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """
    Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Iterates until the off-diagonal Frobenius norm drops below tol times the full norm.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    total = np.linalg.norm(a)
    if total == 0.0:
        return np.zeros(n)
    for sweep in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * total:
            logger.debug("Jacobi converged after %d sweeps", sweep)
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol * total * 1e-3:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
    else:
        logger.warning("Jacobi did not converge in %d sweeps", max_sweeps)
    return np.sort(np.diag(a))


def symmetric_eigenvalues(
    matrix: np.ndarray, method: Literal["auto", "jacobi", "lapack"] = "auto"
) -> np.ndarray:
    """Ascending eigenvalues; 'auto' uses Jacobi up to JACOBI_AUTO_LIMIT and LAPACK above."""
    if method not in ("auto", "jacobi", "lapack"):
        raise ValidationError(f"Unknown eigenvalue method: {method}")
    if method == "jacobi" or (method == "auto" and matrix.shape[0] <= JACOBI_AUTO_LIMIT):
        return jacobi_eigenvalues(matrix)
    return np.linalg.eigvalsh(matrix)


def diagonal_scaling(matrix: np.ndarray) -> np.ndarray:
    """D^{-1/2} M D^{-1/2} with D = diag(M)."""
    diag = np.diag(matrix)
    if np.any(diag <= 0.0):
        raise NumericalError(not_spd_error(f"non-positive diagonal entry {diag.min():.3e}"))
    scale = 1.0 / np.sqrt(diag)
    return matrix * np.outer(scale, scale)


def condition_diag_scaled(
    matrix: np.ndarray, method: Literal["auto", "jacobi", "lapack"] = "auto"
) -> float:
    """
    Spectral condition number of the diagonally scaled matrix.

    Raises:
        NumericalError: If a diagonal entry or the smallest eigenvalue is not positive
    """
    eigenvalues = symmetric_eigenvalues(diagonal_scaling(matrix), method)
    if eigenvalues[0] <= 0.0:
        raise NumericalError(not_spd_error(f"smallest eigenvalue {eigenvalues[0]:.3e}"))
    return float(eigenvalues[-1] / eigenvalues[0])


@dataclass(frozen=True)
class MassMatrixReport:
    """Size and diagonally scaled condition number of a mass matrix."""

    dimension: int
    kappa: float
    label: str
    quadrature_order: int
    min_eigenvalue: float
    max_eigenvalue: float

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "kappa": self.kappa,
            "label": self.label,
            "quadrature_order": self.quadrature_order,
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
        }


def mass_matrix_report(
    geometry: "TwoPatchGeometry",
    basis: "IsogeometricBasis",
    quadrature_order: Optional[int] = None,
    method: Literal["auto", "jacobi", "lapack"] = "auto",
) -> MassMatrixReport:
    order = quadrature_order or default_quadrature_order(geometry.degree)
    with TimedOperation("mass", size=len(basis)):
        mass = assemble_mass(geometry, basis, order)
    eigenvalues = symmetric_eigenvalues(diagonal_scaling(mass), method)
    if eigenvalues[0] <= 0.0:
        raise NumericalError(not_spd_error(f"smallest eigenvalue {eigenvalues[0]:.3e}"))
    kappa = float(eigenvalues[-1] / eigenvalues[0])
    logger.info("%s: dimension %d, kappa %.6g", basis.label, len(basis), kappa)
    return MassMatrixReport(
        len(basis), kappa, basis.label, order, float(eigenvalues[0]), float(eigenvalues[-1])
    )


def physical_gradients(jacobian: np.ndarray, du: np.ndarray, dv: np.ndarray) -> np.ndarray:
    """
    Physical gradients J^{-T} (du, dv).

    Args:
        jacobian: (m, 2, 2) with jacobian[q, component, direction]
        du, dv: (..., m) parametric derivatives
    """
    inv_t = np.linalg.inv(jacobian).transpose(0, 2, 1)
    stacked = np.stack([du, dv], axis=-1)
    return np.einsum("qij,...qj->...qi", inv_t, stacked)


def interface_gradients(
    geometry: "TwoPatchGeometry", basis: "IsogeometricBasis", label: str, v: np.ndarray
) -> np.ndarray:
    """Physical gradients of all basis functions at (0, v) from one patch, (count, m, 2)."""
    space = geometry.space
    bu0 = collocation_matrix(space, [0.0])[0]
    bu1 = collocation_matrix(space, [0.0], 1)[0]
    bv0 = collocation_matrix(space, v)
    bv1 = collocation_matrix(space, v, 1)
    coefficients = basis.coefficient_matrix(label)
    du = np.asarray((coefficients @ scipy.sparse.csr_matrix(np.kron(bu1[None, :], bv0).T)).todense())
    dv = np.asarray((coefficients @ scipy.sparse.csr_matrix(np.kron(bu0[None, :], bv1).T)).todense())
    patch = geometry.patch(label)
    fu = patch.evaluate_grid([0.0], v, 1, 0)[0]
    fv = patch.evaluate_grid([0.0], v, 0, 1)[0]
    jacobian = np.stack([fu, fv], axis=-1)
    det = np.linalg.det(jacobian)
    if np.any(np.abs(det) < 1e-14):
        q = int(np.argmin(np.abs(det)))
        raise GeometryError(singular_jacobian_error(label, 0.0, float(v[q]), float(det[q])))
    return physical_gradients(jacobian, du, dv)


def c1_residuals(geometry: "TwoPatchGeometry", basis: "IsogeometricBasis", samples: int = 100) -> np.ndarray:
    """Per-function interface gradient jump relative to the largest gradient of that function."""
    v = np.linspace(0.0, 1.0, samples)
    grad_L = interface_gradients(geometry, basis, "L", v)
    grad_R = interface_gradients(geometry, basis, "R", v)
    jump = np.linalg.norm(grad_L - grad_R, axis=-1).max(axis=-1)
    size = np.maximum(
        np.linalg.norm(grad_L, axis=-1).max(axis=-1), np.linalg.norm(grad_R, axis=-1).max(axis=-1)
    )
    return np.where(size > 0.0, jump / np.where(size > 0.0, size, 1.0), 0.0)


def c1_residual(geometry: "TwoPatchGeometry", basis: "IsogeometricBasis", samples: int = 100) -> float:
    """Maximum relative interface gradient jump over all basis functions."""
    residuals = c1_residuals(geometry, basis, samples)
    return float(residuals.max()) if residuals.size else 0.0


def solve_least_squares(
    A: np.ndarray,
    b: np.ndarray,
    C: Optional[np.ndarray] = None,
    d: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Minimize ||A x - b|| subject to C x = d through the KKT system.

    Dependent constraint rows are removed through an SVD of C first.

    Raises:
        NumericalError: If the problem is rank deficient on the feasible set,
            or the constraints admit no solution
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    normal = A.T @ A
    rhs = A.T @ b
    if C is None:
        rank = int(np.linalg.matrix_rank(normal))
        if rank < n:
            raise NumericalError(rank_deficient_error(rank, n))
        x = scipy.linalg.solve(normal, rhs, assume_a="sym")
        residual = A.T @ (A @ x - b)
        logger.debug("least squares normal residual %.3e", np.linalg.norm(residual))
        return x

    C = np.atleast_2d(np.asarray(C, dtype=float))
    d = np.asarray(d, dtype=float)
    u, s, vt = np.linalg.svd(C, full_matrices=False)
    keep = s > 1e-12 * (s[0] if s.size else 1.0)
    C_red = vt[keep]
    d_red = (u[:, keep].T @ d) / s[keep]
    m = C_red.shape[0]
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = normal
    kkt[:n, n:] = C_red.T
    kkt[n:, :n] = C_red
    rank = int(np.linalg.matrix_rank(kkt))
    if rank < n + m:
        raise NumericalError(rank_deficient_error(rank, n + m))
    solution = scipy.linalg.solve(kkt, np.concatenate([rhs, d_red]))
    x = solution[:n]
    violation = float(np.linalg.norm(C @ x - d))
    if violation > CONSTRAINT_TOL * max(1.0, float(np.linalg.norm(d))):
        raise NumericalError(inconsistent_constraints_error(violation))
    return x


def kernel_dimension(A: np.ndarray, tol: float = KERNEL_TOL) -> int:
    """Number of columns minus the numeric rank (singular values above tol * s_max)."""
    A = np.atleast_2d(A)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return A.shape[1]
    return int(A.shape[1] - np.sum(s > tol * s[0]))
