"""Gluing data of two-patch geometries: alpha, beta, and the AS-G1 decision."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import gauss_rule, solve_least_squares
from .blossom import derivative_coeffs, knot_insertion_coeffs, product_coeffs, refine_tensor
from .errors import (
    GeometryError,
    NotASG1Error,
    incompatible_spaces_error,
    interface_mismatch_error,
    gluing_residual_error,
    not_asg1_error,
)
from .spline_core import (
    KnotVector,
    Polynomial,
    SplineFunction1D,
    TensorSplineFunction,
    degree_elevate,
    make_uniform_regular_knots,
)
from .validation import ValidationError, validate_patch

logger = logging.getLogger(__name__)

ASG1_RESIDUAL_TOL = 1e-8
RANK_RATIO_TOL = 1e-10
ROOT_MATCH_TOL = 1e-10
RESULTANT_TOL = 1e-8
INTERFACE_TOL = 1e-12
JACOBIAN_TOL = 1e-8
# Coefficients below this fraction of the coefficient norm do not count towards the degree
DEGREE_TOL = 1e-10

# Gram matrix of the monomials 1, v on [0, 1]
LINEAR_GRAM = np.array([[1.0, 0.5], [0.5, 1.0 / 3.0]])


@dataclass(frozen=True, eq=False)
class TwoPatchGeometry:
    """Two planar tensor-product patches glued along u = 0 of both."""

    patch_L: TensorSplineFunction
    patch_R: TensorSplineFunction
    regularity_hint: Optional[int] = field(default=None)

    def __post_init__(self):
        spaces = {self.patch_L.space_u, self.patch_L.space_v, self.patch_R.space_u, self.patch_R.space_v}
        if len(spaces) != 1:
            raise GeometryError(
                incompatible_spaces_error("both patches must use one knot vector in u and v")
            )
        for label, patch in (("L", self.patch_L), ("R", self.patch_R)):
            if patch.value_shape != (2,):
                raise ValidationError(f"patch {label} must have planar (2-vector) control points")
        check_interface(self.patch_L.coefficients, self.patch_R.coefficients)

    @property
    def space(self) -> KnotVector:
        return self.patch_L.space_u

    @property
    def degree(self) -> int:
        return self.space.degree

    @property
    def n(self) -> int:
        return self.space.dimension

    @property
    def regularity(self) -> int:
        r = self.space.regularity
        if r is None:
            if self.regularity_hint is None:
                raise ValidationError("regularity of a Bezier geometry must be given explicitly")
            return self.regularity_hint
        return r

    @property
    def lam(self) -> float:
        """Scale of the transversal row: tau_1 / p."""
        return self.space.first_span_length / self.degree

    def patch(self, label: str) -> TensorSplineFunction:
        validate_patch(label)
        return self.patch_L if label == "L" else self.patch_R

    @classmethod
    def from_control_points(
        cls, space: KnotVector, points_L, points_R, regularity: Optional[int] = None
    ) -> "TwoPatchGeometry":
        return cls(
            TensorSplineFunction(space, space, np.asarray(points_L, dtype=float)),
            TensorSplineFunction(space, space, np.asarray(points_R, dtype=float)),
            regularity,
        )

    @classmethod
    def from_maps(
        cls,
        map_L: Callable[[float, float], Sequence[float]],
        map_R: Callable[[float, float], Sequence[float]],
        space: KnotVector,
        regularity: Optional[int] = None,
    ) -> "TwoPatchGeometry":
        """Interpolate two analytic maps at the Greville points of the space."""
        patch_L = TensorSplineFunction.interpolate(map_L, space, space)
        patch_R = TensorSplineFunction.interpolate(map_R, space, space)
        return cls(patch_L, patch_R, regularity)


def check_interface(points_L: np.ndarray, points_R: np.ndarray, tol: float = INTERFACE_TOL) -> None:
    """
    Raise GeometryError unless column 0 of both control nets coincides.
    """
    deviation = np.abs(points_L[0] - points_R[0]).max(axis=-1)
    scale = max(1.0, float(np.abs(points_L[0]).max()))
    if deviation.max() > tol * scale:
        column = int(np.argmax(deviation > tol * scale))
        raise GeometryError(interface_mismatch_error(float(deviation.max()), column))


def interface_curve(G: TwoPatchGeometry) -> SplineFunction1D:
    """F0(v) = F_L(0, v) as a vector-valued spline."""
    check_interface(G.patch_L.coefficients, G.patch_R.coefficients)
    return G.patch_L.column(0)


def refine_geometry(
    G: TwoPatchGeometry, k: int, breakpoints: Optional[Sequence[float]] = None
) -> TwoPatchGeometry:
    """Represent both patches in T^{p,r}_k by knot insertion."""
    target = make_uniform_regular_knots(G.degree, G.regularity, k, breakpoints)
    if target == G.space:
        return G
    return TwoPatchGeometry(
        refine_tensor(G.patch_L, target, target),
        refine_tensor(G.patch_R, target, target),
        G.regularity,
    )


@dataclass(frozen=True)
class RegularityReport:
    """Minimum |det J| per patch on a Gauss grid."""

    min_abs_det: dict[str, float]
    sign_change: dict[str, bool]
    orientation: dict[str, int]
    threshold: float = JACOBIAN_TOL
    worst_point: dict[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        return any(v < self.threshold for v in self.min_abs_det.values()) or any(
            self.sign_change.values()
        )


def _element_points(space: KnotVector, per_element: int) -> np.ndarray:
    nodes, _ = gauss_rule(per_element)
    return np.concatenate([a + (b - a) * nodes for a, b in space.elements])


def jacobian_determinant(patch: TensorSplineFunction, us, vs) -> np.ndarray:
    """det J on the tensor grid us x vs."""
    fu = patch.evaluate_grid(us, vs, 1, 0)
    fv = patch.evaluate_grid(us, vs, 0, 1)
    return fu[..., 0] * fv[..., 1] - fu[..., 1] * fv[..., 0]


def verify_regularity(G: TwoPatchGeometry, samples_per_element: int = 4) -> RegularityReport:
    """Sample det J per Bezier element and report the minimum modulus and sign changes."""
    if samples_per_element < 2:
        raise ValidationError(f"samples_per_element must be at least 2, got: {samples_per_element}")
    points = _element_points(G.space, samples_per_element)
    min_abs, sign_change, orientation, worst = {}, {}, {}, {}
    for label in ("L", "R"):
        det = jacobian_determinant(G.patch(label), points, points)
        index = np.unravel_index(np.argmin(np.abs(det)), det.shape)
        min_abs[label] = float(np.abs(det).min())
        sign_change[label] = bool(det.min() < 0.0 < det.max())
        orientation[label] = int(np.sign(det[index])) if det[index] != 0 else 0
        worst[label] = (float(points[index[0]]), float(points[index[1]]))
    report = RegularityReport(min_abs, sign_change, orientation, JACOBIAN_TOL, worst)
    if report.flagged:
        logger.warning("Jacobian regularity check flagged: %s", min_abs)
    return report


def boundary_derivatives(G: TwoPatchGeometry) -> tuple[SplineFunction1D, SplineFunction1D, SplineFunction1D]:
    """D_u F_L(0, v), D_u F_R(0, v) and D_v F0(v) as vector-valued splines."""
    scale = 1.0 / G.lam
    du_L = SplineFunction1D(G.space, (G.patch_L.coefficients[1] - G.patch_L.coefficients[0]) * scale)
    du_R = SplineFunction1D(G.space, (G.patch_R.coefficients[1] - G.patch_R.coefficients[0]) * scale)
    dv = derivative_coeffs(interface_curve(G))
    return du_L, du_R, dv


def _det(a: SplineFunction1D, b: SplineFunction1D) -> SplineFunction1D:
    return product_coeffs(a.component(0), b.component(1)) - product_coeffs(
        a.component(1), b.component(0)
    )


def compute_alphabar_betabar(
    G: TwoPatchGeometry,
) -> tuple[SplineFunction1D, SplineFunction1D, SplineFunction1D]:
    """
    Exact splines det(D_u F_S(0, v), D_v F0(v)) for S = L, R and det(D_u F_L, D_u F_R).
    """
    du_L, du_R, dv = boundary_derivatives(G)
    return _det(du_L, dv), _det(du_R, dv), _det(du_L, du_R)


@dataclass(frozen=True)
class GluingData:
    """Linear alpha_L, alpha_R, beta_L, beta_R and quadratic beta with derived classification."""

    alpha_L: Polynomial
    alpha_R: Polynomial
    beta: Polynomial
    beta_L: Polynomial
    beta_R: Polynomial
    d_alpha: int
    z_beta: int
    root_indices: tuple[int, ...] = ()
    beta_is_zero: bool = False
    source: str = "solved"

    def alpha(self, patch: str) -> Polynomial:
        validate_patch(patch)
        return self.alpha_L if patch == "L" else self.alpha_R

    def beta_side(self, patch: str) -> Polynomial:
        validate_patch(patch)
        return self.beta_L if patch == "L" else self.beta_R

    @property
    def case(self) -> str:
        """Label of the beta case: 'beta0', 'z0', 'z1' or 'z2'."""
        return "beta0" if self.beta_is_zero else f"z{self.z_beta}"

    def to_dict(self) -> dict:
        return {
            "alpha_L": list(self.alpha_L.coefficients),
            "alpha_R": list(self.alpha_R.coefficients),
            "beta": list(self.beta.coefficients),
            "beta_L": list(self.beta_L.coefficients),
            "beta_R": list(self.beta_R.coefficients),
            "d_alpha": self.d_alpha,
            "z_beta": self.z_beta,
            "root_indices": list(self.root_indices),
            "beta_is_zero": self.beta_is_zero,
            "case": self.case,
            "source": self.source,
        }


def _common_columns(columns: list[Optional[SplineFunction1D]]) -> np.ndarray:
    """Coefficient columns of splines written in one common space; None is the zero spline."""
    present = [c for c in columns if c is not None]
    degree = max(c.degree for c in present)
    present = [degree_elevate(c, degree) for c in present]
    space = present[0].space
    for c in present[1:]:
        space = space.merge(c.space)
    matrix = np.zeros((space.dimension, len(columns)))
    iterator = iter(present)
    for index, c in enumerate(columns):
        if c is not None:
            matrix[:, index] = knot_insertion_coeffs(next(iterator), space).coefficients
    return matrix


def gluing_system(
    abar_L: SplineFunction1D, abar_R: SplineFunction1D, bbar: SplineFunction1D
) -> np.ndarray:
    """
    Homogeneous system in (aL0, aL1, aR0, aR1, b0, b1, b2) for

        abar_L * alpha_R - abar_R * alpha_L = 0,
        beta * abar_R - bbar * alpha_R = 0,
        beta * abar_L - bbar * alpha_L = 0.
    """
    linear = [Polynomial((1.0,)).to_spline(1), Polynomial((0.0, 1.0)).to_spline(1)]
    quadratic = [Polynomial(tuple(np.eye(3)[m])).to_spline(2) for m in range(3)]

    def times(a: SplineFunction1D, b: SplineFunction1D, sign: float = 1.0) -> SplineFunction1D:
        return product_coeffs(a, b) * sign

    blocks = [
        [times(abar_R, linear[0], -1), times(abar_R, linear[1], -1),
         times(abar_L, linear[0]), times(abar_L, linear[1]), None, None, None],
        [None, None, times(bbar, linear[0], -1), times(bbar, linear[1], -1)]
        + [times(abar_R, q) for q in quadratic],
        [times(bbar, linear[0], -1), times(bbar, linear[1], -1), None, None]
        + [times(abar_L, q) for q in quadratic],
    ]
    rows = []
    for block in blocks:
        matrix = _common_columns(block)
        scale = np.abs(matrix).max()
        rows.append(matrix / scale if scale > 0 else matrix)
    return np.vstack(rows)


def _trim(poly: Polynomial, scale: float) -> Polynomial:
    return Polynomial(tuple(0.0 if abs(c) <= DEGREE_TOL * scale else c for c in poly.coefficients))


def _product_sign_ok(alpha_L: Polynomial, alpha_R: Polynomial) -> bool:
    product = alpha_L * alpha_R
    points = [0.0, 1.0]
    derivative = product.derivative()
    for root in derivative.roots():
        if 0.0 < root < 1.0:
            points.append(root)
    return all(product(t) < 0.0 for t in points)


def solve_asg1_gluing(
    abar_L: SplineFunction1D,
    abar_R: SplineFunction1D,
    bbar: SplineFunction1D,
    breakpoints: Optional[Sequence[float]] = None,
) -> GluingData:
    """
    Find linear alpha_L, alpha_R and quadratic beta proportional to the bar quantities.

    Raises:
        NotASG1Error: If no such triple exists within tolerance
    """
    A = gluing_system(abar_L, abar_R, bbar)
    _, s, vt = np.linalg.svd(A)
    null = int(np.sum(s <= RANK_RATIO_TOL * s[0]))
    logger.debug("gluing system singular values: %s", s)
    if null == 0:
        raise NotASG1Error(not_asg1_error("no linear gluing data fits the geometry",
                                          float(s[-1] / s[0])))
    if null > 1:
        logger.debug("gluing null space has dimension %d; reducing common factor", null)
    x = vt[-1]
    alpha_L = _trim(Polynomial(tuple(x[0:2])), np.linalg.norm(x))
    alpha_R = _trim(Polynomial(tuple(x[2:4])), np.linalg.norm(x))
    beta = _trim(Polynomial(tuple(x[4:7])), np.linalg.norm(x))

    if alpha_L.degree == 1 and alpha_R.degree == 1:
        resultant = alpha_L.coefficient(0) * alpha_R.coefficient(1) - alpha_L.coefficient(1) * alpha_R.coefficient(0)
        if abs(resultant) <= RESULTANT_TOL * alpha_L.norm() * alpha_R.norm():
            root = -alpha_L.coefficient(0) / alpha_L.coefficient(1)
            logger.debug("removing common factor (v - %.6g)", root)
            alpha_L, _ = alpha_L.divide_linear(root)
            alpha_R, _ = alpha_R.divide_linear(root)
            beta, remainder = beta.divide_linear(root)
            if abs(remainder) > ASG1_RESIDUAL_TOL * max(1.0, beta.norm()):
                raise NotASG1Error(not_asg1_error("common factor of alpha does not divide beta",
                                                  abs(remainder)))

    if alpha_L.is_zero or alpha_R.is_zero or not _product_sign_ok(alpha_L, alpha_R):
        raise NotASG1Error(not_asg1_error("alpha_L * alpha_R changes sign or vanishes on [0, 1]"))

    norm = float(np.linalg.norm(np.concatenate([alpha_L.padded(2), alpha_R.padded(2)])))
    sign = 1.0 if alpha_R(0.0) > 0 else -1.0
    alpha_L, alpha_R, beta = (poly * (sign / norm) for poly in (alpha_L, alpha_R, beta))

    y = np.concatenate([alpha_L.padded(2), alpha_R.padded(2), beta.padded(3)])
    residual = float(np.linalg.norm(A @ y) / (np.linalg.norm(A, 2) * np.linalg.norm(y)))
    if residual > ASG1_RESIDUAL_TOL:
        raise NotASG1Error(not_asg1_error("gluing identities are not satisfied", residual))

    if breakpoints is None:
        breakpoints = abar_L.space.breakpoints
    data = gluing_from_polynomials(alpha_L, alpha_R, beta, breakpoints)
    logger.info(
        "Gluing solved: d_alpha=%d, case=%s, residual=%.2e", data.d_alpha, data.case, residual
    )
    return data


def gluing_from_polynomials(
    alpha_L: Polynomial,
    alpha_R: Polynomial,
    beta: Polynomial,
    breakpoints: Sequence[float],
    beta_L: Optional[Polynomial] = None,
    beta_R: Optional[Polynomial] = None,
    source: str = "solved",
) -> GluingData:
    """Complete gluing data from alpha_L, alpha_R and beta: degrees, beta roots, beta split."""
    scale = max(alpha_L.norm(), alpha_R.norm())
    alpha_L, alpha_R = _trim(alpha_L, scale), _trim(alpha_R, scale)
    beta = _trim(beta, max(scale, beta.norm()))
    d_alpha = int(max(alpha_L.degree, alpha_R.degree, 0))
    z_beta, roots = classify_beta(beta, breakpoints)
    draft = GluingData(
        alpha_L, alpha_R, beta, Polynomial(), Polynomial(), d_alpha, z_beta, roots,
        beta.is_zero, source,
    )
    if beta_L is None or beta_R is None:
        beta_L, beta_R = minimize_beta_pair(draft)
    return GluingData(
        alpha_L, alpha_R, beta, beta_L, beta_R, d_alpha, z_beta, roots, beta.is_zero, source
    )


def beta_split_constraints(alpha_L: Polynomial, alpha_R: Polynomial) -> np.ndarray:
    """Rows mapping (bL0, bL1, bR0, bR1) to the monomial coefficients of aL*bR - aR*bL."""
    aL0, aL1 = alpha_L.coefficient(0), alpha_L.coefficient(1)
    aR0, aR1 = alpha_R.coefficient(0), alpha_R.coefficient(1)
    return np.array([
        [-aR0, 0.0, aL0, 0.0],
        [-aR1, -aR0, aL1, aL0],
        [0.0, -aR1, 0.0, aL1],
    ])


def minimize_beta_pair(gluing: GluingData) -> tuple[Polynomial, Polynomial]:
    """
    Linear beta_L, beta_R with alpha_L beta_R - alpha_R beta_L = beta and minimal L2 norm.

    Raises:
        NumericalError: If the constraint cannot be met
    """
    if gluing.beta.is_zero:
        return Polynomial(), Polynomial()
    C = beta_split_constraints(gluing.alpha_L, gluing.alpha_R)
    d = gluing.beta.padded(3)
    factor = np.linalg.cholesky(LINEAR_GRAM).T
    A = np.zeros((4, 4))
    A[:2, :2] = factor
    A[2:, 2:] = factor
    y = solve_least_squares(A, np.zeros(4), C, d)
    return Polynomial(tuple(y[:2])), Polynomial(tuple(y[2:]))


def classify_beta(beta, breakpoints: Sequence[float]) -> tuple[int, tuple[int, ...]]:
    """
    Count breakpoints where beta vanishes.

    Returns:
        (z_beta, root_indices) with 1-based breakpoint indices; (k, ()) for beta = 0
    """
    if isinstance(beta, GluingData):
        beta = beta.beta
    if beta.is_zero:
        return len(breakpoints), ()
    roots = beta.roots()
    indices = []
    for ell, tau in enumerate(breakpoints, start=1):
        near_root = any(abs(root - tau) <= ROOT_MATCH_TOL for root in roots)
        if near_root or abs(beta(tau)) <= ROOT_MATCH_TOL * beta.norm():
            indices.append(ell)
    return len(indices), tuple(indices)


def transversal_vector(G: TwoPatchGeometry, gluing: GluingData, v, patch: str = "L") -> np.ndarray:
    """d(F0(v)) = (D_u F_S(0, v) - beta_S(v) D_v F0(v)) / alpha_S(v), shape (len(v), 2)."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    du_L, du_R, dv = boundary_derivatives(G)
    du = du_L if patch == "L" else du_R
    alpha, beta_s = gluing.alpha(patch), gluing.beta_side(patch)
    return (du(v) - beta_s(v)[:, None] * dv(v)) / alpha(v)[:, None]


def gluing_residuals(G: TwoPatchGeometry, gluing: GluingData, samples_per_element: int = 8) -> dict[str, float]:
    """
    Relative residuals of the G1 condition on the map and of the beta split.
    """
    v = _element_points(G.space, samples_per_element)
    du_L, du_R, dv = boundary_derivatives(G)
    terms = (
        gluing.alpha_R(v)[:, None] * du_L(v),
        -gluing.alpha_L(v)[:, None] * du_R(v),
        gluing.beta(v)[:, None] * dv(v),
    )
    scale = max(float(np.abs(term).max()) for term in terms) or 1.0
    g1 = float(np.abs(sum(terms)).max()) / scale

    split = gluing.alpha_L * gluing.beta_R - gluing.alpha_R * gluing.beta_L - gluing.beta
    split_scale = max(
        gluing.beta.norm(),
        gluing.alpha_L.norm() * gluing.beta_R.norm() + gluing.alpha_R.norm() * gluing.beta_L.norm(),
        1e-300,
    )
    beta_split = split.norm() / split_scale if not split.is_zero else 0.0
    return {
        "g1_condition": g1,
        "beta_split": beta_split,
        "sign_condition": 0.0 if _product_sign_ok(gluing.alpha_L, gluing.alpha_R) else 1.0,
    }


def reclassify(gluing: GluingData, breakpoints: Sequence[float]) -> GluingData:
    """Same gluing functions, roots of beta matched against new breakpoints."""
    z_beta, roots = classify_beta(gluing.beta, breakpoints)
    return GluingData(
        gluing.alpha_L, gluing.alpha_R, gluing.beta, gluing.beta_L, gluing.beta_R,
        gluing.d_alpha, z_beta, roots, gluing.beta_is_zero, gluing.source,
    )


def accept_gluing(G: TwoPatchGeometry, gluing: GluingData, tol: float = ASG1_RESIDUAL_TOL) -> GluingData:
    """
    Check supplied gluing data against the geometry.

    Raises:
        GeometryError: If the G1 condition or the beta split is violated beyond tol
    """
    residuals = gluing_residuals(G, gluing)
    for equation, key in (("G1 condition on the map", "g1_condition"), ("beta split", "beta_split")):
        if residuals[key] > tol:
            raise GeometryError(gluing_residual_error(equation, residuals[key], tol))
    if residuals["sign_condition"] > 0.0:
        raise NotASG1Error(not_asg1_error("alpha_L * alpha_R must be negative on [0, 1]"))
    logger.debug("supplied gluing accepted: %s", residuals)
    return gluing
