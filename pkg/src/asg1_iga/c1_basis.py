"""
C1 isogeometric basis on AS-G1 two-patch geometries.

The basis consists of interior functions of both patches (rows i >= 2 of the
control net), trace functions built from the modified interface space and
transversal functions built from S(T^{p-d_alpha, r}).
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional

import numpy as np
import scipy.sparse

from .analysis import kernel_dimension, physical_gradients
from .blossom import derivative_coeffs, knot_insertion_coeffs, product_coeffs, represent_in
from .errors import NumericalError, singular_system_error
from .gluing import GluingData, TwoPatchGeometry
from .spline_core import (
    BREAKPOINT_TOL,
    KnotVector,
    Polynomial,
    SplineFunction1D,
    TensorSplineFunction,
    degree_elevate,
)
from .validation import (
    ValidationError,
    validate_degree_regularity,
    validate_function_index,
    validate_patch,
)

logger = logging.getLogger(__name__)

INTERIOR_KINDS = ("interior_L", "interior_R")
INTERFACE_KINDS = ("trace", "transversal")


@dataclass(frozen=True)
class DimensionReport:
    """Dimensions of V1 and its interior and interface parts."""

    p: int
    r: int
    k: int
    d_alpha: int
    z_beta: int
    beta_is_zero: bool
    dim_V1_1: int
    dim_Gamma0: int
    dim_Gamma1: int

    @property
    def dim_V1_2(self) -> int:
        return self.dim_Gamma0 + self.dim_Gamma1

    @property
    def dim_V1(self) -> int:
        return self.dim_V1_1 + self.dim_V1_2

    @property
    def n(self) -> int:
        return self.p + 1 + self.k * (self.p - self.r)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "r": self.r,
            "k": self.k,
            "d_alpha": self.d_alpha,
            "z_beta": self.z_beta,
            "beta_is_zero": self.beta_is_zero,
            "dim_V1": self.dim_V1,
            "dim_V1_1": self.dim_V1_1,
            "dim_V1_2": self.dim_V1_2,
            "dim_Gamma0": self.dim_Gamma0,
            "dim_Gamma1": self.dim_Gamma1,
        }


def dimension(
    p: int, r: int, k: int, d_alpha: int, z_beta: int, beta_is_zero: bool = False
) -> DimensionReport:
    """
    Dimension formulas of the C1 space on an AS-G1 two-patch geometry.

    Args:
        p: Degree
        r: Regularity, 1 <= r <= p-2
        k: Number of inner breakpoints
        d_alpha: Degree of the gluing functions alpha (0 or 1)
        z_beta: Number of breakpoints at which beta vanishes; ignored for beta = 0
        beta_is_zero: Whether beta vanishes identically

    Raises:
        ValidationError: On parameters outside their ranges
    """
    validate_degree_regularity(p, r)
    if k < 0:
        raise ValidationError(f"k must be non-negative, got: {k}")
    if d_alpha not in (0, 1):
        raise ValidationError(f"d_alpha must be 0 or 1, got: {d_alpha}")
    if not beta_is_zero and not 0 <= z_beta <= min(2, k):
        raise ValidationError(f"z_beta must lie in [0, {min(2, k)}], got: {z_beta}")
    n = p + 1 + k * (p - r)
    gamma0 = n if beta_is_zero else p + 1 + k * (p - r - 1) + z_beta
    gamma1 = p + k * (p - r - 1) + (1 - d_alpha) * (k + 1)
    return DimensionReport(p, r, k, d_alpha, z_beta, beta_is_zero, 2 * (n - 2) * n, gamma0, gamma1)


def dimension_for(G: TwoPatchGeometry, gluing: GluingData) -> DimensionReport:
    return dimension(
        G.degree, G.regularity, G.space.k, gluing.d_alpha, gluing.z_beta, gluing.beta_is_zero
    )


def unit_splines(space: KnotVector) -> list[SplineFunction1D]:
    identity = np.eye(space.dimension)
    return [SplineFunction1D(space, identity[i]) for i in range(space.dimension)]


def appended_index(space: KnotVector, tau: float) -> int:
    """
    B-spline of ``space`` whose knot window holds tau most often; lowest index on ties.
    """
    p, knots = space.degree, space.knots
    counts = [
        int(np.sum(np.abs(knots[i + 1 : i + p + 1] - tau) <= BREAKPOINT_TOL))
        for i in range(space.dimension)
    ]
    return int(np.argmax(counts))


def build_tilde_space(
    T: KnotVector, gluing: GluingData
) -> tuple[KnotVector, list[SplineFunction1D]]:
    """
    Modified interface space and its basis functions.

    The regular functions are the B-splines of T^{p,r+1}_k (of T itself for beta = 0);
    for every breakpoint where beta vanishes one B-spline of the space with that
    breakpoint inserted once more is appended.

    Returns:
        (T_tilde, functions) where T_tilde contains all functions
    """
    if T.regularity is None and T.k:
        raise ValidationError("interface space needs a uniform regularity")
    if gluing.beta_is_zero:
        return T, unit_splines(T)
    r = T.regularity if T.k else None
    base = T.with_degree(T.degree, r + 1) if r is not None else T
    if len(gluing.root_indices) != gluing.z_beta:
        raise ValidationError(
            f"classification lists {len(gluing.root_indices)} roots for z_beta={gluing.z_beta}"
        )
    functions = unit_splines(base)
    tilde = base
    for ell in gluing.root_indices:
        inserted = base.insert_breakpoint(ell)
        tau = base.breakpoints[ell - 1]
        index = appended_index(inserted, tau)
        logger.debug("appended B-spline %d of %s for tau=%.6g", index, inserted, tau)
        functions.append(SplineFunction1D(inserted, np.eye(inserted.dimension)[index]))
        tilde = tilde.insert_breakpoint(ell)
    return tilde, functions


def build_g1_companions(
    tilde_basis: list[SplineFunction1D], gluing: GluingData
) -> list[SplineFunction1D]:
    """
    Companion functions g1 of the trace functions: zero except for appended functions,
    where g1 = -(beta_L(tau) / alpha_L(tau)) N'.
    """
    companions = [SplineFunction1D(f.space.derivative_space(), np.zeros(f.space.dimension - 1))
                  for f in tilde_basis]
    if gluing.beta_is_zero or not gluing.root_indices:
        return companions
    first_appended = len(tilde_basis) - len(gluing.root_indices)
    for offset, ell in enumerate(gluing.root_indices):
        index = first_appended + offset
        spline = tilde_basis[index]
        tau = spline.space.breakpoints[ell - 1]
        alpha_tau = float(gluing.alpha_L(tau))
        if alpha_tau == 0.0:
            raise ValidationError(f"alpha_L vanishes at tau={tau}")
        factor = -float(gluing.beta_L(tau)) / alpha_tau
        companions[index] = derivative_coeffs(spline) * factor
    return companions


def _times(poly: Polynomial, h: SplineFunction1D) -> SplineFunction1D:
    if poly.is_zero:
        return h * 0.0
    if poly.degree == 0:
        return h * poly.coefficient(0)
    return product_coeffs(poly.to_spline(), h)


def _row_in(h: SplineFunction1D, T: KnotVector) -> np.ndarray:
    if h.degree < T.degree:
        h = degree_elevate(h, T.degree)
    return represent_in(h, T).coefficients


@dataclass(frozen=True, eq=False)
class C1BasisFunction:
    """One basis function given by its control grids on both patches."""

    kind: str
    index: tuple[int, ...]
    coeff_L: np.ndarray = field(repr=False)
    coeff_R: np.ndarray = field(repr=False)
    trace_data: Optional[tuple[SplineFunction1D, SplineFunction1D]] = field(default=None, repr=False)

    def grid(self, patch: str) -> np.ndarray:
        validate_patch(patch)
        return self.coeff_L if patch == "L" else self.coeff_R

    def as_tensor(self, space: KnotVector, patch: str) -> TensorSplineFunction:
        return TensorSplineFunction(space, space, self.grid(patch))

    @property
    def nonzero_rows(self) -> set[int]:
        rows = np.nonzero(np.abs(self.coeff_L).sum(axis=1) + np.abs(self.coeff_R).sum(axis=1))[0]
        return set(int(i) for i in rows)


def assemble_pair(
    g0: SplineFunction1D,
    g1: SplineFunction1D,
    gluing: GluingData,
    T: KnotVector,
    kind: str = "trace",
    index: tuple[int, ...] = (),
) -> C1BasisFunction:
    """
    Control grids of the function with trace g0 and transversal derivative g1.

    Per patch: row 0 holds g0 and row 1 holds g0 + lam (alpha_S g1 + beta_S g0')
    with lam = tau_1 / p, all in S(T).

    Raises:
        NumericalError: If a row does not belong to S(T)
    """
    n = T.dimension
    lam = T.first_span_length / T.degree
    row0 = _row_in(g0, T)
    derivative = derivative_coeffs(g0)
    grids = {}
    for label in ("L", "R"):
        mixed = _times(gluing.alpha(label), g1) + _times(gluing.beta_side(label), derivative)
        grid = np.zeros((n, n))
        grid[0] = row0
        grid[1] = row0 + lam * _row_in(mixed, T)
        grids[label] = grid
    return C1BasisFunction(kind, index, grids["L"], grids["R"], (g0, g1))


def transversal_space(T: KnotVector, gluing: GluingData) -> KnotVector:
    """S(T^{p-d_alpha, r}) on the breakpoints of T."""
    degree = T.degree - gluing.d_alpha
    if not T.k:
        return KnotVector(degree)
    return T.with_degree(degree, T.regularity)


@dataclass(frozen=True, eq=False)
class IsogeometricBasis:
    """Ordered basis of an isogeometric space on a two-patch geometry."""

    space: KnotVector
    functions: tuple[C1BasisFunction, ...]
    label: str = "V1"
    gluing: Optional[GluingData] = None

    def __len__(self) -> int:
        return len(self.functions)

    def __getitem__(self, index: int) -> C1BasisFunction:
        return self.functions[index]

    def __iter__(self) -> Iterator[C1BasisFunction]:
        return iter(self.functions)

    @property
    def n(self) -> int:
        return self.space.dimension

    def census(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for function in self.functions:
            counts[function.kind] = counts.get(function.kind, 0) + 1
        return counts

    def indices(self, kind: str) -> list[int]:
        return [i for i, f in enumerate(self.functions) if f.kind == kind]

    @cached_property
    def _matrices(self) -> dict[str, scipy.sparse.csr_matrix]:
        return {
            label: scipy.sparse.csr_matrix(
                np.vstack([f.grid(label).ravel() for f in self.functions])
                if self.functions
                else np.zeros((0, self.n * self.n))
            )
            for label in ("L", "R")
        }

    def coefficient_matrix(self, patch: str) -> scipy.sparse.csr_matrix:
        """Sparse (count x n^2) matrix; column i*n + j belongs to N_i(u) N_j(v)."""
        validate_patch(patch)
        return self._matrices[patch]

    def evaluate(self, index: int, patch: str, u, v, du: int = 0, dv: int = 0) -> np.ndarray:
        """Values of one basis function on the tensor grid u x v of a patch."""
        validate_function_index(index, len(self))
        return self.functions[index].as_tensor(self.space, patch).evaluate_grid(
            np.atleast_1d(u), np.atleast_1d(v), du, dv
        )


# C1 bases are IsogeometricBasis instances labelled "V1"
C1Basis = IsogeometricBasis


def interior_functions(n: int, first_row: int) -> list[C1BasisFunction]:
    """Unit grids of rows first_row..n-1 on patch L, then on patch R."""
    functions = []
    zero = np.zeros((n, n))
    for label in ("L", "R"):
        for i in range(first_row, n):
            for j in range(n):
                grid = np.zeros((n, n))
                grid[i, j] = 1.0
                pair = (grid, zero) if label == "L" else (zero, grid)
                functions.append(C1BasisFunction(f"interior_{label}", (i, j), *pair))
    return functions


def build_full_basis(G: TwoPatchGeometry, gluing: GluingData) -> IsogeometricBasis:
    """
    All basis functions of V1: interior L, interior R, trace, transversal.

    Raises:
        NumericalError: If the number of functions disagrees with the dimension formula
    """
    T = G.space
    functions = interior_functions(G.n, 2)
    tilde_space, tilde = build_tilde_space(T, gluing)
    companions = build_g1_companions(tilde, gluing)
    for i, (g0, g1) in enumerate(zip(tilde, companions)):
        functions.append(assemble_pair(g0, g1, gluing, T, "trace", (i,)))
    bar_space = transversal_space(T, gluing)
    zero = SplineFunction1D(T, np.zeros(T.dimension))
    for j, g1 in enumerate(unit_splines(bar_space)):
        functions.append(assemble_pair(zero, g1, gluing, T, "transversal", (j,)))

    expected = dimension_for(G, gluing).dim_V1
    if len(functions) != expected:
        raise NumericalError(singular_system_error("C1 basis count", len(functions), expected))
    logger.info(
        "Built C1 basis: %d functions (%d trace, %d transversal, case %s)",
        len(functions), len(tilde), bar_space.dimension, gluing.case,
    )
    return IsogeometricBasis(T, tuple(functions), "V1", gluing)


def build_c0_basis(G: TwoPatchGeometry) -> IsogeometricBasis:
    """Standard C0 basis: rows i >= 1 of both patches plus shared interface columns."""
    n = G.n
    functions = interior_functions(n, 1)
    for j in range(n):
        grid = np.zeros((n, n))
        grid[0, j] = 1.0
        functions.append(C1BasisFunction("interface", (j,), grid, grid.copy()))
    logger.info("Built C0 basis: %d functions", len(functions))
    return IsogeometricBasis(G.space, tuple(functions), "V0")


def interface_constraint_matrix(gluing: GluingData, T: KnotVector) -> np.ndarray:
    """
    Linear map from (row0_L, row1_L, row0_R, row1_R) to the C0 jump and to the spline
    coefficients of alpha_R D_u g_L - alpha_L D_u g_R + beta D_v g in degree p+1.
    """
    n, p = T.dimension, T.degree
    lam = T.first_span_length / p
    identity = SplineFunction1D(T, np.eye(n))
    r = T.regularity if T.k else p - 1
    target = KnotVector(p + 1, T.breakpoints, (p - r + 2,) * T.k)

    def in_target(h: SplineFunction1D) -> np.ndarray:
        return knot_insertion_coeffs(h, target).coefficients

    times_aR = in_target(product_coeffs(gluing.alpha_R.to_spline(1), identity)) / lam
    times_aL = in_target(product_coeffs(gluing.alpha_L.to_spline(1), identity)) / lam
    times_b = in_target(product_coeffs(gluing.beta.to_spline(2), derivative_coeffs(identity)))

    g1_rows = np.hstack([-times_aR + times_b, times_aR, times_aL, -times_aL])
    zero = np.zeros((n, n))
    c0_rows = np.hstack([np.eye(n), zero, -np.eye(n), zero])
    return np.vstack([c0_rows, g1_rows])


def interface_kernel_dimension(gluing: GluingData, T: KnotVector) -> int:
    """Numeric dimension of the interface part of V1."""
    return kernel_dimension(interface_constraint_matrix(gluing, T))


def physical_gradient(G: TwoPatchGeometry, patch: str, grid: np.ndarray, us, vs) -> np.ndarray:
    """Physical gradient of the function with control grid ``grid`` on the tensor grid us x vs."""
    us, vs = np.atleast_1d(us), np.atleast_1d(vs)
    f = TensorSplineFunction(G.space, G.space, grid)
    du = f.evaluate_grid(us, vs, 1, 0).ravel()
    dv = f.evaluate_grid(us, vs, 0, 1).ravel()
    geometry = G.patch(patch)
    fu = geometry.evaluate_grid(us, vs, 1, 0).reshape(-1, 2)
    fv = geometry.evaluate_grid(us, vs, 0, 1).reshape(-1, 2)
    jacobian = np.stack([fu, fv], axis=-1)
    return physical_gradients(jacobian, du, dv).reshape(len(us), len(vs), 2)
