"""Univariate and tensor-product B-spline spaces on [0, 1] and [0, 1]^2."""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    ErrorCode,
    IncompatibleSpaceError,
    NumericalError,
    incompatible_spaces_error,
    index_error,
    singular_system_error,
)
from .validation import (
    ValidationError,
    validate_breakpoints,
    validate_degree_regularity,
    validate_parameter,
)

logger = logging.getLogger(__name__)

# Breakpoints closer than this are treated as the same knot when merging spaces
BREAKPOINT_TOL = 1e-13

# Evaluation points this far outside [0, 1] are clamped instead of rejected
DOMAIN_SLACK = 1e-12


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class KnotVector:
    """
    Open knot vector on [0, 1] stored as (degree, breakpoints, multiplicities).

    Boundary knots are repeated degree+1 times. Inner multiplicities may reach
    degree+1 so that derivative and product spaces stay representable.
    """

    degree: int
    breakpoints: tuple[float, ...] = ()
    multiplicities: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "multiplicities", tuple(int(m) for m in self.multiplicities))
        if self.degree < 0:
            raise ValidationError(f"degree must be non-negative, got: {self.degree}")
        if len(self.breakpoints) != len(self.multiplicities):
            raise ValidationError(
                f"{len(self.breakpoints)} breakpoints but {len(self.multiplicities)} multiplicities"
            )
        validate_breakpoints(self.breakpoints)
        for index, m in enumerate(self.multiplicities):
            if not 1 <= m <= self.degree + 1:
                raise ValidationError(
                    f"multiplicity {m} at breakpoint {index + 1} must lie in [1, {self.degree + 1}]"
                )

    @classmethod
    def uniform(cls, degree: int, regularity: int, breakpoints: Sequence[float]) -> "KnotVector":
        """Knot vector with multiplicity degree - regularity at every breakpoint."""
        return cls(degree, tuple(breakpoints), (degree - regularity,) * len(breakpoints))

    @property
    def k(self) -> int:
        return len(self.breakpoints)

    @property
    def dimension(self) -> int:
        return self.degree + 1 + sum(self.multiplicities)

    @property
    def regularity(self) -> Optional[int]:
        """Common regularity at all breakpoints, None when multiplicities differ."""
        if not self.multiplicities:
            return None
        if len(set(self.multiplicities)) != 1:
            return None
        return self.degree - self.multiplicities[0]

    def continuity_at(self, value: float) -> float:
        """Order of continuity at ``value``; infinite away from breakpoints."""
        index = self.breakpoint_index(value)
        if index is None:
            return float("inf")
        return float(self.degree - self.multiplicities[index])

    def breakpoint_index(self, value: float) -> Optional[int]:
        for index, b in enumerate(self.breakpoints):
            if abs(b - value) <= BREAKPOINT_TOL:
                return index
        return None

    @cached_property
    def knots(self) -> np.ndarray:
        flat = [0.0] * (self.degree + 1)
        for b, m in zip(self.breakpoints, self.multiplicities):
            flat.extend([b] * m)
        flat.extend([1.0] * (self.degree + 1))
        return _readonly(flat)

    @cached_property
    def greville(self) -> np.ndarray:
        return greville_abscissae(self)

    @property
    def elements(self) -> list[tuple[float, float]]:
        """Nonzero-measure knot spans."""
        edges = (0.0,) + self.breakpoints + (1.0,)
        return list(zip(edges[:-1], edges[1:]))

    @property
    def first_span_length(self) -> float:
        """Length of the first element, t_{p+1} - t_p."""
        return self.breakpoints[0] if self.breakpoints else 1.0

    def insert_breakpoint(self, ell: int) -> "KnotVector":
        """
        Raise the multiplicity of the ell-th breakpoint (1-based) by one.

        Raises:
            ValidationError: If ell is out of range or the multiplicity would exceed the degree
        """
        if not 1 <= ell <= self.k:
            raise ValidationError(
                index_error("breakpoint", ell, f"1..{self.k}").message,
                code=ErrorCode.E1003_INVALID_INDEX,
            )
        multiplicities = list(self.multiplicities)
        if multiplicities[ell - 1] + 1 > self.degree:
            raise ValidationError(
                f"inserting at breakpoint {ell} would raise its multiplicity above {self.degree}"
            )
        multiplicities[ell - 1] += 1
        return KnotVector(self.degree, self.breakpoints, tuple(multiplicities))

    def with_degree(self, degree: int, regularity: int) -> "KnotVector":
        """Space on the same breakpoints with a uniform regularity."""
        return KnotVector.uniform(degree, regularity, self.breakpoints)

    def derivative_space(self) -> "KnotVector":
        """Space of derivatives: degree lowered by one, multiplicities kept."""
        if self.degree < 1:
            raise ValidationError("degree-0 spaces have no derivative space")
        if any(m > self.degree for m in self.multiplicities):
            raise IncompatibleSpaceError(
                incompatible_spaces_error("discontinuous space has no derivative space")
            )
        return KnotVector(self.degree - 1, self.breakpoints, self.multiplicities)

    def elevated(self, degree: int) -> "KnotVector":
        """Space of the same functions written with a higher degree."""
        if degree < self.degree:
            raise ValidationError(f"cannot lower degree {self.degree} to {degree}")
        shift = degree - self.degree
        return KnotVector(degree, self.breakpoints, tuple(m + shift for m in self.multiplicities))

    def merge(self, other: "KnotVector") -> "KnotVector":
        """Common refinement of two spaces of equal degree."""
        if other.degree != self.degree:
            raise IncompatibleSpaceError(
                incompatible_spaces_error(
                    "degrees differ", {"left": self.degree, "right": other.degree}
                )
            )
        merged: dict[float, int] = dict(zip(self.breakpoints, self.multiplicities))
        for b, m in zip(other.breakpoints, other.multiplicities):
            index = self.breakpoint_index(b)
            key = self.breakpoints[index] if index is not None else b
            merged[key] = max(merged.get(key, 0), m)
        keys = sorted(merged)
        return KnotVector(self.degree, tuple(keys), tuple(merged[b] for b in keys))

    def refines(self, coarse: "KnotVector") -> bool:
        """True when every knot of ``coarse`` appears in this vector at least as often."""
        if coarse.degree != self.degree:
            return False
        for b, m in zip(coarse.breakpoints, coarse.multiplicities):
            index = self.breakpoint_index(b)
            if index is None or self.multiplicities[index] < m:
                return False
        return True

    def same_breakpoints(self, other: "KnotVector") -> bool:
        return len(self.breakpoints) == len(other.breakpoints) and all(
            abs(a - b) <= BREAKPOINT_TOL for a, b in zip(self.breakpoints, other.breakpoints)
        )

    def find_span(self, t: float) -> int:
        """Index mu with t in [t_mu, t_{mu+1}); the last span is used at t = 1."""
        n = self.dimension
        if t >= 1.0:
            return n - 1
        span = int(np.searchsorted(self.knots, t, side="right")) - 1
        return min(max(span, self.degree), n - 1)

    def __str__(self) -> str:
        inner = ", ".join(f"{b:.6g}^{m}" for b, m in zip(self.breakpoints, self.multiplicities))
        return f"T(p={self.degree}; {inner or 'Bezier'})"


def make_uniform_regular_knots(
    p: int, r: int, k: int, breakpoints: Optional[Sequence[float]] = None
) -> KnotVector:
    """
    Build T^{p,r}_k: inner multiplicity p - r at every breakpoint.

    Args:
        p: Degree (>= 3)
        r: Regularity (1 <= r <= p-2)
        k: Number of inner breakpoints
        breakpoints: Optional explicit breakpoints; default i/(k+1)

    Raises:
        ValidationError: On invalid degree/regularity or breakpoints
    """
    validate_degree_regularity(p, r)
    if k < 0:
        raise ValidationError(f"k must be non-negative, got: {k}")
    if breakpoints is None:
        breakpoints = [i / (k + 1) for i in range(1, k + 1)]
    elif len(breakpoints) != k:
        raise ValidationError(f"expected {k} breakpoints, got {len(breakpoints)}")
    validate_breakpoints(breakpoints)
    return KnotVector.uniform(p, r, breakpoints)


def insert_breakpoint(T: KnotVector, ell: int) -> KnotVector:
    return T.insert_breakpoint(ell)


def greville_abscissae(T: KnotVector) -> np.ndarray:
    """Knot averages xi_i = (t_{i+1} + ... + t_{i+p}) / p."""
    p, knots = T.degree, T.knots
    if p == 0:
        return _readonly(0.5 * (knots[:-1] + knots[1:]))
    windows = np.array([knots[i + 1 : i + p + 1].mean() for i in range(T.dimension)])
    return _readonly(np.clip(windows, 0.0, 1.0))


def _checked_parameter(t: float, name: str = "t") -> float:
    if -DOMAIN_SLACK <= t < 0.0:
        return 0.0
    if 1.0 < t <= 1.0 + DOMAIN_SLACK:
        return 1.0
    validate_parameter(t, name)
    return float(t)


def basis_function_derivatives(T: KnotVector, t: float, order: int = 0) -> tuple[int, np.ndarray]:
    """
    Nonzero B-splines and their derivatives at t.

    Returns:
        (span, ders) where ders[m, a] is the m-th derivative of N_{span-p+a}.
        Rows above the degree are zero.
    """
    t = _checked_parameter(t)
    p, U = T.degree, T.knots
    span = T.find_span(t)
    ndu = np.zeros((p + 1, p + 1))
    ndu[0, 0] = 1.0
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    for j in range(1, p + 1):
        left[j] = t - U[span + 1 - j]
        right[j] = U[span + j] - t
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((order + 1, p + 1))
    ders[0, :] = ndu[:, p]
    top = min(order, p)
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for kk in range(1, top + 1):
            d = 0.0
            rk, pk = r - kk, p - kk
            if r >= kk:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = kk - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, kk] = -a[s1, kk - 1] / ndu[pk + 1, r]
                d += a[s2, kk] * ndu[r, pk]
            ders[kk, r] = d
            s1, s2 = s2, s1
    factor = float(p)
    for kk in range(1, top + 1):
        ders[kk, :] *= factor
        factor *= p - kk
    return span, ders


def eval_basis(T: KnotVector, t: float) -> list[tuple[int, float]]:
    """Nonzero B-spline values at t as (index, value) pairs."""
    span, ders = basis_function_derivatives(T, t, 0)
    offset = span - T.degree
    return [(offset + a, float(ders[0, a])) for a in range(T.degree + 1)]


def eval_derivative_basis(T: KnotVector, t: float, order: int) -> list[tuple[int, float]]:
    """Derivatives of the B-splines active at t as (index, value) pairs."""
    if order < 1:
        raise ValidationError(f"derivative order must be at least 1, got: {order}")
    span, ders = basis_function_derivatives(T, t, order)
    offset = span - T.degree
    return [(offset + a, float(ders[order, a])) for a in range(T.degree + 1)]


def collocation_matrix(T: KnotVector, points: Iterable[float], order: int = 0) -> np.ndarray:
    """Dense matrix of order-th derivatives: row q holds N_i^{(order)}(points[q])."""
    points = np.atleast_1d(np.asarray(points, dtype=float))
    matrix = np.zeros((points.size, T.dimension))
    for q, t in enumerate(points):
        span, ders = basis_function_derivatives(T, t, order)
        matrix[q, span - T.degree : span + 1] = ders[order]
    return matrix


@dataclass(frozen=True, eq=False)
class SplineFunction1D:
    """Spline with scalar or vector coefficients on a KnotVector."""

    space: KnotVector
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = _readonly(self.coefficients)
        if coefficients.ndim == 0 or coefficients.shape[0] != self.space.dimension:
            raise ValidationError(
                f"expected {self.space.dimension} coefficients, got shape {coefficients.shape}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def degree(self) -> int:
        return self.space.degree

    def __call__(self, t):
        return self.derivative(t, 0)

    def derivative(self, t, order: int = 1):
        """Value of the order-th derivative at a scalar or array of parameters."""
        scalar = np.isscalar(t)
        matrix = collocation_matrix(self.space, t, order)
        values = matrix @ self.coefficients
        return values[0] if scalar else values

    def _aligned(self, other: "SplineFunction1D") -> tuple[np.ndarray, np.ndarray, KnotVector]:
        from .blossom import knot_insertion_coeffs

        left, right = self, other
        degree = max(left.degree, right.degree)
        if left.degree < degree:
            left = degree_elevate(left, degree)
        if right.degree < degree:
            right = degree_elevate(right, degree)
        space = left.space.merge(right.space)
        left = knot_insertion_coeffs(left, space)
        right = knot_insertion_coeffs(right, space)
        return left.coefficients, right.coefficients, space

    def __add__(self, other):
        if isinstance(other, SplineFunction1D):
            a, b, space = self._aligned(other)
            return SplineFunction1D(space, a + b)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SplineFunction1D):
            a, b, space = self._aligned(other)
            return SplineFunction1D(space, a - b)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return SplineFunction1D(self.space, self.coefficients * float(scalar))
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def component(self, index: int) -> "SplineFunction1D":
        """Scalar spline of one coordinate of a vector-valued spline."""
        return SplineFunction1D(self.space, self.coefficients[:, index])


def degree_elevate(h: SplineFunction1D, degree: int) -> SplineFunction1D:
    """Rewrite h with a higher degree (product with the constant one)."""
    from .blossom import product_coeffs

    if degree == h.degree:
        return h
    one = Polynomial((1.0,)).to_spline(degree - h.degree)
    return product_coeffs(h, one)


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in the monomial basis on [0, 1] with trailing zeros trimmed."""

    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        coefficients = [float(c) for c in self.coefficients]
        while coefficients and coefficients[-1] == 0.0:
            coefficients.pop()
        object.__setattr__(self, "coefficients", tuple(coefficients))

    @classmethod
    def linear(cls, c0: float, c1: float) -> "Polynomial":
        return cls((c0, c1))

    @classmethod
    def from_bezier(cls, values: Sequence[float]) -> "Polynomial":
        """Monomial form of a Bezier polynomial with the given Bernstein coefficients."""
        n = len(values) - 1
        coefficients = [0.0] * (n + 1)
        for i, b in enumerate(values):
            for j in range(i, n + 1):
                coefficients[j] += b * comb(n, i) * comb(n - i, j - i) * (-1) ** (j - i)
        return cls(tuple(coefficients))

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> float:
        """Actual degree; -inf for the zero polynomial."""
        return float("-inf") if self.is_zero else len(self.coefficients) - 1

    def trimmed(self, tol: float) -> "Polynomial":
        """Drop coefficients that are negligible relative to the largest one."""
        if self.is_zero:
            return self
        scale = max(abs(c) for c in self.coefficients)
        return Polynomial(tuple(0.0 if abs(c) <= tol * scale else c for c in self.coefficients))

    def coefficient(self, power: int) -> float:
        return self.coefficients[power] if power < len(self.coefficients) else 0.0

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(length)
        out[: len(self.coefficients)] = self.coefficients
        return out

    def __call__(self, t):
        if self.is_zero:
            return np.zeros_like(np.asarray(t, dtype=float)) if not np.isscalar(t) else 0.0
        return np.polynomial.polynomial.polyval(t, self.coefficients)

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(i * c for i, c in enumerate(self.coefficients) if i > 0))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        length = max(len(self.coefficients), len(other.coefficients))
        return Polynomial(tuple(self.padded(length) + other.padded(length)))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if self.is_zero or other.is_zero:
                return Polynomial()
            return Polynomial(
                tuple(np.polynomial.polynomial.polymul(self.coefficients, other.coefficients))
            )
        if np.isscalar(other):
            return Polynomial(tuple(c * float(other) for c in self.coefficients))
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return self * -1.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients)) if self.coefficients else 0.0

    def roots(self) -> list[float]:
        """Real roots for degree <= 2 in closed form, sorted ascending."""
        if self.is_zero or self.degree == 0:
            return []
        c = self.coefficients
        if self.degree == 1:
            return [-c[0] / c[1]]
        if self.degree == 2:
            a, b, c0 = c[2], c[1], c[0]
            disc = b * b - 4 * a * c0
            if disc < 0:
                return []
            sq = np.sqrt(disc)
            # numerically stable pair
            q = -0.5 * (b + np.copysign(sq, b)) if b != 0 else -0.5 * sq
            if q == 0.0:
                return [0.0, 0.0]
            return sorted([q / a, c0 / q])
        roots = np.polynomial.polynomial.polyroots(c)
        return sorted(float(z.real) for z in roots if abs(z.imag) <= 1e-12 * (1 + abs(z)))

    def divide_linear(self, root: float) -> tuple["Polynomial", float]:
        """Synthetic division by (t - root); returns (quotient, remainder)."""
        if self.is_zero:
            return Polynomial(), 0.0
        high_first = list(reversed(self.coefficients))
        out = [high_first[0]]
        for c in high_first[1:]:
            out.append(c + root * out[-1])
        remainder = out.pop()
        return Polynomial(tuple(reversed(out))), remainder

    def bernstein(self, degree: int) -> np.ndarray:
        """Bernstein coefficients on [0, 1] for a degree >= actual degree."""
        if self.degree > degree:
            raise ValidationError(f"polynomial of degree {self.degree} exceeds {degree}")
        a = self.padded(degree + 1)
        return np.array(
            [sum(comb(j, i) / comb(degree, i) * a[i] for i in range(j + 1)) for j in range(degree + 1)]
        )

    def to_spline(self, degree: Optional[int] = None) -> SplineFunction1D:
        """Bezier spline of the given degree (default: actual degree, 0 for constants)."""
        if degree is None:
            degree = max(int(self.degree), 0) if not self.is_zero else 0
        return SplineFunction1D(KnotVector(degree), self.bernstein(degree))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for power, c in enumerate(self.coefficients):
            if c == 0.0:
                continue
            terms.append(f"{c:+.12g}" + ("" if power == 0 else "*v" if power == 1 else f"*v^{power}"))
        return " ".join(terms).lstrip("+")


@dataclass(frozen=True, eq=False)
class TensorSplineFunction:
    """Tensor-product spline; coefficients[i, j] belongs to N_i(u) N_j(v)."""

    space_u: KnotVector
    space_v: KnotVector
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coefficients = _readonly(self.coefficients)
        expected = (self.space_u.dimension, self.space_v.dimension)
        if coefficients.shape[:2] != expected:
            raise ValidationError(
                f"coefficient grid shape {coefficients.shape[:2]} does not match spaces {expected}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def value_shape(self) -> tuple[int, ...]:
        return self.coefficients.shape[2:]

    def evaluate(self, u: float, v: float, du: int = 0, dv: int = 0):
        """Value of d^du/du d^dv/dv f at a single point."""
        return self.evaluate_grid([u], [v], du, dv)[0, 0]

    def evaluate_grid(self, us, vs, du: int = 0, dv: int = 0) -> np.ndarray:
        """Values on the tensor grid us x vs, shape (len(us), len(vs), *value_shape)."""
        bu = collocation_matrix(self.space_u, us, du)
        bv = collocation_matrix(self.space_v, vs, dv)
        return np.einsum("ai,ij...,bj->ab...", bu, self.coefficients, bv)

    def column(self, i: int) -> SplineFunction1D:
        """Univariate spline in v formed by the i-th row of coefficients."""
        return SplineFunction1D(self.space_v, self.coefficients[i])

    @classmethod
    def interpolate(
        cls,
        func: Callable[[float, float], Sequence[float]],
        space_u: KnotVector,
        space_v: KnotVector,
    ) -> "TensorSplineFunction":
        """Interpolate a map at the tensor Greville points; exact for maps inside the space."""
        xu, xv = space_u.greville, space_v.greville
        values = np.array([[np.asarray(func(u, v), dtype=float) for v in xv] for u in xu])
        cu = collocation_matrix(space_u, xu)
        cv = collocation_matrix(space_v, xv)
        for name, matrix in (("u-collocation", cu), ("v-collocation", cv)):
            rank = np.linalg.matrix_rank(matrix)
            if rank < matrix.shape[0]:
                raise NumericalError(singular_system_error(name + " matrix", rank, matrix.shape[0]))
        # solve cu X cv^T = values along each axis
        flat = values.reshape(values.shape[0], values.shape[1], -1)
        step = np.stack([scipy.linalg.solve(cu, flat[:, :, c]) for c in range(flat.shape[2])], -1)
        coeffs = np.stack(
            [scipy.linalg.solve(cv, step[:, :, c].T).T for c in range(flat.shape[2])], -1
        )
        return cls(space_u, space_v, coeffs.reshape(values.shape))


def eval_tensor(f: TensorSplineFunction, u: float, v: float, du: int = 0, dv: int = 0):
    """Value of the mixed partial derivative of f at (u, v)."""
    u = _checked_parameter(u, "u")
    v = _checked_parameter(v, "v")
    return f.evaluate(u, v, du, dv)
