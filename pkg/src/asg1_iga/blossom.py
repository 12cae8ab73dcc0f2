"""Blossoming: knot insertion, differentiation and multiplication of splines."""
import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional, Sequence

import numpy as np

from .errors import (
    IncompatibleSpaceError,
    NumericalError,
    incompatible_spaces_error,
    membership_error,
)
from .spline_core import KnotVector, SplineFunction1D, TensorSplineFunction
from .validation import ValidationError

logger = logging.getLogger(__name__)

# Sampling density for membership checks of represent_in
MEMBERSHIP_SAMPLES_PER_ELEMENT = 7


def _blossom_on_span(coefficients: np.ndarray, knots: np.ndarray, p: int, span: int,
                     args: Sequence[float]):
    d = [coefficients[span - p + a] for a in range(p + 1)]
    for m in range(1, p + 1):
        x = args[m - 1]
        for a in range(p, m - 1, -1):
            i = span - p + a
            alpha = (x - knots[i]) / (knots[i + p + 1 - m] - knots[i])
            d[a] = (1.0 - alpha) * d[a - 1] + alpha * d[a]
    return d[p]


def _piece_point(args: Sequence[float]) -> float:
    return 0.5 * (min(args) + max(args))


def _window_point(knots: np.ndarray, i: int, p: int) -> float:
    """A parameter inside the support of the i-th B-spline where its window is centred."""
    window = knots[i + 1 : i + p + 1]
    if p > 0 and window[0] < window[-1]:
        return 0.5 * (window[0] + window[-1])
    return 0.5 * (knots[i] + knots[i + p + 1])


def blossom_eval(h: SplineFunction1D, args: Sequence[float], span: Optional[int] = None):
    """
    Blossom of h at p arguments.

    Args:
        h: Spline of degree p
        args: p parameters
        span: Knot span whose polynomial piece is blossomed; by default the span containing
            the midpoint of the arguments

    Raises:
        ValidationError: If the number of arguments differs from the degree
    """
    p = h.degree
    if len(args) != p:
        raise ValidationError(f"blossom of a degree-{p} spline takes {p} arguments, got {len(args)}")
    args = sorted(float(a) for a in args)
    if span is None:
        if p == 0:
            raise ValidationError("a degree-0 blossom needs an explicit span")
        span = h.space.find_span(min(max(_piece_point(args), 0.0), 1.0))
    return _blossom_on_span(h.coefficients, h.space.knots, p, span, args)


@dataclass(frozen=True, eq=False)
class Blossom:
    """Symmetric multi-affine extension of a spline, evaluated piece by piece."""

    underlying: SplineFunction1D

    def __call__(self, *args: float, span: Optional[int] = None):
        return blossom_eval(self.underlying, args, span)

    def dual_values(self) -> np.ndarray:
        """Blossom at every knot window; equals the coefficients."""
        return _transfer(self.underlying, self.underlying.space)


def _transfer(h: SplineFunction1D, target: KnotVector) -> np.ndarray:
    p, knots = target.degree, target.knots
    out = []
    for i in range(target.dimension):
        window = knots[i + 1 : i + p + 1]
        span = h.space.find_span(_window_point(knots, i, p))
        out.append(_blossom_on_span(h.coefficients, h.space.knots, p, span, window))
    return np.array(out)


def knot_insertion_coeffs(h: SplineFunction1D, target: KnotVector) -> SplineFunction1D:
    """
    Represent h in a refined space by blossoming at the target knot windows.

    Raises:
        IncompatibleSpaceError: If target does not refine the space of h
    """
    if target == h.space:
        return h
    if not target.refines(h.space):
        raise IncompatibleSpaceError(
            incompatible_spaces_error(
                "target is not a refinement", {"source": str(h.space), "target": str(target)}
            )
        )
    return SplineFunction1D(target, _transfer(h, target))


def represent_in(h: SplineFunction1D, target: KnotVector, tol: float = 1e-8) -> SplineFunction1D:
    """
    Represent h in any space of equal degree that contains it, including coarser ones.

    Raises:
        NumericalError: If h is not a member of the target space within tol
    """
    if target.degree != h.degree:
        raise IncompatibleSpaceError(
            incompatible_spaces_error(
                "degrees differ", {"source": h.degree, "target": target.degree}
            )
        )
    result = SplineFunction1D(target, _transfer(h, target))
    if target.refines(h.space):
        return result
    samples = _membership_samples(h.space.merge(target))
    expected = h(samples)
    scale = max(1.0, float(np.max(np.abs(expected))))
    residual = float(np.max(np.abs(result(samples) - expected))) / scale
    logger.debug("represent_in %s -> %s residual %.3e", h.space, target, residual)
    if residual > tol:
        raise NumericalError(membership_error(f"spline on {h.space}", residual))
    return result


def _membership_samples(space: KnotVector) -> np.ndarray:
    nodes = np.linspace(0.0, 1.0, MEMBERSHIP_SAMPLES_PER_ELEMENT + 2)[1:-1]
    points = [a + (b - a) * nodes for a, b in space.elements]
    return np.concatenate(points + [np.array([0.0, 1.0])])


def insertion_matrix(source: KnotVector, target: KnotVector) -> np.ndarray:
    """Matrix E with d_target = E @ d_source; column j holds the target coefficients of N_j."""
    identity = SplineFunction1D(source, np.eye(source.dimension))
    return knot_insertion_coeffs(identity, target).coefficients


def derivative_coeffs(h: SplineFunction1D) -> SplineFunction1D:
    """
    Derivative of h in the space with degree lowered by one.

    Raises:
        ValidationError: For degree-0 input
    """
    p = h.degree
    if p < 1:
        raise ValidationError("cannot differentiate a degree-0 spline")
    space = h.space.derivative_space()
    knots = h.space.knots
    d = h.coefficients
    widths = knots[p + 1 : p + h.space.dimension] - knots[1 : h.space.dimension]
    scale = p / widths
    diffs = d[1:] - d[:-1]
    return SplineFunction1D(space, diffs * scale.reshape((-1,) + (1,) * (d.ndim - 1)))


def product_space(a: KnotVector, b: KnotVector) -> KnotVector:
    """Space of products: degree a+b, continuity the smaller of the two at each breakpoint."""
    if a.k and b.k and not a.same_breakpoints(b):
        raise IncompatibleSpaceError(
            incompatible_spaces_error(
                "product operands live on different breakpoints",
                {"left": list(a.breakpoints), "right": list(b.breakpoints)},
            )
        )
    p_hat = a.degree + b.degree
    breakpoints = a.breakpoints if a.k else b.breakpoints
    multiplicities = []
    for t in breakpoints:
        continuity = min(a.continuity_at(t), b.continuity_at(t))
        multiplicities.append(int(p_hat - continuity))
    return KnotVector(p_hat, breakpoints, tuple(multiplicities))


def product_coeffs(h: SplineFunction1D, h1: SplineFunction1D) -> SplineFunction1D:
    """
    Product of two splines by the blossom splitting sum.

    Either both splines live on the same breakpoints or one of them is a polynomial.

    Raises:
        IncompatibleSpaceError: On mismatched breakpoints
    """
    space = product_space(h.space, h1.space)
    p, p1, p_hat = h.degree, h1.degree, space.degree
    knots = space.knots
    weight = 1.0 / comb(p_hat, p)
    subsets = list(combinations(range(p_hat), p))
    out = []
    for i in range(space.dimension):
        window = knots[i + 1 : i + p_hat + 1]
        point = _window_point(knots, i, p_hat)
        span_h = h.space.find_span(point)
        span_h1 = h1.space.find_span(point)
        total = 0.0
        for subset in subsets:
            chosen = set(subset)
            left = [window[a] for a in subset]
            right = [window[a] for a in range(p_hat) if a not in chosen]
            total = total + (
                _blossom_on_span(h.coefficients, h.space.knots, p, span_h, left)
                * _blossom_on_span(h1.coefficients, h1.space.knots, p1, span_h1, right)
            )
        out.append(total * weight)
    return SplineFunction1D(space, np.array(out))


def refine_tensor(f: TensorSplineFunction, space_u: KnotVector, space_v: KnotVector) -> TensorSplineFunction:
    """Tensor-product knot insertion in both directions."""
    eu = insertion_matrix(f.space_u, space_u)
    ev = insertion_matrix(f.space_v, space_v)
    coefficients = np.einsum("ai,ij...,bj->ab...", eu, f.coefficients, ev)
    return TensorSplineFunction(space_u, space_v, coefficients)
