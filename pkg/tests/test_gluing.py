"""Tests for the gluing module."""
import numpy as np
import pytest

from asg1_iga.errors import ErrorCode, GeometryError, NotASG1Error
from asg1_iga.gluing import (
    TwoPatchGeometry,
    accept_gluing,
    classify_beta,
    compute_alphabar_betabar,
    gluing_from_polynomials,
    gluing_residuals,
    minimize_beta_pair,
    reclassify,
    refine_geometry,
    solve_asg1_gluing,
    transversal_vector,
    verify_regularity,
)
from asg1_iga.spline_core import KnotVector, Polynomial, make_uniform_regular_knots
from asg1_iga.validation import ValidationError

from .conftest import make_geometry, make_problem

ALPHA_L = Polynomial((-27 / 2, -3 / 2))
ALPHA_R = Polynomial((21 / 2, -3 / 2))
BETA = Polynomial((5 / 4, -8 / 3, 1 / 12))
BETA_L = (-83 / 1194, 503 / 3582)
BETA_R = (-23 / 597, 152 / 1791)


class TestTwoPatchGeometry:
    """Tests for TwoPatchGeometry construction."""

    def test_example_properties(self, example):
        """Test the bundled example is a bicubic Bezier pair."""
        G, _ = example
        assert G.degree == 3
        assert G.n == 4
        assert G.regularity == 1
        assert G.lam == pytest.approx(1 / 3)

    def test_interface_mismatch(self, example):
        """Test control nets with different interface columns raise."""
        G, _ = example
        points_R = np.array(G.patch_R.coefficients)
        points_R[0, 2] += 1e-3
        with pytest.raises(GeometryError) as exc_info:
            TwoPatchGeometry.from_control_points(G.space, G.patch_L.coefficients, points_R, 1)
        assert exc_info.value.error.code == ErrorCode.E2001_INTERFACE_MISMATCH

    def test_bezier_needs_regularity(self):
        """Test a Bezier geometry without a regularity hint."""
        G = TwoPatchGeometry.from_maps(lambda u, v: (-u, v), lambda u, v: (u, v), KnotVector(3))
        with pytest.raises(ValidationError, match="regularity"):
            _ = G.regularity

    def test_patch_label(self, example):
        """Test patch lookup by label."""
        G, _ = example
        assert G.patch("L") is G.patch_L
        with pytest.raises(ValidationError):
            G.patch("X")

    def test_refine_preserves_maps(self, example):
        """Test refinement leaves both maps unchanged."""
        G, _ = example
        fine = refine_geometry(G, 3)
        assert fine.space.k == 3
        assert fine.n == 4 + 3 * 2
        us = np.linspace(0.0, 1.0, 11)
        for label in ("L", "R"):
            np.testing.assert_allclose(
                fine.patch(label).evaluate_grid(us, us),
                G.patch(label).evaluate_grid(us, us),
                atol=1e-12,
            )

    def test_regularity_report(self, example):
        """Test the example has regular, consistently oriented patches."""
        G, _ = example
        report = verify_regularity(G)
        assert not report.flagged
        assert set(report.min_abs_det) == {"L", "R"}


class TestSolveGluing:
    """Tests for computing gluing data from a geometry."""

    def test_example_matches_published_functions(self, example):
        """Test solved gluing functions are a positive multiple of the supplied ones."""
        G, _ = example
        solved = solve_asg1_gluing(*compute_alphabar_betabar(G), [])
        scale = solved.alpha_R.coefficient(0) / ALPHA_R.coefficient(0)
        assert scale > 0
        np.testing.assert_allclose(solved.alpha_L.padded(2), scale * ALPHA_L.padded(2), rtol=1e-9)
        np.testing.assert_allclose(solved.alpha_R.padded(2), scale * ALPHA_R.padded(2), rtol=1e-9)
        np.testing.assert_allclose(solved.beta.padded(3), scale * BETA.padded(3), rtol=1e-8)
        assert solved.d_alpha == 1
        assert solved.case == "z0"

    def test_beta_zero_linear_alpha(self):
        """Test a geometry with collinear transversal derivatives."""
        _, gluing = make_problem("beta0_linear", 3, 1, 1)
        assert gluing.beta_is_zero
        assert gluing.d_alpha == 1
        assert gluing.case == "beta0"
        assert gluing.beta_L.is_zero and gluing.beta_R.is_zero

    def test_beta_zero_constant_alpha(self):
        """Test the mirrored unit square."""
        _, gluing = make_problem("beta0_constant", 4, 2, 2)
        assert gluing.beta_is_zero
        assert gluing.d_alpha == 0
        assert gluing.alpha_L(0.5) * gluing.alpha_R(0.5) < 0

    def test_one_root_at_breakpoint(self):
        """Test beta vanishing at the middle breakpoint."""
        _, gluing = make_problem("one_root", 3, 1, 1)
        assert gluing.z_beta == 1
        assert gluing.root_indices == (1,)
        assert gluing.case == "z1"

    def test_one_root_between_breakpoints(self):
        """Test the same geometry on breakpoints that miss the root."""
        _, gluing = make_problem("one_root", 3, 1, 2)
        assert gluing.z_beta == 0

    def test_two_roots(self):
        """Test beta vanishing at both breakpoints."""
        _, gluing = make_problem("two_roots", 4, 1, 2)
        assert gluing.z_beta == 2
        assert gluing.root_indices == (1, 2)

    def test_sign_normalization(self):
        """Test alpha_R is positive and alpha_L negative after solving."""
        _, gluing = make_problem("one_root", 3, 1, 0)
        assert gluing.alpha_R(0.0) > 0
        assert gluing.alpha_L(0.0) < 0

    def test_not_asg1(self):
        """Test a geometry whose gluing ratio is not a ratio of linear functions."""
        space = KnotVector(3)
        G = TwoPatchGeometry.from_maps(
            lambda u, v: (-u * (1.0 + v * v), v), lambda u, v: (u, v), space, 1
        )
        with pytest.raises(NotASG1Error) as exc_info:
            solve_asg1_gluing(*compute_alphabar_betabar(G), [])
        assert exc_info.value.error.code == ErrorCode.E2003_NOT_ASG1


class TestBetaSplit:
    """Tests for the minimal-norm split of beta."""

    def test_published_pair(self):
        """Test the minimizer for the bundled example."""
        gluing = gluing_from_polynomials(ALPHA_L, ALPHA_R, BETA, [])
        np.testing.assert_allclose(gluing.beta_L.padded(2), BETA_L, rtol=1e-10)
        np.testing.assert_allclose(gluing.beta_R.padded(2), BETA_R, rtol=1e-10)

    def test_split_identity(self):
        """Test alpha_L beta_R - alpha_R beta_L reproduces beta."""
        _, gluing = make_problem("two_roots", 3, 1, 2)
        split = gluing.alpha_L * gluing.beta_R - gluing.alpha_R * gluing.beta_L
        np.testing.assert_allclose(split.padded(3), gluing.beta.padded(3), atol=1e-12)

    def test_beta_zero_split(self):
        """Test the split of beta = 0 is zero."""
        gluing = gluing_from_polynomials(ALPHA_L, ALPHA_R, Polynomial(), [0.5])
        beta_L, beta_R = minimize_beta_pair(gluing)
        assert beta_L.is_zero and beta_R.is_zero


class TestClassifyBeta:
    """Tests for matching roots of beta with breakpoints."""

    def test_roots_on_breakpoints(self):
        """Test both roots of 9t^2 - 9t + 2 on the uniform k = 2 breakpoints."""
        assert classify_beta(Polynomial((2.0, -9.0, 9.0)), [1 / 3, 2 / 3]) == (2, (1, 2))

    def test_single_match(self):
        """Test one matching breakpoint out of three."""
        assert classify_beta(Polynomial((-0.5, 1.0)), [0.25, 0.5, 0.75]) == (1, (2,))

    def test_no_roots(self):
        """Test a beta whose root misses the breakpoints."""
        assert classify_beta(BETA, [1 / 3, 2 / 3]) == (0, ())

    def test_beta_zero(self):
        """Test beta = 0 reports k and no indices."""
        assert classify_beta(Polynomial(), [0.25, 0.5]) == (2, ())

    def test_reclassify(self):
        """Test reclassification on new breakpoints keeps the functions."""
        gluing = gluing_from_polynomials(ALPHA_L, ALPHA_R, Polynomial((-0.5, 1.0)), [])
        moved = reclassify(gluing, [0.5])
        assert moved.z_beta == 1
        assert moved.alpha_L == gluing.alpha_L


class TestSuppliedGluing:
    """Tests for checking supplied gluing data against a geometry."""

    def test_example_gluing_accepted(self, example):
        """Test the bundled gluing data fits the bundled geometry."""
        G, gluing = example
        assert gluing.source == "file"
        residuals = gluing_residuals(G, gluing)
        assert residuals["g1_condition"] < 1e-9
        assert residuals["beta_split"] < 1e-12
        assert residuals["sign_condition"] == 0.0

    def test_perturbed_beta_rejected(self, example):
        """Test a perturbed beta violates the G1 condition."""
        G, gluing = example
        bad = gluing_from_polynomials(
            gluing.alpha_L, gluing.alpha_R, gluing.beta + Polynomial((1e-3,)), [],
            gluing.beta_L, gluing.beta_R, source="file",
        )
        with pytest.raises(GeometryError) as exc_info:
            accept_gluing(G, bad)
        assert exc_info.value.error.code == ErrorCode.E2004_GLUING_RESIDUAL

    def test_unfitting_gluing_rejected(self):
        """Test gluing functions that do not fit the map are rejected."""
        space = make_uniform_regular_knots(3, 1, 0)
        H = TwoPatchGeometry.from_maps(lambda u, v: (-u, v), lambda u, v: (u, v), space, 1)
        bad = gluing_from_polynomials(Polynomial((1.0,)), Polynomial((1.0,)), Polynomial(), [])
        with pytest.raises(GeometryError):
            accept_gluing(H, bad)


class TestTransversalVector:
    """Tests for the transversal vector along the interface."""

    def test_sides_agree(self, example):
        """Test the transversal vector is the same from both patches."""
        G, gluing = example
        v = np.linspace(0.0, 1.0, 21)
        np.testing.assert_allclose(
            transversal_vector(G, gluing, v, "L"), transversal_vector(G, gluing, v, "R"), atol=1e-10
        )

    def test_sides_agree_two_roots(self):
        """Test agreement for a geometry with two roots of beta."""
        G, gluing = make_problem("two_roots", 3, 1, 2)
        v = np.linspace(0.0, 1.0, 15)
        np.testing.assert_allclose(
            transversal_vector(G, gluing, v, "L"), transversal_vector(G, gluing, v, "R"), atol=1e-10
        )

    def test_geometry_fixture(self):
        """Test the analytic geometry interpolates its defining map."""
        G = make_geometry("beta0_linear", 3, 1, 1)
        assert G.patch_L.evaluate(1.0, 1.0)[0] == pytest.approx(-3.0)
