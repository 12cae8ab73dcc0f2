"""Tests for the c1_basis module."""
import numpy as np
import pytest

from asg1_iga.analysis import c1_residual
from asg1_iga.c1_basis import (
    C1Basis,
    IsogeometricBasis,
    appended_index,
    assemble_pair,
    build_c0_basis,
    build_full_basis,
    build_g1_companions,
    build_tilde_space,
    dimension,
    dimension_for,
    interface_kernel_dimension,
    transversal_space,
)
from asg1_iga.gluing import TwoPatchGeometry, compute_alphabar_betabar, solve_asg1_gluing
from asg1_iga.spline_core import KnotVector, SplineFunction1D
from asg1_iga.validation import ValidationError

from .conftest import make_geometry, make_problem

DEGREE_REGULARITY = [(3, 1), (4, 1), (4, 2), (5, 2)]
CONFIGURATIONS = [
    (name, p, r, k)
    for p, r in DEGREE_REGULARITY
    for k in (0, 1, 2)
    for name in ("beta0_linear", "beta0_constant", "one_root", "two_roots")
]


class TestDimension:
    """Tests for the dimension formulas."""

    @pytest.mark.parametrize("k", range(6))
    def test_bicubic_example_formula(self, k):
        """Test dim V1 = 23 + 26k + 8k^2 for p = 3, r = 1, d_alpha = 1, z_beta = 0."""
        report = dimension(3, 1, k, 1, 0)
        assert report.dim_V1 == 23 + 26 * k + 8 * k * k

    def test_k2_split(self):
        """Test the interior and interface parts for k = 2."""
        report = dimension(3, 1, 2, 1, 0)
        assert report.n == 8
        assert report.dim_V1_1 == 96
        assert report.dim_Gamma0 == 6
        assert report.dim_Gamma1 == 5
        assert report.dim_V1 == 107

    def test_beta_zero(self):
        """Test the trace part is all of S(T) when beta vanishes."""
        report = dimension(4, 2, 3, 0, 3, beta_is_zero=True)
        assert report.dim_Gamma0 == report.n == 5 + 3 * 2
        assert report.dim_Gamma1 == 4 + 3 * 1 + 4

    def test_roots_add_trace_functions(self):
        """Test every matched root adds one trace function."""
        base = dimension(3, 1, 2, 1, 0).dim_Gamma0
        assert dimension(3, 1, 2, 1, 1).dim_Gamma0 == base + 1
        assert dimension(3, 1, 2, 1, 2).dim_Gamma0 == base + 2

    def test_z_beta_out_of_range(self):
        """Test z_beta above min(2, k) raises."""
        with pytest.raises(ValidationError, match="z_beta"):
            dimension(3, 1, 1, 1, 2)

    def test_d_alpha_out_of_range(self):
        """Test d_alpha outside {0, 1} raises."""
        with pytest.raises(ValidationError, match="d_alpha"):
            dimension(3, 1, 1, 2, 0)

    def test_to_dict(self):
        """Test the dictionary form carries the derived counts."""
        data = dimension(3, 1, 0, 1, 0).to_dict()
        assert data["dim_V1"] == 23
        assert data["dim_V1_2"] == data["dim_Gamma0"] + data["dim_Gamma1"]


class TestTildeSpace:
    """Tests for the modified interface space."""

    def test_appended_index(self):
        """Test the B-spline whose window holds the breakpoint most often."""
        assert appended_index(KnotVector(3, (0.5,), (2,)), 0.5) == 2

    def test_beta_zero_uses_T(self):
        """Test the trace space is S(T) when beta vanishes."""
        G, gluing = make_problem("beta0_linear", 3, 1, 2)
        tilde, functions = build_tilde_space(G.space, gluing)
        assert tilde == G.space
        assert len(functions) == G.n

    def test_one_root_appends_one_function(self):
        """Test one appended B-spline for one matched root."""
        G, gluing = make_problem("one_root", 3, 1, 1)
        tilde, functions = build_tilde_space(G.space, gluing)
        assert len(functions) == dimension_for(G, gluing).dim_Gamma0
        assert functions[-1].space.multiplicities == (2,)
        assert tilde.multiplicities == (2,)

    def test_companions_vanish_without_roots(self, example_k2):
        """Test all companions are zero when no root is matched."""
        G, gluing = example_k2
        _, functions = build_tilde_space(G.space, gluing)
        for companion in build_g1_companions(functions, gluing):
            assert not np.any(companion.coefficients)

    def test_companion_of_appended_function(self):
        """Test the appended function carries a nonzero companion."""
        G, gluing = make_problem("two_roots", 3, 1, 2)
        _, functions = build_tilde_space(G.space, gluing)
        companions = build_g1_companions(functions, gluing)
        assert np.any(companions[-1].coefficients)
        assert np.any(companions[-2].coefficients)
        assert not np.any(companions[0].coefficients)

    def test_transversal_space(self, example_k2):
        """Test the transversal space has degree p - d_alpha."""
        G, gluing = example_k2
        space = transversal_space(G.space, gluing)
        assert space.degree == 2
        assert space.dimension == 5


class TestAssemblePair:
    """Tests for control grids of interface functions."""

    def test_constant_trace(self, example_k2):
        """Test the constant trace with zero transversal derivative."""
        G, gluing = example_k2
        T = G.space
        one = SplineFunction1D(T, np.ones(T.dimension))
        zero = SplineFunction1D(transversal_space(T, gluing), np.zeros(5))
        function = assemble_pair(one, zero, gluing, T)
        for label in ("L", "R"):
            grid = function.grid(label)
            np.testing.assert_allclose(grid[:2], 1.0, atol=1e-12)
            assert not np.any(grid[2:])

    def test_transversal_function_has_zero_trace(self, example_k2):
        """Test a transversal function vanishes on the interface."""
        G, gluing = example_k2
        T = G.space
        g1 = SplineFunction1D(transversal_space(T, gluing), np.eye(5)[2])
        function = assemble_pair(SplineFunction1D(T, np.zeros(T.dimension)), g1, gluing, T,
                                 "transversal", (2,))
        assert function.nonzero_rows == {1}
        assert function.kind == "transversal"


class TestFullBasis:
    """Tests for the full C1 basis."""

    def test_example_k2_count(self, example_k2):
        """Test 107 functions for the bicubic example with k = 2."""
        G, gluing = example_k2
        basis = build_full_basis(G, gluing)
        assert len(basis) == 107
        assert basis.census() == {"interior_L": 48, "interior_R": 48, "trace": 6, "transversal": 5}
        assert isinstance(basis, C1Basis)

    def test_example_k0_count(self, example):
        """Test 23 functions for the unrefined example."""
        G, gluing = example
        assert len(build_full_basis(G, gluing)) == 23

    def test_order_of_kinds(self, example):
        """Test interior functions come first, then trace, then transversal."""
        G, gluing = example
        basis = build_full_basis(G, gluing)
        kinds = [f.kind for f in basis]
        assert kinds[:8] == ["interior_L"] * 8
        assert kinds[8:16] == ["interior_R"] * 8
        assert kinds[16:20] == ["trace"] * 4
        assert kinds[20:] == ["transversal"] * 3

    def test_example_is_c1(self, example_k2):
        """Test every function of the example basis is C1 across the interface."""
        G, gluing = example_k2
        assert c1_residual(G, build_full_basis(G, gluing)) < 1e-8

    def test_linear_independence(self, example_k2):
        """Test the coefficient vectors are linearly independent."""
        G, gluing = example_k2
        basis = build_full_basis(G, gluing)
        stacked = np.hstack(
            [basis.coefficient_matrix("L").toarray(), basis.coefficient_matrix("R").toarray()]
        )
        assert np.linalg.matrix_rank(stacked) == len(basis)

    def test_interior_vanishes_on_interface(self, example):
        """Test interior functions are zero with zero derivative at u = 0."""
        G, gluing = example
        basis = build_full_basis(G, gluing)
        v = np.linspace(0.0, 1.0, 5)
        for index in basis.indices("interior_L")[:4]:
            np.testing.assert_allclose(basis.evaluate(index, "L", 0.0, v), 0.0, atol=1e-14)
            np.testing.assert_allclose(basis.evaluate(index, "L", 0.0, v, du=1), 0.0, atol=1e-12)

    def test_evaluate_index_out_of_range(self, example):
        """Test evaluation of an unknown function raises."""
        G, gluing = example
        basis = build_full_basis(G, gluing)
        with pytest.raises(ValidationError):
            basis.evaluate(23, "L", 0.5, 0.5)

    def test_configuration_grid(self):
        """Test every map is run for every degree/regularity pair and k = 0, 1, 2."""
        assert len(CONFIGURATIONS) == 48
        assert len(set(CONFIGURATIONS)) == 48

    @pytest.mark.parametrize("name", ["beta0_linear", "one_root", "two_roots"])
    def test_similarity_keeps_count_and_c1(self, name):
        """Test a rotated, scaled and shifted geometry keeps the count and C1 continuity."""
        G = make_geometry(name, 3, 1, 2)
        angle, scale, shift = 0.7, 25.0, np.array([-3.0, 11.0])
        rotation = scale * np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        moved = TwoPatchGeometry.from_control_points(
            G.space,
            G.patch_L.coefficients @ rotation.T + shift,
            G.patch_R.coefficients @ rotation.T + shift,
            G.regularity_hint,
        )
        gluing = solve_asg1_gluing(*compute_alphabar_betabar(moved), moved.space.breakpoints)
        basis = build_full_basis(moved, gluing)
        original = dimension_for(G, solve_asg1_gluing(*compute_alphabar_betabar(G), G.space.breakpoints))
        assert len(basis) == dimension_for(moved, gluing).dim_V1 == original.dim_V1
        assert c1_residual(moved, basis) < 1e-8

    @pytest.mark.parametrize("name, p, r, k", CONFIGURATIONS)
    def test_count_and_c1(self, name, p, r, k):
        """Test count and C1 continuity across all gluing cases."""
        G, gluing = make_problem(name, p, r, k)
        basis = build_full_basis(G, gluing)
        assert len(basis) == dimension_for(G, gluing).dim_V1
        assert c1_residual(G, basis) < 1e-8

    @pytest.mark.parametrize("name, p, r, k", CONFIGURATIONS)
    def test_kernel_matches_formula(self, name, p, r, k):
        """Test the numeric kernel of the interface constraints against the formula."""
        G, gluing = make_problem(name, p, r, k)
        assert interface_kernel_dimension(gluing, G.space) == dimension_for(G, gluing).dim_V1_2


class TestC0Basis:
    """Tests for the standard C0 basis."""

    def test_count(self, example_k2):
        """Test 2n^2 - n functions."""
        G, _ = example_k2
        basis = build_c0_basis(G)
        assert len(basis) == 2 * 64 - 8
        assert basis.label == "V0"
        assert basis.census()["interface"] == 8

    def test_interface_functions_shared(self, example):
        """Test interface functions have equal rows 0 on both patches."""
        G, _ = example
        basis = build_c0_basis(G)
        for index in basis.indices("interface"):
            np.testing.assert_array_equal(basis[index].grid("L")[0], basis[index].grid("R")[0])

    def test_is_isogeometric_basis(self, example):
        """Test the C0 basis has no gluing data."""
        G, _ = example
        basis = build_c0_basis(G)
        assert isinstance(basis, IsogeometricBasis)
        assert basis.gluing is None
