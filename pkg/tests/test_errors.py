"""Tests for the errors module."""
from asg1_iga.errors import (
    ASG1Exception,
    ErrorCode,
    GeometryError,
    IGAError,
    NotASG1Error,
    breakpoints_error,
    degree_error,
    file_not_found_error,
    gluing_residual_error,
    interface_mismatch_error,
    not_asg1_error,
    rank_deficient_error,
    schema_error,
    validation_error,
)


class TestErrorCode:
    """Tests for ErrorCode enum."""

    def test_families(self):
        """Test every code belongs to one of the four families."""
        for code in ErrorCode:
            assert code.value[:2] in {"E1", "E2", "E3", "E4"}
            assert code.name.startswith(code.value)

    def test_selected_values(self):
        """Test a few codes used by the command line."""
        assert ErrorCode.E1006_SCHEMA_VIOLATION.value == "E1006"
        assert ErrorCode.E2003_NOT_ASG1.value == "E2003"
        assert ErrorCode.E3001_FILE_NOT_FOUND.value == "E3001"


class TestIGAError:
    """Tests for IGAError formatting."""

    def test_to_response_recoverable(self):
        """Test the response of a recoverable error."""
        error = IGAError(
            code=ErrorCode.E1005_INVALID_PARAMETER,
            message="Invalid k",
            suggestion="Use k >= 0",
            details={"parameter": "k"},
        )
        response = error.to_response()
        assert "E1005" in response
        assert "Invalid k" in response
        assert "Use k >= 0" in response
        assert "parameter: k" in response
        assert "recoverable" in response

    def test_to_response_internal(self):
        """Test non-recoverable errors ask for a report."""
        response = rank_deficient_error(3, 4).to_response()
        assert "internal inconsistency" in response


class TestExceptions:
    """Tests for the exception hierarchy."""

    def test_hierarchy(self):
        """Test NotASG1Error is a GeometryError."""
        error = NotASG1Error(not_asg1_error("alpha is quadratic"))
        assert isinstance(error, GeometryError)
        assert isinstance(error, ASG1Exception)
        assert str(error) == "Geometry is not analysis-suitable G1"


class TestFactories:
    """Tests for the error factories."""

    def test_validation_error(self):
        """Test the generic parameter error."""
        error = validation_error("grid", "must be positive", "Use grid >= 2")
        assert error.code == ErrorCode.E1005_INVALID_PARAMETER
        assert "grid" in error.message

    def test_degree_error(self):
        """Test the degree error carries both parameters."""
        error = degree_error(2, 1)
        assert error.code == ErrorCode.E1001_INVALID_DEGREE
        assert error.details == {"degree": 2, "regularity": 1}

    def test_breakpoints_error(self):
        """Test the breakpoint error."""
        assert breakpoints_error([0.5, 0.2], "not increasing").code == ErrorCode.E1002_INVALID_BREAKPOINTS

    def test_schema_error_line(self):
        """Test the schema error records the line when known."""
        assert schema_error("patch_L", "missing", 7).details["line"] == 7
        assert "line" not in schema_error("patch_L", "missing").details

    def test_geometry_errors(self):
        """Test interface, residual and AS-G1 errors."""
        assert interface_mismatch_error(0.1, 2).details["first_bad_column"] == 2
        residual = gluing_residual_error("beta split", 1e-3, 1e-10)
        assert residual.code == ErrorCode.E2004_GLUING_RESIDUAL
        assert not_asg1_error("x", 0.5).details["residual"] == 0.5

    def test_file_error(self):
        """Test the missing-file error."""
        assert file_not_found_error("/tmp/x.json").details["file_path"] == "/tmp/x.json"
