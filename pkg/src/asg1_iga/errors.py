"""Structured error handling module for asg1-iga."""
from enum import Enum
from typing import Optional, Dict, Any
from dataclasses import dataclass, field


class ErrorCode(Enum):
    """Error codes for categorizing library and command errors."""

    # Validation Errors (E1xxx)
    E1001_INVALID_DEGREE = "E1001"
    E1002_INVALID_BREAKPOINTS = "E1002"
    E1003_INVALID_INDEX = "E1003"
    E1004_OUT_OF_DOMAIN = "E1004"
    E1005_INVALID_PARAMETER = "E1005"
    E1006_SCHEMA_VIOLATION = "E1006"

    # Geometry Errors (E2xxx)
    E2001_INTERFACE_MISMATCH = "E2001"
    E2002_SINGULAR_JACOBIAN = "E2002"
    E2003_NOT_ASG1 = "E2003"
    E2004_GLUING_RESIDUAL = "E2004"
    E2005_INCOMPATIBLE_SPACES = "E2005"

    # File Errors (E3xxx)
    E3001_FILE_NOT_FOUND = "E3001"
    E3002_INVALID_PATH = "E3002"
    E3003_WRITE_ERROR = "E3003"
    E3004_READ_ERROR = "E3004"

    # Numerical Errors (E4xxx)
    E4001_SINGULAR_SYSTEM = "E4001"
    E4002_RANK_DEFICIENT = "E4002"
    E4003_MEMBERSHIP_VIOLATION = "E4003"
    E4004_NOT_SPD = "E4004"
    E4005_INCONSISTENT_CONSTRAINTS = "E4005"


@dataclass
class IGAError:
    """Structured error with code, message, and recovery suggestions."""

    code: ErrorCode
    message: str
    suggestion: str
    details: Optional[Dict[str, Any]] = field(default=None)
    recoverable: bool = True

    def to_response(self) -> str:
        """Format error for a CLI message or an MCP TextContent response."""
        response = f"❌ Error [{self.code.value}]: {self.message}\n\n"
        response += f"💡 Suggestion: {self.suggestion}\n"
        if self.details:
            response += "\n📋 Details:\n"
            for key, value in self.details.items():
                response += f"  - {key}: {value}\n"
        if self.recoverable:
            response += "\n✅ This error is recoverable. Please fix the input and try again."
        else:
            response += "\n⚠️ This error points at an internal inconsistency. Please report it with the input file."
        return response


class ASG1Exception(Exception):
    """Base exception carrying a structured IGAError."""

    def __init__(self, error: IGAError):
        super().__init__(error.message)
        self.error = error


class IncompatibleSpaceError(ASG1Exception):
    """Two spline spaces cannot be combined as requested."""


class GeometryError(ASG1Exception):
    """The two-patch geometry violates a structural requirement."""


class NotASG1Error(GeometryError):
    """The geometry admits no analysis-suitable G1 gluing data."""


class NumericalError(ASG1Exception):
    """A numerical kernel met a singular or inconsistent system."""


class SchemaError(ASG1Exception):
    """A geometry file does not follow the documented schema."""


# Pre-built error factories
def validation_error(param: str, message: str, suggestion: str) -> IGAError:
    """Create a validation error for an invalid parameter."""
    return IGAError(
        code=ErrorCode.E1005_INVALID_PARAMETER,
        message=f"Invalid {param}: {message}",
        suggestion=suggestion,
        details={"parameter": param}
    )


def degree_error(p: int, r: int) -> IGAError:
    """Create an error for an unsupported degree/regularity pair."""
    return IGAError(
        code=ErrorCode.E1001_INVALID_DEGREE,
        message=f"Unsupported degree/regularity pair p={p}, r={r}",
        suggestion="Use a degree p >= 3 and a regularity 1 <= r <= p-2.",
        details={"degree": p, "regularity": r}
    )


def breakpoints_error(breakpoints: Any, reason: str) -> IGAError:
    """Create an error for an invalid breakpoint sequence."""
    return IGAError(
        code=ErrorCode.E1002_INVALID_BREAKPOINTS,
        message=f"Invalid breakpoints: {reason}",
        suggestion="Breakpoints must be strictly increasing values inside the open interval (0, 1).",
        details={"breakpoints": breakpoints}
    )


def index_error(name: str, index: int, valid_range: str) -> IGAError:
    """Create an error for an out-of-range index."""
    return IGAError(
        code=ErrorCode.E1003_INVALID_INDEX,
        message=f"{name} index {index} is out of range",
        suggestion=f"Valid indices are {valid_range}.",
        details={"index": index, "valid_range": valid_range}
    )


def domain_error(name: str, value: Any) -> IGAError:
    """Create an error for an evaluation point outside the parameter domain."""
    return IGAError(
        code=ErrorCode.E1004_OUT_OF_DOMAIN,
        message=f"{name}={value} lies outside the parameter domain [0, 1]",
        suggestion="Evaluate splines only at parameters in [0, 1].",
        details={"parameter": name, "value": value}
    )


def schema_error(field_name: str, reason: str, line: Optional[int] = None) -> IGAError:
    """Create an error for a geometry file schema violation."""
    details: Dict[str, Any] = {"field": field_name, "reason": reason}
    if line is not None:
        details["line"] = line
    return IGAError(
        code=ErrorCode.E1006_SCHEMA_VIOLATION,
        message=f"Schema violation in field '{field_name}': {reason}",
        suggestion="Compare the file with the bundled bicubic_two_patch.json and the schema in the README.",
        details=details
    )


def incompatible_spaces_error(reason: str, details: Optional[Dict[str, Any]] = None) -> IGAError:
    """Create an error for spline spaces that cannot be combined."""
    return IGAError(
        code=ErrorCode.E2005_INCOMPATIBLE_SPACES,
        message=f"Incompatible spline spaces: {reason}",
        suggestion="Make sure both spaces share degree and breakpoints, or that the target refines the source.",
        details=details
    )


def interface_mismatch_error(max_deviation: float, column: int) -> IGAError:
    """Create an error for patches that do not share the interface column."""
    return IGAError(
        code=ErrorCode.E2001_INTERFACE_MISMATCH,
        message=f"Interface control points differ by {max_deviation:.3e}",
        suggestion="The control points c(L)[0][j] and c(R)[0][j] must coincide for every j.",
        details={"max_deviation": max_deviation, "first_bad_column": column}
    )


def singular_jacobian_error(patch: str, u: float, v: float, value: float) -> IGAError:
    """Create an error for a degenerate or orientation-flipping Jacobian."""
    return IGAError(
        code=ErrorCode.E2002_SINGULAR_JACOBIAN,
        message=f"Jacobian of patch {patch} is singular or changes sign at (u, v)=({u:.6g}, {v:.6g})",
        suggestion="Move the control points so that each patch is a regular, bijective map.",
        details={"patch": patch, "u": u, "v": v, "det": value}
    )


def not_asg1_error(reason: str, residual: Optional[float] = None) -> IGAError:
    """Create an error for geometries without linear gluing data."""
    details = {"reason": reason}
    if residual is not None:
        details["residual"] = residual
    return IGAError(
        code=ErrorCode.E2003_NOT_ASG1,
        message="Geometry is not analysis-suitable G1",
        suggestion="Only geometries with linear alpha and quadratic beta gluing functions are supported.",
        details=details
    )


def gluing_residual_error(equation: str, residual: float, tolerance: float) -> IGAError:
    """Create an error for supplied gluing data that does not fit the geometry."""
    return IGAError(
        code=ErrorCode.E2004_GLUING_RESIDUAL,
        message=f"Supplied gluing data violates {equation}",
        suggestion="Remove the gluing block to let the solver compute it, or fix the coefficients.",
        details={"equation": equation, "residual": residual, "tolerance": tolerance}
    )


def file_not_found_error(file_path: str) -> IGAError:
    """Create an error for file not found."""
    return IGAError(
        code=ErrorCode.E3001_FILE_NOT_FOUND,
        message=f"File not found: {file_path}",
        suggestion="Check that the file path is correct and the file exists.",
        details={"file_path": file_path}
    )


def invalid_path_error(file_path: str, reason: str) -> IGAError:
    """Create an error for invalid output path."""
    return IGAError(
        code=ErrorCode.E3002_INVALID_PATH,
        message=f"Invalid path: {file_path}",
        suggestion="Ensure the path is valid and within the allowed directory (ASG1_OUTPUT_DIR if set).",
        details={"file_path": file_path, "reason": reason}
    )


def write_error(file_path: str, reason: str) -> IGAError:
    """Create an error for file write failure."""
    return IGAError(
        code=ErrorCode.E3003_WRITE_ERROR,
        message=f"Failed to write file: {file_path}",
        suggestion="Check that you have write permissions and sufficient disk space.",
        details={"file_path": file_path, "reason": reason}
    )


def read_error(file_path: str, reason: str) -> IGAError:
    """Create an error for file read failure."""
    return IGAError(
        code=ErrorCode.E3004_READ_ERROR,
        message=f"Failed to read file: {file_path}",
        suggestion="Check that the file is UTF-8 JSON (geometry) or CSV written by asg1-iga.",
        details={"file_path": file_path, "reason": reason}
    )


def singular_system_error(what: str, rank: int, size: int) -> IGAError:
    """Create an error for a singular square system."""
    return IGAError(
        code=ErrorCode.E4001_SINGULAR_SYSTEM,
        message=f"Singular {what} (rank {rank} of {size})",
        suggestion="Check the interpolation points and the target space; no regularization is applied.",
        details={"rank": rank, "size": size}
    )


def rank_deficient_error(rank: int, columns: int) -> IGAError:
    """Create an error for a rank-deficient least-squares problem."""
    return IGAError(
        code=ErrorCode.E4002_RANK_DEFICIENT,
        message=f"Least-squares system is rank deficient (rank {rank} < {columns})",
        suggestion="Add constraints or remove redundant unknowns.",
        details={"rank": rank, "columns": columns},
        recoverable=False
    )


def membership_error(what: str, residual: float) -> IGAError:
    """Create an error for a function that does not lie in the claimed spline space."""
    return IGAError(
        code=ErrorCode.E4003_MEMBERSHIP_VIOLATION,
        message=f"{what} does not lie in the target spline space",
        suggestion="The trace/transversal pair violates the C1 membership conditions.",
        details={"residual": residual},
        recoverable=False
    )


def not_spd_error(reason: str) -> IGAError:
    """Create an error for a matrix that should be symmetric positive definite."""
    return IGAError(
        code=ErrorCode.E4004_NOT_SPD,
        message=f"Matrix is not symmetric positive definite: {reason}",
        suggestion="Check that the basis is linearly independent and the geometry is regular.",
        details={"reason": reason}
    )


def inconsistent_constraints_error(residual: float) -> IGAError:
    """Create an error for equality constraints that admit no solution."""
    return IGAError(
        code=ErrorCode.E4005_INCONSISTENT_CONSTRAINTS,
        message=f"Equality constraints are inconsistent (residual {residual:.3e})",
        suggestion="Dependent constraint rows must agree on their right-hand sides.",
        details={"residual": residual},
        recoverable=False
    )
