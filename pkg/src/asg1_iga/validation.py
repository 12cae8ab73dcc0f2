"""Input validation module for asg1-iga."""
import re
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ASG1Exception, IGAError, ErrorCode


class ValidationError(ASG1Exception):
    """Custom exception for validation errors."""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.E1005_INVALID_PARAMETER,
                 suggestion: str = "Check the parameter and try again."):
        super().__init__(IGAError(code=code, message=message, suggestion=suggestion))


# Function spaces that the condition command knows about
VALID_SPACES = frozenset(["V0", "V1"])

# Table formats supported by the writers
VALID_OUTPUT_FORMATS = frozenset(["csv", "parquet"])

# Patch labels
VALID_PATCHES = frozenset(["L", "R"])

# Regex for rational numbers in geometry files: "a/b", integers, decimals, exponents
RATIONAL_PATTERN = re.compile(
    r"^\s*[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:\s*/\s*[+-]?\d+)?\s*$"
)

MAX_DEGREE = 12
MAX_QUADRATURE_ORDER = 30


def validate_degree_regularity(p: int, r: int) -> None:
    """
    Validate a degree/regularity pair for the C1 construction.

    Args:
        p: Spline degree
        r: Regularity at inner breakpoints

    Raises:
        ValidationError: If p < 3, p > MAX_DEGREE or r is outside [1, p-2]
    """
    if not isinstance(p, int) or not isinstance(r, int) or isinstance(p, bool):
        raise ValidationError(
            f"degree and regularity must be integers, got p={p!r}, r={r!r}",
            code=ErrorCode.E1001_INVALID_DEGREE,
        )
    if p < 3 or p > MAX_DEGREE:
        raise ValidationError(
            f"degree must be between 3 and {MAX_DEGREE}, got: {p}",
            code=ErrorCode.E1001_INVALID_DEGREE,
            suggestion="Use a degree p >= 3.",
        )
    if r < 1 or r > p - 2:
        raise ValidationError(
            f"regularity must satisfy 1 <= r <= p-2 = {p - 2}, got: {r}",
            code=ErrorCode.E1001_INVALID_DEGREE,
            suggestion="Pick r between 1 and p-2.",
        )


def validate_breakpoints(breakpoints: Sequence[float], field_name: str = "breakpoints") -> None:
    """
    Validate inner breakpoints: strictly increasing and inside (0, 1).

    Raises:
        ValidationError: If the sequence is not strictly increasing or leaves (0, 1)
    """
    previous = 0.0
    for index, value in enumerate(breakpoints):
        if not 0.0 < value < 1.0:
            raise ValidationError(
                f"{field_name}[{index}]={value} must lie in the open interval (0, 1)",
                code=ErrorCode.E1002_INVALID_BREAKPOINTS,
            )
        if value <= previous and index > 0:
            raise ValidationError(
                f"{field_name} must be strictly increasing, got {value} after {previous}",
                code=ErrorCode.E1002_INVALID_BREAKPOINTS,
            )
        previous = value


def validate_numeric_range(
    value: int | float,
    field_name: str,
    min_value: Optional[int | float] = None,
    max_value: Optional[int | float] = None,
) -> None:
    """
    Validate that a numeric value is within specified bounds.

    Args:
        value: The numeric value to validate
        field_name: Name of the field for error messages
        min_value: Minimum allowed value (inclusive), or None for no minimum
        max_value: Maximum allowed value (inclusive), or None for no maximum

    Raises:
        ValidationError: If the value is outside the allowed range
    """
    if min_value is not None and value < min_value:
        raise ValidationError(
            f"{field_name} must be at least {min_value}, got: {value}"
        )

    if max_value is not None and value > max_value:
        raise ValidationError(
            f"{field_name} must be at most {max_value}, got: {value}"
        )


def validate_rational(text: str | int | float, field_name: str = "value") -> float:
    """
    Parse a rational literal such as "3/50", "-0.25" or 7 exactly, then convert once to float.

    Returns:
        The value as a double

    Raises:
        ValidationError: If the literal is malformed or has a zero denominator
    """
    if isinstance(text, bool):
        raise ValidationError(f"{field_name} must be a number, got a boolean",
                              code=ErrorCode.E1006_SCHEMA_VIOLATION)
    if isinstance(text, (int, float)):
        return float(text)
    if not isinstance(text, str) or not RATIONAL_PATTERN.match(text):
        raise ValidationError(
            f"{field_name} is not a rational literal: {text!r}",
            code=ErrorCode.E1006_SCHEMA_VIOLATION,
            suggestion='Write numbers as integers, decimals or fractions like "3/50".',
        )
    try:
        return float(Fraction(text.replace(" ", "")))
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(
            f"{field_name} cannot be parsed: {e}",
            code=ErrorCode.E1006_SCHEMA_VIOLATION,
        )


def validate_space(space: str) -> None:
    """
    Validate a function-space label against VALID_SPACES.

    Raises:
        ValidationError: If the label is unknown
    """
    if not space:
        raise ValidationError("space cannot be empty")
    if space not in VALID_SPACES:
        raise ValidationError(
            f"Unknown space: {space}. Valid spaces are: {', '.join(sorted(VALID_SPACES))}"
        )


def validate_output_format(fmt: str) -> None:
    """Validate an output table format against VALID_OUTPUT_FORMATS."""
    if fmt not in VALID_OUTPUT_FORMATS:
        raise ValidationError(
            f"Unknown format: {fmt}. Valid formats are: {', '.join(sorted(VALID_OUTPUT_FORMATS))}"
        )


def validate_patch(patch: str) -> None:
    """Validate a patch label."""
    if patch not in VALID_PATCHES:
        raise ValidationError(f"patch must be 'L' or 'R', got: {patch!r}")


def validate_function_index(index: int, count: int) -> None:
    """
    Validate a basis function index.

    Raises:
        ValidationError: If index is not in [0, count)
    """
    if not 0 <= index < count:
        raise ValidationError(
            f"function index {index} is out of range [0, {count - 1}]",
            code=ErrorCode.E1003_INVALID_INDEX,
        )


def validate_parameter(value: float, field_name: str = "t") -> None:
    """Validate that an evaluation parameter lies in [0, 1]."""
    if not 0.0 <= value <= 1.0:
        raise ValidationError(
            f"{field_name}={value} lies outside the parameter domain [0, 1]",
            code=ErrorCode.E1004_OUT_OF_DOMAIN,
            suggestion="Evaluate splines only at parameters in [0, 1].",
        )
