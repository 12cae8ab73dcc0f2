"""Tests for geometry parsing and result tables."""
import json

import numpy as np
import pandas as pd
import pytest

from asg1_iga.c1_basis import build_c0_basis, build_full_basis
from asg1_iga.cli_io import (
    SAMPLE_COLUMNS,
    basis_manifest,
    basis_table,
    example_path,
    parse_geometry,
    parse_geometry_bytes,
    parse_geometry_text,
    prepare_output_dir,
    read_basis,
    sample_function,
    write_basis,
    write_matrices,
    write_samples,
)
from asg1_iga.coeff_matrices import assemble_blocks
from asg1_iga.errors import ASG1Exception, ErrorCode, GeometryError, SchemaError
from asg1_iga.validation import ValidationError


@pytest.fixture
def document():
    return json.loads(example_path().read_text(encoding="utf-8"))


class TestParseGeometry:
    """Tests for parsing geometry documents."""

    def test_example(self, example_file):
        """Test the bundled example parses with its gluing data."""
        G, gluing = parse_geometry(example_file)
        assert G.degree == 3
        assert G.n == 4
        assert gluing.source == "file"
        assert gluing.alpha_L.coefficients == (-13.5, -1.5)
        assert gluing.beta.coefficient(2) == pytest.approx(1 / 12)

    def test_rationals_are_exact(self, example_file):
        """Test rational control points are converted once to double."""
        G, _ = parse_geometry(example_file)
        assert G.patch_L.coefficients[1, 0, 0] == -774887 / 668100

    def test_without_gluing(self, document):
        """Test a file without gluing data returns None for it."""
        del document["gluing"]
        G, gluing = parse_geometry_text(json.dumps(document))
        assert gluing is None
        assert G.n == 4

    def test_beta_split_optional(self, document):
        """Test the beta split is computed when it is not supplied."""
        del document["gluing"]["beta_L"]
        del document["gluing"]["beta_R"]
        _, gluing = parse_geometry_text(json.dumps(document))
        beta = gluing.alpha_L * gluing.beta_R - gluing.alpha_R * gluing.beta_L
        np.testing.assert_allclose(beta.padded(3), gluing.beta.padded(3), atol=1e-10)

    def test_invalid_json(self):
        """Test malformed JSON raises a schema error."""
        with pytest.raises(SchemaError) as exc_info:
            parse_geometry_text("{", "broken.json")
        assert exc_info.value.error.code == ErrorCode.E1006_SCHEMA_VIOLATION
        assert "broken.json" in exc_info.value.error.message

    def test_missing_field(self, document):
        """Test a missing patch raises a schema error naming it."""
        del document["patch_R"]
        with pytest.raises(SchemaError, match="patch_R"):
            parse_geometry_text(json.dumps(document))

    def test_wrong_grid_size(self, document):
        """Test a control grid of the wrong size raises."""
        document["patch_L"] = document["patch_L"][:3]
        with pytest.raises(SchemaError, match="patch_L"):
            parse_geometry_text(json.dumps(document))

    def test_zero_denominator(self, document):
        """Test a rational with zero denominator raises."""
        document["patch_L"][2][2][0] = "3/0"
        with pytest.raises(SchemaError):
            parse_geometry_text(json.dumps(document))

    def test_alpha_degree_limit(self, document):
        """Test a quadratic alpha is rejected."""
        document["gluing"]["alpha_L"] = ["1", "2", "3"]
        with pytest.raises(SchemaError, match="alpha_L"):
            parse_geometry_text(json.dumps(document))

    def test_interface_mismatch(self, document):
        """Test patches that do not share the interface raise."""
        document["patch_R"][0][1] = ["1", "1"]
        with pytest.raises(GeometryError) as exc_info:
            parse_geometry_text(json.dumps(document))
        assert exc_info.value.error.code == ErrorCode.E2001_INTERFACE_MISMATCH

    def test_gluing_that_does_not_fit(self, document):
        """Test supplied gluing data with a wrong beta raises."""
        document["gluing"]["beta"] = ["5/4", "-8/3", "1"]
        with pytest.raises(GeometryError) as exc_info:
            parse_geometry_text(json.dumps(document))
        assert exc_info.value.error.code == ErrorCode.E2004_GLUING_RESIDUAL

    def test_missing_file(self, tmp_path):
        """Test a missing file raises E3001."""
        with pytest.raises(ASG1Exception) as exc_info:
            parse_geometry(tmp_path / "nothing.json")
        assert exc_info.value.error.code == ErrorCode.E3001_FILE_NOT_FOUND

    def test_not_utf8(self):
        """Test undecodable bytes raise a read error."""
        with pytest.raises(ASG1Exception) as exc_info:
            parse_geometry_bytes(b"\xff\xfe{", "binary.json")
        assert exc_info.value.error.code == ErrorCode.E3004_READ_ERROR


class TestOutputDir:
    """Tests for prepare_output_dir function."""

    def test_creates_directory(self, tmp_path, monkeypatch):
        """Test nested directories are created."""
        monkeypatch.delenv("ASG1_OUTPUT_DIR", raising=False)
        out = prepare_output_dir(tmp_path / "a" / "b")
        assert out.is_dir()

    def test_enforces_allowed_root(self, tmp_path, monkeypatch):
        """Test directories outside ASG1_OUTPUT_DIR are rejected."""
        monkeypatch.setenv("ASG1_OUTPUT_DIR", str(tmp_path / "allowed"))
        assert prepare_output_dir(tmp_path / "allowed" / "run").is_dir()
        with pytest.raises(ASG1Exception) as exc_info:
            prepare_output_dir(tmp_path / "elsewhere")
        assert exc_info.value.error.code == ErrorCode.E3002_INVALID_PATH


class TestBasisFiles:
    """Tests for writing and reading bases."""

    def test_table_is_long_form(self, example):
        """Test one row per nonzero coefficient."""
        G, gluing = example
        basis = build_full_basis(G, gluing)
        table = basis_table(basis)
        expected = sum(
            np.count_nonzero(f.grid("L")) + np.count_nonzero(f.grid("R")) for f in basis
        )
        assert len(table) == expected
        assert set(table["patch"]) == {"L", "R"}

    def test_manifest(self, example):
        """Test the manifest carries the space and the census."""
        G, gluing = example
        manifest = basis_manifest(build_full_basis(G, gluing))
        assert manifest["count"] == 23
        assert manifest["degree"] == 3
        assert manifest["census"]["transversal"] == 3
        assert manifest["gluing"] is not None

    @pytest.mark.parametrize("fmt", ["csv", "parquet"])
    def test_write_read(self, example_k2, tmp_path, monkeypatch, fmt):
        """Test a written basis is read back with identical coefficients."""
        monkeypatch.delenv("ASG1_OUTPUT_DIR", raising=False)
        G, gluing = example_k2
        basis = build_full_basis(G, gluing)
        paths = write_basis(basis, tmp_path / "basis", fmt)
        assert paths[0].suffix == f".{fmt}"
        assert paths[1].name == "manifest.json"

        restored = read_basis(tmp_path / "basis")
        assert len(restored) == len(basis)
        assert restored.census() == basis.census()
        for original, copy in zip(basis, restored):
            np.testing.assert_array_equal(original.grid("L"), copy.grid("L"))
            np.testing.assert_array_equal(original.grid("R"), copy.grid("R"))

    def test_read_missing_manifest(self, tmp_path):
        """Test reading a directory without manifest raises."""
        with pytest.raises(ASG1Exception):
            read_basis(tmp_path)

    def test_unknown_format(self, example, tmp_path, monkeypatch):
        """Test an unknown table format raises."""
        monkeypatch.delenv("ASG1_OUTPUT_DIR", raising=False)
        G, _ = example
        with pytest.raises(ValidationError):
            write_basis(build_c0_basis(G), tmp_path, "xlsx")


class TestMatrixFiles:
    """Tests for write_matrices function."""

    def test_tables_and_manifest(self, example_k2, tmp_path, monkeypatch):
        """Test one triplet table per block and a manifest with shapes."""
        monkeypatch.delenv("ASG1_OUTPUT_DIR", raising=False)
        G, gluing = example_k2
        paths = write_matrices(assemble_blocks(gluing, G.space), tmp_path)
        names = {path.name for path in paths}
        assert {"A1.csv", "A2_L.csv", "A2_R.csv", "A3_L.csv", "A3_R.csv", "manifest.json"} <= names

        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["shapes"]["A3_L"] == [5, 8]
        assert manifest["case"] == "z0"

        a1 = pd.read_csv(tmp_path / "A1.csv")
        assert list(a1.columns) == ["row", "col", "value"]
        assert a1["value"].iloc[0] == pytest.approx(1.0)


class TestSamples:
    """Tests for sampling basis functions."""

    def test_shape(self, example):
        """Test grid x grid samples per patch."""
        G, gluing = example
        basis = build_full_basis(G, gluing)
        df = sample_function(G, basis, 16, 5)
        assert list(df.columns) == SAMPLE_COLUMNS
        assert len(df) == 2 * 25
        assert set(df["patch"]) == {"L", "R"}

    def test_interface_values_agree(self, example):
        """Test a trace function has equal values on both sides of the interface."""
        G, gluing = example
        basis = build_full_basis(G, gluing)
        df = sample_function(G, basis, 17, 4)
        left = df[(df["patch"] == "L") & (df["u"] == 0.0)]["value"].to_numpy()
        right = df[(df["patch"] == "R") & (df["u"] == 0.0)]["value"].to_numpy()
        np.testing.assert_allclose(left, right, atol=1e-12)

    def test_grid_too_small(self, example):
        """Test a grid below two points raises."""
        G, gluing = example
        with pytest.raises(ValidationError, match="grid"):
            sample_function(G, build_c0_basis(G), 0, 1)

    def test_write_samples(self, example, tmp_path, monkeypatch):
        """Test samples are written as CSV."""
        monkeypatch.delenv("ASG1_OUTPUT_DIR", raising=False)
        G, _ = example
        df = sample_function(G, build_c0_basis(G), 0, 3)
        path = write_samples(df, tmp_path / "samples" / "phi0")
        assert path.suffix == ".csv"
        assert len(pd.read_csv(path)) == 18
