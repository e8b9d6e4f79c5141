"""
Tests for CSV/JSON emission
"""

import json
import sys

import numpy as np
import pytest

from heisenberg.services.error_service import error_service
from heisenberg.services.field_io import (
    FieldIOError, emit, format_float, profile_to_csv, read_field, reports_to_json, table_to_csv,
    write_field
)
from heisenberg.tests.fixtures import TestDataFactory


class TestFieldFiles:
    """Test cases for write_field / read_field"""

    def setup_method(self):
        """Setup for each test method"""
        error_service.clear_stats()

    def test_write_and_read(self, tmp_path):
        """Test a written field reads back with its lattice and values"""
        field = TestDataFactory.create_gaussian_field(radius=2.0, count=5)
        path = write_field(field, str(tmp_path / "fields" / "gaussian.csv"))

        assert path.exists()
        sidecar = json.loads((tmp_path / "fields" / "gaussian.csv.json").read_text())
        assert sidecar["counts"] == [5, 5]
        assert sidecar["n"] == 1

        loaded = read_field(str(path))
        assert loaded.lattice.compatible_with(field.lattice)
        np.testing.assert_array_equal(loaded.values, field.values)

    def test_header(self, tmp_path):
        """Test the CSV header names the axes and the two value columns"""
        field = TestDataFactory.create_gaussian_field(radius=1.0, count=3)
        path = write_field(field, str(tmp_path / "g.csv"))
        lines = path.read_text().splitlines()
        assert lines[0] == "axis0,axis1,re,im"
        assert len(lines) == 10

    def test_missing_file(self, tmp_path):
        """Test reading a missing file raises and is recorded as an io error"""
        with pytest.raises(FieldIOError):
            read_field(str(tmp_path / "absent.csv"))

        stats = error_service.get_error_stats()
        assert stats['errors_by_category']['io'] == 1

    def test_row_count_mismatch(self, tmp_path):
        """Test a truncated CSV is rejected"""
        field = TestDataFactory.create_gaussian_field(radius=1.0, count=3)
        path = write_field(field, str(tmp_path / "g.csv"))
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")

        with pytest.raises(FieldIOError) as exc_info:
            read_field(str(path))
        assert "rows for a lattice of 9 nodes" in str(exc_info.value)


class TestTables:
    """Test cases for profile and report emission"""

    def test_format_float(self):
        """Test 17 significant digits survive a parse"""
        value = 0.1 + 0.2
        assert float(format_float(value)) == value

    def test_real_profile(self):
        """Test real values give one value column"""
        text = profile_to_csv(np.array([[0.0, 0.0], [1.0, 0.5]]), np.array([1.5, 2.0]), ["y", "v"])
        lines = text.splitlines()
        assert lines[0] == "y,v,value"
        assert lines[1] == "0,0,1.5"

    def test_complex_profile(self):
        """Test complex values add value_im"""
        text = profile_to_csv(np.array([[0.0]]), np.array([1.0 + 2.0j]), ["eta"])
        assert text.splitlines() == ["eta,value,value_im", "0,1,2"]

    def test_table_keeps_strings(self):
        """Test non-float cells are written verbatim"""
        text = table_to_csv(["name", "value"], [["a", 0.25]])
        assert text == "name,value\na,0.25\n"

    def test_reports_json(self):
        """Test JSON output is key-sorted with a trailing newline"""
        text = reports_to_json({"suites": [], "pass": True})
        assert text.endswith("\n")
        assert text.index('"pass"') < text.index('"suites"')
        assert json.loads(text) == {"suites": [], "pass": True}

    def test_emit(self, tmp_path, capsys):
        """Test emit writes to a file or to the stream"""
        emit("a,b\n", str(tmp_path / "out" / "table.csv"), sys.stdout)
        assert (tmp_path / "out" / "table.csv").read_text() == "a,b\n"

        emit("c\n", None, sys.stdout)
        assert capsys.readouterr().out == "c\n"
