"""Tests for the CSV, JSON, Excel and field-dump writers"""
import json

import numpy as np
import pytest
from openpyxl import load_workbook

import config
from errors import ConfigError
from storage.csv_writer import CSVWriter, read_rows, schema_header
from storage.excel_writer import ExcelWriter
from storage.field_dump import field_from_document, field_to_document, read_field, write_field
from storage.json_writer import JSONWriter
from torus.operators import trigonometric_field


class TestCSVWriter:
    def test_schema_columns_then_extras(self, tmp_path):
        rows = [{"study": "rho_sweep", "eps": 0.125, "e_L2": 2.5e-3, "delta": 0.2},
                {"study": "rho_sweep", "eps": 0.125, "e_L2": 4.0e-3, "delta": 0.1}]
        path = CSVWriter(tmp_path).write_rows(rows, "sweep", extra_columns=["delta"])
        assert path.name == "sweep.csv"
        with open(path) as f:
            assert f.readline() == schema_header()
        frame = read_rows(path)
        assert list(frame.columns) == list(config.CSV_COLUMNS) + ["delta"]
        assert frame["e_L2"].tolist() == [2.5e-3, 4.0e-3]
        assert frame["e_Hp"].isna().all()

    def test_wrong_schema_rejected(self, tmp_path):
        path = tmp_path / "old.csv"
        path.write_text("# schema_version=0\nstudy\nneumann\n")
        with pytest.raises(ValueError):
            read_rows(path)


class TestJSONWriter:
    def test_summary_with_numpy_values(self, tmp_path):
        writer = JSONWriter(tmp_path)
        path = writer.write_summary({"problem_id": "p", "c_flat": np.float64(0.9), "grid": [16]})
        assert path.name == "summary_p.json"
        with open(path) as f:
            assert json.load(f)["grid"] == [16]

    def test_config_is_sorted(self, tmp_path):
        path = JSONWriter(tmp_path).write_config({"zeta_list": [[-1.0, 0.0]], "cutoff": 16}, "cfg")
        assert list(json.loads(path.read_text())) == ["cutoff", "zeta_list"]


class TestExcelWriter:
    def test_sheets_and_header_style(self, tmp_path):
        records = [{"quantity": "e_L2", "slope": 1.02, "pairs": [[0.5, 0.1], [0.25, 0.05]]}]
        checks = [{"name": "neumann:e_L2:slope", "value": 1.02, "threshold": 0.9, "status": "PASSED"}]
        path = ExcelWriter(tmp_path).write_report({"problem_id": "p", "g0": [[1.6, 0.0]]}, records, checks, "report")
        workbook = load_workbook(path)
        assert workbook.sheetnames == ["Summary", "Records", "Checks"]
        assert workbook["Records"]["C2"].value == "[[0.5, 0.1], [0.25, 0.05]]"
        assert workbook["Summary"]["A1"].font.bold

    def test_summary_only(self, tmp_path):
        path = ExcelWriter(tmp_path).write_report({"status": "PASSED"}, [], [], "bare")
        assert load_workbook(path).sheetnames == ["Summary"]


class TestFieldDump:
    def test_written_field_reads_back(self, unit_lattice_2d, tmp_path):
        u = trigonometric_field(unit_lattice_2d, (8, 8), [{"wave": [1, 2], "kind": "sin"}])
        v = read_field(write_field(u, tmp_path / "fields" / "u"))
        assert v.grid_shape == (8, 8)
        np.testing.assert_allclose(v.values, u.values, atol=1e-15)

    def test_bad_documents(self, unit_lattice_1d, tmp_path):
        document = field_to_document(trigonometric_field(unit_lattice_1d, (8,), [{"wave": [1], "kind": "cos"}]))
        with pytest.raises(ConfigError):
            field_from_document(dict(document, format="other"))
        with pytest.raises(ConfigError):
            field_from_document(dict(document, coeffs=document["coeffs"][:-1]))
        with pytest.raises(ConfigError):
            read_field(tmp_path / "missing.json")
