# tests/test_reports.py
import json
import math

import pytest

from sicsim.analysis.tables import CountTables, ideal_count_tables
from sicsim.analysis.witnesses import correlator_table, witness_yo
from sicsim.generators import reports
from sicsim.generators.registry import RayTableGenerator
from sicsim.simulation.engine import Campaign


def test_report_json_has_no_nan(tmp_path):
    rows = correlator_table(CountTables())
    report = reports.build_analysis_report(
        Campaign(threshold=5.5),
        "memory",
        witnesses=[reports.witness_entry(witness_yo(ideal_count_tables()))],
        correlators=reports.correlator_entries(rows),
    )
    path = tmp_path / "r.json"
    assert reports.write_report(report, path)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["correlators"][0]["value"] is None
    assert data["witnesses"][0]["value"] == pytest.approx(25 / 3)
    assert data["provenance"]["source"] == "memory"
    assert data["provenance"]["schema_version"] == 1


def test_finite():
    assert reports._finite(math.nan) is None
    assert reports._finite(math.inf) is None
    assert reports._finite(2) == 2.0


def test_empty_csv_keeps_header(tmp_path):
    path = tmp_path / "e.csv"
    assert reports.write_csv([], path, ["u", "w"])
    assert path.read_text(encoding="utf-8").strip() == "u,w"


def test_rewrite_reports_content_change(tmp_path, capsys):
    path = tmp_path / "t.txt"
    reports.write_text(path, "a")
    reports.write_text(path, "b")
    assert "content changed" in capsys.readouterr().out


def test_ray_table_generator(tmp_path):
    out = tmp_path / "nested" / "rays.json"
    assert RayTableGenerator(out).generate()
    assert json.loads(out.read_text())["rays"][0]["label"] == "y1-"
