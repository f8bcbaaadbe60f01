import csv
import json

import pytest

from bellkit.report import (
    EXIT_BASELINE_UNMET,
    EXIT_OK,
    STATUS_BEST_FOUND,
    STATUS_FAIL,
    STATUS_INCOMPLETE,
    STATUS_PASS,
    STATUS_REACHED,
    STATUS_SKIPPED,
    ReportSpec,
    _status,
    load_targets,
    run_report,
)


def test_targets_are_versioned_and_tagged():
    targets = load_targets()
    assert targets["version"] == 1
    for table, payload in targets["tables"].items():
        for row in payload["rows"]:
            assert row["provenance"].startswith(f"table-{table}:")
            assert row["tier"] in ("baseline", "extended")
            assert "value" in row and "value_tol" in row


def test_spec_validation():
    with pytest.raises(ValueError):
        ReportSpec(table="VI", output_path="x.json")
    with pytest.raises(ValueError):
        ReportSpec(table="I", output_path="x.json", format="xml")
    with pytest.raises(ValueError):
        ReportSpec(table="III", output_path="x.json", k_range=(4,))
    with pytest.raises(ValueError):
        ReportSpec(table="IV", output_path="x.json", k_range=(1,))


def test_config_hash_stable_and_sensitive(tmp_path):
    a = ReportSpec(table="IV", output_path=str(tmp_path / "a.json"), seed=1)
    b = ReportSpec(table="IV", output_path=str(tmp_path / "a.json"), seed=1)
    c = ReportSpec(table="IV", output_path=str(tmp_path / "a.json"), seed=2)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()


def test_status_logic():
    target = {"value": 1.0, "value_tol": 1e-3, "visibility": 0.5,
              "visibility_tol": 2e-3, "tier": "baseline"}
    good = {"value": 1.0005, "visibility": 0.501}
    bad = {"value": 1.01, "visibility": 0.5}
    off_vis = {"value": 1.0, "visibility": 0.51}
    assert _status(good, target) == STATUS_PASS
    assert _status(bad, target) == STATUS_FAIL
    assert _status(off_vis, target) == STATUS_FAIL
    ext = dict(target, tier="extended")
    assert _status(good, ext) == STATUS_REACHED
    assert _status(bad, ext) == STATUS_BEST_FOUND


def test_empty_k_range_is_trivially_complete(tmp_path):
    spec = ReportSpec(
        table="IV", output_path=str(tmp_path / "empty.json"), k_range=()
    )
    outcome = run_report(spec)
    assert outcome.rows == []
    assert outcome.exit_code == EXIT_OK
    assert not outcome.incomplete
    data = json.loads(outcome.path.read_text())
    assert data["rows"] == []
    assert data["meta"]["config_hash"] == spec.config_hash()


def test_extended_rows_skipped_without_flag(tmp_path):
    spec = ReportSpec(
        table="IV",
        output_path=str(tmp_path / "skip.json"),
        k_range=(6,),
    )
    outcome = run_report(spec)
    assert len(outcome.rows) == 1
    assert outcome.rows[0]["status"] == STATUS_SKIPPED
    assert outcome.exit_code == EXIT_OK


def test_table_iv_k2_baseline_passes(tmp_path):
    spec = ReportSpec(
        table="IV",
        output_path=str(tmp_path / "k2.json"),
        k_range=(2,),
        restarts=20,
        seed=7,
    )
    outcome = run_report(spec)
    (row,) = outcome.rows
    assert row["status"] == STATUS_PASS
    assert abs(row["value"]) < 1e-3
    assert abs(row["ghz_value"]) < 1e-3
    assert abs(row["visibility"] - 0.5) < 2e-3
    assert outcome.exit_code == EXIT_OK


def test_csv_and_json_agree(tmp_path):
    common = dict(table="IV", k_range=(2,), restarts=10, seed=7)
    js = run_report(
        ReportSpec(output_path=str(tmp_path / "t.json"), format="json", **common)
    )
    cs = run_report(
        ReportSpec(output_path=str(tmp_path / "t.csv"), format="csv", **common)
    )
    json_row = json.loads(js.path.read_text())["rows"][0]
    with open(cs.path) as fh:
        meta_line = fh.readline()
        assert meta_line.startswith("# ")
        csv_row = next(csv.DictReader(fh))
    assert float(csv_row["value"]) == pytest.approx(json_row["value"], abs=1e-12)
    assert float(csv_row["visibility"]) == pytest.approx(
        json_row["visibility"], abs=1e-12
    )
    assert csv_row["status"] == json_row["status"]


def test_time_cap_marks_incomplete(tmp_path):
    spec = ReportSpec(
        table="V",
        output_path=str(tmp_path / "cap.json"),
        k_range=(3,),
        restarts=50,
        time_cap=1e-6,
    )
    outcome = run_report(spec)
    assert outcome.incomplete
    assert outcome.exit_code == EXIT_BASELINE_UNMET
    assert any(r["status"] == STATUS_INCOMPLETE for r in outcome.rows)
