import json
import math
import os

import numpy as np
import pytest

from bellmc.config import from_mapping, loads
from bellmc.engine import run_coincidence, run_quad
from bellmc.inequalities import SettingsQuad, maximize_settings
from bellmc.reports import (
    HIST_CSV_HEADER,
    SCAN_CSV_HEADER,
    hist_rows,
    pair_payload,
    quad_payload,
    report_document,
    scan_payload,
    scan_rows,
    write_csv,
    write_json,
)

from conftest import CANONICAL_QUAD, make_run


def test_write_json_atomic(tmp_path):
    path = tmp_path / "sub" / "report.json"
    write_json(str(path), {"a": 1})
    assert json.loads(path.read_text()) == {"a": 1}
    # overwrite in place
    write_json(str(path), {"a": 2})
    assert json.loads(path.read_text()) == {"a": 2}
    leftovers = [p for p in os.listdir(tmp_path / "sub") if p != "report.json"]
    assert leftovers == []


def test_write_csv(tmp_path):
    path = tmp_path / "rows.csv"
    write_csv(str(path), ["a", "b"], [[1, 2], [3, 4]])
    assert path.read_text() == "a,b\n1,2\n3,4\n"


def test_pair_payload_counts_round_trip():
    result = run_coincidence(make_run("malus-probabilistic", n_events=5_000))
    payload = pair_payload(result)
    assert payload["counts"] == result.counts()
    assert payload["probabilities"]["joint"]["value"] == result.p_joint.value
    json.dumps(payload)  # must be serializable


def test_quad_payload_structure():
    result = run_quad(make_run("malus-probabilistic", n_events=5_000),
                      SettingsQuad(*CANONICAL_QUAD))
    payload = quad_payload(result)
    assert set(payload["pairs"]) == {"ab", "abp", "apb", "apbp"}
    stats = payload["inequalities"]["statistics"]
    assert set(stats) == {"s-joint", "s-equal", "s-corr", "ch-standard", "ch-unprimed"}
    assert stats["s-corr"]["value"] == pytest.approx(2 * stats["s-equal"]["value"] - 2)
    json.dumps(payload)


def test_report_document_embeds_reloadable_config():
    cfg = loads(
        "model:\n  both:\n    type: malus-probabilistic\n"
        "run:\n  events: 123\n  seed: 5\n"
        "settings:\n  pair:\n    alpha: '0 rad'\n    beta: '0.7853981633974483 rad'\n"
    )
    document = report_document("run-pair", cfg.to_mapping(), "numpy", {"x": 1})
    assert document["schema"] == "bellmc/run-pair/1"
    text = json.dumps(document)
    reloaded = from_mapping(json.loads(text)["config"])
    assert reloaded == cfg


def test_scan_rows_and_payload():
    result = maximize_settings(
        make_run("malus-probabilistic", n_events=10),
        statistic="s-equal", grid_step=math.pi / 4, exact=True,
    )
    payload = scan_payload(result)
    assert payload["statistic"] == "s-equal"
    assert payload["evaluations"] <= payload["budget"]
    rows = list(scan_rows(result))
    assert len(rows) == len(result.rows)
    assert len(rows[0]) == len(SCAN_CSV_HEADER)
    # repr-formatted floats parse back exactly
    assert float(rows[0][4]) == result.rows[0].value
    json.dumps(payload)


def test_hist_rows_cover_grid():
    freq = np.array([[0.25, 0.25], [0.5, 0.0]])
    xe = np.array([-0.5, 0.0, 0.5])
    ye = np.array([-0.5, 0.0, 0.5])
    rows = list(hist_rows(freq, xe, ye))
    assert len(rows) == 4
    assert len(rows[0]) == len(HIST_CSV_HEADER)
    assert [float(v) for v in rows[0]] == [-0.25, -0.25, 0.25]
    assert [float(v) for v in rows[2]] == [0.25, -0.25, 0.5]
