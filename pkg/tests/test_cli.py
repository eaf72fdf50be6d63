import csv
import json

import pytest

from cbim.cli import main, parse_trace, TraceError
from cbim.config import ConfigValidationError, RunConfig, load_config


@pytest.fixture
def cfg_path(tmp_path):
    def write(doc):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(doc))
        return p
    return write


def test_empty_document_gives_defaults(cfg_path):
    cfg = load_config(cfg_path({}))
    assert cfg == RunConfig()
    assert (cfg.channels_per_cell, cfg.f_c, cfg.p_tx, cfg.cell_radius) == (120, 1800.0, 1500.0, 1.0)
    assert (cfg.l_ow, cfg.gamma_db, cfg.h_b, cfg.h_m) == (10.0, 9.0, 100.0, 5.0)


def test_override_single_field(cfg_path):
    cfg = load_config(cfg_path({"gamma_db": 6}))
    assert cfg.gamma_db == 6
    assert cfg.f_c == 1800.0 and cfg.channels_per_cell == 120


def test_aliases_and_nested_sections(cfg_path):
    cfg = load_config(cfg_path({"A_Th": 5, "sweep": {"d_step": 0.05}, "environment": {"L_ow": 12}}))
    assert cfg.policy.first_threshold == 5 and cfg.policy.second_threshold == 30
    assert cfg.d_step == 0.05 and cfg.l_ow == 12


@pytest.mark.parametrize("doc, name", [
    ({"d_step": 0}, "d_step"),
    ({"d_start": -1}, "d_start"),
    ({"d_stop": 1.5}, "d_stop"),
    ({"channels_per_cell": 0}, "channels_per_cell"),
    ({"inner_ratio": 1.0}, "inner_ratio"),
    ({"scenarios": ["Nope"]}, "scenarios"),
    ({"bogus": 1}, "bogus"),
])
def test_validation_names_field(cfg_path, doc, name):
    with pytest.raises(ConfigValidationError) as info:
        load_config(cfg_path(doc))
    assert info.value.field == name


def test_cli_reports_bad_config(cfg_path, capsys):
    assert main(["run", "--config", str(cfg_path({"d_step": 0}))]) != 0
    assert "d_step" in capsys.readouterr().err


def test_cli_missing_and_malformed_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) != 0
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) != 0


def test_run_writes_metrics(cfg_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_path({})), "--out-dir", str(out)]) == 0
    rows = list(csv.reader((out / "metrics.csv").open()))
    assert rows[0] == ["distance_km", "scenario", "sinr_db", "capacity_bps_hz", "outage_prob"]
    assert len(rows) == 31
    for row in rows[1:]:
        for cell in (row[0], row[2], row[3], row[4]):
            assert len(cell.split(".")[1]) == 6
    text = capsys.readouterr().out
    for name in ("SchemeRealTime", "SchemeNonRealTime", "NoManagementBaseline"):
        assert name in text


def test_run_plots(cfg_path, tmp_path):
    pytest.importorskip("matplotlib")
    out = tmp_path / "plots"
    assert main(["run", "--config", str(cfg_path({})), "--out-dir", str(out), "--plots"]) == 0
    for name in ("sinr.svg", "capacity.svg", "outage.svg"):
        assert (out / name).read_text().lstrip().startswith("<?xml")


def test_run_unwritable_output(cfg_path, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--config", str(cfg_path({})), "--out-dir", str(blocker / "sub")]) != 0


def test_validate_prints_defaults(capsys):
    assert main(["--validate"]) == 0
    out = capsys.readouterr().out
    for fragment in ("120", "1800 MHz", "1.50 kW", "1 km", "10 dB", "9 dB", "100 m", "5 m"):
        assert fragment in out


def _replay(tmp_path, cfg_path, lines, doc=None):
    trace = tmp_path / "trace.txt"
    trace.write_text("\n".join(lines) + "\n")
    out = tmp_path / "rep"
    rc = main(["replay", "--config", str(cfg_path(doc or {})), "--trace", str(trace),
               "--out-dir", str(out)])
    rows = list(csv.DictReader((out / "decisions.csv").open())) if (out / "decisions.csv").exists() else []
    return rc, rows


def test_replay_single_admit(tmp_path, cfg_path, capsys):
    rc, rows = _replay(tmp_path, cfg_path, ["1 admit RT 0.2 0.0"])
    assert rc == 0
    assert rows[0]["outcome"] == "AssignedOriginal" and rows[0]["channel_id"] == "0"
    assert capsys.readouterr().out.strip().splitlines()[-1] == "conservation check: pass"


def test_replay_swap(tmp_path, cfg_path):
    lines = [f"{i} admit NRT 0.6 0.0" for i in range(1, 5)] + ["5 admit RT 0.2 0.1"]
    rc, rows = _replay(tmp_path, cfg_path, lines, {"channels_per_cell": 4, "A_Th": 2, "B_Th": 2})
    assert rc == 0
    assert rows[-1]["outcome"] == "SwappedOntoOriginal"
    assert rows[-1]["displaced_request"] == "1"
    assert int(rows[-1]["side_effect_count"]) > 0


def test_replay_release_then_unknown(tmp_path, cfg_path, capsys):
    rc, rows = _replay(tmp_path, cfg_path, ["1 admit NRT 0.1 0.1", "2 release 1"])
    assert rc == 0 and rows[1]["outcome"] == "Released"
    rc, _ = _replay(tmp_path, cfg_path, ["1 release 999"])
    assert rc != 0
    assert "999" in capsys.readouterr().err


def test_replay_malformed_line(tmp_path, cfg_path, capsys):
    rc, _ = _replay(tmp_path, cfg_path, ["1 admit RT 0.1 0.1", "2 admit XX 0 0"])
    assert rc != 0
    assert "line 2" in capsys.readouterr().err


def test_parse_trace_comments_and_errors():
    events = parse_trace("# header\n1 admit RT 0.1 0.2  # note\n\n2 release 1\n")
    assert [e.kind for e in events] == ["admit", "release"]
    with pytest.raises(TraceError) as info:
        parse_trace("1 admit RT 0.1\n")
    assert info.value.line_no == 1
    with pytest.raises(TraceError):
        parse_trace("x release 1\n")
