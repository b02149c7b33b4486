import csv
import io
import json
import subprocess
import sys
from importlib import resources

import pytest

from lowtrotter import cli
from lowtrotter.bounds import BoundReport
from lowtrotter.config import (CONFIG_KEYS, WORKERS_ENV, ConfigError, ExperimentConfig,
                               ParseError, ValidationError, load_config, validate)
from lowtrotter.report import COLUMNS, emit_report, load_report

REFERENCE = resources.files("lowtrotter") / "data" / "reference_config.json"
TINY = {"model": {"generator": "tfim", "n": 4}, "schedule": {"name": "strang"},
        "s_grid": [0.001, 0.01], "delta_percentiles": [25]}


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


# --- config ----------------------------------------------------------------------

def test_defaults():
    c = validate({"model": {"generator": "tfim", "n": 4}, "schedule": {"name": "strang"}})
    assert c.delta_percentiles == (25.0, 50.0) and c.slack == 1.25 and c.format == "csv"
    assert c.delta_prime == {"policy": "auto", "theta": 1e-3}
    assert len(c.s_grid) == 8 and c.s_grid[0] == pytest.approx(1e-3)
    assert c.build_model().n_qubits == 4 and c.build_schedule(2).name == "strang"


def test_reference_config_loads():
    c = load_config(REFERENCE)
    assert isinstance(c, ExperimentConfig) and c.seed == 0


def test_unknown_key_named():
    with pytest.raises(ValidationError) as e:
        validate({**TINY, "deltaa": 1})
    assert e.value.field == "deltaa"
    with pytest.raises(ValidationError, match="model.nn: unknown key"):
        validate({**TINY, "model": {"generator": "tfim", "n": 4, "nn": 3}})


def test_field_errors():
    with pytest.raises(ValidationError) as e:
        validate({**TINY, "delta_percentiles": [120]})
    assert e.value.field == "delta_percentiles[0]"
    with pytest.raises(ValidationError, match="schedule"):
        validate({"model": TINY["model"]})
    with pytest.raises(ValidationError):
        validate({**TINY, "format": "xml"})
    with pytest.raises(ValidationError):
        validate({**TINY, "dense_limit": 20})


def test_parse_error_location(tmp_path):
    p = write(tmp_path, '{\n  "model": {"generator": "tfim",\n  }\n}')
    with pytest.raises(ParseError) as e:
        load_config(p)
    assert (e.value.line, e.value.col) == (3, 3)
    assert str(p) in str(e.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


def test_workers_env(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert validate(TINY).workers == 3
    assert validate({**TINY, "workers": 2}).workers == 2
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ValidationError):
        validate(TINY)


# --- reports ---------------------------------------------------------------------

def sample_reports():
    return [BoundReport("m", "strang", 2, 0.1 / 3, -1.2345678901234567, 2.0, 2.5, 1e-7,
                        0.0, 3.3e-8, 1e-3, 2e-6, None),
            BoundReport("m", "strang", 2, 1e-3, 0.5, 1.5, 1.5, 2e-9, 1e-300, 1.7e-9,
                        None, 1e-8, 4.0)]


@pytest.mark.parametrize("fmt,suffix", [("csv", ".csv"), ("json", ".json")])
def test_round_trip_bitwise(tmp_path, fmt, suffix):
    reports = sample_reports()
    path = tmp_path / f"r{suffix}"
    emit_report(reports, fmt, path)
    back = load_report(path)
    assert back == reports
    assert [r.vacuity_flags for r in back] == [r.vacuity_flags for r in reports]


def test_csv_shape():
    text = emit_report(sample_reports(), "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == COLUMNS
    assert all(len(r) == 17 for r in rows)
    assert emit_report([], "csv") == ",".join(COLUMNS) + "\n"


# --- command line ----------------------------------------------------------------

def test_help_lists_config_keys(capsys):
    assert cli.run(["--help"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    for key in CONFIG_KEYS:
        assert key in out
    assert WORKERS_ENV in out


def test_usage_errors(tmp_path, capsys):
    assert cli.run([]) == cli.EXIT_USAGE
    assert cli.run(["analyze"]) == cli.EXIT_USAGE
    assert cli.run(["analyze", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_USAGE
    bad = write(tmp_path, {**TINY, "deltaa": 1})
    assert cli.run(["analyze", "--config", str(bad)]) == cli.EXIT_USAGE
    assert "deltaa" in capsys.readouterr().err
    assert cli.run(["compare", "--orders", "a,b"]) == cli.EXIT_USAGE


def test_dimension_too_large(tmp_path, capsys):
    cfg = write(tmp_path, {**TINY, "model": {"generator": "tfim", "n": 20}})
    assert cli.run(["analyze", "--config", str(cfg)]) == cli.EXIT_USAGE
    assert "20" in capsys.readouterr().err


def test_analyze_writes_report(tmp_path):
    cfg = write(tmp_path, TINY)
    out = tmp_path / "r.csv"
    assert cli.run(["analyze", "--config", str(cfg), "--out", str(out)]) == cli.EXIT_OK
    reports = load_report(out)
    assert reports and all(r.passed for r in reports)
    assert [(r.s, r.delta) for r in reports] == sorted((r.s, r.delta) for r in reports)


def test_workers_do_not_change_output(tmp_path):
    cfg = write(tmp_path, TINY)
    texts = []
    for w in ("1", "4"):
        out = tmp_path / f"w{w}.csv"
        assert cli.run(["analyze", "--config", str(cfg), "--out", str(out), "--workers", w]) == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_compare_and_cost(tmp_path, capsys):
    assert cli.run(["compare", "--orders", "1,2"]) == cli.EXIT_OK
    assert "present" in capsys.readouterr().out
    cfg = write(tmp_path, {**TINY, "T": 0.5, "eps": 1e-3, "cost_orders": [1, 2]})
    out = tmp_path / "cost.json"
    assert cli.run(["cost", "--config", str(cfg), "--out", str(out), "--format", "json"]) == 0
    kinds = {r["kind"] for r in json.loads(out.read_text())}
    assert {"law", "empirical"} <= kinds


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lowtrotter", "compare", "--orders", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("kind")
