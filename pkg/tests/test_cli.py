"""Driver contract: determinism, worker invariance, exit codes, documents."""

import io
import json
import subprocess
import sys
from contextlib import redirect_stdout
from importlib import resources

import jsonschema
import pytest

from lcsparse.cli import main

# Small-parameter invocations covering every subcommand.
SMALL_RUNS = {
    "sample": ["sample", "--N", "4", "--n", "2", "--seed", "1"],
    "isotropy": ["isotropy", "--N", "4", "--trials", "2000"],
    "tails-paouris": ["tails-paouris", "--N", "8", "--trials", "2000",
                      "--s-grid", "1,2"],
    "tails-proj": ["tails-proj", "--N", "8", "--m", "2", "--trials", "2000",
                   "--t-grid", "1,2"],
    "tails-order": ["tails-order", "--N", "8", "--ell", "2", "--trials",
                    "2000", "--t-grid", "1,2"],
    "tails-count": ["tails-count", "--N", "8", "--t", "5", "--trials", "2000"],
    "tails-weighted": ["tails-weighted", "--N", "8", "--weights", "0.6,0.3",
                       "--m", "2", "--ell", "1", "--trials", "500",
                       "--t-grid", "1,2", "--directions", "8"],
    "tails-akm": ["tails-akm", "--N", "6", "--n", "4", "--k", "2", "--m", "2",
                  "--trials", "40", "--t-grid", "0.5,1"],
    "kls-rate": ["kls-rate", "--N", "4", "--n-grid", "8,16", "--trials", "30"],
    "akm": ["akm", "--n", "4", "--N", "5", "--k", "2", "--m", "2"],
    "delta": ["delta", "--n", "4", "--N", "5", "--m", "2"],
    "thresholds": ["thresholds", "--n", "64", "--N", "256", "--m", "8",
                   "--k", "4", "--t", "2", "--b", "0.5"],
    "net-audit": ["net-audit", "--k", "3", "--m", "9", "--n", "20",
                  "--trials", "200"],
    "rip-cert": ["rip-cert", "--n", "6", "--N", "8", "--m", "2",
                 "--replicas", "3"],
    "rip-admissible": ["rip-admissible", "--n", "256", "--N", "1024"],
    "recover": ["recover", "--n", "16", "--N", "32", "--s", "2",
                "--trials", "5"],
    "phase": ["phase", "--n", "12", "--N", "24", "--s-grid", "1,2",
              "--trials", "4"],
}


def run_cli(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def load_schema(name):
    text = resources.files("lcsparse").joinpath(f"schemas/{name}").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(SMALL_RUNS))
def test_subcommand_emits_valid_document(name):
    code, out = run_cli(SMALL_RUNS[name])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("cli_output.schema.json"))
    assert doc["command"] == name
    assert doc["config"]["subcommand"] == name
    assert "workers" not in doc["config"]


@pytest.mark.parametrize("name", sorted(SMALL_RUNS))
def test_subcommand_rerun_is_byte_identical(name):
    _, first = run_cli(SMALL_RUNS[name])
    _, second = run_cli(SMALL_RUNS[name])
    assert first == second


def test_tail_report_validates_against_schema():
    _, out = run_cli(SMALL_RUNS["tails-order"])
    doc = json.loads(out)
    jsonschema.validate(doc["result"], load_schema("tail_report.schema.json"))


def test_phase_document_validates_against_schema():
    _, out = run_cli(SMALL_RUNS["phase"])
    doc = json.loads(out)
    jsonschema.validate(doc["result"], load_schema("phase_diagram.schema.json"))


def test_rip_cert_validates_against_schema():
    _, out = run_cli(SMALL_RUNS["rip-cert"])
    doc = json.loads(out)
    jsonschema.validate(doc["result"], load_schema("rip_certificate.schema.json"))


def test_workers_flag_never_changes_results():
    for name in ("recover", "phase", "kls-rate"):
        base = SMALL_RUNS[name]
        _, one = run_cli(base + ["--workers", "1"])
        _, four = run_cli(base + ["--workers", "4"])
        assert one == four, name


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def test_out_writes_json_csv_png(tmp_path):
    base = tmp_path / "run"
    code, out = run_cli(SMALL_RUNS["tails-order"] + ["--out", str(base)])
    assert code == 0
    assert json.loads((base.parent / "run.json").read_text()) == json.loads(out)
    csv_lines = (base.parent / "run.csv").read_text().splitlines()
    assert csv_lines[0] == "threshold,survival"
    assert len(csv_lines) == 3  # header + two grid points
    assert (base.parent / "run.png").stat().st_size > 0


def test_out_without_curve_writes_json_only(tmp_path):
    base = tmp_path / "iso"
    run_cli(SMALL_RUNS["isotropy"] + ["--out", str(base)])
    assert (tmp_path / "iso.json").exists()
    assert not (tmp_path / "iso.csv").exists()
    assert not (tmp_path / "iso.png").exists()


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------


def test_usage_error_exit_code_from_bad_range():
    code, _ = run_cli(["tails-count", "--N", "16", "--t", "2",
                       "--trials", "100"])
    assert code == 2  # below the admissibility floor -> ValueError


def test_budget_exit_code():
    code, _ = run_cli(["akm", "--n", "10", "--N", "12", "--k", "5", "--m",
                       "6", "--pair-budget", "100"])
    assert code == 3


def test_unknown_flag_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["delta", "--n", "4", "--N", "5", "--m", "2", "--bogus"])
    assert exc.value.code == 2


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "lcsparse.cli", "rip-admissible", "--n", "64",
         "--N", "128"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["command"] == "rip-admissible"
