"""Command line entry points, exit codes, and artifact formats."""

import csv
import json
import os
import subprocess
import sys

import pytest

from toda_darboux.cli import main


def run_json(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def strip_timestamp(payload):
    clean = dict(payload)
    clean.pop("timestamp", None)
    return clean


def test_factorize_defaults_pass(capsys):
    code, payload = run_json(["factorize"], capsys)
    assert code == 0
    assert payload["config"]["p"] == 1 and payload["config"]["n"] == 8
    assert all(r["passed"] for r in payload["reports"])


def test_factorize_gamma_row_count(capsys):
    code, payload = run_json(["factorize", "--p", "2", "--n", "8", "--seed", "7"], capsys)
    assert code == 0
    assert len(payload["gamma_rows"]) == 3  # p + 1 interlaced sequences
    assert len(payload["gamma_rows"][0]) == payload["table"]["columns"]
    labels = {r["label"] for r in payload["reports"]}
    assert "factorization round trip" in labels
    assert "table cross-construction" in labels


def test_factorize_writes_file(tmp_path, capsys):
    out = tmp_path / "run.json"
    code = main(["factorize", "--p", "2", "--seed", "3", "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    payload = json.loads(out.read_text())
    assert "factors" in payload and "table" in payload


def test_transform_from_fresh_factorization(capsys):
    code, payload = run_json(
        ["transform", "--p", "2", "--n", "8", "--seed", "7", "--i", "1"], capsys
    )
    assert code == 0
    assert payload["i"] == 1
    assert payload["reports"][0]["passed"]
    assert payload["matrix"]["p"] == 2


def test_transform_round_trip_via_saved_factors(tmp_path, capsys):
    fpath = tmp_path / "factors.json"
    assert main(["factorize", "--p", "2", "--seed", "5", "--out", str(fpath)]) == 0
    capsys.readouterr()
    code, payload = run_json(["transform", "--factors", str(fpath), "--i", "2"], capsys)
    assert code == 0
    assert payload["reports"][0]["passed"]


def test_transform_index_out_of_range(capsys):
    code, payload = run_json(["transform", "--p", "2", "--i", "5"], capsys)
    assert code == 1
    assert payload["error"] == "ValueError"
    assert "5" in payload["message"]


def test_transform_requires_index():
    with pytest.raises(SystemExit) as err:
        main(["transform", "--p", "2"])
    assert err.value.code == 2


def test_bad_dimensions_produce_error_json(capsys):
    code, payload = run_json(["factorize", "--p", "2", "--n", "1"], capsys)
    assert code == 1
    assert set(payload) == {"error", "message"}


def test_corrupt_factors_file(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    code, payload = run_json(["transform", "--factors", str(bad), "--i", "0"], capsys)
    assert code == 1
    assert payload["error"] == "JSONDecodeError"


def test_evolve_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = main([
        "evolve", "--p", "1", "--n", "6", "--seed", "2", "--dt", "1e-3",
        "--steps", "5", "--lattice", "toda", "--out", str(out),
    ])
    capsys.readouterr()
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "entry_id", "re", "im"]
    body = rows[1:]
    assert len(body) % 6 == 0  # 6 samples share one fixed entry layout
    per = len(body) // 6
    assert body[0][0] == "0.0"
    # every sample block carries the same entry ids in the same order
    ids0 = [r[1] for r in body[:per]]
    ids1 = [r[1] for r in body[per: 2 * per]]
    assert ids0 == ids1
    manifest = json.loads((tmp_path / "traj.csv.manifest.json").read_text())
    assert set(manifest) == {"dt", "steps", "p", "n", "C", "seed"}
    assert manifest["steps"] == 5 and manifest["p"] == 1


def test_evolve_kdv_lattice(tmp_path, capsys):
    out = tmp_path / "gam.csv"
    code = main([
        "evolve", "--p", "2", "--n", "8", "--seed", "4", "--steps", "3",
        "--lattice", "kdv", "--out", str(out),
    ])
    capsys.readouterr()
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[1][1].startswith("gamma[")


def test_evolve_requires_out():
    with pytest.raises(SystemExit) as err:
        main(["evolve", "--p", "1"])
    assert err.value.code == 2


def test_verify_default_configuration_passes(capsys):
    code, payload = run_json(["verify"], capsys)
    assert code == 0
    reports = payload["reports"]
    assert {"path", "kdv", "toda[0]", "toda[1]"} <= set(reports)
    assert all(r["passed"] for r in reports.values())


def test_verify_complex_shift(capsys):
    code, payload = run_json(
        ["verify", "--C-re", "0.02", "--C-im", "0.01", "--steps", "60"], capsys
    )
    assert code == 0
    assert payload["config"]["C"] == [0.02, 0.01]


def test_output_deterministic_modulo_timestamp(capsys):
    _, a = run_json(["factorize", "--p", "2", "--seed", "9"], capsys)
    _, b = run_json(["factorize", "--p", "2", "--seed", "9"], capsys)
    assert strip_timestamp(a) == strip_timestamp(b)


def test_logging_env_routes_to_stderr():
    env = dict(os.environ, TODA_DARBOUX_LOG="INFO")
    proc = subprocess.run(
        [sys.executable, "-m", "toda_darboux.cli", "factorize", "--p", "1", "--seed", "1"],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    json.loads(proc.stdout)  # stdout stays pure JSON
    assert "INFO" in proc.stderr


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["melt"])
    assert err.value.code == 2
