import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from jackstein import cli, kerov_growth
from jackstein.jack_measure import jack_distribution
from jackstein.partitions import Partition


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--n", 4)
    assert code == 0
    assert out.split() == ["[4]", "[3,1]", "[2,2]", "[2,1,1]", "[1,1,1,1]"]
    code, out, _ = run(capsys, "enumerate", "--n", 3, "--format", "json")
    assert json.loads(out) == ["[3]", "[2,1]", "[1,1,1]"]


def test_measure_csv(capsys):
    code, out, _ = run(capsys, "measure", "--n", 6, "--alpha", 2, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 11
    assert sum(Fraction(int(r["prob_num"]), int(r["prob_den"])) for r in rows) == 1


def test_measure_json_round_trip(capsys):
    code, out, _ = run(capsys, "measure", "--n", 5, "--alpha", "5/3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    law = jack_distribution(5, Fraction(5, 3))
    assert doc["n"] == 5 and Fraction(doc["alpha"]) == Fraction(5, 3)
    parsed = {Partition.parse(e["partition"]): Fraction(e["prob"]) for e in doc["entries"]}
    assert parsed == dict(law.entries)
    assert all(isinstance(e["prob"], str) for e in doc["entries"])


def test_bounds_reports_rhs(capsys, tmp_path):
    manifest = tmp_path / "m.jsonl"
    code, out, _ = run(capsys, "--manifest", manifest, "bounds", "--n", 100, "--alpha", 1)
    assert code == 0
    reports = json.loads(out)
    assert reports[0]["name"] == "uniform_8.2"
    assert reports[0]["rhs"] == pytest.approx(0.82, rel=1e-14)
    assert {"name", "lhs", "rhs", "verdict", "context"} == reports[0].keys()
    assert len(cli.read_manifests(manifest)) == 1


def test_bounds_exact_with_profile(capsys):
    code, out, _ = run(capsys, "bounds", "--n", 8, "--alpha", 2, "--p", 3, "--format", "csv")
    assert code == 0
    names = [r["name"] for r in csv.DictReader(io.StringIO(out))]
    assert "nonuniform_profile" in names and "light_tail_eta" in names


def test_verify_passes_and_writes_manifest(capsys, tmp_path):
    manifest = tmp_path / "m.jsonl"
    code, out, _ = run(capsys, "--manifest", manifest, "verify", "--suite", "all", "--n-max", 6)
    assert code == 0
    summary = json.loads(out)
    assert summary["failed"] == 0 and summary["checks"] > 100
    (entry,) = cli.read_manifests(manifest)
    assert entry["subcommand"] == "verify" and entry["verdict"] == "pass"
    assert entry["parameters"]["alpha_grid"] == "1,2,1/2,5/3"
    assert entry["version"] and entry["timestamp"]


def test_manifest_is_append_only(capsys, tmp_path):
    manifest = tmp_path / "m.jsonl"
    run(capsys, "--manifest", manifest, "verify", "--suite", "partitions", "--n-max", 4)
    first = manifest.read_text()
    run(capsys, "--manifest", manifest, "bounds", "--n", 5, "--alpha", 1)
    run(capsys, "--manifest", manifest, "verify", "--suite", "nonsense")
    text = manifest.read_text()
    assert text.startswith(first)
    assert [m["subcommand"] for m in cli.read_manifests(manifest)] == ["verify", "bounds"]
    code, out, _ = run(capsys, "--manifest", manifest, "report", "--format", "json")
    assert code == 0 and len(json.loads(out)) == 2


def test_parameter_error_still_records_manifest(capsys, tmp_path):
    manifest = tmp_path / "m.jsonl"
    code, _, _ = run(capsys, "--manifest", manifest, "bounds", "--n", 2, "--alpha", 1)
    assert code == 2
    assert cli.read_manifests(manifest)[0]["verdict"] == "error"


def test_corrupted_kernel_exits_one(capsys, monkeypatch):
    original = kerov_growth.psi_prime

    def skewed(nu, corner, alpha):
        return original(nu, corner, alpha) * (Fraction(11, 10) if corner.row == 1 else 1)

    monkeypatch.setattr(kerov_growth, "psi_prime", skewed)
    code, out, _ = run(capsys, "verify", "--suite", "kerov", "--n-max", 5, "--alpha-grid", "2")
    assert code == 1
    summary = json.loads(out)
    assert summary["failed"] > 0 and summary["failures"][0]["verdict"] == "fail"


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["measure", "--n", "4"],
        ["measure", "--n", "4", "--alpha", "-1"],
        ["measure", "--n", "4", "--alpha", "1", "--bogus"],
        ["measure", "--n", "4", "--alpha", "0.5"],
        ["enumerate", "--n", "1000"],
        ["ks", "--n", "4"],
        ["zerobias", "--law", "{not json"],
        ["zerobias", "--law", '{"atoms": [0, 1], "masses": ["1/2", "1/2"]}'],
        ["mcks", "--n", "10", "--alpha", "1", "--num-samples", "10"],
        ["bounds", "--n", "10", "--alpha", "2", "--q", "1"],
    ],
)
def test_usage_and_parameter_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_zerobias_and_ks(capsys, tmp_path):
    law = tmp_path / "law.json"
    law.write_text(json.dumps({"atoms": [-1, 1], "masses": ["1/2", "1/2"]}))
    code, out, _ = run(capsys, "zerobias", "--law", f"@{law}")
    assert code == 0 and all(r["verdict"] == "pass" for r in json.loads(out))
    code, out, _ = run(capsys, "zerobias", "--law", str(law), "--check", "rosenthal", "--p", 4, "--copies", 4)
    assert code == 0 and json.loads(out)[0]["lhs"] == pytest.approx(40 ** 0.25)
    code, out, _ = run(capsys, "zerobias", "--law", str(law), "--check", "kappa", "--p", 10)
    assert code == 0 and len(json.loads(out)) == 3
    code, out, _ = run(capsys, "ks", "--law", str(law))
    assert json.loads(out)["distance"] == pytest.approx(0.3413447460685429486)
    code, out, _ = run(capsys, "ks", "--n", 3, "--alpha", 1)
    assert json.loads(out)["distance"] == pytest.approx(1 / 3)


def test_sample_and_mcks(capsys, tmp_path):
    code, out, _ = run(capsys, "sample", "--n", 30, "--alpha", "1/2", "--num-samples", 200, "--seed", 3, "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 201
    again = run(capsys, "sample", "--n", 30, "--alpha", "1/2", "--num-samples", 200, "--seed", 3, "--format", "csv")[1]
    assert again == out
    dump = tmp_path / "w.csv"
    code, out, _ = run(capsys, "mcks", "--n", 30, "--alpha", 1, "--num-samples", 2000, "--csv-dump", dump)
    assert code == 0
    rep = json.loads(out)
    assert rep["ks"]["method"] == "empirical" and rep["config"]["seed"] == 0
    assert len(dump.read_text().splitlines()) == 2001


def test_max_n_env(capsys, monkeypatch):
    monkeypatch.setenv("JACKSTEIN_MAX_N", "5")
    assert run(capsys, "enumerate", "--n", 6)[0] == 2


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "jackstein.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
