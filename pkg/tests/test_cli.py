"""End-to-end command runs on the worked example fixtures."""

import json

import numpy as np
import pytest

from setdecode.cli import REPORT_COLUMNS, main


@pytest.fixture
def s3_files(tmp_path):
    sets = tmp_path / "sets.gmt"
    sets.write_text("w1\tfirst\tp1\tp2\n"
                    "w2\tsecond\tp2\tp3\n"
                    "w3\tthird\tp1\tp2\tp3\n")
    genes = tmp_path / "genes.txt"
    genes.write_text("p1\np2\n")
    return sets, genes


def read_report(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split("\t")
    assert header == list(REPORT_COLUMNS)
    rows = {}
    for line in lines[1:]:
        cells = line.split("\t")
        rows[cells[0]] = dict(zip(header[1:], cells[1:]))
    return rows


def test_map_command(tmp_path, s3_files, capsys):
    sets, genes = s3_files
    out = tmp_path / "out"
    rc = main(["map", "--sets", str(sets), "--genes", str(genes),
               "--out", str(out), "--pi", "0.25"])
    assert rc == 0
    rows = read_report(out / "report.tsv")
    assert rows["w1"]["in_map"] == "1"
    assert rows["w2"]["in_map"] == "0"
    assert rows["w1"]["size"] == "2" and rows["w1"]["n_listed"] == "2"
    assert rows["w3"]["p_constrained"] == "NA"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "map"
    assert manifest["active_wholes"] == ["w1"]
    assert manifest["coverage"] == 2 and manifest["mis_coverage"] == 0
    assert abs(manifest["objective_value"] - np.log(27)) < 1e-9
    assert "setdecode" in manifest["versions"]
    text = capsys.readouterr().out
    assert "active wholes (1): w1" in text


def test_map_sequential_flag(tmp_path, s3_files):
    sets, genes = s3_files
    out = tmp_path / "out"
    rc = main(["map", "--sets", str(sets), "--genes", str(genes),
               "--out", str(out), "--pi", "0.25",
               "--sequential-start", "2"])
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["active_wholes"] == ["w1"]


def test_sample_command(tmp_path, s3_files):
    sets, genes = s3_files
    out = tmp_path / "out"
    rc = main(["sample", "--sets", str(sets), "--genes", str(genes),
               "--out", str(out), "--pi", "0.25",
               "--sweeps", "400000", "--burnin", "50000", "--seed", "7"])
    assert rc == 0
    rows = read_report(out / "report.tsv")
    assert abs(float(rows["w1"]["p_constrained"]) - 82 / 86) < 0.02
    assert rows["w1"]["p_unconstrained"] == "NA"
    manifest = json.loads((out / "manifest.json").read_text())
    assert 0 < manifest["acceptance_rate"] < 1
    assert manifest["kept_count"] > 0


def test_sample_unconstrained_column(tmp_path, s3_files):
    sets, genes = s3_files
    out = tmp_path / "out"
    rc = main(["sample", "--sets", str(sets), "--genes", str(genes),
               "--out", str(out), "--pi", "0.25", "--mode",
               "unconstrained", "--sweeps", "100000"])
    assert rc == 0
    rows = read_report(out / "report.tsv")
    assert rows["w1"]["p_constrained"] == "NA"
    assert rows["w1"]["p_unconstrained"] != "NA"


def test_fisher_command(tmp_path, s3_files):
    sets, genes = s3_files
    out = tmp_path / "out"
    rc = main(["fisher", "--sets", str(sets), "--genes", str(genes),
               "--out", str(out)])
    assert rc == 0
    rows = read_report(out / "report.tsv")
    assert abs(float(rows["w1"]["fisher_p_raw"]) - 1 / 3) < 1e-6
    assert float(rows["w3"]["fisher_p_raw"]) == 1.0
    assert float(rows["w1"]["fisher_p_adj"]) >= 1 / 3 - 1e-12
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["universe_size"] == 3
    assert manifest["listed_total"] == 2


def test_violations_command(tmp_path, s3_files):
    sets, _ = s3_files
    out = tmp_path / "out"
    rc = main(["violations", "--sets", str(sets), "--out", str(out),
               "--pi-grid", "0.25,0.5"])
    assert rc == 0
    lines = (out / "violations.tsv").read_text().strip().split("\n")
    assert lines[0] == "pi\texpected_violations\tse\tmethod"
    vals = {line.split("\t")[0]: float(line.split("\t")[1])
            for line in lines[1:]}
    assert abs(vals["0.5"] - 0.625) < 1e-12
    assert abs(vals["0.25"] - 0.421875) < 1e-12


def test_oracle_command(tmp_path, s3_files):
    sets, genes = s3_files
    out = tmp_path / "out"
    rc = main(["oracle", "--sets", str(sets), "--genes", str(genes),
               "--out", str(out), "--pi", "0.25"])
    assert rc == 0
    lines = (out / "oracle.tsv").read_text().strip().split("\n")
    assert lines[0] == "set_id\tmarginal\tin_map"
    marg = {line.split("\t")[0]: float(line.split("\t")[1])
            for line in lines[1:]}
    assert abs(marg["w1"] - 82 / 86) < 1e-6
    assert abs(marg["w2"] - 2 / 86) < 1e-6
    assert abs(marg["w3"] - 1 / 86) < 1e-6
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_states"] == 4
    assert manifest["map_wholes"] == ["w1"]


def test_simulate_command_smoke(tmp_path):
    out = tmp_path / "out"
    rc = main(["simulate", "--experiment", "1", "--replicates", "1",
               "--seed", "3", "--sweeps", "50000", "--burnin", "5000",
               "--out", str(out)])
    assert rc == 0
    methods = (out / "methods.tsv").read_text().strip().split("\n")
    assert methods[0].startswith("method\tsensitivity")
    assert len(methods) == 6  # five methods
    bench = json.loads((out / "benchmark.json").read_text())
    assert "map_ilp" in bench["methods"]
    roc = (out / "roc.tsv").read_text().strip().split("\n")
    assert roc[0] == "method\tthreshold\ttpr\tfpr\tprecision"
    assert len(roc) > 10


def test_errors_exit_nonzero(tmp_path, s3_files, capsys):
    sets, genes = s3_files
    rc = main(["map", "--sets", str(tmp_path / "absent.gmt"),
               "--genes", str(genes), "--out", str(tmp_path)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err
    # over-filtered system
    rc = main(["map", "--sets", str(sets), "--genes", str(genes),
               "--out", str(tmp_path), "--min-size", "10"])
    assert rc == 1
