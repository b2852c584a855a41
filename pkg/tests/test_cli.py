import csv
import json
import subprocess
import sys

import pytest
import scipy.io

from avgschwarz.cli import main
from avgschwarz.experiments import CSV_FIELDS

SMALL = ["--n", "12", "--nside", "2"]


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run.json"
    code = main(["run", *SMALL, "--out", str(out), "--residuals", str(tmp_path / "r.csv"),
                 "--spectra", str(tmp_path / "s.csv"), "--coarse-summary", str(tmp_path / "c.json"),
                 "--matrix", str(tmp_path / "A.mtx")])
    assert code == 0
    row = json.loads(out.read_text())
    assert row["converged"] and row["iterations"] > 0 and len(row["config_hash"]) == 12
    assert "iterations" in capsys.readouterr().out
    assert (tmp_path / "r.csv").read_text().startswith("iteration,")
    assert json.loads((tmp_path / "c.json").read_text())["dimension"] == row["coarse_dimension"]
    A = scipy.io.mmread(tmp_path / "A.mtx")
    assert A.shape == (121, 121)


def test_run_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["run", *SMALL, "--fixed", "2", "--out", str(a)])
    main(["run", *SMALL, "--fixed", "2", "--out", str(b)])
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    ra.pop("runtime"), rb.pop("runtime")
    assert ra == rb


def test_table2_csv(tmp_path):
    out = tmp_path / "t2.csv"
    assert main(["table2", *SMALL, "--counts", "0", "2", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == CSV_FIELDS
    assert [r["policy"] for r in rows] == ["fixed=0", "fixed=2"]


def test_table1_from_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sweep": {"N_side": [2], "n": [12], "min_ratio": 6, "variants": ["add"],
                                         "jumps": [[1e2, 1e4]]}, "output": {"csv": str(tmp_path / "t1.csv")}}))
    assert main(["table1", "--config", str(cfg)]) == 0
    assert len((tmp_path / "t1.csv").read_text().splitlines()) == 2


def test_enrichment_outputs(tmp_path):
    assert main(["enrichment", *SMALL, "--continuous", "--out", str(tmp_path / "e.csv")]) == 0
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "k,M_subd,M_layer,layer_constant,config_hash" and len(lines) == 5
    assert main(["enrichment", *SMALL, "--out", str(tmp_path / "e.json")]) == 0
    assert set(json.loads((tmp_path / "e.json").read_text())["totals"]) == {"subd", "layer"}


@pytest.mark.parametrize(
    "argv",
    [["run", "--n", "10", "--nside", "3"], ["run", "--config", "/nonexistent.json"]],
)
def test_errors(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_bad_config_reports_path(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"geometry": {"alpha_c": "big"}}))
    assert main(["run", "--config", str(cfg)]) == 1
    assert "geometry/alpha_c" in capsys.readouterr().err


def test_pipeline_error_names_stage(capsys):
    # channel narrower than h fails in the coefficient stage
    assert main(["run", "--n", "8", "--nside", "2"]) == 1
    assert "stage 'coefficient'" in capsys.readouterr().err


def test_verify_subprocess(tmp_path):
    out = tmp_path / "v.json"
    res = subprocess.run([sys.executable, "-m", "avgschwarz", "verify", "--out", str(out)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stdout + res.stderr
    assert all(c["passed"] for c in json.loads(out.read_text())["checks"])
