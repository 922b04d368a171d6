import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from gp_spectrum.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_kernel_anchors(capsys):
    code, out, _ = run(capsys, "kernel", "--alpha", "1", "--beta", "1", "--z", "1,0", "--z", "0,0")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert abs(float(rows[0]["K_re"]) - 1.0) < 1e-10
    assert abs(float(rows[1]["K_re"]) - math.pi**2 / 6) < 1e-10
    assert out.endswith("\r\n")


def test_kernel_all_quantities_json(capsys):
    code, out, _ = run(capsys, "kernel", "--alpha", "0.5", "--beta", "1", "--z", "10,20",
                       "--which", "K", "--which", "Kprime", "--which", "h",
                       "--which", "asymptotic", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"config", "results", "version"}
    assert [r["which"] for r in doc["results"]] == ["K", "Kprime", "h", "asymptotic"]
    assert doc["results"][3]["err_bound"] is None


@pytest.mark.parametrize("z", ["1", "a,b", "1,2,3", "inf,0"])
def test_malformed_point(capsys, z):
    with pytest.raises(SystemExit) as info:
        main(["kernel", "--alpha", "1", "--beta", "1", "--z", z])
    assert info.value.code == 1


def test_bad_parameters(capsys):
    code, _, err = run(capsys, "kernel", "--alpha", "0.2", "--beta", "0.5", "--z", "1,1")
    assert code == 1
    assert "alpha + beta > 1" in err


def test_pole_reports_numeric_failure(capsys, caplog):
    code, out, err = run(capsys, "kernel", "--alpha", "0.5", "--beta", "1", "--z=-3,0",
                         "--z", "1,0")
    assert code == 2
    assert len(list(csv.DictReader(io.StringIO(out)))) == 1
    assert "pole" in caplog.text


def test_spectrum_range(capsys):
    code, out, _ = run(capsys, "spectrum", "--alpha", "0.5", "--beta", "1",
                       "--n-min", "50", "--n-max", "55")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["n"]) for r in rows] == list(range(50, 56))
    assert all(float(r["residual"]) < 1e-10 and float(r["z_re"]) < 0 for r in rows)
    assert "deviation_half" in rows[0]


def test_spectrum_single_variant_columns(capsys):
    code, out, _ = run(capsys, "spectrum", "--alpha", "1", "--beta", "1", "--n-min", "10",
                       "--n-max", "10", "--variant", "half", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["failures"] == {}
    assert "deviation_half" not in doc["results"][0]


def test_spectrum_inverted_range(capsys):
    code, _, err = run(capsys, "spectrum", "--alpha", "0.5", "--beta", "1",
                       "--n-min", "9", "--n-max", "3")
    assert code == 1 and "n_min <= n_max" in err


def test_verify_needs_both_params(capsys):
    code, _, _ = run(capsys, "verify", "--alpha", "0.5", "--experiment", "sector")
    assert code == 1


def test_verify_sector(capsys):
    code, out, _ = run(capsys, "verify", "--experiment", "sector", "--samples", "500")
    doc = json.loads(out)
    assert code == 0
    assert doc["results"][0]["experiment"] == "sector" and doc["results"][0]["passed"]


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--alpha", "1", "--beta", "1", "--experiment",
                       "zkprime", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "experiment,alpha,beta,passed"


def test_atomic_out(tmp_path, capsys):
    target = tmp_path / "k.csv"
    target.write_text("old")
    code, out, _ = run(capsys, "kernel", "--alpha", "1", "--beta", "1", "--z", "1,0",
                       "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("which,")
    assert [p.name for p in tmp_path.iterdir()] == ["k.csv"]
    umask = os.umask(0)
    os.umask(umask)
    assert os.stat(target).st_mode & 0o777 == 0o666 & ~umask


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gp_spectrum", "--version"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == "0.1.0"
