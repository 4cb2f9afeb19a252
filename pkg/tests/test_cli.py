import io
import json

import pytest

from delaycert.cli import run
from delaycert.goodwin import build_goodwin
from delaycert.sysio import save_system


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def fields(text):
    return {k.strip(): v.strip() for k, v in (line.split(" : ", 1) for line in text.splitlines()
                                              if " : " in line)}


@pytest.fixture
def goodwin_file(tmp_path):
    sys, nl = build_goodwin(1.0, 0.9)
    path = tmp_path / "g.json"
    save_system(path, sys, nl)
    return str(path)


def test_smalldelay_exit_codes():
    code, out, _ = call("smalldelay", "--n", "2", "--r", "1", "--lambda", "1", "--tau", "0.3")
    assert code == 0
    assert fields(out)["threshold_frequency"].strip().startswith("0.345257761711")
    code, out, _ = call("smalldelay", "--n", "2", "--r", "1", "--lambda", "1", "--tau", "0.36")
    assert code == 1
    assert fields(out)["verdict_rd"].strip() == "true"


def test_missing_system_is_usage_error():
    code, _, err = call("check", "--system", "missing.json", "--mode", "sc")
    assert code == 3 and "missing.json" in err


def test_bad_arguments():
    assert call("check")[0] == 3
    assert call("frobnicate")[0] == 3
    assert call("goodwin", "region", "--tau", "1:2", "--out", "x.csv")[0] == 3


def test_check_modes(goodwin_file, tmp_path):
    code, out, _ = call("check", "--system", goodwin_file, "--mode", "msc")
    assert code == 0 and fields(out)["verdict"].strip() == "Certified"
    code, _, err = call("check", "--system", goodwin_file, "--mode", "sc")
    assert code == 3 and "F(0) = 0" in err
    dest = tmp_path / "cert.json"
    code, out, _ = call("check", "--system", goodwin_file, "--mode", "smith", "--lambda", "2",
                        "--out", str(dest))
    assert code == 1
    data = json.loads(dest.read_text())
    assert data["verdict"] == "Rejected" and data["check"] == "smith"
    code, _, _ = call("check", "--system", goodwin_file, "--mode", "circle", "--k1", "-0.1",
                      "--k2", "0.1")
    assert code == 0


def test_output_is_deterministic(goodwin_file):
    a = call("check", "--system", goodwin_file, "--mode", "msc")
    b = call("check", "--system", goodwin_file, "--mode", "msc")
    assert a == b
    assert "delta" in fields(a[1])


def test_spectrum(goodwin_file):
    code, out, _ = call("spectrum", "--system", goodwin_file, "--nu", "0")
    assert code == 0 and fields(out)["j"].strip() == "0"


def test_simulate_csv(goodwin_file, tmp_path):
    dest = tmp_path / "trace.csv"
    code, out, _ = call("simulate", "--system", goodwin_file, "--history", "const:1,0.5,0.2",
                        "--tend", "2", "--step", "0.1", "--out", str(dest), "--figure")
    assert code == 0
    lines = dest.read_text().splitlines()
    assert lines[0] == "t,x_1,x_2,x_3"
    assert len(lines) == 22
    assert lines[1] == "0,1,0.5,0.20000000000000001"
    assert (tmp_path / "trace.png").stat().st_size > 0


def test_goodwin_region_and_point(tmp_path):
    dest = tmp_path / "region.csv"
    code, out, _ = call("--threads", "1", "goodwin", "region", "--tau", "0.05:4:2",
                        "--lambda", "0.9:1:2", "--rho-grid", "8", "--out", str(dest),
                        "--figure", str(tmp_path / "region.svg"))
    assert code == 0
    assert dest.read_text().splitlines()[0] == "tau,lambda,certified,rho_star,margin,reason"
    assert (tmp_path / "region.svg").read_text().lstrip().startswith("<?xml")
    code, out, _ = call("goodwin", "point", "--tau", "0.05", "--lambda", "0.9")
    assert code == 0 and fields(out)["certified"].strip() == "true"
    code, _, _ = call("goodwin", "point", "--tau", "4", "--lambda", "0.05")
    assert code == 1
