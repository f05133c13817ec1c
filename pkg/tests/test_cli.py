import json
from pathlib import Path

import pytest

from oacspectra.cli import main


def run(tmp_path, *argv):
    return main(["--out", str(tmp_path), *argv])


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def test_encode_command(tmp_path, capsys):
    assert run(tmp_path, "encode", "--n", "4", "--r", "0.5", "--word", "0001") == 0
    out = capsys.readouterr().out
    assert "m=1" in out
    header, rows = read_csv(tmp_path / "encode.csv")
    assert header == ["word", "l", "ell", "m"]
    assert rows[0][0] == "0001" and rows[0][3] == "1"


def test_partition_command(tmp_path):
    assert run(tmp_path, "partition", "--n", "4", "--r", "0.5") == 0
    header, rows = read_csv(tmp_path / "partition.csv")
    assert header == ["m", "word"]
    assert len(rows) == 16
    assert ["1", "0011"] in rows and ["0", "0000"] in rows


def test_ccs_command_modes(tmp_path):
    assert run(tmp_path, "ccs", "--r", "0.5", "--bins", "256") == 0
    header, rows = read_csv(tmp_path / "ccs.csv")
    assert header == ["u", "f"] and len(rows) == 256
    assert run(tmp_path, "ccs", "--r", "0.5", "--mode", "empirical", "--n", "12", "--bins", "128") == 0
    assert run(tmp_path, "ccs", "--r", "0.5", "--mode", "backward", "--n", "8", "--bins", "128") == 0


def test_hds_command_fast(tmp_path):
    assert run(tmp_path, "hds", "--n", "20", "--r", "0.5", "--method", "fast", "--dmin", "15") == 0
    header, rows = read_csv(tmp_path / "hds.csv")
    assert header == ["d", "psi", "method"]
    last = {int(r[0]): float(r[1]) for r in rows}
    assert last[20] == pytest.approx(0.0017, abs=5e-5)


def test_hds_command_mixed_small(tmp_path):
    assert run(tmp_path, "hds", "--n", "8", "--r", "0.5", "--method", "mixed") == 0
    _, rows = read_csv(tmp_path / "hds.csv")
    methods = {r[2] for r in rows}
    assert methods == {"soft", "binomial", "fast"}


def test_shift_dist_command(tmp_path):
    code = run(
        tmp_path, "shift-dist", "--n", "10", "--r", "0.5", "--d", "10",
        "--j", "1,2,3,4,5,6,7,8,9,10", "--theory", "full",
    )
    assert code == 0
    header, rows = read_csv(tmp_path / "shift-dist.csv")
    assert header == ["w", "fW", "scope"]
    scopes = {r[2] for r in rows}
    assert scopes == {"exp", "th-full"}


def test_psi3_command(tmp_path, capsys):
    assert run(tmp_path, "psi3", "--alpha", "x^2-x-1", "--n", "9") == 0
    out = capsys.readouterr().out
    assert "(1, 1)" in out and "psi3(n=9) = 2" in out


def test_psi_closed_sweep(tmp_path):
    assert run(tmp_path, "psi-closed", "--rmin", "0.6", "--rmax", "1.0", "--steps", "5") == 0
    header, rows = read_csv(tmp_path / "psi-closed.csv")
    assert header == ["r", "psi1", "psi2", "J1", "J21", "J22"]
    assert len(rows) == 5
    assert float(rows[-1][1]) == 0.0  # psi1(1) = 0


def test_budget_exit_code(tmp_path):
    code = run(
        tmp_path, "hds", "--n", "20", "--r", "0.5", "--method", "soft",
        "--dmin", "10", "--dmax", "10", "--budget", "1000",
    )
    assert code == 3


def test_usage_exit_code(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["--out", str(tmp_path), "hds", "--n", "8"])  # missing rate
    assert exc.value.code == 2


def test_manifest_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["--out", str(out), "ccs", "--r", "0.5", "--bins", "128"]) == 0
    ma = json.loads((a / "ccs.manifest.json").read_text())
    mb = json.loads((b / "ccs.manifest.json").read_text())
    assert ma["outputs"] == mb["outputs"]
    assert (a / "ccs.csv").read_bytes() == (b / "ccs.csv").read_bytes()


def test_reproduce_psi12(tmp_path):
    assert run(tmp_path, "reproduce", "psi12-curves") == 0
    assert (tmp_path / "psi12-curves.csv").exists()
    assert (tmp_path / "psi12-curves.png").exists()
    manifest = json.loads((tmp_path / "reproduce-psi12-curves.manifest.json").read_text())
    assert "psi12-curves.csv" in manifest["outputs"]


def test_reproduce_shift_dist_n1(tmp_path):
    assert run(tmp_path, "reproduce", "shift-dist-n1", "--no-plot") == 0
    header, rows = read_csv(tmp_path / "shift-dist-n1.csv")
    scopes = {r[2] for r in rows}
    assert scopes == {"exp-k1", "th-k1", "exp-k2", "th-k2"}
    assert not (tmp_path / "shift-dist-n1.png").exists()
