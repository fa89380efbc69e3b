import csv
import io
import subprocess
import sys
import time

import numpy as np
import pytest

from lrmimo.cli import main
from lrmimo.lattice import read_basis


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _basis_file(tmp_path, text, name="b.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_reduce_identity(tmp_path, capsys):
    p = _basis_file(tmp_path, "2 2\n1 0\n0 1\n")
    code, out, err = run(["reduce", p], capsys)
    assert code == 0
    assert "norm_b1_sq=1.0" in err and "gram_det=1.0" in err
    back = tmp_path / "back.txt"
    back.write_text(out)
    np.testing.assert_array_equal(read_basis(back).vectors, np.eye(2))


def test_reduce_example_to_file(tmp_path, capsys):
    p = _basis_file(tmp_path, "# a comment\n2 2\n1 1\n\n0 2\n")
    o = tmp_path / "out.txt"
    code, out, err = run(["reduce", p, "--method", "bkz", "--beta", "2", "-o", str(o)], capsys)
    assert code == 0 and out == ""
    np.testing.assert_array_equal(read_basis(o).vectors, [[1, 1], [-1, 1]])
    assert "# method=bkz" in o.read_text()
    assert "norm_b1_sq=2.0 gram_det=4.0" in err


def test_reduce_malformed_line(tmp_path, capsys):
    p = _basis_file(tmp_path, "2 2\n1 0\n1 x\n")
    code, _, err = run(["reduce", p], capsys)
    assert code == 1
    assert "line 3" in err


def test_reduce_rank_deficient(tmp_path, capsys):
    p = _basis_file(tmp_path, "2 2\n1 2\n2 4\n")
    code, _, err = run(["reduce", p], capsys)
    assert code == 1 and "index 1" in err


def test_reduce_guard(tmp_path, capsys):
    p = _basis_file(tmp_path, "13 13\n" + "\n".join(" ".join("1" if i == j else "0" for j in range(13)) for i in range(13)))
    code, _, err = run(["reduce", p, "--method", "kz"], capsys)
    assert code == 2 and "refused" in err


def test_bound_tables(capsys):
    code, out, _ = run(["bound", "--m", "2"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["bound"]) == pytest.approx(20 / 9, rel=1e-12)

    code, out, _ = run(["bound", "--m", "1"], capsys)
    assert code == 0 and list(csv.DictReader(io.StringIO(out)))[0]["bound"] == "1.0"

    code, out, _ = run(["bound", "--m", "4"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["beta"]) for r in rows] == [2, 3, 4]
    assert float(rows[0]["bound"]) == pytest.approx(7168 / 729, rel=1e-12)

    code, _, err = run(["bound", "--m", "3", "--beta", "5"], capsys)
    assert code == 1 and "beta" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["reduce", "x", "--method", "hkz"])
    assert e.value.code == 1


def test_missing_seed(capsys):
    code, _, err = run(["proximity", "--m", "3", "--trials", "2"], capsys)
    assert code == 1 and "master_seed required" in err
    code, _, err = run(["ber", "--trials", "2"], capsys)
    assert code == 1 and "master_seed required" in err


def test_proximity_small_run(tmp_path, capsys):
    t0 = time.perf_counter()
    code, out, err = run(["proximity", "--m", "3", "--beta", "2", "--trials", "10", "--master-seed", "1"], capsys)
    assert time.perf_counter() - t0 < 1.0
    assert code == 0
    assert out.startswith("# m=3\n")
    assert "# master_seed=1" in err
    rows = list(csv.DictReader(io.StringIO("".join(l for l in out.splitlines(True) if not l.startswith("#")))))
    assert len(rows) == 3 and all(r["violated"] == "0" for r in rows)


def test_proximity_guard(capsys):
    code, _, err = run(["proximity", "--m", "9", "--beta", "2", "--trials", "1", "--master-seed", "1"], capsys)
    assert code == 2


def test_proximity_config_file(tmp_path, capsys):
    cfg = _basis_file(tmp_path, "m=2:3\nbeta=2\ntrials=5\nmaster_seed=3\nensemble=gaussian,integer\n", "p.cfg")
    code, out, _ = run(["proximity", "--config", cfg, "--trials", "4"], capsys)
    assert code == 0
    assert "# trials=4" in out
    assert out.count("\ngaussian") == 0  # ensemble is a column, not a row start
    assert len([l for l in out.splitlines() if l and not l.startswith("#")]) == 1 + 2 * (2 + 3)


def test_ber_small_run(capsys):
    argv = ["ber", "--n-tx", "2", "--n-rx", "2", "--detectors", "ml,sic", "--snr-db", "10,inf",
            "--trials", "20", "--master-seed", "2", "--beta", "2"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("".join(l for l in out.splitlines(True) if not l.startswith("#")))))
    assert [(r["detector"], r["snr_db"]) for r in rows] == [("ml", "10.0"), ("ml", "inf"), ("sic", "10.0"), ("sic", "inf")]
    assert rows[1]["vec_errors"] == "0"


def test_reruns_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        o = tmp_path / f"r{k}.csv"
        cmd = [sys.executable, "-m", "lrmimo", "proximity", "--m", "3", "--beta", "2,3", "--trials", "5",
               "--master-seed", "11", "-o", str(o)]
        subprocess.run(cmd, check=True, capture_output=True)
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]
