import json
import subprocess
import sys

import numpy as np
import pytest

from jelk.cli import main, run_tests
from jelk.data import pooled_from_arrays
from jelk.errors import ValidationError
from jelk.io import display_p, read_banknote, read_dataset, result_record, write_dataset
from jelk.jel import TestResult, jel_test


@pytest.fixture
def data_file(tmp_path, rng):
    pooled = pooled_from_arrays(
        [rng.normal(size=(30, 2)), rng.normal(size=(35, 2)) * 1.8, rng.normal(size=(25, 2))],
        labels=["a", "b", "c"],
    )
    path = tmp_path / "d.csv"
    write_dataset(path, pooled, names=["u", "v"])
    return path, pooled


def test_round_trip_identical_statistics(data_file):
    path, pooled = data_file
    back = read_dataset(path).to_pooled()
    assert np.array_equal(back.points, pooled.points)
    for m in ("JEL-S", "ET", "KW", "AD"):
        a = run_tests(pooled, [m], 0.05)[0]["statistic"]
        b = run_tests(back, [m], 0.05)[0]["statistic"]
        assert abs(a - b) <= 1e-12


def test_tab_delimited_and_label_index(tmp_path):
    path = tmp_path / "t.tsv"
    rows = ["g\tx"] + [f"{k}\t{v}" for k, v in [(1, 0.1), (1, 0.5), (1, 0.9), (2, 1.1), (2, 3.0), (2, 2.2)]]
    path.write_text("\n".join(rows) + "\n")
    ds = read_dataset(path, label_col=0)
    assert ds.names == ("x",)
    assert list(ds.labels) == ["1", "1", "1", "2", "2", "2"]


def test_parse_errors_have_line_numbers(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,label\n1,2,a\n3,oops,a\n")
    with pytest.raises(ValidationError, match="line 3"):
        read_dataset(bad)
    short = tmp_path / "short.csv"
    short.write_text("x,y,label\n1,2,a\n3,a\n")
    with pytest.raises(ValidationError, match="line 3"):
        read_dataset(short)


def test_banknote_format(tmp_path, rng):
    path = tmp_path / "bn.txt"
    lines = [",".join(f"{v:.5f}" for v in rng.normal(size=4)) + f",{i % 2}" for i in range(20)]
    path.write_text("\n".join(lines) + "\n")
    ds = read_banknote(path)
    assert ds.names == ("VW", "SW", "KW", "EI")
    assert ds.values.shape == (20, 4)
    assert ds.select(["EI"])[1].shape == (20, 1)


def test_p_value_never_zero():
    rec = result_record(TestResult(1e4, 2, 0.0, 0.05, True))
    assert rec["p_value"] > 0
    assert rec["p_display"] == "< 1e-15"
    assert display_p(0.4748) == "0.4748"


def test_cli_test_exit_zero_and_json(data_file, tmp_path, capsys):
    path, pooled = data_file
    out = tmp_path / "r.csv"
    assert main(["test", str(path), "--method", "all", "--json", "--out", str(out)]) == 0
    records = json.loads(capsys.readouterr().out)
    assert [r["method"] for r in records] == ["JEL-S", "ET", "KW", "AD"]
    fields = {"method", "variables", "statistic", "df", "p_value", "p_display", "alpha", "reject", "details"}
    assert all(set(r) == fields for r in records)
    assert records[0]["statistic"] == pytest.approx(jel_test(pooled).statistic, abs=1e-12)
    assert records[0]["details"]["converged"] is True
    assert out.read_text().splitlines()[0].startswith("method,variables")


def test_cli_columns(data_file, capsys):
    path, _ = data_file
    assert main(["test", str(path), "--cols", "v"]) == 0
    assert "[v]" in capsys.readouterr().out


def test_cli_group_of_two(tmp_path, capsys):
    path = tmp_path / "small.csv"
    path.write_text("x,label\n1,a\n2,a\n3,a\n4,b\n5,b\n")
    assert main(["test", str(path)]) == 2
    assert "'b'" in capsys.readouterr().err


def test_cli_unknown_column(data_file):
    path, _ = data_file
    assert main(["test", str(path), "--cols", "nope"]) == 2


def test_cli_solver_failure_exit_code(tmp_path, capsys, monkeypatch):
    from jelk import cli
    from jelk.errors import ConvergenceError

    def fail(*a, **k):
        raise ConvergenceError("stuck", bracket=(0, 1), diagnostics={"theta": 0.5})

    monkeypatch.setattr(cli, "jel_test", fail)
    path = tmp_path / "d.csv"
    path.write_text("x,label\n" + "".join(f"{i},{i % 2}\n" for i in range(10)))
    assert main(["test", str(path)]) == 3
    assert "theta" in capsys.readouterr().err


def test_cli_seed_env(data_file, capsys, monkeypatch):
    path, _ = data_file
    monkeypatch.setenv("JELK_SEED", "11")
    import importlib

    from jelk import cli

    importlib.reload(cli)
    cli.main(["test", str(path), "--method", "energy", "--json"])
    a = json.loads(capsys.readouterr().out)[0]["p_value"]
    cli.main(["test", str(path), "--method", "energy", "--json", "--seed", "11"])
    b = json.loads(capsys.readouterr().out)[0]["p_value"]
    assert a == b
    monkeypatch.delenv("JELK_SEED")
    importlib.reload(cli)


def test_cli_verify(capsys):
    assert main(["verify", "--k", "3", "--alpha", "1/3,1/3,1/3"]) == 0
    out = capsys.readouterr().out
    assert "trace=2" in out and "PASS" in out
    assert main(["verify", "--random", "100"]) == 0
    assert capsys.readouterr().out.count("PASS") == 100


def test_cli_verify_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--alpha", "0.5,0.6"])
    assert exc.value.code == 2


SIM = "family = normal-scale\ndeltas = 1.5\nsizes = 15, 15\nreps = 100\nmethods = jel, kw\n"


def test_cli_simulate_outputs_and_determinism(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SIM)
    for tag in ("a", "b"):
        assert main(["simulate", str(cfg), "--out", str(tmp_path / tag / "grid"), "--seed", "7"]) == 0
    for ext in ("csv", "md"):
        assert (tmp_path / "a" / f"grid.{ext}").read_bytes() == (tmp_path / "b" / f"grid.{ext}").read_bytes()
    assert (tmp_path / "a" / "grid.png").read_bytes()[:4] == b"\x89PNG"


def test_cli_simulate_missing_config(tmp_path):
    assert main(["simulate", str(tmp_path / "none.cfg")]) == 2


def test_cli_simulate_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("family = normal-scale\nwhat = 1\n")
    assert main(["simulate", str(cfg)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_banknote_missing(tmp_path):
    assert main(["banknote", "--data", str(tmp_path / "missing.txt")]) == 2


def test_console_entry_point(data_file):
    path, _ = data_file
    proc = subprocess.run([sys.executable, "-m", "jelk", "test", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("JEL-S")
