import json

import pytest

from smoothlab import __version__, cli


def write_config(tmp_path, name="cfg.json", **doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


@pytest.fixture
def constant_config(tmp_path):
    return write_config(tmp_path, kind="equiv_2_3", corpus=["constant"], N=64, p=[2, "inf"], grid=[4, 8])


def test_corpus_list(capsys):
    assert cli.main(["corpus", "list"]) == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    names = [line.split("\t")[0] for line in lines]
    assert "abs_sin" in names
    assert "radial_2d" in names
    assert all(line.split("\t")[1] in ("d=1", "d=2") for line in lines)


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_run_writes_outputs(tmp_path, constant_config, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", constant_config, "--out", str(out), "--run-id", "t1"]) == cli.EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary == {"rows_csv": str(out / "rows.csv"), "plotdata": str(out / "plotdata.txt"), "rows": 4, "failing": 0}
    assert (out / "plotdata.txt").exists()
    meta = json.loads((out / "run_meta.json").read_text(encoding="utf-8"))
    assert meta["run_id"] == "t1"
    assert meta["flags"] == {"excluded": 4}
    assert meta["config"]["kind"] == "equiv_2_3"


def test_run_is_deterministic(tmp_path, constant_config):
    assert cli.main(["run", constant_config, "--out", str(tmp_path / "a")]) == cli.EXIT_OK
    assert cli.main(["run", constant_config, "--out", str(tmp_path / "b")]) == cli.EXIT_OK
    assert (tmp_path / "a" / "rows.csv").read_bytes() == (tmp_path / "b" / "rows.csv").read_bytes()


def test_run_into_the_workdir(tmp_path, constant_config):
    assert cli.main(["run", constant_config, "--workdir", str(tmp_path / "wd"), "--run-id", "r1"]) == cli.EXIT_OK
    assert (tmp_path / "wd" / "smoothlab" / "equiv_2_3" / "runs" / "r1" / "rows.csv").exists()


def test_failing_rows_exit_code(tmp_path):
    cfg = write_config(tmp_path, kind="equiv_2_3", corpus=["random_trig(40)"], N=64, grid=[4])
    assert cli.main(["run", cfg, "--out", str(tmp_path / "out")]) == cli.EXIT_FLAGGED


def test_bad_configs_exit_with_config_error(tmp_path, capsys):
    bad = write_config(tmp_path, kind="equiv_9_9", corpus=["abs_sin"])
    assert cli.main(["run", bad, "--out", str(tmp_path / "out")]) == cli.EXIT_CONFIG
    assert "smoothlab: error:" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    cfg = write_config(tmp_path, "ok.json", kind="equiv_2_3", corpus=["abs_sin"], N=64, grid=[4])
    assert cli.main(["run", cfg, "--resolution", "96", "--out", str(tmp_path / "out")]) == cli.EXIT_CONFIG


def test_report_subcommand(tmp_path, constant_config, capsys):
    out = tmp_path / "out"
    cli.main(["run", constant_config, "--out", str(out)])
    capsys.readouterr()
    assert cli.main(["report", str(out / "rows.csv"), "--format", "plotdata"]) == cli.EXIT_OK
    target = out / "rows.plotdata.txt"
    assert capsys.readouterr().out.strip() == str(target)
    assert target.read_text(encoding="utf-8") == (out / "plotdata.txt").read_text(encoding="utf-8")
    assert cli.main(["report", str(out / "rows.csv"), "--out", str(tmp_path / "copy.csv")]) == cli.EXIT_OK
    assert (tmp_path / "copy.csv").read_bytes() == (out / "rows.csv").read_bytes()
    assert cli.main(["report", str(tmp_path / "nope.csv")]) == cli.EXIT_CONFIG
