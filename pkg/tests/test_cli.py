"""End-to-end command-line behaviour: outputs, overrides, exit codes."""

import csv

import pytest

from fslbm.cli import EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO, EXIT_OK, main

COUETTE = "scenario = couette\n"

TINY_DAM = """
scenario = dam-break
[scenario]
column = 6, 6
tank = 24, 12
gravity0 = 1e-4
samples = 20, 40
"""


def cfg_file(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_errors(out_dir):
    with open(out_dir / "errors.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_an_errors_table(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", cfg_file(tmp_path, COUETTE), "--out", str(out)])
    assert code == EXIT_OK
    rows = read_errors(out)
    assert len(rows) == 1
    assert rows[0]["scenario"].startswith("couette")
    assert rows[0]["rule"] == "fsl"
    assert float(rows[0]["L2"]) < 1e-10
    stdout = capsys.readouterr().out
    assert "L2=" in stdout and "wrote" in stdout


def test_quiet_flag_silences_progress(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", cfg_file(tmp_path, COUETTE), "--out", str(out),
                 "--quiet"])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""


def test_rule_flag_overrides_the_config(tmp_path):
    out = tmp_path / "out"
    code = main(["run", cfg_file(tmp_path, COUETTE), "--out", str(out),
                 "--rule", "fsk", "--quiet"])
    assert code == EXIT_OK
    assert read_errors(out)[0]["rule"] == "fsk"


def test_run_can_drop_a_snapshot_per_resolution(tmp_path):
    out = tmp_path / "out"
    code = main(["run", cfg_file(tmp_path, COUETTE), "--out", str(out),
                 "--snapshots-every", "1", "--quiet"])
    assert code == EXIT_OK
    snaps = list((out / "dx1").glob("snap_*.vtk"))
    assert len(snaps) == 1


def test_study_attaches_observed_orders(tmp_path):
    text = (
        "scenario = plate-transient\n"
        "[scenario]\n"
        "resolutions = 1, 0.5, 0.25\n"
        "times = 1/8\n"
    )
    out = tmp_path / "out"
    code = main(["study", cfg_file(tmp_path, text), "--out", str(out),
                 "--quiet"])
    assert code == EXIT_OK
    rows = read_errors(out)
    assert len(rows) == 3
    assert rows[0]["scenario"].endswith("-T0.125")
    order = float(rows[0]["observed_order"])
    assert 1.0 < order < 3.0
    assert all(r["observed_order"] == rows[0]["observed_order"] for r in rows)


def test_dam_break_writes_the_front_table(tmp_path):
    out = tmp_path / "out"
    code = main(["dam-break", cfg_file(tmp_path, TINY_DAM), "--out", str(out),
                 "--quiet", "--snapshots-every", "20"])
    assert code == EXIT_OK
    with open(out / "front.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["step"]) for r in rows] == [0, 20, 40]
    assert all(int(r["x_full"]) >= 6 for r in rows)  # column never retreats
    assert (out / "full" / "snap_20.vtk").exists()
    assert (out / "simplified" / "snap_40.vtk").exists()
    assert (out / "full" / "snap_20.vtk.csv").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    code = main(["run", cfg_file(tmp_path, "scenario = couette\nbogus = 1\n"),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "error:" in err and ":2:1:" in err


def test_study_of_a_dam_break_exits_2(tmp_path, capsys):
    code = main(["study", cfg_file(tmp_path, TINY_DAM),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert "dam-break command" in capsys.readouterr().err


def test_divergent_runs_exit_3(tmp_path, capsys):
    text = (
        "scenario = film\n"
        "[scenario]\n"
        "gravity0 = 0.01\n"
    )
    code = main(["run", cfg_file(tmp_path, text), "--out", str(tmp_path / "out")])
    assert code == EXIT_DIVERGED
    assert "diverged" in capsys.readouterr().err


def test_missing_config_exits_4(tmp_path, capsys):
    code = main(["run", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)])
    assert code == EXIT_IO
    assert "error:" in capsys.readouterr().err


def test_unwritable_out_dir_exits_4(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory\n")
    code = main(["run", cfg_file(tmp_path, COUETTE),
                 "--out", str(blocker / "sub"), "--quiet"])
    assert code == EXIT_IO


def test_bad_rule_flag_is_rejected_by_the_parser(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", cfg_file(tmp_path, COUETTE), "--rule", "magic"])
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err
