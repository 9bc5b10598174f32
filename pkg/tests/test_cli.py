import csv
import json

import pytest

from resonance_atlas import cli
from resonance_atlas.core import RootResult, Sheet, Trajectory
from resonance_atlas.errors import TrackingLost


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _json(capsys, *argv):
    code, out, _ = _run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_find_report(capsys):
    code, rep = _json(capsys, "find", "--no-classify")
    assert code == 0
    assert set(rep) == {"command", "inputs", "outputs", "residuals", "version"}
    reals = sorted(round(z["re"], 3) for z in rep["outputs"]["zeros"])
    assert 0.963 in reals and 1.285 in reals
    assert max(rep["residuals"]) < 1e-12


def test_find_writes_json_into_out_dir(tmp_path, capsys):
    code, _, _ = _run(capsys, "find", "--kappa", "0", "--quiet", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads((tmp_path / "find.json").read_text())
    assert rep["outputs"]["zeros"][0]["re"] == 1.25


def test_text_summary(capsys):
    code, out, _ = _run(capsys, "hydrogen")
    assert code == 0 and "kappa_n" in out


def test_hydrogen_through_find(capsys):
    code, rep = _json(capsys, "find", "--family", "hydrogen")
    assert code == 0
    assert rep["outputs"]["lifetime_s"] == pytest.approx(1.6e-9, rel=0.1)


@pytest.mark.parametrize("argv", [
    ("find", "--mu", "0"),
    ("find", "--delta", "-2"),
    ("critical", "--mu", "-1"),
    ("discrete", "--steps", "1"),
    ("find", "--bogus"),
    ("selftest", "--criteria", "12"),
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_help_and_version(capsys):
    assert cli.main(["--version"]) == 0
    assert cli.main(["find", "--help"]) == 0
    capsys.readouterr()


def test_discrete_csv_and_svg(tmp_path, capsys):
    code, _, _ = _run(capsys, "discrete", "--out", str(tmp_path), "--steps", "21", "--quiet")
    assert code == 0
    with open(tmp_path / "discrete.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["delta", "e1", "e2", "e3", "e4"]
    assert len(rows) == 22
    assert (tmp_path / "discrete.svg").read_text().lstrip().startswith("<?xml")


def test_dressed_mode_header(tmp_path, capsys):
    code, _, _ = _run(capsys, "discrete", "--mode", "dressed", "--out", str(tmp_path), "--no-svg",
                      "--steps", "5", "--quiet")
    assert code == 0
    assert (tmp_path / "discrete.csv").read_text().splitlines()[0] == "delta,zeta_minus,zeta_plus"
    assert not (tmp_path / "discrete.svg").exists()


def test_sweep_outputs_are_deterministic(tmp_path, capsys):
    outputs = []
    for name in ("a", "b"):
        d = tmp_path / name
        code, _, _ = _run(capsys, "sweep", "--vary", "delta", "--to", "0.2", "--steps", "5",
                          "--out", str(d), "--quiet")
        assert code == 0
        outputs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outputs[0] == outputs[1]
    assert set(outputs[0]) == {"sweep.branch0.csv", "sweep.branch1.csv", "sweep.svg"}
    header = outputs[0]["sweep.branch0.csv"].decode().splitlines()[0]
    assert header == "param,re,im,branch,residual"


def test_sweep_with_explicit_seed(tmp_path, capsys):
    code, rep = _json(capsys, "sweep", "--vary", "mu", "--to", "0.02", "--steps", "4", "--no-svg",
                      "--seed", "1.285-2.7e-6j", "--out", str(tmp_path))
    assert code == 0
    assert [b["branch"] for b in rep["outputs"]["branches"]] == [0]


def test_sweep_tracking_lost_keeps_partial_csv(tmp_path, capsys, monkeypatch):
    def lost(params, family, vary, stop, steps, z0, spacing="linear"):
        partial = Trajectory(vary, [(0.01, RootResult(complex(z0), 0.0, 0, Sheet.SECOND))])
        raise TrackingLost("step underflow", param=0.01, partial=partial)

    monkeypatch.setattr(cli, "track", lost)
    code, _, _ = _run(capsys, "sweep", "--seed", "1.285-2.7e-6j", "--no-svg", "--out", str(tmp_path),
                      "--quiet")
    assert code == 3
    lines = (tmp_path / "sweep.branch0.csv").read_text().splitlines()
    assert len(lines) == 2


def test_config_file_sits_between_defaults_and_flags(tmp_path, capsys):
    cfg = tmp_path / "atlas.ini"
    cfg.write_text("[discrete]\nsteps = 7\ndelta-from = -0.2\nno_svg = yes\n")
    out = tmp_path / "o"
    code, _, _ = _run(capsys, "discrete", "--config", str(cfg), "--out", str(out), "--quiet")
    assert code == 0
    rows = (out / "discrete.csv").read_text().splitlines()
    assert len(rows) == 8 and rows[1].startswith("-0.2")
    assert not (out / "discrete.svg").exists()
    code, _, _ = _run(capsys, "discrete", "--config", str(cfg), "--out", str(out), "--steps", "3",
                      "--quiet")
    assert code == 0 and len((out / "discrete.csv").read_text().splitlines()) == 4


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "atlas.ini"
    cfg.write_text("[find]\nwidth = 3\n")
    code, _, err = _run(capsys, "find", "--config", str(cfg))
    assert code == 2 and "width" in err


def test_thread_variable_validated(capsys, monkeypatch):
    monkeypatch.setenv("RESONANCE_ATLAS_THREADS", "zero")
    code, _, _ = _run(capsys, "discrete", "--steps", "3", "--no-svg", "--quiet")
    assert code == 2


def test_critical_marks_reference_window(capsys):
    code, rep = _json(capsys, "critical")
    assert code == 0
    assert rep["outputs"]["status"] == "verified"
    code, rep = _json(capsys, "critical", "--mu", "0.02")
    assert rep["outputs"]["status"] == "unverified"


def test_selftest_subset_and_tamper(capsys):
    code, rep = _json(capsys, "selftest", "--criteria", "6,8")
    assert code == 0 and rep["outputs"]["passed"]
    code, rep = _json(capsys, "selftest", "--criteria", "6,8", "--tamper")
    assert code == 3 and not rep["outputs"]["passed"]
