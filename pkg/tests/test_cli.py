import numpy as np
import pytest

from frontlab import cli
from frontlab.io import read_csv
from frontlab.runner import align_by_position, max_width_deviation, read_summary
from frontlab.kinkfit import FrontTrajectory

SMALL = """
name = small
mode = {mode}
a = 0.3
defect.kind = gaussian
defect.s0 = 0.3
defect.s1 = 0.6
defect.d = 0.3
grid.x_min = -30
grid.x_max = 30
grid.n = 300
init.x0 = -12
solver.t_max = 20
cv.kind = dirac
"""


def write(tmp_path, mode="pde", extra=""):
    p = tmp_path / f"{mode}.cfg"
    p.write_text(SMALL.format(mode=mode) + extra)
    return p


def test_validate_ok_and_bad(tmp_path, capsys):
    assert cli.main(["validate", str(write(tmp_path))]) == cli.EXIT_OK
    bad = tmp_path / "bad.cfg"
    bad.write_text(SMALL.format(mode="pde").replace("grid.n = 300", "grid.n = 2"))
    assert cli.main(["validate", str(bad)]) == cli.EXIT_INVALID
    assert "grid too small" in capsys.readouterr().out


def test_validate_catalog_entry_by_name():
    assert cli.main(["validate", "fig1"]) == cli.EXIT_OK


def test_run_pde_outputs(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", str(write(tmp_path)), "--out", str(out)]) == cli.EXIT_OK
    header, rows = read_csv(out / "small" / "trajectory.csv")
    assert header == ["t", "x0", "w", "speed", "fit_error"]
    assert len(rows) == 21
    summary = read_summary(out / "small" / "summary.txt")
    assert summary["mode"] == "pde"
    assert float(summary["max_fit_error"]) < 1e-4
    assert "wall_time_s" in summary


def test_overrides(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", str(write(tmp_path)), "--out", str(out), "--n", "240", "--tmax", "5"]) == 0
    _, rows = read_csv(out / "small" / "trajectory.csv")
    assert rows[-1][0] == 5.0


def test_deterministic_bytes(tmp_path):
    cfgp = write(tmp_path, "compare")
    for sub in ("a", "b"):
        assert cli.main(["run", str(cfgp), "--out", str(tmp_path / sub)]) == 0
    for f in ("trajectory_pde.csv", "trajectory_cv.csv", "compare.csv"):
        assert (tmp_path / "a/small" / f).read_bytes() == (tmp_path / "b/small" / f).read_bytes()


def test_compare_columns(tmp_path):
    cli.main(["run", str(write(tmp_path, "compare")), "--out", str(tmp_path)])
    header, rows = read_csv(tmp_path / "small" / "compare.csv")
    assert header == ["x0", "w_pde", "w_cv", "speed_pde", "speed_cv"]
    assert rows


def test_runtime_failure_exit_code(tmp_path, capsys):
    # a front starting at the right edge has no visible lower quartile to fit
    cfgp = write(tmp_path)
    cfgp.write_text(cfgp.read_text().replace("init.x0 = -12", "init.x0 = 29.9"))
    assert cli.main(["run", str(cfgp), "--out", str(tmp_path)]) == cli.EXIT_RUNTIME
    assert "pde failed" in capsys.readouterr().err


def test_mode_mismatch(tmp_path):
    assert cli.main(["invert", str(write(tmp_path)), "--out", str(tmp_path)]) == cli.EXIT_INVALID


def test_invert_and_sweep(tmp_path):
    inv = write(tmp_path, "invert")
    assert cli.main(["invert", str(inv), "--out", str(tmp_path)]) == 0
    header, _ = read_csv(tmp_path / "small" / "topography.csv")
    assert header == ["x0", "s_est", "s_true"]
    sweep = write(tmp_path, "sweep", "sweep.mode = cv\nsweep.param = defect.s1\nsweep.lo = 0.2\n"
                                     "sweep.hi = 0.6\nsweep.steps = 3\n")
    assert cli.main(["sweep", str(sweep), "--out", str(tmp_path / "s")]) == 0
    header, rows = read_csv(tmp_path / "s" / "small" / "sweep.csv")
    assert header[0] == "defect.s1"
    assert [r[0] for r in rows] == [0.2, 0.4, 0.6]


def test_threshold_cv(tmp_path):
    p = tmp_path / "thr.cfg"
    p.write_text(
        "name = thr\nmode = pinning-threshold\ncv.kind = dirac\ndefect.kind = dirac\n"
        "defect.alpha = 0.3\ndefect.beta = 6\nsolver.t_max = 20000\nsolver.dt_out = 5\n"
        "threshold.engine = cv\nthreshold.param = defect.beta\nthreshold.lo = 5\n"
        "threshold.hi = 7\nthreshold.rtol = 0.02\n"
    )
    assert cli.main(["threshold", str(p), "--out", str(tmp_path)]) == 0
    s = read_summary(tmp_path / "thr" / "summary.txt")
    assert float(s["threshold"]) == pytest.approx(5.88, rel=0.02)
    header, rows = read_csv(tmp_path / "thr" / "bisection.csv")
    assert header == ["value", "pinned", "x0_final", "w_final", "t_decided", "max_fit_error"]


def test_catalog_list(capsys):
    assert cli.main(["catalog", "list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("fig1 ")
    assert len(out) == 15


def test_catalog_sources(tmp_path):
    assert cli.main(["catalog", "run", "fig7", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "fig7" / "sources.csv")
    assert header == ["y", "I1_minus_y", "I2_minus_y"]
    assert len(rows) == 401


def test_unknown_catalog_name(capsys):
    assert cli.main(["catalog", "run", "nope"]) == cli.EXIT_INVALID


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == cli.EXIT_USAGE


def test_alignment_helpers():
    t = np.arange(5.0)
    pde_t = FrontTrajectory.from_samples(t, t, np.full(5, 2.0))
    cv_t = FrontTrajectory.from_samples(t, t + 0.5, np.full(5, 2.2))
    rows = align_by_position(pde_t, cv_t)
    assert rows[:, 0].tolist() == [1.0, 2.0, 3.0, 4.0]
    assert max_width_deviation(rows) == pytest.approx(0.1)
