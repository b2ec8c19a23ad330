import shutil
import subprocess
import sys

import numpy as np
import pytest

from esplot import EmptyPlotError, PlotJob, SchemaError, load_trajectory, render
from esplot.cli import main

HEADER = ("t,theta_1,theta_2,y,theta_star_1,theta_star_2,"
          "y_star,err_norm,inst_freq_1,inst_freq_2")


def write_csv(path, n_rows=200, header=HEADER, shuffle=False):
    cols = header.split(",")
    t = np.linspace(0.0, 10.0, n_rows)
    data = {
        "t": t,
        "theta_1": -1.0 + 0.1 * np.exp(-0.1 * t) * np.cos(3 * t),
        "theta_2": 1.0 + 0.1 * np.exp(-0.1 * t) * np.sin(3 * t),
        "theta_star_1": np.full_like(t, -1.0),
        "theta_star_2": np.full_like(t, 1.0),
        "y": 0.01 * np.exp(-0.2 * t) + 0.2 * np.sin(0.5 * t),
        "y_star": 0.2 * np.sin(0.5 * t),
        "err_norm": 0.14 * np.exp(-0.1 * t),
        "inst_freq_1": 2.0 * np.exp(0.2 * t),
        "inst_freq_2": 2.4 * np.exp(0.2 * t),
    }
    if shuffle:
        cols = cols[::-1]
    lines = [",".join(cols)]
    for i in range(n_rows):
        lines.append(",".join(repr(float(data[c][i])) for c in cols))
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoadTrajectory:
    def test_loads_and_shapes(self, tmp_path):
        path = write_csv(tmp_path / "traj.csv")
        table = load_trajectory(path)
        assert table.theta.shape == (200, 2)
        assert table.inst_freq.shape == (200, 2)
        assert table.t[0] == 0.0

    def test_column_order_is_irrelevant(self, tmp_path):
        a = load_trajectory(write_csv(tmp_path / "a.csv"))
        b = load_trajectory(write_csv(tmp_path / "b.csv", shuffle=True))
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.err_norm, b.err_norm)

    @pytest.mark.parametrize("missing", ["err_norm", "theta_star_2",
                                         "inst_freq_1", "y_star"])
    def test_missing_column_is_named(self, tmp_path, missing):
        cols = [c for c in HEADER.split(",") if c != missing]
        path = write_csv(tmp_path / "bad.csv", header=",".join(cols))
        with pytest.raises(SchemaError, match=missing):
            load_trajectory(path)

    def test_header_only_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(HEADER + "\n")
        with pytest.raises(EmptyPlotError):
            load_trajectory(path)


class TestRender:
    def test_writes_exactly_three_figures(self, tmp_path):
        path = write_csv(tmp_path / "traj.csv")
        out = tmp_path / "figs"
        written = render(PlotJob(csv_path=path, out_dir=out))
        assert sorted(p.name for p in written) == [
            "frequencies.png", "output.png", "tracking.png"]
        assert sorted(p.name for p in out.iterdir()) == [
            "frequencies.png", "output.png", "tracking.png"]

    def test_subset_selection(self, tmp_path):
        path = write_csv(tmp_path / "traj.csv")
        out = tmp_path / "figs"
        written = render(PlotJob(csv_path=path, out_dir=out,
                                 which=("frequencies",)))
        assert [p.name for p in written] == ["frequencies.png"]
        assert [p.name for p in out.iterdir()] == ["frequencies.png"]

    def test_rerender_is_byte_stable(self, tmp_path):
        path = write_csv(tmp_path / "traj.csv")
        out = tmp_path / "figs"
        render(PlotJob(csv_path=path, out_dir=out))
        first = (out / "tracking.png").read_bytes()
        render(PlotJob(csv_path=path, out_dir=out))
        assert (out / "tracking.png").read_bytes() == first

    def test_log_style_accepted(self, tmp_path):
        path = write_csv(tmp_path / "traj.csv")
        out = tmp_path / "figs"
        written = render(PlotJob(csv_path=path, out_dir=out, style="log-y",
                                 which=("tracking", "output")))
        assert len(written) == 2

    def test_bad_figure_name(self, tmp_path):
        with pytest.raises(ValueError):
            PlotJob(csv_path=tmp_path / "x.csv", out_dir=tmp_path, which=("pie",))


class TestCli:
    def test_full_run(self, tmp_path, capsys):
        path = write_csv(tmp_path / "traj.csv")
        assert main([str(path), "--out", str(tmp_path / "figs")]) == 0
        out = capsys.readouterr().out.splitlines()
        assert len(out) == 3

    def test_which_argument(self, tmp_path):
        path = write_csv(tmp_path / "traj.csv")
        assert main([str(path), "--out", str(tmp_path / "figs"),
                     "--which", "output"]) == 0
        assert [p.name for p in (tmp_path / "figs").iterdir()] == ["output.png"]

    def test_schema_error_exit_code(self, tmp_path, capsys):
        cols = [c for c in HEADER.split(",") if c != "err_norm"]
        path = write_csv(tmp_path / "bad.csv", header=",".join(cols))
        assert main([str(path), "--out", str(tmp_path / "figs")]) == 2
        assert "err_norm" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["/nonexistent.csv", "--out", "/tmp/x"]) == 2


@pytest.mark.skipif(shutil.which("estrack") is None,
                    reason="estrack CLI not installed")
class TestAgainstRealTrajectory:
    def test_renders_simulator_output(self, tmp_path):
        config = tmp_path / "exp.json"
        config.write_text("""
        {
          "name": "smoke",
          "cost": "quadratic_tv_sec6",
          "controller": {
            "dim_n": 2, "omega": 10.0, "omega_hat": [1.0, 1.2],
            "alpha": [0.015, 0.02], "k": [10.0, 11.0],
            "schedule": {"variant": "exponential", "lambda": 0.1, "p": 0.51}
          },
          "theta0": [-0.9, 0.9],
          "t_span": [0.0, 2.0],
          "sample_every": 0.05,
          "checks": []
        }
        """)
        run_dir = tmp_path / "run"
        proc = subprocess.run(["estrack", "run", str(config), "--out",
                               str(run_dir), "--quiet"], capture_output=True)
        assert proc.returncode == 0, proc.stderr.decode()
        written = render(PlotJob(csv_path=run_dir / "trajectory.csv",
                                 out_dir=tmp_path / "figs"))
        assert len(written) == 3
