import csv
import json
import math

import numpy as np
import pytest

from framelab import cli
from framelab.plotting import emit_plotdata


def write_config(tmp_path, name="cfg.json", **cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def column(path, name):
    header, rows = read_csv(path)
    i = header.index(name)
    return np.array([float(r[i]) for r in rows])


RIGID = dict(
    scenario="flow_frames",
    flow={"kind": "rigid_rotation", "params": {"omega0": [0.0, 0.0, 1.0]}},
    seeds=[[1.0, 0.5, 0.2]],
    dt=0.01,
    t_end=0.5,
)
ABC = dict(
    scenario="flow_frames",
    flow={"kind": "abc"},
    seeds=[[0.3, 1.0, 2.0]],
    dt=0.01,
    t_end=1.0,
    grid={"n": 16},
    diagnostics=["bkm", "frames"],
    diag_every=10,
)
PHASE = dict(scenario="phase_plane", phase={"alpha_p": 3.0, "C_p": 4.0, "start": [1.1, -2.1]}, dt=0.01, t_end=10.0)


def test_rigid_rotation_alpha_column_is_zero(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["run", str(write_config(tmp_path, **RIGID)), "--out", str(out)]) == 0
    header, rows = read_csv(out / "trajectories.csv")
    assert tuple(header) == cli.TRAJ_COLUMNS
    assert len(rows) == 51
    assert np.all(column(out / "trajectories.csv", "alpha") == 0.0)
    np.testing.assert_allclose(column(out / "trajectories.csv", "w_mag"), 2.0, rtol=1e-14)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema"] == 1
    assert manifest["statuses"] == {"seed0": "completed"}
    assert manifest["config"]["flow"]["kind"] == "rigid_rotation"


def test_abc_bkm_slope_is_constant(tmp_path):
    out = tmp_path / "run"
    assert cli.run(write_config(tmp_path, **ABC), out) == 0
    t = column(out / "diagnostics.csv", "t")
    bkm = column(out / "diagnostics.csv", "bkm_integral")
    slopes = np.diff(bkm) / np.diff(t)
    assert len(slopes) == 10
    np.testing.assert_allclose(slopes, slopes[0], rtol=1e-12)
    assert np.all(np.diff(bkm) >= 0)


def test_determinism_with_random_seeds(tmp_path):
    cfg = dict(RIGID, seeds=[], random_seeds={"count": 3, "low": [-1, -1, -1], "high": [1, 1, 1]}, rng_seed=7)
    path = write_config(tmp_path, **cfg)
    cli.run(path, tmp_path / "a")
    cli.run(path, tmp_path / "b")
    a = (tmp_path / "a" / "trajectories.csv").read_bytes()
    assert a == (tmp_path / "b" / "trajectories.csv").read_bytes()
    cli.run(write_config(tmp_path, "other.json", **dict(cfg, rng_seed=8)), tmp_path / "c")
    assert a != (tmp_path / "c" / "trajectories.csv").read_bytes()
    assert cli.verify_manifest(tmp_path / "a") == []


def test_manifest_detects_tampering(tmp_path):
    out = tmp_path / "run"
    cli.run(write_config(tmp_path, **RIGID), out)
    with open(out / "trajectories.csv", "a") as fh:
        fh.write("junk\n")
    assert cli.verify_manifest(out) == ["checksum mismatch for trajectories.csv"]
    (out / "trajectories.csv").unlink()
    assert cli.verify_manifest(out) == ["missing trajectories.csv"]


def test_schema_error_reports_line(tmp_path, capsys):
    text = '{\n  "scenario": "flow_frames",\n  "flow": {"kind": "abc"},\n  "dt": -1,\n  "t_end": 1\n}\n'
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert cli.main(["run", str(path), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert f"{path}:4:" in err and "$.dt" in err


@pytest.mark.parametrize(
    "cfg",
    [
        {"scenario": "warp_drive", "dt": 0.1, "t_end": 1},
        {"scenario": "flow_frames", "dt": 0.1, "t_end": 1},
        {"scenario": "flow_frames", "flow": {"kind": "abc"}, "dt": 0.1, "t_end": 1, "grid": {"n": 12}},
        {"scenario": "flow_frames", "flow": {"kind": "abc"}, "dt": 0.1, "t_end": 1, "diagnostics": ["fft"]},
        {"scenario": "flow_frames", "flow": {"kind": "abc", "params": {"D": 1}}, "dt": 0.1, "t_end": 1},
    ],
    ids=["scenario", "missing-section", "grid", "monitor", "params"],
)
def test_bad_configs_exit_2(tmp_path, cfg):
    assert cli.main(["run", str(write_config(tmp_path, **cfg)), "--out", str(tmp_path / "o")]) == 2


def test_invalid_json_exit_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "scenario": "flow_frames",\n  "dt" 0.1\n}')
    assert cli.main(["run", str(path)]) == 2
    assert f"{path}:3:" in capsys.readouterr().err


def test_config_round_trip(tmp_path):
    cfg = cli.load_config(write_config(tmp_path, **ABC))
    again = cli.normalize(json.loads(json.dumps(cfg)))
    assert again == cfg
    assert cfg["grid"]["L"] == pytest.approx(2 * math.pi)


def test_strict_mode_flags_masked_seed(tmp_path):
    # TG2D vorticity vanishes on x = 0, so that seed is rejected
    cfg = dict(
        scenario="flow_frames",
        flow={"kind": "taylor_green_2d"},
        seeds=[[0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
        dt=0.01,
        t_end=0.1,
    )
    path = write_config(tmp_path, **cfg)
    assert cli.main(["run", str(path), "--out", str(tmp_path / "a")]) == 0
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["statuses"]["seed0"].startswith("rejected")
    assert manifest["statuses"]["seed1"] == "completed"
    assert cli.main(["run", str(path), "--out", str(tmp_path / "b"), "--strict"]) == 1


def test_phase_plane_and_plot(tmp_path):
    out = tmp_path / "run"
    assert cli.run(write_config(tmp_path, **PHASE), out) == 0
    alpha = column(out / "phase.csv", "alpha")
    chi = column(out / "phase.csv", "chi")
    assert math.hypot(alpha[-1] - 1.0, chi[-1] + 2.0) < 1e-6
    res = json.loads((out / "manifest.json").read_text())["results"]
    assert res["alpha0_squared_solved"] == pytest.approx(1.0, abs=1e-10)
    assert res["alpha0_squared_alternate_sign"] == pytest.approx(4.0, abs=1e-10)
    assert cli.main(["plot", str(out)]) == 0
    data = np.loadtxt(out / "plots" / "phase.dat")
    assert data.shape == (1001, 3)
    np.testing.assert_allclose(data[-1, :2], [1.0, -2.0], atol=1e-6)
    assert (out / "plots" / "phase.svg").read_text().startswith("<svg")
    assert cli.verify_manifest(out) == []


def test_bkm_plot_is_monotone(tmp_path):
    out = tmp_path / "run"
    cli.run(write_config(tmp_path, **ABC), out)
    written = emit_plotdata(out)
    assert "plots/integrals.dat" in written and "plots/frames.dat" in written
    data = np.loadtxt(out / "plots" / "integrals.dat")
    assert np.all(np.diff(data[:, 1]) >= 0)
    assert cli.verify_manifest(out) == []


def test_empty_diagnostics_writes_no_plots(tmp_path):
    out = tmp_path / "run"
    cli.run(write_config(tmp_path, **RIGID), out)
    assert cli.main(["plot", str(out)]) == 0
    assert not (out / "plots").exists()
    assert json.loads((out / "manifest.json").read_text())["plots"] == {}


def test_plot_missing_inputs_exit_2(tmp_path):
    assert cli.main(["plot", str(tmp_path / "nowhere")]) == 2
    out = tmp_path / "run"
    cli.run(write_config(tmp_path, **PHASE), out)
    (out / "phase.csv").unlink()
    assert cli.main(["plot", str(out)]) == 2


def test_euler_spectral_scenario(tmp_path):
    cfg = dict(
        scenario="euler_spectral",
        field={"initial": "abc", "sampler": "spectral"},
        grid={"n": 16},
        seeds=[[0.3, 1.0, 2.0]],
        dt=0.01,
        t_end=0.1,
        diagnostics=["bkm", "chip", "dhy"],
        diag_every=5,
    )
    out = tmp_path / "run"
    assert cli.run(write_config(tmp_path, **cfg), out) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"trajectories.csv", "diagnostics.csv"}
    assert manifest["results"]["max_spectral_divergence"] <= 1e-12
    assert manifest["results"]["energy_relative_drift"] <= 1e-12
    np.testing.assert_allclose(column(out / "diagnostics.csv", "t"), [0.0, 0.05, 0.1], atol=1e-15)
    assert np.all(np.isfinite(column(out / "diagnostics.csv", "M")))


def test_mhd_scenario(tmp_path):
    cfg = dict(scenario="mhd_frames", mhd={"kind": "alfven_abc"}, seeds=[[0.3, 1.0, 2.0]], dt=0.01, t_end=0.1)
    out = tmp_path / "run"
    assert cli.run(write_config(tmp_path, **cfg), out) == 0
    header, rows = read_csv(out / "trajectories.csv")
    assert {r[1] for r in rows} == {"+", "-"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["statuses"] == {"seed0+": "completed", "seed0-": "completed"}
    # the + frame rides v- = 0 and stays put
    plus = np.array([[float(v) for v in r[3:6]] for r in rows if r[1] == "+"])
    np.testing.assert_array_equal(plus, np.tile([0.3, 1.0, 2.0], (11, 1)))


def test_catalog_lists_everything(capsys):
    assert cli.main(["catalog"]) == 0
    text = capsys.readouterr().out
    for name in ("flow_frames", "rigid_rotation", "columnar_vortex", "taylor_green_3d", "alfven_abc", "bkm"):
        assert name in text


def test_thread_env(monkeypatch):
    monkeypatch.setenv("FRAMELAB_THREADS", "3")
    assert cli.thread_count() == 3
    monkeypatch.setenv("FRAMELAB_THREADS", "many")
    with pytest.raises(cli.UsageError):
        cli.thread_count()


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    cfg = dict(ABC, seeds=[[0.3, 1.0, 2.0], [1.0, 2.0, 3.0], [2.0, 0.1, 4.0]], diagnostics=[])
    path = write_config(tmp_path, **cfg)
    monkeypatch.setenv("FRAMELAB_THREADS", "1")
    cli.run(path, tmp_path / "a")
    monkeypatch.setenv("FRAMELAB_THREADS", "3")
    cli.run(path, tmp_path / "b")
    assert (tmp_path / "a" / "trajectories.csv").read_bytes() == (tmp_path / "b" / "trajectories.csv").read_bytes()
