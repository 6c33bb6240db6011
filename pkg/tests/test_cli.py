import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from exovortex.cli import ConfigError, dumps, main, parse_config


def write_config(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    with open(path) as f:
        rows = list(csv.reader(f))
    return rows[0], np.array(rows[1:], dtype=float)


DISK_VORTEX = {"curve": {"kind": "circle", "radius": 1.0}, "mesh": {"N": 64},
               "vorticity": [{"center": [2.0, 0.0], "strength": 1.0}],
               "eval_circle": {"radius": 3.0, "count": 360}}


def test_static_disk_gamma_one(tmp_path):
    cfg = write_config(tmp_path, {"curve": {"kind": "circle", "radius": 1.0}, "mesh": {"N": 32}, "gamma": 1.0})
    assert main(["static", "--config", cfg, "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "density.csv")
    assert header == ["index", "s", "gamma"]
    assert np.abs(rows[:, 2] - 1.0).max() < 1e-10
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["circulation"]["measured"] == pytest.approx(1.0, abs=1e-8)
    assert summary["residual"] < 1e-12 and summary["condition_estimate"] > 1
    header, field = read_csv(tmp_path / "field.csv")
    assert header == ["x", "y", "ux", "uy"] and field.shape == (360, 4)


@pytest.mark.parametrize("method", ["charge", "charge-lambda"])
def test_static_charge_methods(tmp_path, method):
    cfg = write_config(tmp_path, DISK_VORTEX)
    args = ["static", "--config", cfg, "--out", str(tmp_path), "--method", method, "--hstar", "disk"]
    if method == "charge-lambda":
        args += ["--lambda", f"const:{0.5}"]
    assert main(args) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["sup_error_vs_exact"] < 1e-10
    assert summary["method"] == method.replace("-", "_")


def test_static_point_hstar(tmp_path):
    cfg = write_config(tmp_path, dict(DISK_VORTEX, gamma=0.5))
    assert main(["static", "--config", cfg, "--out", str(tmp_path), "--method", "charge",
                 "--hstar", "point:0.2,0.1"]) == 0


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"curve": {"kind": "circle",\n  "radius": 1.0,,}}')
    assert main(["static", "--config", str(p), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


def test_missing_output_dir(tmp_path):
    cfg = write_config(tmp_path, DISK_VORTEX)
    assert main(["static", "--config", cfg, "--out", str(tmp_path / "nope")]) == 4


@pytest.mark.parametrize("bad", [
    {"curve": {"kind": "circle", "radius": 1.0}, "colour": "red"},
    {"curve": {"kind": "circle", "radius": 1.0}, "mesh": {"N": 16, "spacing": 1}},
    {"curve": {"kind": "circle", "radius": -1.0}},
    {"curve": {"kind": "circle", "radius": 1.0}, "vorticity": [{"center": [0.2, 0.0], "strength": 1.0}]},
    {"curve": {"kind": "circle", "radius": 1.0}, "method": "panel"},
    {"curve": {"kind": "circle", "radius": 1.0}, "method": "charge",
     "hstar": {"kind": "point_vortex_at", "x_star": [3.0, 0.0]}},
])
def test_config_errors(tmp_path, bad):
    assert main(["static", "--config", write_config(tmp_path, bad), "--out", str(tmp_path)]) == 2


def test_solver_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, {"curve": {"kind": "circle", "radius": 1.0}, "method": "charge",
                                  "lambda": {"kind": "const", "c": 1.0}})
    assert main(["static", "--config", cfg, "--out", str(tmp_path)]) == 3


def test_converge_uniform_disk(tmp_path):
    cfg = write_config(tmp_path, DISK_VORTEX)
    assert main(["converge", "--config", cfg, "--out", str(tmp_path), "--N", "16", "32", "64", "128"]) == 0
    header, rows = read_csv(tmp_path / "converge.csv")
    assert header == ["N", "sup_error", "slope_so_far"]
    assert rows[-1, 1] < 1e-8


def test_converge_perturbed_order(tmp_path):
    cfg = dict(DISK_VORTEX, mesh={"N": 64, "kappa": 2, "amplitude": 1.0, "seed": 0}, N_list=[32, 64, 128, 256])
    assert main(["converge", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "converge.csv")
    assert rows[-1, 2] <= -1.7


def test_converge_needs_three_sizes(tmp_path):
    cfg = write_config(tmp_path, DISK_VORTEX)
    assert main(["converge", "--config", cfg, "--out", str(tmp_path), "--N", "32"]) == 2


def test_diagnose_disk_charge(tmp_path):
    cfg = write_config(tmp_path, {"curve": {"kind": "circle", "radius": 1.0},
                                  "mesh": {"N": 64, "flavor": "charge"}, "method": "charge"})
    assert main(["diagnose", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "diagnose.json").read_text())
    for key in ("N", "cot_dev", "pb_residual", "mean_residual", "rho0", "rho_full", "radii", "condition"):
        assert key in d
    assert d["dominance"]["min_margin"] > 0
    assert d["rho_full"] == pytest.approx(math.pi, abs=1e-8)


def test_diagnose_nonconvex(tmp_path):
    cfg = write_config(tmp_path, {"curve": {"kind": "fourier", "r0": 1.0, "cos": [0.0, 0.35]},
                                  "mesh": {"N": 128, "flavor": "charge"}, "method": "charge"})
    assert main(["diagnose", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "diagnose.json").read_text())
    assert d["radii"]["R_inf"] < 0 and not d["dominance"]["dominant"]


def test_diagnose_vortex_flavor_has_no_dominance(tmp_path):
    cfg = write_config(tmp_path, {"curve": {"kind": "ellipse", "a": 2.0, "b": 1.0}, "mesh": {"N": 32}})
    assert main(["diagnose", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "diagnose.json").read_text())
    assert d["dominance"] is None and "charge" in d["dominance_note"]


def test_dynamics_outputs(tmp_path):
    cfg = dict(DISK_VORTEX, dynamics={"t_end": 0.5, "h": 0.05, "output_every": 2})
    assert main(["dynamics", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path / "traj.csv")]) == 0
    header, rows = read_csv(tmp_path / "traj.csv")
    assert header == ["t", "blob_index", "x", "y"]
    assert rows[0].tolist() == [0.0, 0.0, 2.0, 0.0] and rows[-1, 0] == pytest.approx(0.5)
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert all(h["circulation_drift"] == 0 for h in diag["history"])
    assert diag["steps"] == 10 and diag["snapshots"] == 6


def test_geom(tmp_path):
    cfg = write_config(tmp_path, {"curve": {"kind": "ellipse", "a": 2.0, "b": 1.0}, "mesh": {"N": 16}})
    assert main(["geom", "--config", cfg, "--out", str(tmp_path)]) == 0
    g = json.loads((tmp_path / "geom.json").read_text())
    assert g["length"] == pytest.approx(9.688448220547677, abs=1e-12)
    assert g["winding_number"] == pytest.approx(1.0)


def test_byte_identical_outputs(tmp_path):
    cfg = write_config(tmp_path, {"curve": {"kind": "ellipse", "a": 2.0, "b": 1.0},
                                  "mesh": {"N": 128, "kappa": 2, "amplitude": 0.5, "seed": 3},
                                  "vorticity": [{"center": [3.0, 1.0], "strength": 1.0, "core_radius": 0.1}],
                                  "gamma": 0.5, "method": "charge"})
    outs = []
    for k in range(3):
        d = tmp_path / f"run{k}"
        d.mkdir()
        assert main(["static", "--config", cfg, "--out", str(d), "--seed", "9"]) == 0
        outs.append([(d / f).read_bytes() for f in ("density.csv", "field.csv", "summary.json")])
    assert outs[0] == outs[1] == outs[2]


def test_dumps_format():
    text = dumps({"b": 0.1, "a": [1, 2.5], "c": None, "d": float("nan")})
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text and '"c": null' in text


def test_parse_config_defaults():
    cfg = parse_config({"curve": {"kind": "circle", "radius": 1.0}})
    assert cfg.mesh["N"] == 64 and cfg.method == "vortex" and cfg.eval_points.shape == (360, 2)
    with pytest.raises(ConfigError):
        parse_config({"curve": {"kind": "circle"}, "eval_points": [[1, 2, 3]]})


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, {"curve": {"kind": "circle", "radius": 1.0}, "mesh": {"N": 8}})
    r = subprocess.run([sys.executable, "-m", "exovortex", "geom", "--config", cfg, "--out", str(tmp_path),
                        "--threads", "1"], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["samples"] == 8
