import math

import numpy as np
import pytest

from exovortex.dynamics import dynamic_convergence_study, make_state, run, step
from exovortex.errors import BoundaryCollision

START = {"positions": [[2.0, 0.0]], "strengths": [1.0]}
OMEGA = -1.0 / (24.0 * math.pi)  # angular velocity of the single-vortex orbit


def exact_orbit(t):
    return 2.0 * np.stack((np.cos(OMEGA * t), np.sin(OMEGA * t)), axis=-1)


def test_zero_strength_blob_is_stationary(disk):
    s = make_state([[2.0, 0.5]], [0.0], method="vortex", curve=disk, mesh={"N": 32}, h=0.05)
    r = run(s, 1.0)
    assert np.abs(r["positions"] - [2.0, 0.5]).max() == 0.0


def test_exact_disk_orbit_full_period(disk):
    period = 48 * math.pi**2
    s = make_state(**START, method="exact_disk", curve=disk, h=1e-2)
    r = run(s, period, output_every=500)
    radii = np.hypot(*r["positions"][:, 0, :].T)
    assert np.abs(radii - 2.0).max() <= 1e-6
    assert np.abs(r["positions"][:, 0, :] - exact_orbit(r["t"])).max() < 1e-8
    assert np.allclose(r["positions"][-1, 0], [2.0, 0.0], atol=1e-8)


def test_vortex_and_charge_track_exact(disk):
    ref = run(make_state(**START, method="exact_disk", curve=disk, h=1e-2), 10.0)
    out = {}
    for method in ("vortex", "charge"):
        r = run(make_state(**START, method=method, curve=disk, mesh={"N": 128}, h=1e-2), 10.0)
        out[method] = r["positions"]
        assert np.abs(r["positions"] - ref["positions"]).max() <= 1e-5
    assert np.abs(out["vortex"] - out["charge"]).max() <= 1e-5


def test_free_pair_corotation():
    s = make_state([[1.0, 0.0], [-1.0, 0.0]], [2 * math.pi, 2 * math.pi], method="free", h=1e-3)
    period = 4 * math.pi  # angular speed 1/2
    quarter = run(s, period / 4, output_every=100)
    assert np.allclose(quarter["positions"][-1], [[0.0, 1.0], [0.0, -1.0]], atol=1e-9)
    full = run(s, period, output_every=1000)
    assert np.abs(full["positions"][-1] - s.positions).max() <= 1e-6


def test_reversibility():
    s = make_state([[1.0, 0.2], [-0.5, 0.4], [0.1, -1.0]], [1.0, -0.5, 2.0], method="free", h=1e-3)
    fwd = run(s, 1.0)["final"]
    back = run(fwd, 0.0, h=-1e-3)["final"]
    assert np.abs(back.positions - s.positions).max() <= 1e-6


def test_circulation_conserved_and_diagnostics(ellipse):
    s = make_state([[3.0, 0.0], [-3.0, 0.5]], [1.0, -0.4], 0.1, method="charge", curve=ellipse,
                   mesh={"N": 64}, gamma=0.5, h=0.05)
    r = run(s, 0.5, output_every=2)
    assert all(d["circulation_drift"] == 0.0 for d in r["diagnostics"])
    assert np.array_equal(r["final"].strengths, [1.0, -0.4])
    assert all(d["min_boundary_distance"] > 0 for d in r["diagnostics"])
    assert r["t"][-1] == pytest.approx(0.5, abs=1e-15)


def test_collision_aborts(disk):
    with pytest.raises(BoundaryCollision):
        make_state([[1.0005, 0.0]], [1.0], method="vortex", curve=disk, mesh={"N": 32})
    # a dipole aimed at the wall, stepped far too coarsely, lands inside the obstacle
    s = make_state([[-0.05, 1.5], [0.05, 1.5]], [-1.0, 1.0], method="vortex", curve=disk,
                   mesh={"N": 64}, h=0.3)
    with pytest.raises(BoundaryCollision):
        run(s, 3.0)


def test_rk4_step_matches_exact_orbit(disk):
    s = make_state(**START, method="exact_disk", curve=disk, h=0.1)
    s1 = step(s)
    assert s1.t == pytest.approx(0.1) and s.t == 0.0
    assert np.allclose(s1.positions[0], exact_orbit(0.1), atol=1e-12)


def test_uniform_convergence_study(disk):
    r = dynamic_convergence_study(START, [32, 64, 128], 2.0)
    assert r["errors"][-1] < 1e-8


def test_kappa2_convergence_study(disk):
    setup = dict(START, kappa=2, amplitude=1.0, seed=0)
    r = dynamic_convergence_study(setup, [32, 64, 128, 256], 10.0)
    assert r["order"] >= 1.7


def test_time_step_refinement_is_negligible():
    setup = dict(START, kappa=2, amplitude=1.0, seed=0)
    e1 = dynamic_convergence_study(setup, [256], 10.0, h=1e-2)["errors"][0]
    e2 = dynamic_convergence_study(setup, [256], 10.0, h=5e-3)["errors"][0]
    assert abs(e1 - e2) < 0.1 * e1
