import math

import numpy as np
import pytest

from exovortex.errors import BlobTouchesBoundary, MeshError, SingularSystem
from exovortex.fields import Blob, VorticityField, velocity_fullplane, velocity_vortex_sheet
from exovortex.kernels import l2
from exovortex.linalg import factor
from exovortex.mesh import uniform_mesh
from exovortex.oracle import DiskExactSolution, exact_disk_remainder
from exovortex.studies import smallest_solvable_N
from exovortex.vortex_solver import build_system, solve, vortex_rhs

ONE = VorticityField((Blob((2.0, 0.0), 1.0),))


def test_empty_field_rhs(ellipse):
    sysm = build_system(ellipse, uniform_mesh(ellipse, 8), None, 1.0)
    assert np.array_equal(sysm.rhs, [0, 0, 0, 0, 0, 0, 0, 1.0])
    assert sysm.matrix[-1].sum() == pytest.approx(1.0, abs=1e-15)


def test_disk_rhs_closed_form(disk):
    m = uniform_mesh(disk, 16)
    sysm = build_system(disk, m, ONE, 0.0)
    t = m.s_tilde[:-1]
    x = np.stack((np.cos(t), np.sin(t)), axis=-1)
    d = x - [2.0, 0.0]
    uP = np.stack((-d[:, 1], d[:, 0]), axis=-1) / (2 * math.pi * np.sum(d**2, axis=1))[:, None]
    # tangency rows carry L * 2 pi u_P . n, matching the (L/N) B scaling of the matrix
    assert np.allclose(sysm.rhs[:-1], disk.length * 2 * math.pi * np.sum(uP * x, axis=1), atol=1e-14)


def test_reflection_symmetry(ellipse):
    m = uniform_mesh(ellipse, 16)
    pts, nrm = ellipse.point(m.s_tilde), ellipse.normal(m.s_tilde)
    pad = lambda a: np.vstack((a, [[0.0, 0.0]]))

    def rows(y):
        om = VorticityField((Blob((2.5, y), 1.0),))
        return vortex_rhs(ellipse.length, pad(pts), pad(nrm), om, 0.0)[:-1]

    assert np.allclose(rows(-0.5), -rows(0.5)[::-1], atol=1e-13)


def test_disk_constant_solution(disk):
    g = solve(build_system(disk, uniform_mesh(disk, 32), None, 1.0)).values
    assert np.abs(g - 1.0).max() < 1e-10


def test_homogeneous(ellipse):
    g = solve(build_system(ellipse, uniform_mesh(ellipse, 32), None, 0.0)).values
    assert np.abs(g).max() == 0.0


def test_disk_remainder_match(disk):
    d = solve(build_system(disk, uniform_mesh(disk, 64), ONE, 0.0))
    ur = exact_disk_remainder(DiskExactSolution([[2.0, 0.0]], [1.0]), np.array([3.0, 0.0]))
    assert np.abs(velocity_vortex_sheet(d, None, np.array([3.0, 0.0])) - ur).max() < 1e-6


def test_mean_and_residual(ellipse):
    om = VorticityField((Blob((3.0, 0.5), 1.0), Blob((-2.5, -1.0), -0.4, 0.2)))
    sysm = build_system(ellipse, uniform_mesh(ellipse, 64), om, 0.7)
    d = solve(sysm)
    assert d.values.mean() == pytest.approx(0.7, abs=1e-10)
    M, g, b = sysm.matrix, d.values, sysm.rhs
    bound = 1e-10 * (np.abs(M).sum(axis=1).max() * np.abs(g).max() + np.abs(b).max())
    assert np.abs(M @ g - b).max() <= bound


def test_tangency_at_midpoints(ellipse):
    om = VorticityField((Blob((3.0, 0.5), 1.0),))
    sysm = build_system(ellipse, uniform_mesh(ellipse, 64), om, 0.3)
    d = solve(sysm)
    x = sysm.eval_points[:-1]
    un = np.sum((velocity_vortex_sheet(d, None, x) + velocity_fullplane(om, x)) * sysm.eval_normals[:-1], axis=1)
    assert np.abs(un).max() <= 1e-9 * np.abs(sysm.rhs).max()


def test_linearity(ellipse):
    m = uniform_mesh(ellipse, 48)
    o1 = VorticityField((Blob((3.0, 0.5), 1.0),))
    o2 = VorticityField((Blob((-2.0, 2.0), -0.6, 0.1),))
    both = VorticityField(o1.blobs + o2.blobs)
    g1 = solve(build_system(ellipse, m, o1, 0.2)).values
    g2 = solve(build_system(ellipse, m, o2, -1.1)).values
    g12 = solve(build_system(ellipse, m, both, -0.9)).values
    assert np.abs(g12 - g1 - g2).max() <= 1e-10


@pytest.mark.parametrize("fixture", ["disk", "ellipse"])
def test_solution_bound_constant_stable(fixture, request):
    curve = request.getfixturevalue(fixture)
    om = VorticityField((Blob((3.0, 0.5), 1.0),))
    C = []
    for N in (16, 32, 64, 128, 256):
        sysm = build_system(curve, uniform_mesh(curve, N), om, 0.5)
        v = sysm.rhs[:-1] / curve.length
        g = solve(sysm).values
        C.append(l2(g) / (np.abs(v).max() + 0.5 + math.sqrt(N) * abs(v.mean())))
    assert max(C) / min(C) < 1.5


def test_preconditions(disk):
    with pytest.raises(BlobTouchesBoundary):
        build_system(disk, uniform_mesh(disk, 16), VorticityField((Blob((0.2, 0.0), 1.0),)), 0.0)
    with pytest.raises(MeshError):
        build_system(disk, uniform_mesh(disk, 16, "charge"), None, 0.0)
    with pytest.raises(SingularSystem):
        factor(np.zeros((3, 3)))
    with pytest.raises(SingularSystem):
        factor(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_smallest_solvable_N_is_recorded(disk, ellipse, nonconvex):
    for curve in (disk, ellipse, nonconvex):
        assert smallest_solvable_N(curve) is not None
