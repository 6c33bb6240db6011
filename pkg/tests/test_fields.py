import math

import numpy as np
import pytest

from exovortex.errors import BlobTouchesBoundary, SingularEvaluation
from exovortex.fields import (Blob, BoundaryDensity, HStarSpec, VorticityField, biot_savart, circulation,
                              harmonic_field, velocity_charge, velocity_fullplane, velocity_vortex_sheet)
from exovortex.mesh import uniform_mesh


def density(curve, values, method="vortex", gamma=0.0, hstar=None):
    values = np.asarray(values, dtype=float)
    flavor = "vortex" if method == "vortex" else "charge"
    return BoundaryDensity(method, values, uniform_mesh(curve, len(values), flavor), curve, gamma, hstar)


def test_point_vortex_unit_speed():
    om = VorticityField((Blob((0.0, 0.0), 2 * math.pi),))
    assert np.allclose(velocity_fullplane(om, [1.0, 0.0]), [0, 1], atol=1e-15)


def test_antisymmetric_pair_cancels_on_axis():
    om = VorticityField((Blob((-1.0, 0.0), 1.0), Blob((1.0, 0.0), -1.0)))
    # on the perpendicular bisector the components along the pair cancel
    u = velocity_fullplane(om, [0.0, 2.0])
    assert abs(u[0]) < 1e-16 and abs(u[1]) > 1e-3
    u0 = velocity_fullplane(VorticityField((Blob((-1.0, 0.0), 1.0), Blob((1.0, 0.0), 1.0))), [0.0, 0.0])
    assert np.allclose(u0, 0, atol=1e-16)


def test_gaussian_blob():
    om = VorticityField((Blob((0.0, 0.0), 1.0, 0.1),))
    expect = (1 - math.exp(-50)) / (2 * math.pi)
    u = velocity_fullplane(om, [1.0, 0.0])
    assert u[0] == pytest.approx(0, abs=1e-17) and u[1] == pytest.approx(expect, rel=1e-14)
    assert u[1] == pytest.approx(0.159154, abs=1e-6)
    # regular at its own center
    assert np.allclose(velocity_fullplane(om, [0.0, 0.0]), 0)


def test_point_vortex_singular():
    with pytest.raises(SingularEvaluation):
        biot_savart(np.array([1.0, 0.0]), np.array([[1.0, 0.0]]), np.array([1.0]))


def test_skip_self():
    c = np.array([[0.0, 0.0], [1.0, 0.0]])
    u = biot_savart(c, c, np.array([1.0, 1.0]), skip_self=True)
    assert np.allclose(u[0], [0, -1 / (2 * math.pi)]) and np.allclose(u[1], [0, 1 / (2 * math.pi)])


def test_blob_must_be_in_fluid(disk):
    with pytest.raises(BlobTouchesBoundary):
        VorticityField((Blob((0.5, 0.0), 1.0),)).check_in_fluid(disk)
    with pytest.raises(BlobTouchesBoundary):
        VorticityField((Blob((1.05, 0.0), 1.0, 0.1),)).check_in_fluid(disk)
    VorticityField((Blob((1.2, 0.0), 1.0, 0.1),)).check_in_fluid(disk)


def test_zero_sheet(ellipse):
    assert np.all(velocity_vortex_sheet(density(ellipse, np.zeros(16)), None, [[3.0, 1.0]]) == 0)


def test_constant_sheet_on_disk(disk):
    u = velocity_vortex_sheet(density(disk, np.ones(64)), None, [2.0, 0.0])
    assert np.allclose(u, [0, 1 / (4 * math.pi)], atol=1e-9)


def test_sheet_circulation(ellipse):
    g = 0.7 + np.sin(np.arange(32))
    d = density(ellipse, g)
    circ = circulation(lambda x: velocity_vortex_sheet(d, None, x), 3.0, 1024)
    assert circ == pytest.approx(g.mean(), abs=1e-8)


def test_sheet_singular_on_node(disk):
    with pytest.raises(SingularEvaluation):
        velocity_vortex_sheet(density(disk, np.ones(8)), None, [1.0, 0.0])


def test_charge_examples(disk):
    assert np.all(velocity_charge(density(disk, np.zeros(8), "charge"), None, [[2.0, 0.0]]) == 0)
    u = velocity_charge(density(disk, np.zeros(8), "charge", gamma=1.0, hstar=HStarSpec()), None, [2.0, 0.0])
    # x^perp / (2 pi |x|^2) at (2, 0)
    assert np.allclose(u, [0, 1 / (4 * math.pi)], atol=1e-16)
    g = np.zeros(8)
    g[0] = 8.0
    u = velocity_charge(density(disk, g, "charge"), None, [2.0, 0.0])
    assert np.allclose(u, [1 / (2 * math.pi), 0], atol=1e-16)


def test_charge_sheet_has_no_circulation(ellipse):
    d = density(ellipse, np.cos(np.arange(32)), "charge")
    assert abs(circulation(lambda x: velocity_charge(d, None, x), 3.0)) < 1e-12


def test_harmonic_field():
    assert np.allclose(harmonic_field(HStarSpec(), [0.0, 3.0]), [-1 / (6 * math.pi), 0], atol=1e-16)
    assert np.allclose(harmonic_field(HStarSpec("point_vortex_at", (0, 0)), [1.0, 0.0]), [0, 1 / (2 * math.pi)])
    h = HStarSpec("point_vortex_at", (0.3, -0.2))
    assert circulation(lambda x: harmonic_field(h, x), 2.0, 1024) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(SingularEvaluation):
        harmonic_field(h, [0.3, -0.2])


def _div_curl(fn, x, h=1e-4):
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    dux = (fn(x + ex) - fn(x - ex)) / (2 * h)
    duy = (fn(x + ey) - fn(x - ey)) / (2 * h)
    return dux[0] + duy[1], dux[1] - duy[0]


@pytest.mark.parametrize("method", ["vortex", "charge"])
def test_fields_are_harmonic_off_boundary(ellipse, method):
    g = 1.0 + 0.5 * np.cos(np.arange(24))
    d = density(ellipse, g, method, gamma=0.3, hstar=HStarSpec())
    fn = lambda x: velocity_vortex_sheet(d, None, x) if method == "vortex" else velocity_charge(d, None, x)
    for x in ([3.0, 0.5], [0.0, 2.0], [-2.5, -1.5], [0.5, 0.1]):
        div, curl = _div_curl(fn, np.array(x))
        assert abs(div) + abs(curl) <= 1e-6


def test_decay_rates(ellipse):
    far = np.array([10.0, 30.0, 100.0, 300.0, 1000.0])
    dirs = np.stack((far * 0.6, far * 0.8), axis=-1)
    g = np.cos(2 * math.pi * np.arange(32) / 32)
    with_mean = density(ellipse, g + 1.0)
    no_mean = density(ellipse, g - g.mean())
    s1 = np.hypot(*velocity_vortex_sheet(with_mean, None, dirs).T) * far
    s2 = np.hypot(*velocity_vortex_sheet(no_mean, None, dirs).T) * far**2
    assert s1.max() / s1.min() < 1.1  # C/|x|
    assert s2.max() / s2.min() < 1.5  # C/|x|^2
