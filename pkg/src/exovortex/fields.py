"""Velocity fields: full-plane Biot-Savart, boundary vortex sheets, boundary
charges and the reference harmonic fields."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import BlobTouchesBoundary, SingularEvaluation
from .geometry import BoundaryCurve, perp
from .mesh import BoundaryMesh

SINGULAR_DIST = 1e-12
INV_2PI = 1.0 / (2.0 * math.pi)


@dataclass(frozen=True)
class Blob:
    center: tuple[float, float]
    strength: float
    core_radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if self.core_radius < 0:
            raise ValueError("core_radius must be >= 0")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Blob":
        unknown = set(d) - {"center", "strength", "core_radius"}
        if unknown:
            raise ValueError(f"unknown blob keys {sorted(unknown)}")
        return cls(tuple(d["center"]), float(d["strength"]), float(d.get("core_radius", 0.0)))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "strength": self.strength, "core_radius": self.core_radius}


@dataclass(frozen=True)
class VorticityField:
    """A finite collection of point vortices (``core_radius == 0``) and
    Gaussian blobs."""

    blobs: tuple[Blob, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "blobs", tuple(self.blobs))

    @classmethod
    def from_arrays(cls, centers, strengths, core_radii=None) -> "VorticityField":
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        strengths = np.broadcast_to(np.asarray(strengths, dtype=float), (len(centers),))
        radii = np.zeros(len(centers)) if core_radii is None else \
            np.broadcast_to(np.asarray(core_radii, dtype=float), (len(centers),))
        return cls(tuple(Blob(tuple(c), float(g), float(r)) for c, g, r in zip(centers, strengths, radii)))

    @property
    def centers(self) -> np.ndarray:
        return np.array([b.center for b in self.blobs], dtype=float).reshape(-1, 2)

    @property
    def strengths(self) -> np.ndarray:
        return np.array([b.strength for b in self.blobs], dtype=float)

    @property
    def core_radii(self) -> np.ndarray:
        return np.array([b.core_radius for b in self.blobs], dtype=float)

    @property
    def total_mass(self) -> float:
        return float(self.strengths.sum())

    def check_in_fluid(self, curve: BoundaryCurve) -> None:
        """Raise unless every blob sits in the fluid, farther from the boundary than its core."""
        if not self.blobs:
            return
        c = self.centers
        inside = curve.contains(c)
        dist = curve.distance(c)
        bad = inside | (dist <= np.maximum(self.core_radii, SINGULAR_DIST))
        if bad.any():
            k = int(np.argmax(bad))
            raise BlobTouchesBoundary(
                f"blob {k} at ({c[k, 0]:.6g}, {c[k, 1]:.6g}) is not strictly inside the fluid "
                f"(distance {dist[k]:.3g}, core {self.core_radii[k]:.3g})")


def biot_savart(x, centers, strengths, core_radii=None, skip_self: bool = False) -> np.ndarray:
    """``(1/2pi) sum_k g_k (x - c_k)^perp / |x - c_k|^2``, Gaussian-mollified where
    ``core_radii > 0``.

    With ``skip_self`` the points ``x`` are the centers themselves and the
    diagonal (self) contribution is dropped.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.reshape(-1, 2)
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    strengths = np.asarray(strengths, dtype=float).reshape(-1)
    if centers.shape[0] == 0:
        return np.zeros(shape)
    d = x[:, None, :] - centers[None, :, :]
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    if skip_self:
        np.fill_diagonal(r2, np.inf)
    sig = np.zeros(len(centers)) if core_radii is None else np.asarray(core_radii, dtype=float).reshape(-1)
    point = sig == 0
    if np.any(r2[:, point] < SINGULAR_DIST**2):
        raise SingularEvaluation("velocity requested at a point-vortex center")
    with np.errstate(divide="ignore", invalid="ignore"):
        w = strengths / r2
        if not point.all():
            moll = -np.expm1(-r2 / (2.0 * np.where(point, 1.0, sig) ** 2))
            w = np.where(point, w, w * moll)
            # the mollified kernel is regular at its center
            w = np.where(r2 == 0, 0.0, w)
    if skip_self:
        w[np.isinf(r2)] = 0.0
    u = np.empty_like(x)
    u[:, 0] = -INV_2PI * np.sum(w * d[..., 1], axis=1)
    u[:, 1] = INV_2PI * np.sum(w * d[..., 0], axis=1)
    return u.reshape(shape)


def velocity_fullplane(omega: VorticityField, x) -> np.ndarray:
    return biot_savart(x, omega.centers, omega.strengths, omega.core_radii)


@dataclass(frozen=True)
class HStarSpec:
    """Reference harmonic field: ``x^perp / (2pi |x|^2)`` for the disk form, or a
    point vortex of unit strength at ``x_star`` inside the obstacle."""

    kind: str = "disk_harmonic"
    x_star: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("disk_harmonic", "point_vortex_at"):
            raise ValueError(f"unknown hstar kind {self.kind!r}")
        object.__setattr__(self, "x_star", (float(self.x_star[0]), float(self.x_star[1])))
        if self.kind == "disk_harmonic" and self.x_star != (0.0, 0.0):
            raise ValueError("disk_harmonic is centered at the origin")

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.x_star)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "x_star": list(self.x_star)}


def harmonic_field(hstar: HStarSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = x - hstar.center
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    if np.any(r2 < SINGULAR_DIST**2):
        raise SingularEvaluation("harmonic field evaluated at its center")
    return INV_2PI * perp(d) / r2[..., None]


@dataclass(frozen=True, eq=False)
class BoundaryDensity:
    method: str
    values: np.ndarray
    mesh: BoundaryMesh
    curve: BoundaryCurve
    gamma: float = 0.0
    hstar: HStarSpec | None = None
    info: dict = field(default_factory=dict)

    @property
    def nodes(self) -> np.ndarray:
        return self.curve.point(self.mesh.s)


def _sheet_terms(nodes, weights, x, rotate: bool) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.reshape(-1, 2)
    d = x[:, None, :] - nodes[None, :, :]
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    if np.any(r2 < SINGULAR_DIST**2):
        raise SingularEvaluation("field evaluated on a boundary node")
    if rotate:
        d = perp(d)
    u = INV_2PI * np.einsum("ij,ijk->ik", weights / r2, d)
    return u.reshape(shape)


def velocity_vortex_sheet(density: BoundaryDensity, curve: BoundaryCurve | None, x) -> np.ndarray:
    """Field of the boundary point vortices ``gamma_j / N`` at the nodes."""
    curve = density.curve if curve is None else curve
    nodes = curve.point(density.mesh.s)
    return _sheet_terms(nodes, np.asarray(density.values) / density.mesh.N, x, rotate=True)


def velocity_charge(density: BoundaryDensity, curve: BoundaryCurve | None, x) -> np.ndarray:
    """Field of the boundary charges plus ``gamma * H_*``."""
    curve = density.curve if curve is None else curve
    nodes = curve.point(density.mesh.s)
    u = _sheet_terms(nodes, np.asarray(density.values) / density.mesh.N, x, rotate=False)
    if density.gamma != 0.0:
        u = u + density.gamma * harmonic_field(density.hstar or HStarSpec(), x)
    return u


def boundary_velocity(density: BoundaryDensity, x) -> np.ndarray:
    """Dispatch on ``density.method``."""
    if density.method == "vortex":
        return velocity_vortex_sheet(density, None, x)
    return velocity_charge(density, None, x)


def circulation(field_fn, radius: float, n: int = 1024, center=(0.0, 0.0)) -> float:
    """Trapezoid approximation of the circulation on a circle."""
    t = 2.0 * math.pi * np.arange(n) / n
    pts = np.stack((center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)), axis=-1)
    tau = np.stack((-np.sin(t), np.cos(t)), axis=-1)
    u = field_fn(pts)
    return float(np.sum(u * tau) * 2.0 * math.pi * radius / n)


def blobs_from_list(items: Iterable[Mapping[str, Any]]) -> VorticityField:
    return VorticityField(tuple(Blob.from_dict(b) for b in items))
