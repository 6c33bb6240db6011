"""Boundary vortex method: tangency at the evaluation points plus a
circulation constraint.

Rows ``i = 1..N-1`` read ``(L/N) sum_j B_N[i, j] gamma_j = L f(s~_i)`` with
``f = 2 pi u_P . n``; the last row is ``mean(gamma) = gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import MeshError, SingularSystem
from .fields import BoundaryDensity, VorticityField, velocity_fullplane
from .geometry import BoundaryCurve
from .kernels import KernelMatrices, assemble
from .mesh import BoundaryMesh


@dataclass(eq=False)
class VortexSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    mesh: BoundaryMesh
    curve: BoundaryCurve
    gamma: float
    eval_points: np.ndarray
    eval_normals: np.ndarray
    lu: tuple | None = field(default=None, repr=False)

    def factor(self):
        if self.lu is None:
            self.lu = linalg.factor(self.matrix)
        return self.lu

    def with_rhs(self, omega: VorticityField | None, gamma: float) -> "VortexSystem":
        """Same matrix (and factorization), new right-hand side."""
        rhs = vortex_rhs(self.curve.length, self.eval_points, self.eval_normals, omega, gamma)
        return VortexSystem(self.matrix, rhs, self.mesh, self.curve, float(gamma),
                            self.eval_points, self.eval_normals, self.lu)


def vortex_matrix(kernels: KernelMatrices) -> np.ndarray:
    N, L = kernels.N, kernels.length
    M = np.empty((N, N))
    M[:-1] = (L / N) * kernels.B_rect
    M[-1] = 1.0 / N
    return M


def vortex_rhs(L: float, points, normals, omega: VorticityField | None, gamma: float) -> np.ndarray:
    n = len(points)
    rhs = np.empty(n)
    if omega is None or not omega.blobs:
        rhs[:-1] = 0.0
    else:
        u = velocity_fullplane(omega, points[:-1])
        rhs[:-1] = L * 2.0 * math.pi * np.sum(u * normals[:-1], axis=1)
    rhs[-1] = gamma
    return rhs


def build_system(curve: BoundaryCurve, mesh: BoundaryMesh, omega: VorticityField | None = None,
                 gamma: float = 0.0, kernels: KernelMatrices | None = None,
                 check_blobs: bool = True) -> VortexSystem:
    if mesh.flavor != "vortex":
        raise MeshError("the vortex method needs a vortex-flavor mesh")
    if omega is not None and check_blobs:
        omega.check_in_fluid(curve)
    kernels = assemble(curve, mesh) if kernels is None else kernels
    pts = curve.point(mesh.s_tilde)
    nrm = curve.normal(mesh.s_tilde)
    return VortexSystem(vortex_matrix(kernels), vortex_rhs(curve.length, pts, nrm, omega, gamma),
                        mesh, curve, float(gamma), pts, nrm)


def solve(system: VortexSystem) -> BoundaryDensity:
    """Dense LU solve; raises :class:`SingularSystem` for a tiny pivot or a
    residual that fails the backward-error test."""
    lu = system.factor()
    g = linalg.solve_factored(lu, system.rhs)
    ok, res = linalg.residual_ok(system.matrix, g, system.rhs)
    if not ok:
        raise SingularSystem(f"residual {res:.3g} too large; system is numerically singular")
    return BoundaryDensity("vortex", g, system.mesh, system.curve, system.gamma, None,
                           {"residual": res, "mean": float(g.mean())})
