"""Static reconstruction experiments shared by the CLI and the test suite."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .charge_solver import LambdaSpec, build_charge_system, solve_charge
from .fields import BoundaryDensity, HStarSpec, VorticityField, boundary_velocity, velocity_fullplane
from .geometry import BoundaryCurve
from .mesh import BoundaryMesh, loglog_slope, perturbed_mesh, uniform_mesh
from .oracle import DiskExactSolution, exact_disk_velocity
from .vortex_solver import build_system, solve

STATIC_METHODS = ("vortex", "charge", "charge_lambda")


def circle_points(radius: float, count: int) -> np.ndarray:
    t = 2.0 * math.pi * np.arange(count) / count
    return radius * np.stack((np.cos(t), np.sin(t)), axis=-1)


def mesh_for(curve: BoundaryCurve, method: str, N: int, kappa: int = 2, amplitude: float = 0.0,
             seed: int = 0) -> BoundaryMesh:
    flavor = "vortex" if method == "vortex" else "charge"
    if amplitude > 0:
        return perturbed_mesh(curve, N, flavor, kappa, amplitude, seed)
    return uniform_mesh(curve, N, flavor)


def solve_static(curve: BoundaryCurve, mesh: BoundaryMesh, method: str, omega: VorticityField,
                 gamma: float, hstar: HStarSpec | None = None,
                 lam: LambdaSpec | None = None) -> tuple[BoundaryDensity, object]:
    """Boundary density and the system it came from."""
    if method == "vortex":
        system = build_system(curve, mesh, omega, gamma)
        return solve(system), system
    if method not in STATIC_METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "charge_lambda" and lam is None:
        lam = LambdaSpec("const", c=math.pi / curve.length)
    system = build_charge_system(curve, mesh, omega, gamma, hstar,
                                 lam if method == "charge_lambda" else None)
    return solve_charge(system), system


def total_velocity(density: BoundaryDensity, omega: VorticityField, x) -> np.ndarray:
    return boundary_velocity(density, x) + velocity_fullplane(omega, x)


def disk_static_error(curve: BoundaryCurve, mesh: BoundaryMesh, method: str, omega: VorticityField,
                      gamma: float, eval_points, lam: LambdaSpec | None = None) -> float:
    """Sup error of the reconstructed flow against the exact unit-disk solution."""
    density, _ = solve_static(curve, mesh, method, omega, gamma, HStarSpec(), lam)
    exact = exact_disk_velocity(DiskExactSolution(omega.centers, omega.strengths, gamma), eval_points)
    return float(np.abs(total_velocity(density, omega, eval_points) - exact).max())


def disk_convergence(curve: BoundaryCurve, method: str, omega: VorticityField, gamma: float,
                     N_list: Sequence[int], eval_points, kappa: int = 2, amplitude: float = 0.0,
                     seed: int = 0, lam: LambdaSpec | None = None) -> dict:
    errs = [disk_static_error(curve, mesh_for(curve, method, N, kappa, amplitude, seed), method,
                              omega, gamma, eval_points, lam) for N in N_list]
    slopes = [math.nan] + [loglog_slope(N_list[:k + 1], errs[:k + 1]) if min(errs[:k + 1]) > 0 else -math.inf
                           for k in range(1, len(N_list))]
    return {"N": list(N_list), "errors": errs, "slope": slopes[-1], "slopes": slopes}


def smallest_solvable_N(curve: BoundaryCurve, method: str = "vortex", N_max: int = 64) -> int | None:
    """Smallest uniform-mesh N whose system factors and solves (recorded, never asserted)."""
    from .errors import SolverError

    omega = VorticityField()
    for N in range(2, N_max + 1):
        try:
            solve_static(curve, mesh_for(curve, method, N), method, omega, 1.0)
        except SolverError:
            continue
        return N
    return None
