"""Vortex blob dynamics outside an obstacle.

Each blob moves with the full-plane field of the other blobs plus the
boundary correction: a boundary density re-solved at every Runge-Kutta stage
(``vortex``, ``charge``, ``charge_lambda``), the exact image field of the unit
disk (``exact_disk``), or nothing (``free``, no obstacle).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .charge_solver import LambdaSpec, build_charge_system, solve_charge
from .errors import BoundaryCollision
from .fields import BoundaryDensity, HStarSpec, VorticityField, biot_savart, boundary_velocity
from .geometry import BoundaryCurve
from .mesh import BoundaryMesh, loglog_slope, perturbed_mesh, uniform_mesh
from .oracle import DiskExactSolution, exact_disk_remainder
from .vortex_solver import VortexSystem, build_system, solve

METHODS = ("vortex", "charge", "charge_lambda", "exact_disk", "free")
COLLISION_FRACTION = 1e-3


@dataclass(eq=False)
class SimulationState:
    positions: np.ndarray
    strengths: np.ndarray
    core_radii: np.ndarray
    t: float = 0.0
    gamma: float = 0.0
    method: str = "vortex"
    curve: BoundaryCurve | None = None
    mesh: BoundaryMesh | None = None
    h: float = 1e-2
    hstar: HStarSpec | None = None
    lam: LambdaSpec | None = None
    history: list = field(default_factory=list)
    _system: Any = field(default=None, repr=False)

    @property
    def omega(self) -> VorticityField:
        return VorticityField.from_arrays(self.positions, self.strengths, self.core_radii)

    @property
    def total_circulation(self) -> float:
        return float(self.strengths.sum())


def make_state(positions, strengths, core_radii=0.0, *, method: str = "vortex",
               curve: BoundaryCurve | None = None, mesh: BoundaryMesh | dict | None = None,
               gamma: float = 0.0, h: float = 1e-2, hstar: HStarSpec | None = None,
               lam: LambdaSpec | None = None) -> SimulationState:
    """Validate inputs and prepare the (blob-independent) boundary matrix once.

    ``mesh`` may be a ready mesh or a dict ``{"N", "kappa", "amplitude", "seed"}``;
    its flavor follows from ``method``.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    pos = np.array(positions, dtype=float).reshape(-1, 2)
    s = np.broadcast_to(np.asarray(strengths, dtype=float), (len(pos),)).copy()
    r = np.broadcast_to(np.asarray(core_radii, dtype=float), (len(pos),)).copy()
    state = SimulationState(pos, s, r, 0.0, float(gamma), method, curve, None, float(h), hstar, lam)
    if method == "free":
        return state
    if curve is None:
        raise ValueError(f"method {method!r} needs a curve")
    if method == "exact_disk":
        if curve.spec.kind != "circle" or curve.spec.radius != 1.0 or curve.spec.center != (0.0, 0.0):
            raise ValueError("exact_disk needs the unit circle centered at the origin")
        _check_collision(state)
        return state
    flavor = "vortex" if method == "vortex" else "charge"
    if mesh is None:
        raise ValueError(f"method {method!r} needs a mesh")
    if isinstance(mesh, dict):
        cfg = dict(mesh)
        N = int(cfg.pop("N"))
        kappa = int(cfg.pop("kappa", 2))
        amp = float(cfg.pop("amplitude", 0.0))
        seed = int(cfg.pop("seed", 0))
        cfg.pop("flavor", None)
        if cfg:
            raise ValueError(f"unknown mesh keys {sorted(cfg)}")
        mesh = perturbed_mesh(curve, N, flavor, kappa, amp, seed) if amp > 0 else uniform_mesh(curve, N, flavor)
    if mesh.flavor != flavor:
        raise ValueError(f"method {method!r} needs a {flavor} mesh")
    state.mesh = mesh
    state.omega.check_in_fluid(curve)
    if method == "vortex":
        sysm = build_system(curve, mesh, None, gamma)
    else:
        if method == "charge_lambda" and lam is None:
            lam = LambdaSpec("const", c=math.pi / curve.length)
            state.lam = lam
        sysm = build_charge_system(curve, mesh, None, gamma, hstar,
                                   lam if method == "charge_lambda" else None)
    sysm.factor()
    state._system = sysm
    _check_collision(state)
    return state


def boundary_density(state: SimulationState, positions: np.ndarray | None = None) -> BoundaryDensity:
    """Boundary density for the blobs at ``positions`` (default: current ones)."""
    pos = state.positions if positions is None else positions
    omega = VorticityField.from_arrays(pos, state.strengths, state.core_radii)
    sysm = state._system.with_rhs(omega, state.gamma)
    return solve(sysm) if isinstance(sysm, VortexSystem) else solve_charge(sysm)


def blob_velocities(state: SimulationState, positions: np.ndarray) -> np.ndarray:
    """Advection velocity of every blob, own singular term excluded."""
    u = biot_savart(positions, positions, state.strengths, state.core_radii, skip_self=True)
    if state.method == "free":
        return u
    if state.method == "exact_disk":
        return u + exact_disk_remainder(DiskExactSolution(positions, state.strengths, state.gamma), positions)
    return u + boundary_velocity(boundary_density(state, positions), positions)


def min_boundary_distance(state: SimulationState, positions: np.ndarray | None = None) -> float:
    if state.curve is None:
        return math.inf
    pos = state.positions if positions is None else positions
    if len(pos) == 0:
        return math.inf
    inside = state.curve.contains(pos)
    d = state.curve.distance(pos)
    return float(-d.max() if inside.any() else d.min())


def _check_collision(state: SimulationState, positions=None) -> float:
    d = min_boundary_distance(state, positions)
    if state.curve is not None and d < COLLISION_FRACTION * state.curve.length:
        raise BoundaryCollision(f"blob within {d:.3g} of the boundary at t = {state.t:.6g}")
    return d


def step(state: SimulationState, h: float | None = None) -> SimulationState:
    """One classical RK4 step; returns a new state (history is shared)."""
    h = state.h if h is None else float(h)
    x = state.positions
    k1 = blob_velocities(state, x)
    k2 = blob_velocities(state, x + 0.5 * h * k1)
    k3 = blob_velocities(state, x + 0.5 * h * k2)
    k4 = blob_velocities(state, x + h * k3)
    new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = replace(state, positions=new, t=state.t + h)
    _check_collision(out)
    return out


def _diagnostics(state: SimulationState, circ0: float) -> dict:
    row = {"t": state.t, "circulation": state.total_circulation,
           "circulation_drift": abs(state.total_circulation - circ0),
           "min_boundary_distance": min_boundary_distance(state)}
    if state.curve is not None and state.curve.spec.kind == "circle":
        c = np.asarray(state.curve.spec.center)
        row["radii"] = np.hypot(*(state.positions - c).T).tolist()
    return row


def run(initial: SimulationState, t_end: float, h: float | None = None, output_every: int = 1) -> dict:
    """Integrate to ``t_end`` (negative ``h`` integrates backward).

    Returns snapshot times, positions (``n_out x n_blobs x 2``) and diagnostics.
    """
    h = initial.h if h is None else float(h)
    if h == 0 or output_every < 1:
        raise ValueError("h must be nonzero and output_every >= 1")
    span = t_end - initial.t
    if span * h <= 0:
        raise ValueError("t_end must lie ahead of t in the direction of h")
    n_steps = max(1, int(math.ceil(span / h - 1e-9)))
    # the last step is shortened when h does not divide the interval
    last = span - (n_steps - 1) * h
    circ0 = initial.total_circulation
    s0 = initial.strengths.copy()
    state = initial
    times, snaps = [state.t], [state.positions.copy()]
    diags = [_diagnostics(state, circ0)]
    for k in range(1, n_steps + 1):
        state = step(state, h if k < n_steps else last)
        if k % output_every == 0 or k == n_steps:
            # snap the clock to the grid to avoid accumulating rounding in t
            state.t = initial.t + (k * h if k < n_steps else span)
            times.append(state.t)
            snaps.append(state.positions.copy())
            diags.append(_diagnostics(state, circ0))
    assert np.array_equal(state.strengths, s0), "blob strengths must never change"
    state.history.extend(diags)
    return {"t": np.array(times), "positions": np.array(snaps), "diagnostics": diags, "final": state}


def dynamic_convergence_study(setup: dict, N_list: Sequence[int], t_end: float,
                              h: float = 1e-2) -> dict:
    """Sup-in-time blob position error against the exact disk run, per N.

    ``setup`` keys: ``positions``, ``strengths``, ``gamma`` (default 0),
    ``method`` (default ``vortex``), ``kappa``, ``amplitude``, ``seed``.
    """
    from .geometry import CurveSpec, build_curve

    curve = build_curve(CurveSpec.circle(1.0))
    pos, s, gamma = setup["positions"], setup["strengths"], float(setup.get("gamma", 0.0))
    method = setup.get("method", "vortex")
    ref = run(make_state(pos, s, method="exact_disk", curve=curve, gamma=gamma, h=h), t_end, h)
    errors = []
    for N in N_list:
        mesh = {"N": int(N), "kappa": int(setup.get("kappa", 2)),
                "amplitude": float(setup.get("amplitude", 0.0)), "seed": int(setup.get("seed", 0))}
        traj = run(make_state(pos, s, method=method, curve=curve, mesh=mesh, gamma=gamma, h=h), t_end, h)
        errors.append(float(np.abs(traj["positions"] - ref["positions"]).max()))
    slope = loglog_slope(N_list, errors) if len(N_list) >= 2 and min(errors) > 0 else -math.inf
    return {"N": list(map(int, N_list)), "errors": errors, "order": -slope}
