"""Boundary meshes in arc length.

Two flavors are supported:

``vortex``
    nodes ``s_i`` near ``theta_i = (i-1)L/N`` and evaluation points ``s_tilde_i``
    near the midpoints ``(i-1/2)L/N``, perturbed by at most ``c N^-(kappa+1)``.
``charge``
    evaluation points collocated with the nodes, both within ``c N^-kappa`` of
    ``theta_i``.

In both flavors ``s_1 = 0`` is never perturbed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientSamples, MeshError, OrderingViolated
from .geometry import BoundaryCurve

FLAVORS = ("vortex", "charge")


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    N: int
    flavor: str
    s: np.ndarray
    s_tilde: np.ndarray
    length: float
    kappa: int = 2
    perturb_amplitude: float = 0.0
    seed: int = 0

    @property
    def theta(self) -> np.ndarray:
        return self.length * np.arange(self.N) / self.N

    @property
    def theta_tilde(self) -> np.ndarray:
        """Unperturbed positions of the evaluation points."""
        if self.flavor == "vortex":
            return self.length * (np.arange(self.N) + 0.5) / self.N
        return self.theta

    @property
    def is_uniform(self) -> bool:
        return self.deviation() == 0.0

    def deviation(self) -> float:
        """Largest distance of any node from its unperturbed position."""
        return float(max(np.abs(self.s - self.theta).max(),
                         np.abs(self.s_tilde - self.theta_tilde).max()))

    def to_dict(self) -> dict:
        return {"N": self.N, "flavor": self.flavor, "kappa": self.kappa,
                "amplitude": self.perturb_amplitude, "seed": self.seed}


def _check_args(N: int, flavor: str) -> None:
    if int(N) != N or N < 2:
        raise MeshError(f"N must be an integer >= 2, got {N}")
    if flavor not in FLAVORS:
        raise MeshError(f"flavor must be one of {FLAVORS}, got {flavor!r}")


def uniform_mesh(curve: BoundaryCurve, N: int, flavor: str = "vortex") -> BoundaryMesh:
    _check_args(N, flavor)
    L = curve.length
    s = L * np.arange(N) / N
    st = L * (np.arange(N) + 0.5) / N if flavor == "vortex" else s.copy()
    return BoundaryMesh(int(N), flavor, s, st, L, kappa=2, perturb_amplitude=0.0, seed=0)


def perturbed_mesh(curve: BoundaryCurve, N: int, flavor: str = "vortex", kappa: int = 2,
                   amplitude: float = 1.0, seed: int = 0) -> BoundaryMesh:
    """Uniform mesh with i.i.d. uniform offsets of size ``amplitude * N^-(kappa+1)``
    (vortex) or ``amplitude * N^-kappa`` (charge), reproducible from ``seed``.

    Raises
    ------
    OrderingViolated
        if the offsets break monotonicity (or, for the vortex flavor, the
        interleaving ``s_i < s_tilde_i < s_{i+1}``).
    """
    _check_args(N, flavor)
    if int(kappa) != kappa or kappa < 2:
        raise MeshError(f"kappa must be an integer >= 2, got {kappa}")
    if amplitude < 0:
        raise MeshError("amplitude must be >= 0")
    base = uniform_mesh(curve, N, flavor)
    if amplitude == 0:
        return BoundaryMesh(base.N, flavor, base.s, base.s_tilde, base.length, int(kappa), 0.0, int(seed))
    scale = amplitude * float(N) ** (-(kappa + 1) if flavor == "vortex" else -kappa)
    rng = np.random.default_rng(seed)
    ds = rng.uniform(-1.0, 1.0, N) * scale
    dst = rng.uniform(-1.0, 1.0, N) * scale
    ds[0] = 0.0
    s = base.s + ds
    st = base.s_tilde + dst
    L = curve.length
    if flavor == "vortex":
        merged = np.empty(2 * N)
        merged[0::2], merged[1::2] = s, st
        ok = np.all(np.diff(merged) > 0) and merged[-1] < L
    else:
        ok = np.all(np.diff(s) > 0) and s[-1] < L and np.all(np.diff(st) > 0) and st[-1] - st[0] < L
    if not ok:
        raise OrderingViolated(f"perturbation of size {scale:.3g} breaks node ordering at N={N}")
    return BoundaryMesh(int(N), flavor, s, st, L, int(kappa), float(amplitude), int(seed))


def loglog_slope(N: Sequence[float], err: Sequence[float]) -> float:
    """Least-squares slope of log(err) against log(N)."""
    N = np.asarray(N, dtype=float)
    err = np.asarray(err, dtype=float)
    if N.size < 2:
        raise InsufficientSamples("need at least two points to fit a slope")
    return float(np.polyfit(np.log(N), np.log(err), 1)[0])


def validate_mesh(meshes: Sequence[BoundaryMesh], curve: BoundaryCurve | None = None) -> dict:
    """Fit the decay order of the mesh deviation across a family of meshes.

    A family made of uniform meshes reports ``measured_deviation_order = inf``.
    """
    meshes = list(meshes)
    if len(meshes) < 3:
        raise InsufficientSamples("validate_mesh needs meshes for at least 3 values of N")
    flavors = {m.flavor for m in meshes}
    if len(flavors) != 1:
        raise MeshError("mesh family mixes flavors")
    if curve is not None and any(abs(m.length - curve.length) > 1e-12 * curve.length for m in meshes):
        raise MeshError("mesh does not belong to this curve")
    Ns = [m.N for m in meshes]
    dev = [m.deviation() for m in meshes]
    if max(dev) == 0.0:
        order = math.inf
    elif min(dev) == 0.0:
        raise InsufficientSamples("family mixes uniform and perturbed meshes")
    else:
        order = loglog_slope(Ns, dev)
    return {"flavor": flavors.pop(), "N": Ns, "deviation": dev, "measured_deviation_order": order}
