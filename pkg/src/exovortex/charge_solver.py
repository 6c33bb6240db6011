"""Boundary charge method, basic and lambda-corrected, with conditioning
diagnostics.

Basic system::

    ((1/N) A_N + (pi/L) I) g = f,    f = -2 pi (u_P + gamma H_*) . n

The lambda variant subtracts the rank-one term ``lambda^N <g>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from . import linalg
from .errors import LambdaMeanNearTwoPi, MeshError, SolverError
from .fields import BoundaryDensity, HStarSpec, VorticityField, harmonic_field, velocity_fullplane
from .geometry import BoundaryCurve
from .kernels import KernelMatrices, assemble, kernel_pair
from .mesh import BoundaryMesh

RANK_ONE_TOL = 1e-6


@dataclass(frozen=True)
class LambdaSpec:
    """``const`` (value ``c``), ``sigma`` (interpolate between the sup and inf of
    the kernel with weight ``sigma``) or ``table`` (values at the evaluation points)."""

    kind: str = "const"
    c: float = 0.0
    sigma: float = 0.5
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("const", "sigma", "table"):
            raise ValueError(f"unknown lambda kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "LambdaSpec":
        """``const:c`` or ``sigma:s``."""
        kind, _, val = text.partition(":")
        if kind == "const":
            return cls("const", c=float(val))
        if kind == "sigma":
            return cls("sigma", sigma=float(val))
        raise ValueError(f"cannot parse lambda spec {text!r}")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "LambdaSpec":
        unknown = set(d) - {"kind", "c", "sigma", "values"}
        if unknown:
            raise ValueError(f"unknown lambda keys {sorted(unknown)}")
        return cls(d.get("kind", "const"), float(d.get("c", 0.0)), float(d.get("sigma", 0.5)),
                   tuple(d.get("values", ())))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c": self.c, "sigma": self.sigma, "values": list(self.values)}


def kernel_extremes(curve: BoundaryCurve, s_eval, n_samples: int = 2048) -> tuple[np.ndarray, np.ndarray]:
    """Sup and inf over the boundary of ``y -> (x - y) . n(x) / |x - y|^2`` at ``x = l(s)``."""
    s_eval = np.atleast_1d(np.asarray(s_eval, dtype=float))
    ys = curve.length * np.arange(n_samples) / n_samples
    sup = np.empty(len(s_eval))
    inf = np.empty(len(s_eval))
    kap = curve.curvature(s_eval)
    for a in range(0, len(s_eval), 256):
        K, _, _ = kernel_pair(curve, s_eval[a:a + 256], ys)
        sup[a:a + 256] = np.maximum(K.max(axis=1), 0.5 * kap[a:a + 256])
        inf[a:a + 256] = np.minimum(K.min(axis=1), 0.5 * kap[a:a + 256])
    return sup, inf


def lambda_values(spec: LambdaSpec, curve: BoundaryCurve, mesh: BoundaryMesh) -> np.ndarray:
    if spec.kind == "const":
        return np.full(mesh.N, float(spec.c))
    if spec.kind == "table":
        v = np.asarray(spec.values, dtype=float)
        if v.shape != (mesh.N,):
            raise ValueError(f"tabulated lambda needs {mesh.N} values, got {v.size}")
        return v
    sup, inf = kernel_extremes(curve, mesh.s_tilde)
    return (1.0 - spec.sigma) * sup + spec.sigma * inf


@dataclass(eq=False)
class ChargeSystem:
    variant: str
    matrix: np.ndarray
    rhs: np.ndarray
    mesh: BoundaryMesh
    curve: BoundaryCurve
    gamma: float
    hstar: HStarSpec
    base_matrix: np.ndarray
    lambda_values: np.ndarray | None
    eval_points: np.ndarray
    eval_normals: np.ndarray
    info: dict = field(default_factory=dict)
    lu: tuple | None = field(default=None, repr=False)
    base_lu: tuple | None = field(default=None, repr=False)

    def factor(self):
        if self.lu is None:
            self.lu = linalg.factor(self.matrix)
        return self.lu

    def factor_base(self):
        if self.base_lu is None:
            self.base_lu = self.factor() if self.variant == "basic" else linalg.factor(self.base_matrix)
        return self.base_lu

    def with_rhs(self, omega: VorticityField | None, gamma: float) -> "ChargeSystem":
        rhs = charge_rhs(self.eval_points, self.eval_normals, omega, gamma, self.hstar)
        return ChargeSystem(self.variant, self.matrix, rhs, self.mesh, self.curve, float(gamma),
                            self.hstar, self.base_matrix, self.lambda_values, self.eval_points,
                            self.eval_normals, dict(self.info), self.lu, self.base_lu)


def charge_rhs(points, normals, omega, gamma, hstar) -> np.ndarray:
    u = np.zeros_like(points)
    if omega is not None and omega.blobs:
        u = u + velocity_fullplane(omega, points)
    if gamma != 0.0:
        u = u + gamma * harmonic_field(hstar, points)
    return -2.0 * math.pi * np.sum(u * normals, axis=1)


def build_charge_system(curve: BoundaryCurve, mesh: BoundaryMesh, omega: VorticityField | None = None,
                        gamma: float = 0.0, hstar: HStarSpec | None = None,
                        lam: LambdaSpec | None = None, kernels: KernelMatrices | None = None,
                        check_blobs: bool = True) -> ChargeSystem:
    """Assemble the basic (``lam is None``) or lambda-corrected charge system."""
    if mesh.flavor != "charge":
        raise MeshError("the charge method needs a charge-flavor mesh")
    hstar = HStarSpec() if hstar is None else hstar
    if not bool(curve.contains(hstar.center)):
        raise ValueError(f"H_* center {hstar.x_star} is not inside the obstacle")
    if omega is not None and check_blobs:
        omega.check_in_fluid(curve)
    kernels = assemble(curve, mesh) if kernels is None else kernels
    N, L = mesh.N, curve.length
    base = kernels.A_N / N + (math.pi / L) * np.eye(N)
    pts = curve.point(mesh.s_tilde)
    nrm = curve.normal(mesh.s_tilde)
    rhs = charge_rhs(pts, nrm, omega, gamma, hstar)
    info = {"rhs_mean": float(rhs.mean())}
    if lam is None:
        return ChargeSystem("basic", base, rhs, mesh, curve, float(gamma), hstar, base, None, pts, nrm, info)
    lv = lambda_values(lam, curve, mesh)
    margin = abs(L * lv.mean() - 2.0 * math.pi)
    info["lambda_mean_margin"] = float(margin)
    if margin < 1e-6:
        raise LambdaMeanNearTwoPi(f"|L<lambda> - 2pi| = {margin:.3g} is too small")
    M = base - np.outer(lv, np.full(N, 1.0 / N))
    return ChargeSystem("lambda", M, rhs, mesh, curve, float(gamma), hstar, base, lv, pts, nrm, info)


def rank_one_solve(system: ChargeSystem) -> np.ndarray:
    """Solve the lambda system through the basic matrix only:
    ``z = M^-1 (v + c lambda)`` with ``c = <M^-1 v> / (1 - <M^-1 lambda>)``."""
    lu = system.factor_base()
    both = linalg.solve_factored(lu, np.column_stack((system.rhs, system.lambda_values)))
    p, q = both[:, 0], both[:, 1]
    c = p.mean() / (1.0 - q.mean())
    return p + c * q


def solve_charge(system: ChargeSystem) -> BoundaryDensity:
    lu = system.factor()
    g = linalg.solve_factored(lu, system.rhs)
    ok, res = linalg.residual_ok(system.matrix, g, system.rhs)
    if not ok:
        raise SolverError(f"residual {res:.3g} too large")
    info = {"residual": res, "mean": float(g.mean())}
    method = "charge"
    if system.variant == "lambda":
        method = "charge_lambda"
        alt = rank_one_solve(system)
        gap = float(np.abs(alt - g).max() / max(1.0, np.abs(g).max()))
        info["rank_one_discrepancy"] = gap
        if gap > RANK_ONE_TOL:
            raise SolverError(f"direct and rank-one solutions differ by {gap:.3g}")
    return BoundaryDensity(method, g, system.mesh, system.curve, system.gamma, system.hstar, info)


def dominance_margin(system: ChargeSystem | np.ndarray) -> dict:
    """Column margins ``|M_jj| - sum_{i != j} |M_ij|`` and their minimum."""
    M = system.matrix if isinstance(system, ChargeSystem) else np.asarray(system)
    a = np.abs(M)
    d = np.diag(a)
    margins = 2.0 * d - a.sum(axis=0)
    return {"margins": margins, "min_margin": float(margins.min()),
            "dominant": bool(margins.min() > 0)}


def condition_estimate(system) -> float:
    """1-norm condition number estimate of any system (or bare matrix)."""
    if isinstance(system, np.ndarray):
        return linalg.cond1(system)
    return linalg.cond1(system.matrix, system.factor())


def geometric_radii(curve: BoundaryCurve, sample_density: int = 2048) -> dict:
    """Extremal radii from the sup/inf of the double-layer kernel over all
    boundary pairs: ``1/(2 R_sup) = sup K`` and ``1/(2 R_inf) = inf K``.

    ``condition_2``: ``sup |K| < sqrt(2) pi / L``;
    ``condition_4``: ``R_sup > L / (4 pi)``.
    """
    s = curve.length * np.arange(sample_density) / sample_density
    sup, inf = kernel_extremes(curve, s, sample_density)
    ksup, kinf = float(sup.max()), float(inf.min())
    L = curve.length
    r_sup = 1.0 / (2.0 * ksup)
    r_inf = math.inf if kinf == 0 else 1.0 / (2.0 * kinf)
    return {
        "R_sup": r_sup,
        "R_inf": r_inf,
        "kernel_sup": ksup,
        "kernel_inf": kinf,
        "condition_2": bool(max(abs(ksup), abs(kinf)) < math.sqrt(2.0) * math.pi / L),
        "condition_4": bool(r_sup > L / (4.0 * math.pi)),
    }
