"""Reference solutions and reference quadratures.

* exact exterior-disk flow of point vortices (image construction),
* spectrally accurate continuous operators ``A`` and ``B`` (principal value),
* boundary-limit (jump relation) checks for vortex sheets,
* a convergence harness for Riemann sums on perturbed meshes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ErrorAtRoundoff, InsideObstacle, MeshError, SingularEvaluation
from .fields import INV_2PI, SINGULAR_DIST, biot_savart
from .geometry import BoundaryCurve, perp
from .mesh import BoundaryMesh, loglog_slope

ROUNDOFF = 1e-13


# --------------------------------------------------------------------------
# exact flow outside the unit disk


@dataclass(frozen=True)
class DiskExactSolution:
    """Point vortices outside the unit disk with circulation ``gamma`` around it."""

    centers: np.ndarray
    strengths: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        g = np.asarray(self.strengths, dtype=float).reshape(-1)
        if len(c) != len(g):
            raise ValueError("centers and strengths differ in length")
        if len(c) and np.hypot(c[:, 0], c[:, 1]).min() <= 1.0:
            raise InsideObstacle("vortex centers must lie outside the closed unit disk")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "strengths", g)

    @property
    def alpha(self) -> float:
        return float(self.gamma + self.strengths.sum())

    @property
    def images(self) -> np.ndarray:
        c = self.centers
        return c / np.sum(c**2, axis=1, keepdims=True)


def _check_outside(x: np.ndarray) -> None:
    r = np.hypot(x[..., 0], x[..., 1])
    if np.any(r < 1.0 - 1e-12):
        raise InsideObstacle("evaluation point inside the unit disk")


def exact_disk_remainder(sol: DiskExactSolution, x, skip_self: bool = False) -> np.ndarray:
    """``u - u_P``: image vortices plus the circulation-carrying harmonic field.

    Regular at the vortex centers, so it gives the self-advection velocity there.
    """
    x = np.asarray(x, dtype=float)
    _check_outside(x)
    u = -biot_savart(x, sol.images, sol.strengths)
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    return u + sol.alpha * INV_2PI * perp(x) / r2[..., None]


def exact_disk_velocity(sol: DiskExactSolution, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_outside(x)
    return biot_savart(x, sol.centers, sol.strengths) + exact_disk_remainder(sol, x)


# --------------------------------------------------------------------------
# continuous operators on a uniform arclength grid


def _grid(curve: BoundaryCurve, M: int) -> np.ndarray:
    if M < 4 or M % 2:
        raise MeshError("operator grids need an even number of nodes >= 4")
    return curve.length * np.arange(M) / M


def operator_matrices(curve: BoundaryCurve, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature matrices for ``A`` and ``B`` at ``M`` uniform nodes.

    ``A`` has a smooth kernel: trapezoid rule with the curvature diagonal.
    ``B`` is split into ``(pi/L) cot(pi (s-t)/L)``, integrated with the
    staggered rule (odd offsets only, weight ``2L/M``), plus a smooth
    remainder integrated with the trapezoid rule (its diagonal is zero).
    Transposes give the adjoint operators.
    """
    from .kernels import kernel_pair

    s = _grid(curve, M)
    L = curve.length
    h = L / M
    KA, KB, same = kernel_pair(curve, s, s)
    idx = np.arange(M)
    off = (idx[:, None] - idx[None, :]) % M
    with np.errstate(divide="ignore", invalid="ignore"):
        cot = (math.pi / L) / np.tan(math.pi * off / M)
    cot[same] = 0.0
    rem = np.where(same, 0.0, KB - cot)
    odd = (off % 2) == 1
    Bq = np.where(odd, 2.0 * h * cot, 0.0) + h * rem
    return h * KA, Bq


def apply_A(curve: BoundaryCurve, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    A, _ = operator_matrices(curve, g.size)
    return A @ g


def apply_B_pv(curve: BoundaryCurve, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    _, B = operator_matrices(curve, g.size)
    return B @ g


def apply_A_adjoint(curve: BoundaryCurve, g) -> np.ndarray:
    """Boundary values of ``A*`` (normal taken at the source point)."""
    g = np.asarray(g, dtype=float)
    A, _ = operator_matrices(curve, g.size)
    return A.T @ g


def apply_B_adjoint(curve: BoundaryCurve, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    _, B = operator_matrices(curve, g.size)
    return B.T @ g


def continuous_pb_residual(curve: BoundaryCurve, phi) -> dict[str, float]:
    """Sup-norm residuals of ``(A^2 - B^2) phi = pi^2 phi`` and ``(AB + BA) phi = 0``,
    relative to ``||phi||_inf``."""
    phi = np.asarray(phi, dtype=float)
    A, B = operator_matrices(curve, phi.size)
    scale = np.abs(phi).max()
    r1 = A @ (A @ phi) - B @ (B @ phi) - math.pi**2 * phi
    r2 = A @ (B @ phi) + B @ (A @ phi)
    return {"aa_bb": float(np.abs(r1).max() / scale), "ab_ba": float(np.abs(r2).max() / scale)}


# --------------------------------------------------------------------------
# jump relations


def sheet_velocity(curve: BoundaryCurve, g: Callable, x, M: int) -> np.ndarray:
    """Vortex sheet ``(1/2pi) int (x-y)^perp / |x-y|^2 g(y) dy`` by an M-point trapezoid rule."""
    y, s, w = curve.param_quadrature(M)
    w = g(s) * w
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    for k, xk in enumerate(x):
        d = xk - y
        r2 = d[:, 0] ** 2 + d[:, 1] ** 2
        if r2.min() < SINGULAR_DIST**2:
            raise SingularEvaluation("sheet evaluated on a quadrature node")
        out[k] = INV_2PI * (perp(d) * (w / r2)[:, None]).sum(axis=0)
    return out


def plemelj_check(curve: BoundaryCurve, g: Callable, eps_list: Sequence[float],
                  n_points: int = 8, M_op: int = 512) -> list[dict]:
    """Compare sheet values at ``x0 +/- eps n`` with the one-sided limits.

    Fluid side: ``v.tau = Ag/2pi + g/2``; obstacle side: ``Ag/2pi - g/2``;
    both sides: ``v.n = -Bg/2pi``.  Returns one row of max errors per ``eps``.
    """
    eps_list = [float(e) for e in eps_list]
    if min(eps_list) < 1e-4:
        raise ValueError("eps below 1e-4 is not supported")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    sg = curve.length * np.arange(M_op) / M_op
    gv = g(sg)
    A, B = operator_matrices(curve, M_op)
    Ag, Bg = A @ gv, B @ gv
    pick = np.arange(n_points) * (M_op // n_points)
    s0 = sg[pick]
    x0, tau, nrm, _ = curve.frame(s0)
    tan_out = Ag[pick] * INV_2PI + 0.5 * gv[pick]
    tan_in = Ag[pick] * INV_2PI - 0.5 * gv[pick]
    norm_val = -Bg[pick] * INV_2PI
    rows = []
    for eps in eps_list:
        M = max(8192, int(math.ceil(8.0 * curve.length / eps)))
        M += M % 2
        v = sheet_velocity(curve, g, np.concatenate((x0 + eps * nrm, x0 - eps * nrm)), M)
        vo, vi = v[:n_points], v[n_points:]
        to, ti = np.sum(vo * tau, axis=1), np.sum(vi * tau, axis=1)
        no, ni = np.sum(vo * nrm, axis=1), np.sum(vi * nrm, axis=1)
        jump = to - ti
        rows.append({
            "eps": eps,
            "M": M,
            "tangential_fluid": float(np.abs(to - tan_out).max()),
            "tangential_obstacle": float(np.abs(ti - tan_in).max()),
            "normal_fluid": float(np.abs(no - norm_val).max()),
            "normal_obstacle": float(np.abs(ni - norm_val).max()),
            "normal_jump": float(np.abs(no - ni).max()),
            "jump_relative": float(np.abs(jump - gv[pick]).max() / max(np.abs(gv[pick]).max(), 1e-300)),
        })
    return rows


# --------------------------------------------------------------------------
# Riemann sums


def riemann_harness(g: Callable, meshes, reference_nodes: int = 4096, strict: bool = False) -> dict:
    """Error of ``(L/N) sum_i g(s~_i)`` against the integral of ``g`` over a period.

    ``meshes`` is one mesh family (list over N) or several families (list of
    lists, e.g. one per seed); with several families the error at each N is
    the root mean square over families.  Errors below ``1e-13`` are at
    round-off: they set ``at_roundoff`` and are left out of the slope fit
    (``strict`` raises :class:`ErrorAtRoundoff` instead).
    """
    fams = [list(meshes)] if isinstance(meshes[0], BoundaryMesh) else [list(f) for f in meshes]
    Ns = [m.N for m in fams[0]]
    if len(Ns) < 2 or any([m.N for m in f] != Ns for f in fams):
        raise MeshError("all families must share the same list of N (at least two)")
    L = fams[0][0].length
    Mref = max(reference_nodes, 8 * max(Ns))
    exact = L * float(np.mean(g(L * np.arange(Mref) / Mref)))
    errs = np.zeros((len(fams), len(Ns)))
    for a, fam in enumerate(fams):
        for b, m in enumerate(fam):
            errs[a, b] = abs(L / m.N * float(np.sum(g(np.mod(m.s_tilde, L)))) - exact)
    err = np.sqrt(np.mean(errs**2, axis=0))
    low = err < ROUNDOFF
    if low.any() and strict:
        raise ErrorAtRoundoff("Riemann-sum error reached round-off; slope is unreliable")
    keep = ~low
    slope = loglog_slope(np.asarray(Ns)[keep], err[keep]) if keep.sum() >= 2 else -math.inf
    return {"N": Ns, "errors": err.tolist(), "slope": slope, "at_roundoff": bool(low.any()),
            "exact": exact}
