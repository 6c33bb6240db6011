"""Dense boundary-kernel matrices and the discrete identities they satisfy.

With ``x_j = l(s_j)`` and ``y_i = l(s_tilde_i)``::

    A_N[i, j]       = (y_i - x_j) . n(y_i) / |y_i - x_j|^2
    B_N[i, j]       = (y_i - x_j) . tau(y_i) / |y_i - x_j|^2
    A_tilde_N[i, j] = (x_i - y_j) . n(x_i) / |x_i - y_j|^2
    B_tilde_N[i, j] = (x_i - y_j) . tau(x_i) / |x_i - y_j|^2

Coincident nodes (possible only for the charge flavor) take the limiting value
of the A kernel, half the signed curvature.  All ``l^p`` norms are normalized,
``||z||_p = (mean |z|^p)^(1/p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentNodesInB, MeshError, NoConvergence, NonUniformMesh
from .geometry import BoundaryCurve
from .mesh import BoundaryMesh

COINCIDENT_GAP = 1e-12


def l2(z) -> float:
    z = np.asarray(z)
    return float(np.sqrt(np.mean(np.abs(z) ** 2)))


def l1(z) -> float:
    return float(np.mean(np.abs(np.asarray(z))))


def _coincident(a: np.ndarray, b: np.ndarray, L: float) -> np.ndarray:
    gap = np.mod(a[:, None] - b[None, :], L)
    return np.minimum(gap, L - gap) < COINCIDENT_GAP * L


def kernel_pair(curve: BoundaryCurve, s_eval, s_src):
    """Double-layer type kernel (normal part) and its tangential companion.

    Rows are evaluation arclengths, columns source arclengths; the frame is
    taken at the evaluation point.  Coincident pairs get ``k/2`` in the normal
    kernel and ``nan`` in the tangential one.
    """
    s_eval = np.atleast_1d(np.asarray(s_eval, dtype=float))
    s_src = np.atleast_1d(np.asarray(s_src, dtype=float))
    _, tau, nrm, kap = curve.frame(s_eval)
    d = curve.chord(s_eval[:, None], s_src[None, :])
    same = _coincident(s_eval, s_src, curve.length)
    r2 = np.where(same, 1.0, d[..., 0] ** 2 + d[..., 1] ** 2)
    ka = (d[..., 0] * nrm[:, None, 0] + d[..., 1] * nrm[:, None, 1]) / r2
    kb = (d[..., 0] * tau[:, None, 0] + d[..., 1] * tau[:, None, 1]) / r2
    ka = np.where(same, 0.5 * kap[:, None], ka)
    kb = np.where(same, np.nan, kb)
    return ka, kb, same


@dataclass(frozen=True, eq=False)
class KernelMatrices:
    A_N: np.ndarray
    A_tilde_N: np.ndarray
    B_N: np.ndarray | None
    B_tilde_N: np.ndarray | None
    mesh: BoundaryMesh
    curve: BoundaryCurve

    @property
    def B_rect(self) -> np.ndarray | None:
        return None if self.B_N is None else self.B_N[:-1]

    @property
    def N(self) -> int:
        return self.mesh.N

    @property
    def length(self) -> float:
        return self.curve.length


def assemble(curve: BoundaryCurve, mesh: BoundaryMesh) -> KernelMatrices:
    """Fill ``A_N``, ``A_tilde_N``, ``B_N`` and ``B_tilde_N`` for ``mesh``.

    For the charge flavor evaluation points sit on the nodes, so the B-type
    matrices are not defined and are left as ``None``.
    """
    if abs(mesh.length - curve.length) > 1e-12 * curve.length:
        raise MeshError("mesh was built for a different curve")
    A, B, same = kernel_pair(curve, mesh.s_tilde, mesh.s)
    At, Bt, _ = kernel_pair(curve, mesh.s, mesh.s_tilde)
    if mesh.flavor == "vortex":
        if same.any():
            i, j = np.argwhere(same)[0]
            raise CoincidentNodesInB(f"evaluation point {i} coincides with node {j}")
        return KernelMatrices(A, At, B, Bt, mesh, curve)
    return KernelMatrices(A, At, None, None, mesh, curve)


def _cot_matrix(a, b, L) -> np.ndarray:
    return 1.0 / np.tan(math.pi * (np.asarray(a)[:, None] - np.asarray(b)[None, :]) / L)


def cot_sum_deviation(mesh: BoundaryMesh) -> tuple[float, float]:
    """``max_i |sum_j cot(pi (s~_i - s_j)/L)|`` and ``max_i |sum_j cot(pi (s_i - s~_j)/L)|``."""
    if mesh.flavor != "vortex":
        raise MeshError("cot sums are defined for vortex meshes")
    C = _cot_matrix(mesh.s_tilde, mesh.s, mesh.length)
    Ct = _cot_matrix(mesh.s, mesh.s_tilde, mesh.length)
    return float(np.abs(C.sum(axis=1)).max()), float(np.abs(Ct.sum(axis=1)).max())


def cot_l2_identity_check(mesh: BoundaryMesh, z) -> tuple[float, float]:
    """Both sides of the exact l2 identity for the staggered cot matrix.

    Returns ``(lhs, rhs)`` with ``lhs = (1/N) ||C z||`` and ``rhs = ||z - <z>||``,
    where ``C[k, j] = cot(pi (theta~_k - theta_j)/L)``.
    """
    if mesh.flavor != "vortex" or not mesh.is_uniform:
        raise NonUniformMesh("the cot l2 identity needs a uniform vortex mesh")
    z = np.asarray(z, dtype=float)
    if z.shape != (mesh.N,):
        raise MeshError(f"z must have shape ({mesh.N},)")
    C = _cot_matrix(mesh.theta_tilde, mesh.theta, mesh.length)
    return l2(C @ z) / mesh.N, l2(z - z.mean())


def cot_offdiag_l2(mesh: BoundaryMesh, z) -> tuple[float, float]:
    """Collocated cot sum with the diagonal dropped; lhs should not exceed rhs."""
    z = np.asarray(z, dtype=float)
    th = mesh.theta
    with np.errstate(divide="ignore"):
        C = _cot_matrix(th, th, mesh.length)
    np.fill_diagonal(C, 0.0)
    return l2(C @ z) / mesh.N, l2(z - z.mean())


def _require_vortex(m: KernelMatrices) -> None:
    if m.B_N is None:
        raise MeshError("this check needs vortex-flavor matrices")


def discrete_pb_residual(m: KernelMatrices, z) -> dict[str, float]:
    """Residuals of the discrete Poincare-Bertrand identities.

    ``bb_aa``      : ||(L/N)^2 (B B~ - A A~) z + pi^2 z||
    ``ab_ba``      : ||(L/N)^2 (A B~ + B A~) z||
    ``*_tilde``    : same with the tilde matrices applied first.
    """
    _require_vortex(m)
    z = np.asarray(z, dtype=float)
    c = (m.length / m.N) ** 2
    A, At, B, Bt = m.A_N, m.A_tilde_N, m.B_N, m.B_tilde_N
    return {
        "bb_aa": l2(c * (B @ (Bt @ z) - A @ (At @ z)) + math.pi**2 * z),
        "ab_ba": l2(c * (A @ (Bt @ z) + B @ (At @ z))),
        "bb_aa_tilde": l2(c * (Bt @ (B @ z) - At @ (A @ z)) + math.pi**2 * z),
        "ab_ba_tilde": l2(c * (At @ (B @ z) + Bt @ (A @ z))),
    }


def mean_residual(m: KernelMatrices, z) -> dict[str, float]:
    """``|<(L/N) B z>| + |<(L/N) A z - pi z>|`` and the tilde variant."""
    _require_vortex(m)
    z = np.asarray(z, dtype=float)
    h = m.length / m.N
    plain = abs(np.mean(h * (m.B_N @ z))) + abs(np.mean(h * (m.A_N @ z) - math.pi * z))
    tilde = abs(np.mean(h * (m.B_tilde_N @ z))) + abs(np.mean(h * (m.A_tilde_N @ z) - math.pi * z))
    return {"mean": float(plain), "mean_tilde": float(tilde)}


def spectral_radius_meanzero(m: KernelMatrices, max_iter: int = 5000, tol: float = 1e-12,
                             seed: int = 0) -> dict[str, float]:
    """Power-iteration estimates for ``M = (L/N) A_N``.

    ``rho0`` is the spectral radius of ``M`` compressed to mean-zero vectors
    (the constant direction is projected out after every product).  The
    spectrum there comes in nearly opposite pairs, so a two-vector block power
    iteration with a 2x2 Rayleigh-Ritz step is used.  ``rho_full`` is the
    dominant eigenvalue of ``M`` itself.
    """
    M = (m.length / m.N) * m.A_N
    rng = np.random.default_rng(seed)

    def proj(v):
        return v - v.mean(axis=0)

    X, _ = np.linalg.qr(proj(rng.standard_normal((m.N, 2))))
    floor = 1e-11 * np.linalg.norm(M)
    rho0, it, converged = 0.0, 0, False
    for it in range(1, max_iter + 1):
        Y = proj(M @ X)
        if np.linalg.norm(Y) < floor:
            # compressed operator vanishes to round-off (the disk)
            rho0, converged = float(np.linalg.norm(Y)), True
            break
        est = float(np.abs(np.linalg.eigvals(X.T @ Y)).max())
        X, _ = np.linalg.qr(Y)
        if abs(est - rho0) <= tol * est:
            rho0, converged = est, True
            break
        rho0 = est
    if not converged:
        raise NoConvergence(f"mean-zero power iteration did not converge in {max_iter} steps",
                            best=rho0)

    v = np.ones(m.N) + 0.01 * rng.standard_normal(m.N)
    lam = 0.0
    for _ in range(max_iter):
        w = M @ v
        new = w.mean() / v.mean()
        v = w / np.linalg.norm(w) * math.sqrt(m.N)
        if abs(new - lam) <= tol * abs(new):
            lam = new
            break
        lam = new
    else:
        raise NoConvergence("dominant-eigenvalue power iteration did not converge", best=lam)
    return {"rho0": rho0, "rho_full": float(lam), "iterations": it}
