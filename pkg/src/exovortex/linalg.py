"""Dense LU with an explicit singularity test and 1-norm condition estimates."""
from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .errors import SingularSystem

PIVOT_TOL = 1e-14


def factor(M: np.ndarray):
    """LU factors of ``M``; raises :class:`SingularSystem` on a tiny pivot."""
    M = np.asarray(M, dtype=float)
    scale = np.abs(M).max() if M.size else 0.0
    if not np.isfinite(M).all() or scale == 0.0:
        raise SingularSystem("matrix is zero or not finite")
    with warnings.catch_warnings():
        # exact zero pivots are reported through SingularSystem below
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(M, check_finite=False)
    pivot = np.abs(np.diag(lu)).min()
    if pivot < PIVOT_TOL * scale:
        raise SingularSystem(f"pivot {pivot:.3g} below {PIVOT_TOL:g} x scale {scale:.3g}")
    return lu, piv


def solve_factored(lu_piv, rhs) -> np.ndarray:
    return lu_solve(lu_piv, np.asarray(rhs, dtype=float), check_finite=False)


def cond1(M: np.ndarray, lu_piv=None) -> float:
    """LAPACK estimate of ``||M||_1 ||M^-1||_1``, rounded to 10 significant digits.

    The estimator's last bits vary with memory alignment inside BLAS; rounding
    keeps emitted results byte-stable.
    """
    M = np.asarray(M, dtype=float)
    if lu_piv is None:
        lu_piv = factor(M)
    anorm = np.abs(M).sum(axis=0).max()
    rcond, info = lapack.dgecon(lu_piv[0], anorm, norm="1")
    if info != 0 or rcond == 0:
        raise SingularSystem("condition estimate failed")
    return float(f"{1.0 / rcond:.10g}")


def residual_ok(M, x, b, rtol: float = 1e-10) -> tuple[bool, float]:
    """Backward-error style residual test used by the solvers."""
    r = np.abs(M @ x - b).max()
    scale = np.abs(M).sum(axis=1).max() * np.abs(x).max() + np.abs(b).max()
    bound = rtol * scale if scale > 0 else rtol
    return bool(r <= bound), float(r)
