"""Smooth closed obstacle boundaries with an exact arc-length parametrization.

Every curve is star-shaped (circle, ellipse, or a polar Fourier radius) and is
traversed counterclockwise.  Internally each curve is parametrized by a polar
angle ``theta``; the map ``theta -> s`` (arc length) is represented spectrally,
which makes both the perimeter and its inverse accurate to round-off for the
analytic curves we handle.

Conventions
-----------
* ``tangent = l'(s)`` has unit length and points counterclockwise.
* ``normal = -tangent^perp`` points out of the obstacle, into the fluid, so that
  ``tangent = normal^perp`` with ``(x, y)^perp = (-y, x)``.
* ``curvature`` is signed, positive where the obstacle is convex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CurveError, NonPositiveRadius, NonSimpleCurve

TWO_PI = 2.0 * math.pi

_KINDS = ("circle", "ellipse", "fourier")


def perp(v: np.ndarray) -> np.ndarray:
    """Rotate vectors by +pi/2 along the last axis: (x, y) -> (-y, x)."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


@dataclass(frozen=True)
class CurveSpec:
    kind: str
    radius: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)
    a: float = 1.0
    b: float = 1.0
    r0: float = 1.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise CurveError(f"unknown curve kind {self.kind!r}; expected one of {_KINDS}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(c) for c in self.sin))
        if len(self.center) != 2:
            raise CurveError("center must have two coordinates")
        if self.kind == "circle" and not self.radius > 0:
            raise NonPositiveRadius(f"circle radius must be > 0, got {self.radius}")
        if self.kind == "ellipse" and not (self.a >= self.b > 0):
            raise CurveError(f"ellipse needs a >= b > 0, got a={self.a}, b={self.b}")

    @classmethod
    def circle(cls, radius: float = 1.0, center=(0.0, 0.0)) -> "CurveSpec":
        return cls("circle", radius=float(radius), center=center)

    @classmethod
    def ellipse(cls, a: float = 2.0, b: float = 1.0, center=(0.0, 0.0)) -> "CurveSpec":
        return cls("ellipse", a=float(a), b=float(b), center=center)

    @classmethod
    def fourier(cls, r0: float = 1.0, cos: Sequence[float] = (), sin: Sequence[float] = (),
                center=(0.0, 0.0)) -> "CurveSpec":
        return cls("fourier", r0=float(r0), cos=tuple(cos), sin=tuple(sin), center=center)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CurveSpec":
        """Parse the JSON form, e.g. ``{"kind": "ellipse", "a": 2.0, "b": 1.0}``.

        ``cos``/``sin`` lists hold the coefficients of ``cos(k theta)``/``sin(k theta)``
        for ``k = 1, 2, ...``.
        """
        data = dict(data)
        kind = data.pop("kind", None)
        allowed = {
            "circle": {"radius", "center"},
            "ellipse": {"a", "b", "center"},
            "fourier": {"r0", "cos", "sin", "center"},
        }
        if kind not in allowed:
            raise CurveError(f"unknown curve kind {kind!r}")
        unknown = set(data) - allowed[kind]
        if unknown:
            raise CurveError(f"unknown keys for {kind} curve: {sorted(unknown)}")
        return cls(kind=kind, **data)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "center": list(self.center)}
        if self.kind == "circle":
            out["radius"] = self.radius
        elif self.kind == "ellipse":
            out.update(a=self.a, b=self.b)
        else:
            out.update(r0=self.r0, cos=list(self.cos), sin=list(self.sin))
        return out


# --------------------------------------------------------------------------
# polar-angle parametrizations


def _fourier_radius(spec: CurveSpec, theta: np.ndarray, order: int = 0) -> np.ndarray:
    r = np.full_like(theta, spec.r0 if order == 0 else 0.0)
    for k, (ak, bk) in enumerate(_padded_coeffs(spec), start=1):
        c, s = np.cos(k * theta), np.sin(k * theta)
        if order == 0:
            r += ak * c + bk * s
        elif order == 1:
            r += k * (-ak * s + bk * c)
        else:
            r += -k * k * (ak * c + bk * s)
    return r


def _padded_coeffs(spec: CurveSpec) -> list[tuple[float, float]]:
    n = max(len(spec.cos), len(spec.sin))
    cs = list(spec.cos) + [0.0] * (n - len(spec.cos))
    sn = list(spec.sin) + [0.0] * (n - len(spec.sin))
    return list(zip(cs, sn))


def _param_derivs(spec: CurveSpec, theta: np.ndarray):
    """Point, first and second theta-derivatives (each shape (..., 2))."""
    c, s = np.cos(theta), np.sin(theta)
    cx, cy = spec.center
    if spec.kind == "circle":
        R = spec.radius
        p = np.stack((cx + R * c, cy + R * s), axis=-1)
        d1 = np.stack((-R * s, R * c), axis=-1)
        d2 = np.stack((-R * c, -R * s), axis=-1)
    elif spec.kind == "ellipse":
        a, b = spec.a, spec.b
        p = np.stack((cx + a * c, cy + b * s), axis=-1)
        d1 = np.stack((-a * s, b * c), axis=-1)
        d2 = np.stack((-a * c, -b * s), axis=-1)
    else:
        r = _fourier_radius(spec, theta, 0)
        r1 = _fourier_radius(spec, theta, 1)
        r2 = _fourier_radius(spec, theta, 2)
        p = np.stack((cx + r * c, cy + r * s), axis=-1)
        d1 = np.stack((r1 * c - r * s, r1 * s + r * c), axis=-1)
        d2 = np.stack((r2 * c - 2 * r1 * s - r * c, r2 * s + 2 * r1 * c - r * s), axis=-1)
    return p, d1, d2


def _param_chord(spec: CurveSpec, t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """``l(t1) - l(t2)`` without cancellation for nearby parameters."""
    m = 0.5 * (t1 + t2)
    h = 0.5 * (t1 - t2)
    sh = np.sin(h)
    dcos = -2.0 * np.sin(m) * sh
    dsin = 2.0 * np.cos(m) * sh
    if spec.kind == "circle":
        return np.stack((spec.radius * dcos, spec.radius * dsin), axis=-1)
    if spec.kind == "ellipse":
        return np.stack((spec.a * dcos, spec.b * dsin), axis=-1)
    dr = np.zeros(np.broadcast(t1, t2).shape)
    for k, (ak, bk) in enumerate(_padded_coeffs(spec), start=1):
        shk = np.sin(k * h)
        dr += ak * (-2.0 * np.sin(k * m) * shk) + bk * (2.0 * np.cos(k * m) * shk)
    r2 = _fourier_radius(spec, np.asarray(t2, dtype=float) + np.zeros_like(dr), 0)
    c1 = np.cos(t1) + np.zeros_like(dr)
    s1 = np.sin(t1) + np.zeros_like(dr)
    return np.stack((dr * c1 + r2 * dcos, dr * s1 + r2 * dsin), axis=-1)


def _speed(spec: CurveSpec, theta: np.ndarray) -> np.ndarray:
    _, d1, _ = _param_derivs(spec, theta)
    return np.hypot(d1[..., 0], d1[..., 1])


# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Arc-length parametrized boundary built by :func:`build_curve`.

    ``length`` is the perimeter.  The map from arc length to the polar
    parameter is stored as a truncated Fourier series of the speed together
    with a monotone lookup table used to bracket Newton iterations.
    """

    spec: CurveSpec
    length: float
    table_theta: np.ndarray = field(repr=False)
    table_s: np.ndarray = field(repr=False)
    _mean_speed: float = field(repr=False, default=1.0)
    _series: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0, dtype=complex))
    _offset: float = field(repr=False, default=0.0)

    # ---- arc length <-> parameter ------------------------------------
    def s_of_theta(self, theta) -> np.ndarray:
        """Arc length from ``theta = 0``; ``s(theta + 2 pi) = s(theta) + L``."""
        theta = np.asarray(theta, dtype=float)
        s = self._mean_speed * theta
        if self._series.size:
            # Horner evaluation of sum_k c_k z^k at z = exp(i theta)
            z = np.exp(1j * theta)
            acc = np.full(theta.shape, self._series[-1])
            for c in self._series[-2::-1]:
                acc = acc * z + c
            s = s + self._offset + (acc * z).imag
        return s

    def theta_of_s(self, s) -> np.ndarray:
        """Polar parameter of the point at arc length ``s`` (any real, taken mod L)."""
        s = np.asarray(s, dtype=float)
        L = self.length
        wraps = np.floor(s / L)
        sr = s - wraps * L
        if self.spec.kind == "circle":
            return TWO_PI * (wraps + sr / L)
        flat = sr.ravel()
        idx = np.clip(np.searchsorted(self.table_s, flat, side="right") - 1, 0, self.table_s.size - 2)
        lo = self.table_theta[idx].copy()
        hi = self.table_theta[idx + 1].copy()
        s_lo, s_hi = self.table_s[idx], self.table_s[idx + 1]
        th = lo + (hi - lo) * (flat - s_lo) / (s_hi - s_lo)
        active = np.arange(flat.size)
        for _ in range(60):
            if active.size == 0:
                break
            t = th[active]
            f = self.s_of_theta(t) - flat[active]
            lo[active] = np.where(f < 0, t, lo[active])
            hi[active] = np.where(f > 0, t, hi[active])
            new = t - f / _speed(self.spec, t)
            a, b = lo[active], hi[active]
            new = np.where((new < a) | (new > b), 0.5 * (a + b), new)
            th[active] = new
            active = active[np.abs(new - t) > 4e-16 * TWO_PI]
        return (th + TWO_PI * wraps.ravel()).reshape(s.shape)

    def param_quadrature(self, M: int):
        """Nodes uniform in the polar parameter with trapezoid weights in arc length.

        Returns ``(points, s, weights)``; spectrally accurate for smooth
        periodic integrands and free of any arc-length inversion.
        """
        th = TWO_PI * np.arange(M) / M
        p, d1, _ = _param_derivs(self.spec, th)
        w = np.hypot(d1[:, 0], d1[:, 1]) * (TWO_PI / M)
        return p, self.s_of_theta(th), w

    # ---- geometry at arc length ---------------------------------------
    def _derivs(self, s):
        return _param_derivs(self.spec, self.theta_of_s(s))

    def point(self, s) -> np.ndarray:
        return self._derivs(s)[0]

    def tangent(self, s) -> np.ndarray:
        _, d1, _ = self._derivs(s)
        return d1 / np.hypot(d1[..., 0], d1[..., 1])[..., None]

    def normal(self, s) -> np.ndarray:
        return -perp(self.tangent(s))

    def curvature(self, s) -> np.ndarray:
        _, d1, d2 = self._derivs(s)
        sp = np.hypot(d1[..., 0], d1[..., 1])
        return (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / sp**3

    def frame(self, s):
        """Points, unit tangents, outward normals and curvatures in one pass."""
        _, d1, d2 = p = self._derivs(s)
        sp = np.hypot(d1[..., 0], d1[..., 1])
        tau = d1 / sp[..., None]
        kappa = (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / sp**3
        return p[0], tau, -perp(tau), kappa

    def chord(self, s1, s2) -> np.ndarray:
        """``l(s1) - l(s2)``, accurate even when the two points nearly coincide."""
        return _param_chord(self.spec, self.theta_of_s(s1), self.theta_of_s(s2))

    # ---- region queries -------------------------------------------------
    def contains(self, x) -> np.ndarray:
        """True for points strictly inside the obstacle."""
        x = np.asarray(x, dtype=float)
        d = x - np.asarray(self.spec.center)
        if self.spec.kind == "circle":
            return np.hypot(d[..., 0], d[..., 1]) < self.spec.radius
        if self.spec.kind == "ellipse":
            return (d[..., 0] / self.spec.a) ** 2 + (d[..., 1] / self.spec.b) ** 2 < 1.0
        phi = np.arctan2(d[..., 1], d[..., 0])
        return np.hypot(d[..., 0], d[..., 1]) < _fourier_radius(self.spec, phi)

    def distance(self, x) -> np.ndarray:
        """Euclidean distance from each point to the boundary curve."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.spec.kind == "circle":
            d = x - np.asarray(self.spec.center)
            return np.abs(np.hypot(d[:, 0], d[:, 1]) - self.spec.radius)
        n = 2048
        th = TWO_PI * np.arange(n) / n
        pts, _, _ = _param_derivs(self.spec, th)
        out = np.empty(len(x))
        for i, xi in enumerate(x):
            d2 = np.sum((pts - xi) ** 2, axis=1)
            j = int(np.argmin(d2))
            f = lambda t, xi=xi: float(np.sum((_param_derivs(self.spec, np.array(t))[0] - xi) ** 2))
            res = minimize_scalar(f, bounds=(th[j] - TWO_PI / n, th[j] + TWO_PI / n),
                                  method="bounded", options={"xatol": 1e-13})
            out[i] = math.sqrt(min(res.fun, d2[j]))
        return out

    def interior_point(self) -> np.ndarray:
        return np.asarray(self.spec.center, dtype=float)


def _speed_series(spec: CurveSpec, m: int):
    """Cosine/sine coefficients of the (smooth, periodic) speed, resolved to round-off."""
    while True:
        th = TWO_PI * np.arange(m) / m
        sp = _speed(spec, th)
        F = np.fft.rfft(sp) / m
        mean = F[0].real
        coef = 2.0 * F[1:]
        tail = np.abs(coef[-max(4, m // 16):]).max()
        if tail <= 1e-16 * mean or m >= 1 << 17:
            break
        m *= 2
    mag = np.abs(coef)
    keep = np.nonzero(mag > 1e-18 * mean)[0]
    K = int(keep[-1]) + 1 if keep.size else 0
    return mean, coef[:K].real.copy(), -coef[:K].imag.copy()


def _check_simple(spec: CurveSpec, n: int = 4096) -> None:
    if spec.kind == "fourier":
        th = TWO_PI * np.arange(n) / n
        r = _fourier_radius(spec, th)
        if r.min() <= 0:
            raise NonPositiveRadius(f"fourier radius r(theta) reaches {r.min():.3g} <= 0")
    # Star-shaped curves with positive radius are simple; the sampled polygon
    # is still checked so that a bad parametrization cannot slip through.
    th = TWO_PI * np.arange(256) / 256
    p, _, _ = _param_derivs(spec, th)
    q = np.roll(p, -1, axis=0)
    d = q - p
    i, j = np.triu_indices(len(p), k=2)
    keep = ~((i == 0) & (j == len(p) - 1))
    i, j = i[keep], j[keep]

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    o1 = orient(p[i], q[i], p[j])
    o2 = orient(p[i], q[i], q[j])
    o3 = orient(p[j], q[j], p[i])
    o4 = orient(p[j], q[j], q[i])
    if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
        raise NonSimpleCurve("sampled boundary polygon self-intersects")
    area = 0.5 * np.sum(p[:, 0] * d[:, 1] - p[:, 1] * d[:, 0])
    if area <= 0:
        raise NonSimpleCurve("curve is not counterclockwise")


def build_curve(spec: CurveSpec | Mapping[str, Any], table_resolution: int = 256) -> BoundaryCurve:
    """Build the arc-length parametrized curve for ``spec``.

    Parameters
    ----------
    spec : CurveSpec or its JSON dict form
    table_resolution : int
        Minimum number of samples used to resolve the speed and the size of the
        bracketing table for arc-length inversion (>= 64).
    """
    if not isinstance(spec, CurveSpec):
        spec = CurveSpec.from_dict(spec)
    if table_resolution < 64:
        raise CurveError("table_resolution must be >= 64")
    _check_simple(spec)
    if spec.kind == "circle":
        L = TWO_PI * spec.radius
        th = np.linspace(0.0, TWO_PI, 65)
        return BoundaryCurve(spec, L, th, th * spec.radius, spec.radius)
    mean, ac, bc = _speed_series(spec, int(table_resolution))
    L = TWO_PI * mean
    k = np.arange(1, ac.size + 1)
    series = (ac - 1j * bc) / k
    keep = np.nonzero(np.abs(series) > 1e-18 * mean)[0]
    series = series[: keep[-1] + 1] if keep.size else series[:0]
    offset = float(np.sum(bc / k))
    # a fine bracketing table keeps the Newton refinement to two or three steps
    th = np.linspace(0.0, TWO_PI, max(int(table_resolution), 4096) + 1)
    curve = BoundaryCurve(spec, L, th, np.zeros_like(th), mean, series, offset)
    s_tab = curve.s_of_theta(th)
    s_tab[0], s_tab[-1] = 0.0, L
    object.__setattr__(curve, "table_s", s_tab)
    return curve


def eval_point(curve: BoundaryCurve, s) -> np.ndarray:
    return curve.point(s)


def eval_tangent(curve: BoundaryCurve, s) -> np.ndarray:
    return curve.tangent(s)


def eval_normal(curve: BoundaryCurve, s) -> np.ndarray:
    return curve.normal(s)


def eval_curvature(curve: BoundaryCurve, s) -> np.ndarray:
    return curve.curvature(s)


def winding_number(curve: BoundaryCurve, x, n: int = 4096) -> float:
    """Winding number of the boundary around ``x`` (sampled, rounded to 1e-9)."""
    s = curve.length * np.arange(n + 1) / n
    d = curve.point(s) - np.asarray(x, dtype=float)
    ang = np.unwrap(np.arctan2(d[:, 1], d[:, 0]))
    return float((ang[-1] - ang[0]) / TWO_PI)
