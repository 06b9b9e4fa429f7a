"""Closed classical curves (1-DOF tori) and their branch decomposition.

A curve is a dense uniform sampling of theta -> x(theta) = (p, q) with
periodic cubic splines providing derivatives.  For the built-in families the
parameter theta is 2 pi t / T along the Hamiltonian flow, so the branch
amplitude |d theta / dQ| is the classical residence density familiar from
WKB intensities.

Branches at a position Q are the solutions theta_j of q(theta_j) = Q, each
carrying its momentum p_j, amplitude |d theta/dq|, and slope dp/dq.  Near a
turning point of the q-projection the slope diverges; callers flag such
branches as caustic via a threshold instead of regularizing them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import dynamics

__all__ = [
    "LagrangianCurve",
    "BranchData",
    "harmonic_circle",
    "quartic_level_curve",
    "pendulum_level_curve",
    "curve_from_samples",
    "branches_at",
    "evolve_curve_classically",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LagrangianCurve:
    """Sampled closed curve with spline accessors.

    ``theta`` is strictly increasing in [0, 2 pi); ``points`` holds the
    (p, q) samples; ``action`` is the enclosed area / 2 pi measured from the
    samples themselves.
    """

    theta: np.ndarray
    points: np.ndarray
    action: float
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        pts = np.asarray(self.points, dtype=float)
        if th.ndim != 1 or pts.shape != (th.size, 2):
            raise ValueError("theta must be (n,) and points (n, 2)")
        if th.size < 8:
            raise ValueError("need at least 8 samples")
        if np.any(np.diff(th) <= 0) or th[0] < 0 or th[-1] >= _TWO_PI:
            raise ValueError("theta must be strictly increasing within [0, 2 pi)")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_splines", None)

    def _get_splines(self):
        cached = object.__getattribute__(self, "_splines")
        if cached is None:
            th = np.append(self.theta, self.theta[0] + _TWO_PI)
            p = np.append(self.points[:, 0], self.points[0, 0])
            q = np.append(self.points[:, 1], self.points[0, 1])
            cached = (
                CubicSpline(th, p, bc_type="periodic"),
                CubicSpline(th, q, bc_type="periodic"),
            )
            object.__setattr__(self, "_splines", cached)
        return cached

    def position(self, theta):
        sp, sq = self._get_splines()
        th = np.mod(theta, _TWO_PI)
        return np.stack([sp(th), sq(th)], axis=-1)

    def velocity(self, theta):
        """d x / d theta from the splines."""
        sp, sq = self._get_splines()
        th = np.mod(theta, _TWO_PI)
        return np.stack([sp(th, 1), sq(th, 1)], axis=-1)

    def resample(self, n: int) -> "LagrangianCurve":
        th = np.arange(n) * _TWO_PI / n
        pts = self.position(th)
        return LagrangianCurve(th, pts, _enclosed_area(th, pts) / _TWO_PI)

    def q_range(self):
        return float(np.min(self.points[:, 1])), float(np.max(self.points[:, 1]))


def _enclosed_area(theta, points) -> float:
    """|oint p dq| by the trapezoid rule on the closed loop.

    q' comes from a periodic spline; on a uniform theta grid the periodic
    trapezoid rule is spectrally accurate, so the spline derivative is the
    limiting error (O(h^4) at the nodes).
    """
    th = np.append(theta, theta[0] + _TWO_PI)
    p = np.append(points[:, 0], points[0, 0])
    q = np.append(points[:, 1], points[0, 1])
    sq = CubicSpline(th, q, bc_type="periodic")
    f = p * sq(th, 1)
    return abs(float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(th))))


def curve_from_samples(theta, points) -> LagrangianCurve:
    theta = np.asarray(theta, dtype=float)
    points = np.asarray(points, dtype=float)
    return LagrangianCurve(theta, points, _enclosed_area(theta, points) / _TWO_PI)


def harmonic_circle(action: float, samples: int = 1024) -> LagrangianCurve:
    """Circle p^2 + q^2 = 2 I sampled along the harmonic flow (theta = t)."""
    if action <= 0:
        raise ValueError("action must be positive")
    r = math.sqrt(2.0 * action)
    th = np.arange(samples) * _TWO_PI / samples
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
    return LagrangianCurve(th, pts, action)


def _librating_curve(H, potential, energy: float, q_plus: float, samples: int) -> LagrangianCurve:
    """Level curve of H = p^2/2 + V(q) at the given energy, sampled in time.

    The period integral T = 2 Int dq / sqrt(2 (E - V)) is regularized by
    q = q_plus sin u, which removes the turning-point singularity.
    """

    def integrand(u):
        qq = q_plus * math.sin(u)
        v = 2.0 * (energy - potential(qq))
        return 2.0 * q_plus * math.cos(u) / math.sqrt(max(v, 1e-300))

    period, _ = quad(integrand, -0.5 * math.pi, 0.5 * math.pi, limit=200)
    m = samples
    sub = 8
    dt = period / (m * sub)
    x = np.array([[0.0, q_plus]])
    pts = np.empty((m, 2))
    pts[0] = x[0]
    for k in range(1, m):
        x = dynamics.advect(H, None, x, sub * dt, dt)
        pts[k] = x[0]
    th = np.arange(m) * _TWO_PI / m
    return LagrangianCurve(th, pts, _enclosed_area(th, pts) / _TWO_PI)


def quartic_level_curve(energy: float, a: float = 1.0, b: float = 0.0,
                        samples: int = 1024) -> LagrangianCurve:
    """Level set of H = p^2/2 + a q^4/4 + b q^2/2 at the given energy."""
    if energy <= 0 or a <= 0 or b < 0:
        raise ValueError("need energy > 0, a > 0, b >= 0")
    H = dynamics.hamiltonians.quartic(a=a, b=b)

    def v(q):
        return 0.25 * a * q**4 + 0.5 * b * q**2

    hi = 1.0
    while v(hi) < energy:
        hi *= 2.0
    q_plus = brentq(lambda q: v(q) - energy, 0.0, hi, xtol=1e-14)
    return _librating_curve(H, v, energy, q_plus, samples)


def pendulum_level_curve(energy: float, g: float = 1.0, samples: int = 1024) -> LagrangianCurve:
    """Librating level set of H = p^2/2 - g cos q (requires -g < E < g)."""
    if not (-g < energy < g):
        raise ValueError("libration requires -g < energy < g")
    H = dynamics.hamiltonians.pendulum(g=g)

    def v(q):
        return -g * math.cos(q)

    q_plus = math.acos(-energy / g)
    return _librating_curve(H, v, energy, q_plus, samples)


@dataclass(frozen=True)
class BranchData:
    """Branches p_j(Q) of a curve's q-projection at one position Q."""

    Q: float
    theta: np.ndarray
    p: np.ndarray
    amplitude: np.ndarray
    slope: np.ndarray
    caustic: np.ndarray

    def __len__(self):
        return self.p.size


def branches_at(curve: LagrangianCurve, Q: float,
                caustic_threshold: float = np.inf) -> BranchData:
    """Solve q(theta) = Q on the curve and differentiate the branches.

    amplitude = |d theta / dq|, slope = dp/dq; a branch is flagged caustic
    when |slope| exceeds the threshold.  Returns empty arrays when Q lies
    outside the curve's q-projection.  A root where the parametrization
    itself is stationary (both derivatives vanish) is degenerate and raises.
    """
    sp, sq = curve._get_splines()
    roots = sq.solve(Q, extrapolate=False)
    roots = np.mod(roots, _TWO_PI)
    roots.sort()
    keep = []
    for r in roots:
        if not keep or min(abs(r - keep[-1]), _TWO_PI - abs(r - keep[-1])) > 1e-9:
            keep.append(r)
    if len(keep) > 1 and _TWO_PI - abs(keep[-1] - keep[0]) < 1e-9:
        keep.pop()
    th = np.array(keep)
    if th.size == 0:
        empty = np.array([])
        return BranchData(Q, empty, empty, empty, empty, empty.astype(bool))
    qp = sq(th, 1)
    pp = sp(th, 1)
    speed = np.hypot(qp, pp)
    scale = max(1.0, float(np.max(np.abs(curve.points))))
    if np.any(speed < 1e-12 * scale):
        raise ValueError(f"degenerate parametrization: x'(theta) vanishes at a root of q = {Q}")
    p_j = sp(th)
    with np.errstate(divide="ignore"):
        amplitude = 1.0 / np.abs(qp)
        slope = pp / qp
    caustic = np.abs(slope) > caustic_threshold
    return BranchData(float(Q), th, np.asarray(p_j), amplitude, slope, caustic)


def evolve_curve_classically(curve: LagrangianCurve, H, channels, t: float,
                             dt: float = 1e-3) -> LagrangianCurve:
    """Advect every curve sample under the dissipative centre flow.

    The image keeps the original theta labels; its action label is re-measured
    from the advected samples (dissipation shrinks the enclosed area).
    """
    pts = dynamics.advect(H, channels, curve.points, t, dt)
    return LagrangianCurve(curve.theta.copy(), pts, _enclosed_area(curve.theta, pts) / _TWO_PI)
