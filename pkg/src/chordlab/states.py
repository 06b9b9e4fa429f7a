"""Reference states: coherent states and short-chord WKB curve states.

All closed forms below are for unit frequency (round Gaussians).  The chord
representation of a coherent state centred at eta is a Gaussian of width
sqrt(2 hbar) around the origin times a plane wave in eta, normalized so that
chi(0) = 1 / (2 pi hbar).

A curve state is represented in the short-chord regime by the uniform
average of plane waves exp(i x(theta) ^ xi / hbar) over the curve; this is
accurate for |xi| well below the validity radius (8 hbar R)^(1/3) set by the
curve's minimum osculating radius R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chordfn import ChordFunction
from .curves import LagrangianCurve
from . import diagnostics

__all__ = [
    "CoherentState",
    "coherent_chord_function",
    "coherent_wigner",
    "coherent_husimi",
    "coherent_wavefunction",
    "coherent_position_slices",
    "coherent_chord",
    "wkb_short_chord_function",
    "wkb_chord",
    "short_chord_validity_radius",
]


@dataclass(frozen=True)
class CoherentState:
    """Minimum-uncertainty Gaussian centred at eta = (eta_p, eta_q)."""

    eta: tuple
    hbar: float
    omega: float = 1.0

    def __post_init__(self):
        eta = (float(self.eta[0]), float(self.eta[1]))
        object.__setattr__(self, "eta", eta)
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.omega != 1.0:
            raise NotImplementedError("only unit frequency is supported")


def coherent_chord_function(state: CoherentState, xi_p, xi_q):
    """chi(xi) = (2 pi hbar)^-1 exp[i eta^xi / hbar - xi^2 / 4 hbar]."""
    hb = state.hbar
    ep, eq = state.eta
    xi_p = np.asarray(xi_p, dtype=float)
    xi_q = np.asarray(xi_q, dtype=float)
    phase = (ep * xi_q - eq * xi_p) / hb
    return np.exp(1j * phase - (xi_p**2 + xi_q**2) / (4.0 * hb)) / (2.0 * math.pi * hb)


def coherent_wigner(state: CoherentState, p, q):
    """W(x) = (pi hbar)^-1 exp[-(x - eta)^2 / hbar]."""
    hb = state.hbar
    ep, eq = state.eta
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.exp(-((p - ep) ** 2 + (q - eq) ** 2) / hb) / (math.pi * hb)


def coherent_husimi(state: CoherentState, p, q):
    """Unit-mass Gaussian smoothing of the Wigner function, peak (2 pi hbar)^-1."""
    hb = state.hbar
    ep, eq = state.eta
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.exp(-((p - ep) ** 2 + (q - eq) ** 2) / (2.0 * hb)) / (2.0 * math.pi * hb)


def coherent_wavefunction(state: CoherentState, q):
    """<q|eta> with the symmetric phase convention (mid-point gauge)."""
    hb = state.hbar
    ep, eq = state.eta
    q = np.asarray(q, dtype=float)
    amp = (math.pi * hb) ** -0.25
    return amp * np.exp(-((q - eq) ** 2) / (2.0 * hb) + 1j * ep * (q - 0.5 * eq) / hb)


def coherent_position_slices(state: CoherentState, q, s):
    """rho(q - s/2, q + s/2) on the outer product of the two axes."""
    q = np.asarray(q, dtype=float)[:, None]
    s = np.asarray(s, dtype=float)[None, :]
    psi_m = coherent_wavefunction(state, q - 0.5 * s)
    psi_p = coherent_wavefunction(state, q + 0.5 * s)
    return psi_m * np.conj(psi_p)


def coherent_chord(state: CoherentState) -> ChordFunction:
    return ChordFunction.from_callable(
        lambda xp, xq: coherent_chord_function(state, xp, xq), state.hbar)


def wkb_short_chord_function(curve: LagrangianCurve, xi_p, xi_q, hbar: float,
                             convergence_check: bool = True, sink=None):
    """Uniform average of translation symbols over the curve, times (2 pi hbar)^-1.

    For the harmonic circle of action I this is (2 pi hbar)^-1 J0(sqrt(2 I) |xi| / hbar).
    The sampling is checked by comparing against a doubled resampling; a
    relative drift above 1e-8 reports a ConvergenceWarning.
    """
    xi_p = np.asarray(xi_p, dtype=float)
    xi_q = np.asarray(xi_q, dtype=float)
    out_shape = np.broadcast(xi_p, xi_q).shape
    xp = np.broadcast_to(xi_p, out_shape).ravel()
    xq = np.broadcast_to(xi_q, out_shape).ravel()

    def average(c: LagrangianCurve):
        # mean over theta of exp(i (p xi_q - q xi_p) / hbar), chunked in xi
        p = c.points[:, 0]
        q = c.points[:, 1]
        vals = np.empty(xp.size, dtype=complex)
        block = max(1, (1 << 21) // max(p.size, 1))
        for i in range(0, xp.size, block):
            sl = slice(i, i + block)
            phase = (np.outer(xq[sl], p) - np.outer(xp[sl], q)) / hbar
            vals[sl] = np.exp(1j * phase).mean(axis=1)
        return vals

    vals = average(curve)
    if convergence_check:
        fine = average(curve.resample(2 * curve.theta.size))
        drift = float(np.max(np.abs(vals - fine)))
        if drift > 1e-8:
            diagnostics.report(
                sink,
                f"curve average drifts by {drift:.2e} under doubled sampling; "
                "increase the curve sample count",
                diagnostics.ConvergenceWarning,
            )
    vals = vals.reshape(out_shape) / (2.0 * math.pi * hbar)
    return vals[()] if out_shape == () else vals


def wkb_chord(curve: LagrangianCurve, hbar: float, samples: int | None = None) -> ChordFunction:
    """Short-chord curve state as a ChordFunction (sampling fixed up front).

    The doubling check runs once here rather than on every evaluation.
    """
    c = curve if samples is None else curve.resample(samples)
    probe = math.sqrt(hbar) * np.array([0.3, 0.7, 1.3, 2.1])
    wkb_short_chord_function(c, probe, probe[::-1], hbar, convergence_check=True)
    return ChordFunction.from_callable(
        lambda xp, xq: wkb_short_chord_function(c, xp, xq, hbar, convergence_check=False),
        hbar)


def short_chord_validity_radius(curve: LagrangianCurve, hbar: float) -> float:
    """(8 hbar R_min)^(1/3) with R_min the minimum osculating radius.

    Chords longer than this pick up O(1) phase error from curve curvature,
    so the uniform plane-wave average stops being trustworthy.
    """
    th = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
    sp, sq = curve._get_splines()
    p1, q1 = sp(th, 1), sq(th, 1)
    p2, q2 = sp(th, 2), sq(th, 2)
    speed2 = p1**2 + q1**2
    kappa = np.abs(p1 * q2 - q1 * p2) / np.maximum(speed2, 1e-300) ** 1.5
    r_min = 1.0 / float(np.max(kappa))
    return (8.0 * hbar * r_min) ** (1.0 / 3.0)
