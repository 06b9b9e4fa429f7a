"""Locally windowed correlations C(xi_q, Q) and their momentum spectra.

C is the expectation of a position translation by xi_q, windowed by a
Gaussian of width Delta centred at Q:

    C(xi_q, Q) = (sqrt(2 pi) Delta)^-1 Int dq exp[-(q - Q)^2 / 2 Delta^2]
                 <q - xi_q/2| rho |q + xi_q/2>.

Two exact routes are provided (from a chord function, and directly from
position-space density slices) plus three semiclassical approximants of
increasing fidelity for curve states: stationary-branch plane waves, the
same with window shear corrections, and with Markovian decoherence widths.

The symplectic Fourier transform of C over xi_q is a local momentum
spectral density; its peaks sit at the branch momenta p_j(Q) with variance
hbar * Phi_qq(shear) + Delta^2 slope^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics, dynamics
from .chordfn import ChordFunction
from .curves import LagrangianCurve, BranchData, branches_at, evolve_curve_classically
from .grids import ft_axis, simpson_weights
from .states import CoherentState

__all__ = [
    "LwcWindow",
    "LwcSample",
    "SpectralDensity",
    "Peak",
    "ResolutionVerdict",
    "local_translation_weyl",
    "lwc_from_chord",
    "lwc_direct",
    "lwc_coherent_closed_form",
    "lwc_sc_berry",
    "lwc_sc_quadratic",
    "lwc_sc_markov",
    "shear_phi_qq",
    "spectrum",
    "sc_spectrum_closed_form",
    "fit_peaks",
    "resolution_verdict",
    "symmetrized_observable_expectation",
    "suggest_xi_q_grid",
]


@dataclass(frozen=True)
class LwcWindow:
    """Gaussian position window exp[-(q - Q)^2 / 2 Delta^2], unit mass."""

    Q: float
    delta: float
    hbar: float

    def __post_init__(self):
        if self.delta <= 0 or self.hbar <= 0:
            raise ValueError("delta and hbar must be positive")

    @classmethod
    def canonical(cls, Q: float, hbar: float) -> "LwcWindow":
        """delta = sqrt(hbar): balances shear and decoherence sensitivity."""
        return cls(Q, math.sqrt(hbar), hbar)

    @classmethod
    def husimi_matched(cls, Q: float, hbar: float) -> "LwcWindow":
        """delta = sqrt(hbar / 2): the width that rebuilds a Husimi section."""
        return cls(Q, math.sqrt(0.5 * hbar), hbar)


@dataclass(frozen=True)
class LwcSample:
    """C(xi_q) on a xi_q grid, with provenance for downstream spectra."""

    xi_q: np.ndarray
    values: np.ndarray
    window: LwcWindow | None
    warnings: list = field(default_factory=list)
    branches: BranchData | None = None
    phi_qq: tuple = ()

    def c0(self) -> complex:
        i = int(np.argmin(np.abs(self.xi_q)))
        if abs(self.xi_q[i]) > 1e-9 * max(1.0, float(np.max(np.abs(self.xi_q)))):
            raise ValueError("xi_q grid does not contain 0")
        return complex(self.values[i])

    def normalized(self) -> np.ndarray:
        return self.values / self.c0()


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    variance: float
    index: int | None = None
    flagged: bool = False


@dataclass(frozen=True)
class SpectralDensity:
    """Real local momentum density S(p') and its sampling axis."""

    p: np.ndarray
    values: np.ndarray
    imag_residue: float = 0.0
    warnings: list = field(default_factory=list)
    peaks: tuple = ()


@dataclass(frozen=True)
class ResolutionVerdict:
    resolved: bool
    separation: float
    widths: tuple


def local_translation_weyl(window: LwcWindow, xi_q, p, q):
    """Weyl symbol of the windowed position translation at centre (p, q)."""
    xi_q = np.asarray(xi_q, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * window.delta)
    return norm * np.exp(-1j * p * xi_q / window.hbar
                         - (window.Q - q) ** 2 / (2.0 * window.delta**2))


def lwc_from_chord(chi: ChordFunction, window: LwcWindow, xi_q,
                   xi_p_halfwidth: float | None = None,
                   xi_p_points: int = 2049) -> LwcSample:
    """Windowed correlation as a chord-space integral,

        C(xi_q) = Int dxi_p chi(xi_p, -xi_q)
                  exp[i xi_p Q / hbar - Delta^2 xi_p^2 / 2 hbar^2].

    Grid-backed chord functions are integrated along their own xi_p axis (so
    each -xi_q must land on a grid node); callables use composite Simpson on
    an auto-sized xi_p range.
    """
    hb = window.hbar
    if chi.hbar != hb:
        raise ValueError("window and chord function disagree on hbar")
    xi_q = np.atleast_1d(np.asarray(xi_q, dtype=float))
    notes: list = []

    if chi.gridded:
        grid = chi.grid
        xp = grid.p_axis  # chord grids store (xi_p, xi_q) on the (p, q) axes
        dxp = grid.dp
        cols = -xi_q / grid.dq + grid.points / 2
        idx = np.rint(cols).astype(int)
        if np.any(np.abs(cols - idx) > 1e-6) or np.any(idx < 0) or np.any(idx >= grid.points):
            raise ValueError("-xi_q must land on the chord grid's xi_q nodes")
        slab = chi.values[:, idx]
        w = simpson_weights(xp.size, dxp) * np.exp(
            1j * xp * window.Q / hb - (window.delta * xp) ** 2 / (2.0 * hb**2))
        integrand_peak = float(np.max(np.abs(slab) * np.abs(w)[:, None]))
        edge = float(np.max(np.abs(slab[[0, -1], :]) * np.abs(w[[0, -1]])[:, None]))
        if integrand_peak > 0 and edge > 1e-12 * integrand_peak:
            diagnostics.report(
                notes,
                "lwc integrand not decayed at the xi_p grid edge; widen the chord grid",
                diagnostics.TruncationWarning,
            )
        vals = w @ slab
        return LwcSample(xi_q, vals, window, notes)

    if xi_p_halfwidth is None:
        xi_p_halfwidth = 9.0 * hb / window.delta
    if xi_p_points < 3:
        raise ValueError("xi_p_points must be at least 3")
    xp = np.linspace(-xi_p_halfwidth, xi_p_halfwidth, xi_p_points)
    h = xp[1] - xp[0]
    if h * abs(window.Q) / hb > 0.5 * math.pi:
        diagnostics.report(
            notes,
            "xi_p quadrature undersamples the window phase; raise xi_p_points",
            diagnostics.ConvergenceWarning,
        )
    w = simpson_weights(xp.size, h) * np.exp(
        1j * xp * window.Q / hb - (window.delta * xp) ** 2 / (2.0 * hb**2))
    vals = np.empty(xi_q.size, dtype=complex)
    peak = 0.0
    edge = 0.0
    for j, xq in enumerate(xi_q):
        f = chi(xp, np.full_like(xp, -xq))
        g = np.abs(f) * np.abs(w)
        peak = max(peak, float(np.max(g)))
        edge = max(edge, float(g[0]), float(g[-1]))
        vals[j] = np.sum(w * f)
    if peak > 0 and edge > 1e-12 * peak:
        diagnostics.report(
            notes,
            "lwc integrand not decayed at the xi_p range edge; widen xi_p_halfwidth",
            diagnostics.TruncationWarning,
        )
    return LwcSample(xi_q, vals, window, notes)


def lwc_direct(rho_slices, q_axis, s_axis, window: LwcWindow, xi_q) -> LwcSample:
    """Windowed correlation straight from rho(q - s/2, q + s/2) samples.

    Every requested xi_q must coincide with an s_axis node, and q_axis must
    cover the window out to Q +- 6 Delta.
    """
    rho_slices = np.asarray(rho_slices)
    q_axis = np.asarray(q_axis, dtype=float)
    s_axis = np.asarray(s_axis, dtype=float)
    if rho_slices.shape != (q_axis.size, s_axis.size):
        raise ValueError("rho_slices must be (len(q_axis), len(s_axis))")
    lo, hi = window.Q - 6.0 * window.delta, window.Q + 6.0 * window.delta
    if q_axis[0] > lo or q_axis[-1] < hi:
        raise ValueError("q_axis must cover the window out to Q +- 6 Delta")
    xi_q = np.atleast_1d(np.asarray(xi_q, dtype=float))
    ds = s_axis[1] - s_axis[0] if s_axis.size > 1 else 1.0
    cols = np.searchsorted(s_axis, xi_q - 0.5 * abs(ds))
    cols = np.clip(cols, 0, s_axis.size - 1)
    if np.any(np.abs(s_axis[cols] - xi_q) > 1e-6 * max(abs(ds), 1e-12)):
        raise ValueError("every xi_q must coincide with an s_axis node")
    dq = q_axis[1] - q_axis[0]
    wq = simpson_weights(q_axis.size, dq) * np.exp(
        -((q_axis - window.Q) ** 2) / (2.0 * window.delta**2))
    wq /= math.sqrt(2.0 * math.pi) * window.delta
    vals = wq @ rho_slices[:, cols]
    return LwcSample(xi_q, vals, window, [])


def lwc_coherent_closed_form(state: CoherentState, window: LwcWindow, xi_q):
    """Exact C(xi_q) for a coherent state: a Gaussian of chord width
    sqrt(2 hbar) carried by the plane wave exp(-i eta_p xi_q / hbar), with a
    window-weight factor from the overlap of the two position Gaussians."""
    if state.hbar != window.hbar:
        raise ValueError("state and window disagree on hbar")
    hb = state.hbar
    ep, eq = state.eta
    xi_q = np.asarray(xi_q, dtype=float)
    var = window.delta**2 + 0.5 * hb
    return (np.exp(-1j * ep * xi_q / hb - xi_q**2 / (4.0 * hb)
                   - (window.Q - eq) ** 2 / (2.0 * var))
            / math.sqrt(2.0 * math.pi * var))


def _branch_setup(curve: LagrangianCurve, Q: float, hbar: float,
                  caustic_threshold: float | None):
    if caustic_threshold is None:
        caustic_threshold = 1.0 / math.sqrt(hbar)
    br = branches_at(curve, Q, caustic_threshold)
    notes: list = []
    if len(br) == 0:
        diagnostics.report(
            notes, f"no real branches at Q = {Q:g} (evanescent region)",
            diagnostics.ConvergenceWarning)
    elif np.any(br.caustic):
        kept = int(np.sum(~br.caustic))
        diagnostics.report(
            notes,
            f"excluded {int(np.sum(br.caustic))} caustic branch(es) at Q = {Q:g}; "
            f"{kept} kept",
            diagnostics.ConvergenceWarning,
        )
    return br, notes


def lwc_sc_berry(curve: LagrangianCurve, Q: float, xi_q, hbar: float,
                 caustic_threshold: float | None = None) -> LwcSample:
    """Stationary-branch approximant: C = sum_j A_j exp(-i p_j xi_q / hbar).

    Normalization is relative (the curve average carries its own 1/2 pi);
    compare against exact routes after dividing by C(0).
    """
    xi_q = np.atleast_1d(np.asarray(xi_q, dtype=float))
    br, notes = _branch_setup(curve, Q, hbar, caustic_threshold)
    vals = np.zeros(xi_q.size, dtype=complex)
    for j in range(len(br)):
        if br.caustic[j]:
            continue
        vals += br.amplitude[j] * np.exp(-1j * br.p[j] * xi_q / hbar)
    return LwcSample(xi_q, vals, None, notes, branches=br)


def lwc_sc_quadratic(curve: LagrangianCurve, window: LwcWindow, xi_q,
                     caustic_threshold: float | None = None) -> LwcSample:
    """Berry branches with the window-shear Gaussian exp[-(Delta slope xi_q)^2 / 2 hbar^2]."""
    hb = window.hbar
    xi_q = np.atleast_1d(np.asarray(xi_q, dtype=float))
    br, notes = _branch_setup(curve, window.Q, hb, caustic_threshold)
    vals = np.zeros(xi_q.size, dtype=complex)
    for j in range(len(br)):
        if br.caustic[j]:
            continue
        shear = (window.delta * br.slope[j] * xi_q) ** 2 / (2.0 * hb**2)
        vals += br.amplitude[j] * np.exp(-1j * br.p[j] * xi_q / hb - shear)
    return LwcSample(xi_q, vals, window, notes, branches=br)


def shear_phi_qq(phi, slope: float) -> float:
    """Effective qq decoherence along a sheared branch: u . Phi u, u = (slope, 1)."""
    mat = np.asarray(getattr(phi, "phi", phi), dtype=float)
    u = np.array([float(slope), 1.0])
    return float(u @ mat @ u)


def _markov_branch_data(curve, H, channels, t, window, dt, caustic_threshold):
    evolved = evolve_curve_classically(curve, H, channels, t, dt) if t > 0 else curve
    br, notes = _branch_setup(evolved, window.Q, window.hbar, caustic_threshold)
    phi_qq = []
    for j in range(len(br)):
        if br.caustic[j]:
            phi_qq.append(math.nan)
            continue
        x_final = np.array([br.p[j], window.Q])
        dm = dynamics.decoherence_matrix(H, channels, x_final, t, dt=dt)
        notes.extend(dm.warnings)
        phi_qq.append(shear_phi_qq(dm.phi, br.slope[j]))
    return evolved, br, tuple(phi_qq), notes


def lwc_sc_markov(curve: LagrangianCurve, H, channels, t: float,
                  window: LwcWindow, xi_q, dt: float = 1e-3,
                  caustic_threshold: float | None = None) -> LwcSample:
    """Branches of the dissipatively evolved curve, damped per-branch by the
    sheared decoherence width exp[-Phi_qq xi_q^2 / 2 hbar] on top of the
    window shear factor."""
    hb = window.hbar
    xi_q = np.atleast_1d(np.asarray(xi_q, dtype=float))
    _, br, phi_qq, notes = _markov_branch_data(
        curve, H, channels, t, window, dt, caustic_threshold)
    vals = np.zeros(xi_q.size, dtype=complex)
    for j in range(len(br)):
        if br.caustic[j]:
            continue
        shear = (window.delta * br.slope[j] * xi_q) ** 2 / (2.0 * hb**2)
        damp = phi_qq[j] * xi_q**2 / (2.0 * hb)
        vals += br.amplitude[j] * np.exp(-1j * br.p[j] * xi_q / hb - shear - damp)
    return LwcSample(xi_q, vals, window, notes, branches=br, phi_qq=phi_qq)


def spectrum(sample: LwcSample, hbar: float | None = None) -> SpectralDensity:
    """Symplectic Fourier transform of C over xi_q:

        S(p') = (2 pi hbar)^-1 Int dxi_q C(xi_q) exp(+i p' xi_q / hbar).

    Requires a centred uniform xi_q grid with an even point count.  S is
    real up to an edge-bin residue, which is recorded.
    """
    if hbar is None:
        if sample.window is None:
            raise ValueError("pass hbar explicitly for window-free samples")
        hbar = sample.window.hbar
    xq = sample.xi_q
    n = xq.size
    d = xq[1] - xq[0]
    if n < 8 or n % 2 or not np.allclose(np.diff(xq), d, rtol=0, atol=1e-9 * abs(d)) \
            or abs(xq[n // 2]) > 1e-9 * abs(d):
        raise ValueError("spectrum needs a centred uniform even-count xi_q grid")
    notes = list(sample.warnings)
    mags = np.abs(sample.values)
    if mags.max() > 0 and max(mags[0], mags[-1]) > 1e-10 * mags.max():
        diagnostics.report(
            notes, "C(xi_q) not decayed at the grid edge; widen the xi_q grid",
            diagnostics.TruncationWarning)
    s_c = ft_axis(np.asarray(sample.values, dtype=complex), float(d), hbar,
                  axis=0, sign=+1) / (2.0 * math.pi * hbar)
    dp = 2.0 * math.pi * hbar / (n * d)
    p_axis = (np.arange(n) - n // 2) * dp
    re = np.real(s_c)
    residue = float(np.max(np.abs(np.imag(s_c))) / max(np.max(np.abs(re)), 1e-300))
    if residue > 1e-8:
        diagnostics.report(
            notes, f"spectrum imaginary residue {residue:.2e} above 1e-8",
            diagnostics.TruncationWarning)
    return SpectralDensity(p_axis, re, residue, notes)


def sc_spectrum_closed_form(curve: LagrangianCurve, H, channels, t: float,
                            window: LwcWindow, p_axis, dt: float = 1e-3,
                            caustic_threshold: float | None = None) -> SpectralDensity:
    """Sum of branch Gaussians A_j N(p_j, sigma_j^2) with
    sigma_j^2 = hbar Phi_qq(shear) + Delta^2 slope_j^2.

    A variance below the grid spacing squared is floored there and flagged
    (the true peak is narrower than the axis can represent).
    """
    hb = window.hbar
    p_axis = np.asarray(p_axis, dtype=float)
    dp = float(np.min(np.abs(np.diff(p_axis)))) if p_axis.size > 1 else 0.0
    _, br, phi_qq, notes = _markov_branch_data(
        curve, H, channels, t, window, dt, caustic_threshold)
    vals = np.zeros(p_axis.size)
    peaks = []
    for j in range(len(br)):
        if br.caustic[j]:
            continue
        var = hb * phi_qq[j] + (window.delta * br.slope[j]) ** 2
        flagged = False
        if var < dp**2:
            var = max(dp**2, 1e-300)
            flagged = True
            diagnostics.report(
                notes,
                f"spectral peak at p = {br.p[j]:g} narrower than the p axis "
                "spacing; width floored to one bin",
                diagnostics.TruncationWarning,
            )
        height = br.amplitude[j] / math.sqrt(2.0 * math.pi * var)
        vals += height * np.exp(-((p_axis - br.p[j]) ** 2) / (2.0 * var))
        peaks.append(Peak(float(br.p[j]), float(height), float(var), flagged=flagged))
    peaks.sort(key=lambda pk: -pk.height)
    return SpectralDensity(p_axis, vals, 0.0, notes, tuple(peaks))


def fit_peaks(p_axis, values, min_rel_height: float = 1e-3) -> list:
    """Local maxima refined by a 5-point log-parabola fit.

    Exact for sampled Gaussians: returns vertex position and variance
    -1 / (2 a) of the fitted log-parabola.  Peaks whose neighbourhood is not
    log-concave are reported at grid resolution and flagged.
    """
    p_axis = np.asarray(p_axis, dtype=float)
    v = np.asarray(values, dtype=float)
    if p_axis.size != v.size or v.size < 5:
        raise ValueError("need matching axes with at least 5 samples")
    dp = p_axis[1] - p_axis[0]
    top = float(np.max(v))
    peaks = []
    for i in range(2, v.size - 2):
        if not (v[i] > v[i - 1] and v[i] >= v[i + 1]):
            continue
        if v[i] < min_rel_height * top:
            continue
        seg = v[i - 2:i + 3]
        if np.any(seg <= 0):
            peaks.append(Peak(float(p_axis[i]), float(v[i]), math.nan, i, True))
            continue
        k = np.arange(-2.0, 3.0)
        a, b, c = np.polyfit(k, np.log(seg), 2)
        if a >= 0:
            peaks.append(Peak(float(p_axis[i]), float(v[i]), math.nan, i, True))
            continue
        shift = -b / (2.0 * a)
        peaks.append(Peak(
            float(p_axis[i] + shift * dp),
            float(math.exp(c - b**2 / (4.0 * a))),
            float(-dp**2 / (2.0 * a)),
            i,
            False,
        ))
    peaks.sort(key=lambda pk: -pk.height)
    return peaks


def resolution_verdict(peaks) -> ResolutionVerdict:
    """Are the two dominant peaks distinguishable?  Resolved when every
    width sqrt(variance) is below the peak separation."""
    if len(peaks) < 2:
        return ResolutionVerdict(False, 0.0, tuple(
            math.sqrt(pk.variance) if pk.variance == pk.variance else math.nan
            for pk in peaks[:1]))
    a, b = peaks[0], peaks[1]
    sep = abs(a.position - b.position)
    widths = tuple(math.sqrt(pk.variance) for pk in (a, b))
    ok = all(w == w and w < sep for w in widths)
    return ResolutionVerdict(bool(ok), float(sep), widths)


def symmetrized_observable_expectation(sample: LwcSample, sign: int):
    """Windowed expectation of the symmetrized translation pair:
    sign +1 gives 2 Re C (cosine pair), -1 gives -2 Im C (sine pair)."""
    if sign == 1:
        return 2.0 * np.real(sample.values)
    if sign == -1:
        return -2.0 * np.imag(sample.values)
    raise ValueError("sign must be +1 or -1")


def suggest_xi_q_grid(hbar: float, envelope_sigma: float | None = None,
                      points: int = 1024, dp_target: float | None = None) -> np.ndarray:
    """Centred even xi_q grid wide enough that a Gaussian envelope of the
    given sigma decays to 1e-12 (default sigma: the coherent chord width
    sqrt(2 hbar)).  dp_target, when set, further widens the grid so the
    spectral bin 2 pi hbar / (M dxi) is at most that fine."""
    if points % 2 or points < 8:
        raise ValueError("points must be even and at least 8")
    if envelope_sigma is None:
        envelope_sigma = math.sqrt(2.0 * hbar)
    half = envelope_sigma * math.sqrt(2.0 * math.log(1e12))
    if dp_target is not None:
        half = max(half, math.pi * hbar / dp_target)
    d = 2.0 * half / points
    return (np.arange(points) - points // 2) * d
