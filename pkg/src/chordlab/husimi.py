"""Gaussian-smoothed phase-space densities (unit-mass convention).

The smoothed density is the Wigner function convolved with the round
Gaussian (pi hbar)^-1 exp(-u^2 / hbar), which preserves total mass; a
coherent state peaks at (2 pi hbar)^-1.  In chord space the smoothing is a
plain multiplication by exp(-xi^2 / 4 hbar).

A full smoothed density can also be rebuilt from windowed correlations,
but only for window width Delta = sqrt(hbar / 2): that is the unique width
at which the window Gaussian and the chord damping combine to the smoothing
kernel exactly.  Other widths are rejected rather than approximated.
"""

from __future__ import annotations

import math

import numpy as np

from . import diagnostics
from .chordfn import ChordFunction
from .grids import CenteredGrid, simpson_weights

__all__ = [
    "husimi_from_wigner",
    "husimi_fourier",
    "husimi_from_lwc",
    "matched_window_delta",
]


def matched_window_delta(hbar: float) -> float:
    """The unique window width for exact reconstruction: sqrt(hbar / 2)."""
    return math.sqrt(0.5 * hbar)


def husimi_from_wigner(values, grid: CenteredGrid, sink=None) -> np.ndarray:
    """Circular FFT convolution of W with the unit-mass Gaussian kernel.

    The wrap-around error is negligible only if W has decayed a few
    sqrt(hbar) inside the grid edge; mass in that margin triggers a
    GridDomainWarning.
    """
    values = np.asarray(values)
    if values.shape != (grid.points, grid.points):
        raise ValueError("values shape must match the grid")
    hb = grid.hbar
    margin = 3.0 * math.sqrt(hb)
    pp, qq = grid.meshgrid()
    near_edge = ((np.abs(pp) > grid.half_width_p - margin)
                 | (np.abs(qq) > grid.half_width_q - margin))
    total = float(np.sum(np.abs(values)))
    if total > 0:
        frac = float(np.sum(np.abs(values)[near_edge])) / total
        if frac > 1e-12:
            diagnostics.report(
                sink,
                f"{frac:.2e} of |W| lies within 3 sqrt(hbar) of the grid edge; "
                "smoothing will wrap around",
                diagnostics.GridDomainWarning,
            )
    kernel = np.exp(-(pp**2 + qq**2) / hb) / (math.pi * hb)
    conv = np.fft.ifft2(np.fft.fft2(values) * np.fft.fft2(np.fft.ifftshift(kernel)))
    return np.real(conv) * grid.dp * grid.dq


def husimi_fourier(chi, grid: CenteredGrid | None = None) -> ChordFunction:
    """Chord-space form of the smoothing: F(xi) = exp(-xi^2 / 4 hbar) chi(xi)."""
    if isinstance(chi, ChordFunction):
        if chi.gridded:
            xp, xq = chi.grid.meshgrid()
            damp = np.exp(-(xp**2 + xq**2) / (4.0 * chi.hbar))
            return ChordFunction.from_grid(chi.values * damp, chi.grid)
        fn = chi

        def damped(xi_p, xi_q):
            xi_p = np.asarray(xi_p, dtype=float)
            xi_q = np.asarray(xi_q, dtype=float)
            return fn(xi_p, xi_q) * np.exp(-(xi_p**2 + xi_q**2) / (4.0 * fn.hbar))

        return ChordFunction.from_callable(damped, fn.hbar)
    if grid is None:
        raise ValueError("raw values need their grid")
    xp, xq = grid.meshgrid()
    damp = np.exp(-(xp**2 + xq**2) / (4.0 * grid.hbar))
    return ChordFunction.from_grid(np.asarray(chi) * damp, grid)


def husimi_from_lwc(samples, p_axis, sink=None) -> np.ndarray:
    """Rebuild smoothed-density sections from windowed correlations:

        rho_H(P, Q_k) = (2 pi hbar)^-1 Int dxi_q C(xi_q, Q_k)
                        exp(+i P xi_q / hbar) exp(-Delta^2 xi_q^2 / 2 hbar^2),

    exact if and only if every window has Delta = sqrt(hbar / 2).  Returns an
    array of shape (len(p_axis), len(samples)), one column per window centre.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one windowed sample")
    if samples[0].window is None:
        raise ValueError("samples must carry their windows")
    hb = samples[0].window.hbar
    want = matched_window_delta(hb)
    xi_q = samples[0].xi_q
    for s in samples:
        if s.window is None:
            raise ValueError("samples must carry their windows")
        if abs(s.window.delta - want) > 1e-12 * want or s.window.hbar != hb:
            raise ValueError(
                "reconstruction requires window width sqrt(hbar/2) exactly; "
                f"got delta = {s.window.delta!r}")
        if s.xi_q.shape != xi_q.shape or not np.allclose(s.xi_q, xi_q, rtol=0, atol=1e-12):
            raise ValueError("all samples must share one xi_q grid")
    p_axis = np.asarray(p_axis, dtype=float)
    if xi_q.size < 3:
        raise ValueError("xi_q grid too small")
    d = xi_q[1] - xi_q[0]
    if not np.allclose(np.diff(xi_q), d, rtol=0, atol=1e-9 * abs(d)):
        raise ValueError("xi_q grid must be uniform")
    w = simpson_weights(xi_q.size, d) * np.exp(-(want * xi_q) ** 2 / (2.0 * hb**2))
    kernel = np.exp(1j * np.outer(p_axis, xi_q) / hb) * w
    c_mat = np.stack([s.values for s in samples], axis=1)
    out = kernel @ c_mat / (2.0 * math.pi * hb)
    residue = float(np.max(np.abs(np.imag(out))) / max(np.max(np.abs(np.real(out))), 1e-300))
    if residue > 1e-8:
        diagnostics.report(
            sink, f"reconstructed density has imaginary residue {residue:.2e}",
            diagnostics.TruncationWarning)
    return np.real(out)
