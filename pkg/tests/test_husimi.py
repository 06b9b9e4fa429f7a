import math

import numpy as np
import pytest

from chordlab.chordfn import ChordFunction
from chordlab.curves import harmonic_circle
from chordlab.diagnostics import GridDomainWarning, TruncationWarning
from chordlab.grids import CenteredGrid, centre_from_chord
from chordlab.husimi import (
    husimi_fourier,
    husimi_from_lwc,
    husimi_from_wigner,
    matched_window_delta,
)
from chordlab.lwc import (
    LwcSample,
    LwcWindow,
    lwc_coherent_closed_form,
    lwc_from_chord,
    suggest_xi_q_grid,
)
from chordlab.states import (
    CoherentState,
    coherent_chord,
    coherent_chord_function,
    coherent_husimi,
    coherent_wigner,
    wkb_chord,
)

HBAR = 0.05


def test_matched_window_delta():
    assert matched_window_delta(HBAR) == pytest.approx(math.sqrt(HBAR / 2))


def test_husimi_from_wigner_matches_closed_form():
    state = CoherentState((0.3, -0.2), HBAR)
    grid = CenteredGrid(2.5, 2.5, 256, HBAR)
    pp, qq = grid.meshgrid()
    w = coherent_wigner(state, pp, qq)
    smoothed = husimi_from_wigner(w, grid)
    want = coherent_husimi(state, pp, qq)
    peak = 1.0 / (2.0 * math.pi * HBAR)
    assert np.max(np.abs(smoothed - want)) < 1e-12 * peak
    # unit-mass smoothing kernel preserves the total mass
    assert np.sum(smoothed) * grid.dp * grid.dq == pytest.approx(1.0, abs=1e-10)


def test_husimi_from_wigner_guards():
    grid = CenteredGrid(0.8, 0.8, 64, HBAR)
    state = CoherentState((0.0, 0.0), HBAR)
    pp, qq = grid.meshgrid()
    w = coherent_wigner(state, pp, qq)
    with pytest.warns(GridDomainWarning):
        husimi_from_wigner(w, grid)
    sink = []
    with pytest.warns(GridDomainWarning):
        husimi_from_wigner(w, grid, sink=sink)
    assert len(sink) == 1
    with pytest.raises(ValueError):
        husimi_from_wigner(w[:-1], grid)


def test_husimi_fourier_three_forms():
    state = CoherentState((0.4, 0.1), HBAR)
    xi_p = np.array([0.0, 0.2, -0.35])
    xi_q = np.array([0.1, 0.0, 0.3])
    damp = np.exp(-(xi_p**2 + xi_q**2) / (4.0 * HBAR))
    want = coherent_chord_function(state, xi_p, xi_q) * damp

    from_callable = husimi_fourier(coherent_chord(state))
    assert np.allclose(from_callable(xi_p, xi_q), want)

    grid = CenteredGrid(2.0, 2.0, 128, HBAR)
    sampled = coherent_chord(state).sample(grid)
    from_grid = husimi_fourier(sampled)
    assert from_grid.gridded
    xp, xq = grid.meshgrid()
    full = coherent_chord_function(state, xp, xq) * np.exp(
        -(xp**2 + xq**2) / (4.0 * HBAR))
    assert np.allclose(from_grid.values, full)

    from_raw = husimi_fourier(sampled.values, grid)
    assert np.allclose(from_raw.values, full)
    with pytest.raises(ValueError):
        husimi_fourier(sampled.values)


def test_husimi_from_lwc_coherent():
    state = CoherentState((0.2, -0.1), HBAR)
    xi_q = suggest_xi_q_grid(HBAR, points=512)
    q_centres = np.linspace(-1.0, 1.0, 21)
    samples = []
    for qc in q_centres:
        win = LwcWindow.husimi_matched(qc, HBAR)
        samples.append(LwcSample(xi_q, lwc_coherent_closed_form(state, win, xi_q), win))
    p_axis = np.linspace(-1.0, 1.2, 45)
    out = husimi_from_lwc(samples, p_axis)
    assert out.shape == (p_axis.size, q_centres.size)
    want = coherent_husimi(state, p_axis[:, None], q_centres[None, :])
    peak = 1.0 / (2.0 * math.pi * HBAR)
    assert np.max(np.abs(out - want)) < 1e-10 * peak


def test_husimi_from_lwc_matches_grid_route_for_wkb():
    """One window column of the reconstruction equals the P section of the
    full smoothed density computed through the chord grid."""
    curve = harmonic_circle(0.5, 512)
    fn = wkb_chord(curve, HBAR)

    grid = CenteredGrid(2.6, 2.6, 256, HBAR)
    f_vals = husimi_fourier(fn, None).sample(grid).values
    dens, centre_grid = centre_from_chord(f_vals, grid)
    dens = np.real(dens)
    peak = float(np.max(dens))

    q0_col = centre_grid.points // 2
    assert centre_grid.q_axis[q0_col] == 0.0
    keep = np.abs(centre_grid.p_axis) <= 1.5
    p_nodes = centre_grid.p_axis[keep]

    window = LwcWindow.husimi_matched(0.0, HBAR)
    xi_q = suggest_xi_q_grid(HBAR, points=256)
    sample = lwc_from_chord(fn, window, xi_q, xi_p_points=1025)
    recon = husimi_from_lwc([sample], p_nodes)[:, 0]

    assert np.max(np.abs(recon - dens[keep, q0_col])) < 1e-5 * peak
    assert recon.min() > -1e-6 * peak


def test_husimi_from_lwc_validation():
    xi_q = suggest_xi_q_grid(HBAR, points=64)
    good = LwcWindow.husimi_matched(0.0, HBAR)
    vals = np.exp(-(xi_q**2) / (2.0 * HBAR)).astype(complex)
    ok = LwcSample(xi_q, vals, good)
    with pytest.raises(ValueError):
        husimi_from_lwc([], [0.0])
    with pytest.raises(ValueError):
        husimi_from_lwc([LwcSample(xi_q, vals, None)], [0.0])
    with pytest.raises(ValueError):
        bad = LwcSample(xi_q, vals, LwcWindow.canonical(0.0, HBAR))
        husimi_from_lwc([bad], [0.0])
    with pytest.raises(ValueError):
        other = LwcSample(xi_q * 2.0, vals, LwcWindow.husimi_matched(0.1, HBAR))
        husimi_from_lwc([ok, other], [0.0])
    with pytest.raises(ValueError):
        husimi_from_lwc([LwcSample(xi_q[:2], vals[:2], good)], [0.0])
    with pytest.raises(ValueError):
        crooked = LwcSample(xi_q**3, vals, good)
        husimi_from_lwc([crooked], [0.0])


def test_husimi_from_lwc_imag_residue_warning():
    xi_q = suggest_xi_q_grid(HBAR, points=64)
    win = LwcWindow.husimi_matched(0.0, HBAR)
    rng = np.random.default_rng(3)
    # violates C(-xi) = conj C(xi), so the rebuilt density cannot be real
    vals = (rng.normal(size=xi_q.size) + 1j * rng.normal(size=xi_q.size)) \
        * np.exp(-(xi_q**2) / (2.0 * HBAR))
    sink = []
    with pytest.warns(TruncationWarning):
        husimi_from_lwc([LwcSample(xi_q, vals, win)], np.linspace(-1, 1, 11), sink=sink)
    assert sink and "imaginary" in sink[0]
