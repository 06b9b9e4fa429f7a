import math

import numpy as np
import pytest
from scipy.special import j0

from chordlab.diagnostics import ConvergenceWarning
from chordlab.curves import harmonic_circle, quartic_level_curve
from chordlab.states import (
    CoherentState,
    coherent_chord,
    coherent_chord_function,
    coherent_husimi,
    coherent_position_slices,
    coherent_wavefunction,
    coherent_wigner,
    short_chord_validity_radius,
    wkb_chord,
    wkb_short_chord_function,
)

HBAR = 0.05


def test_state_validation():
    with pytest.raises(ValueError):
        CoherentState((0.0, 0.0), 0.0)
    with pytest.raises(NotImplementedError):
        CoherentState((0.0, 0.0), HBAR, omega=2.0)


def test_wavefunction_normalized():
    state = CoherentState((0.4, -0.3), HBAR)
    q = np.linspace(-3.0, 3.0, 4001)
    psi = coherent_wavefunction(state, q)
    mass = np.trapezoid(np.abs(psi) ** 2, q)
    assert abs(mass - 1.0) < 1e-12


def test_wigner_from_wavefunction_oracle():
    """W(p, q) = (2 pi hbar)^-1 Int ds exp(i p s / hbar) rho(q - s/2, q + s/2)."""
    state = CoherentState((0.3, 0.2), HBAR)
    s = np.linspace(-3.0, 3.0, 12001)
    for p0, q0 in [(0.0, 0.0), (0.3, 0.2), (-0.1, 0.5)]:
        rho = coherent_position_slices(state, np.array([q0]), s)[0]
        integrand = np.exp(1j * p0 * s / HBAR) * rho
        w = np.trapezoid(integrand, s) / (2.0 * math.pi * HBAR)
        assert abs(w.imag) < 1e-10
        assert abs(w.real - coherent_wigner(state, p0, q0)) < 1e-9


def test_chord_from_slices_oracle():
    """chi(xi_p, xi_q) = (2 pi hbar)^-1 Int dq exp(-i xi_p q / hbar) rho(q + xi_q/2, q - xi_q/2)."""
    state = CoherentState((-0.2, 0.45), HBAR)
    q = np.linspace(-2.5, 3.5, 12001)
    for xp, xq in [(0.0, 0.0), (0.1, 0.05), (-0.3, 0.2)]:
        rho = coherent_position_slices(state, q, np.array([-xq]))[:, 0]
        integrand = np.exp(-1j * xp * q / HBAR) * rho
        chi = np.trapezoid(integrand, q) / (2.0 * math.pi * HBAR)
        assert abs(chi - coherent_chord_function(state, xp, xq)) < 1e-9


def test_chord_function_structure():
    state = CoherentState((0.7, -0.1), HBAR)
    assert np.isclose(coherent_chord_function(state, 0.0, 0.0),
                      1.0 / (2.0 * math.pi * HBAR))
    xi_p = np.array([0.1, -0.04, 0.22])
    xi_q = np.array([0.0, 0.31, -0.17])
    chi = coherent_chord_function(state, xi_p, xi_q)
    assert np.allclose(coherent_chord_function(state, -xi_p, -xi_q), np.conj(chi))
    # displacing the state only multiplies on the plane-wave phase
    base = coherent_chord_function(CoherentState((0.0, 0.0), HBAR), xi_p, xi_q)
    phase = np.exp(1j * (0.7 * xi_q - (-0.1) * xi_p) / HBAR)
    assert np.allclose(chi, base * phase)


def test_husimi_peak_and_mass():
    state = CoherentState((0.2, 0.6), HBAR)
    assert np.isclose(coherent_husimi(state, 0.2, 0.6), 1.0 / (2.0 * math.pi * HBAR))
    p = np.linspace(-1.5, 1.9, 501)
    q = np.linspace(-1.3, 2.4, 501)
    vals = coherent_husimi(state, p[:, None], q[None, :])
    mass = np.trapezoid(np.trapezoid(vals, q, axis=1), p)
    assert abs(mass - 1.0) < 1e-10


def test_wkb_circle_is_bessel():
    """Uniform average over the circle of action I:
    chi(xi) = (2 pi hbar)^-1 J0(sqrt(2 I) |xi| / hbar)."""
    action = 0.5
    curve = harmonic_circle(action, 2048)
    rng = np.random.default_rng(9)
    xi_p = math.sqrt(HBAR) * rng.uniform(-2.5, 2.5, 40)
    xi_q = math.sqrt(HBAR) * rng.uniform(-2.5, 2.5, 40)
    got = wkb_short_chord_function(curve, xi_p, xi_q, HBAR)
    want = j0(math.sqrt(2.0 * action) * np.hypot(xi_p, xi_q) / HBAR) / (2.0 * math.pi * HBAR)
    assert np.max(np.abs(got - want)) < 1e-8 / (2.0 * math.pi * HBAR)
    assert np.max(np.abs(got.imag)) < 1e-12 / (2.0 * math.pi * HBAR)


def test_wkb_scalar_and_broadcast():
    curve = harmonic_circle(0.5, 1024)
    v = wkb_short_chord_function(curve, 0.1, 0.0, HBAR, convergence_check=False)
    assert np.ndim(v) == 0
    m = wkb_short_chord_function(curve, np.zeros((2, 3)), 0.1, HBAR, convergence_check=False)
    assert m.shape == (2, 3)


def test_wkb_warns_on_undersampled_curve():
    curve = harmonic_circle(0.5, 16)
    xi = np.array([2.0 * math.sqrt(HBAR)])
    with pytest.warns(ConvergenceWarning):
        wkb_short_chord_function(curve, xi, xi, HBAR)
    sink = []
    with pytest.warns(ConvergenceWarning):
        wkb_short_chord_function(curve, xi, xi, HBAR, sink=sink)
    assert len(sink) == 1  # records alongside the warning


def test_wkb_chord_wrapper():
    curve = harmonic_circle(0.5, 2048)
    fn = wkb_chord(curve, HBAR)
    assert not fn.gridded
    xi = math.sqrt(HBAR) * np.array([0.5, 1.0])
    direct = wkb_short_chord_function(curve, xi, xi, HBAR, convergence_check=False)
    assert np.allclose(fn(xi, xi), direct)
    with pytest.warns(ConvergenceWarning):
        wkb_chord(harmonic_circle(0.5, 16), HBAR)


def test_validity_radius():
    # the circle's osculating radius is its radius
    curve = harmonic_circle(0.5, 1024)
    want = (8.0 * HBAR * 1.0) ** (1.0 / 3.0)
    assert abs(short_chord_validity_radius(curve, HBAR) - want) < 1e-4
    # a quartic level curve is flatter at the q turning points than anywhere
    # on the circle, so its minimum radius is smaller
    quart = quartic_level_curve(0.5, samples=1024)
    assert 0.0 < short_chord_validity_radius(quart, HBAR) < want


def test_coherent_chord_container():
    state = CoherentState((0.1, 0.1), HBAR)
    fn = coherent_chord(state)
    assert fn.hbar == HBAR
    assert np.isclose(fn(0.0, 0.0), 1.0 / (2.0 * math.pi * HBAR))
