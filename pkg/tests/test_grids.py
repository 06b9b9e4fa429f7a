import math

import numpy as np
import pytest

from chordlab.diagnostics import GridDomainWarning
from chordlab.grids import (
    CenteredGrid,
    boundary_decay_ok,
    centre_from_chord,
    chord_from_centre,
    ft_axis,
    reflect_values,
    simpson_weights,
)
from chordlab.states import CoherentState, coherent_chord_function, coherent_wigner

HBAR = 0.05


def test_grid_axes_center_zero():
    g = CenteredGrid(2.0, 3.0, 64, HBAR)
    assert g.p_axis[32] == 0.0
    assert g.q_axis[32] == 0.0
    assert np.isclose(g.p_axis[0], -2.0)
    assert np.isclose(g.q_axis[0], -3.0)
    # right edge stops one step short of +half_width
    assert np.isclose(g.p_axis[-1], 2.0 - g.dp)


def test_grid_validation():
    with pytest.raises(ValueError):
        CenteredGrid(1.0, 1.0, 65, HBAR)  # odd
    with pytest.raises(ValueError):
        CenteredGrid(-1.0, 1.0, 64, HBAR)
    with pytest.raises(ValueError):
        CenteredGrid(1.0, 1.0, 64, 0.0)


def test_conjugate_grid_crosses_half_widths():
    """dp pairs with d(xi_q): dp * dxi_q = 2 pi hbar / M."""
    g = CenteredGrid(1.5, 2.5, 128, HBAR)
    c = g.conjugate()
    assert np.isclose(g.dp * c.dq, 2.0 * math.pi * HBAR / g.points)
    assert np.isclose(g.dq * c.dp, 2.0 * math.pi * HBAR / g.points)
    back = c.conjugate()
    assert np.isclose(back.half_width_p, g.half_width_p)
    assert np.isclose(back.half_width_q, g.half_width_q)
    assert c.is_conjugate_of(g) and g.is_conjugate_of(c)
    assert not g.is_conjugate_of(g)


def test_ft_axis_matches_direct_dft():
    """Both signs against an explicit O(M^2) sum."""
    rng = np.random.default_rng(5)
    m = 32
    dx = 0.21
    x = (np.arange(m) - m // 2) * dx
    dk = 2.0 * math.pi * HBAR / (m * dx)
    k = (np.arange(m) - m // 2) * dk
    f = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    for sign in (+1, -1):
        direct = dx * np.array([np.sum(f * np.exp(sign * 1j * x * kk / HBAR)) for kk in k])
        got = ft_axis(f, dx, HBAR, axis=0, sign=sign)
        assert np.max(np.abs(got - direct)) < 1e-12 * np.max(np.abs(direct))


def test_ft_axis_respects_axis_argument():
    rng = np.random.default_rng(8)
    f = rng.standard_normal((16, 16))
    a0 = ft_axis(f, 0.1, HBAR, axis=0, sign=-1)
    a1 = ft_axis(f.T, 0.1, HBAR, axis=1, sign=-1).T
    assert np.allclose(a0, a1)


def test_coherent_chord_from_wigner():
    """FFT of the coherent Wigner function lands on the closed-form chi."""
    state = CoherentState((0.3, -0.4), HBAR)
    grid = CenteredGrid(2.0, 2.0, 128, HBAR)
    pp, qq = grid.meshgrid()
    w = coherent_wigner(state, pp, qq)
    chi, cgrid = chord_from_centre(w, grid)
    xp, xq = cgrid.meshgrid()
    want = coherent_chord_function(state, xp, xq)
    assert np.max(np.abs(chi - want)) < 1e-10
    # chi(0) carries the total mass
    m = grid.points
    assert np.isclose(chi[m // 2, m // 2].real, 1.0 / (2.0 * math.pi * HBAR))


def test_round_trip_is_exact():
    rng = np.random.default_rng(11)
    grid = CenteredGrid(1.0, 1.0, 64, HBAR)
    pp, qq = grid.meshgrid()
    w = np.exp(-(pp**2 + qq**2) / 0.02) * (1.0 + 0.1 * rng.standard_normal(pp.shape))
    with np.errstate(all="ignore"):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            chi, cgrid = chord_from_centre(w, grid)
            back, bgrid = centre_from_chord(chi, cgrid)
    assert np.max(np.abs(back - w)) < 1e-12
    assert bgrid.is_conjugate_of(cgrid)


def test_chord_hermiticity_for_real_wigner():
    """Real W gives chi(-xi) = conj chi(xi) on the grid."""
    state = CoherentState((0.2, 0.5), HBAR)
    grid = CenteredGrid(2.0, 2.0, 64, HBAR)
    pp, qq = grid.meshgrid()
    chi, _ = chord_from_centre(coherent_wigner(state, pp, qq), grid)
    assert np.max(np.abs(reflect_values(chi) - np.conj(chi))) < 1e-12


def test_reflect_values_hits_negated_nodes():
    g = CenteredGrid(1.0, 1.0, 8, HBAR)
    pp, qq = g.meshgrid()
    f = np.sin(pp + 2.0 * qq) + pp**2
    want = np.sin(-pp - 2.0 * qq) + pp**2
    got = reflect_values(f)
    # the unpaired -M/2 row/column has no mirror; compare the interior
    assert np.allclose(got[1:, 1:], want[1:, 1:])


def test_boundary_decay_flags_and_warning():
    g = CenteredGrid(1.0, 1.0, 32, HBAR)
    pp, qq = g.meshgrid()
    wide = np.exp(-(pp**2 + qq**2) / 2.0)  # nowhere near decayed
    assert not boundary_decay_ok(wide)
    with pytest.warns(GridDomainWarning):
        chord_from_centre(wide, g)
    tight = np.exp(-(pp**2 + qq**2) / 0.005)
    assert boundary_decay_ok(tight)
    assert boundary_decay_ok(np.zeros((8, 8)))


def test_shape_mismatch_raises():
    g = CenteredGrid(1.0, 1.0, 16, HBAR)
    with pytest.raises(ValueError):
        chord_from_centre(np.zeros((8, 8)), g)


def test_simpson_weights_sum_and_order():
    for n in (3, 5, 11, 4, 10):
        w = simpson_weights(n, 0.2)
        assert np.isclose(w.sum(), (n - 1) * 0.2)
    x = np.linspace(0.0, 1.0, 7)
    w = simpson_weights(7, x[1] - x[0])
    assert np.isclose(w @ x**3, 0.25)  # exact on cubics
    x = np.linspace(0.2, 1.7, 301)
    w = simpson_weights(301, x[1] - x[0])
    assert abs(w @ np.exp(x) - (math.exp(1.7) - math.exp(0.2))) < 1e-9
    with pytest.raises(ValueError):
        simpson_weights(2, 0.1)
