"""Command line experiment runner.

    chordlab <experiment> --config FILE [--out DIR] [--seed N]
    chordlab --schema

Each experiment reads a flat key = value config, writes <experiment>.csv
plus a JSON sidecar with the echoed config, derived quantities, and any
numerical warnings raised along the way.  All floating-point output uses
%.17g, so identical configs reproduce byte-identical files.

Exit codes: 0 success, 1 numerical failure, 2 bad usage or bad config.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings as _warnings

import numpy as np

from . import fock, gridio, husimi as husimi_mod, lwc as lwc_mod, states
from .config import Config, ConfigError
from .curves import harmonic_circle, pendulum_level_curve, quartic_level_curve
from .dynamics import (LindbladChannel, decoherence_matrix, evolve_chord_function,
                       hamiltonians, positivity_time, total_gamma)
from .grids import CenteredGrid, centre_from_chord, chord_from_centre
from .lwc import (LwcWindow, fit_peaks, lwc_coherent_closed_form, lwc_direct,
                  lwc_from_chord, lwc_sc_berry, lwc_sc_markov, lwc_sc_quadratic,
                  resolution_verdict, sc_spectrum_closed_form, spectrum,
                  suggest_xi_q_grid)

__all__ = ["main", "run", "resolution_verdict"]

SCHEMA_VERSION = 1

_CURVE_FAMILIES = ("circle", "quartic", "pendulum")
_COMMON_KEYS = {"hbar", "seed", "time.t", "time.dt"}
_STATE_KEYS = {"state.family", "state.eta", "state.action", "state.energy",
               "state.a", "state.b", "state.g", "state.n", "state.samples"}
_H_KEYS = {"hamiltonian.family", "hamiltonian.omega", "hamiltonian.mass",
           "hamiltonian.a", "hamiltonian.b", "hamiltonian.g", "channel"}
_GRID_KEYS = {"grid.points", "grid.half_width"}
_XI_KEYS = {"xi.points", "xi.half_width"}
_WINDOW_KEYS = {"window.q", "window.delta"}

EXPERIMENT_KEYS = {
    "coherent-demo": _COMMON_KEYS | {"state.eta"} | _GRID_KEYS,
    "evolve-chord": _COMMON_KEYS | _STATE_KEYS | _H_KEYS | _GRID_KEYS | _XI_KEYS,
    "lwc": (_COMMON_KEYS | _STATE_KEYS | _H_KEYS | _GRID_KEYS | _XI_KEYS
            | _WINDOW_KEYS | {"lwc.route"}),
    "spectrum": (_COMMON_KEYS | _STATE_KEYS | _H_KEYS | _GRID_KEYS | _XI_KEYS
                 | _WINDOW_KEYS | {"lwc.route"}),
    "positivity": _COMMON_KEYS | _H_KEYS,
    "husimi": _COMMON_KEYS | _STATE_KEYS | _H_KEYS | _GRID_KEYS | {"fock.dim"},
    "validate": {"hbar"},
}

SCHEMA_TEXT = """\
chordlab config schema (flat key = value lines; '#' comments)

common keys
  hbar                float, default 0.05
  seed                int, default 0 (echoed; no experiment is stochastic)
  time.t              float, default 0: evolution time
  time.dt             float, default 1e-3: integrator step

state selection (evolve-chord, lwc, spectrum, husimi)
  state.family        coherent | circle | quartic | pendulum | fock | cat
  state.eta           two floats "eta_p eta_q" (coherent, cat), default 0 0
  state.action        float (circle), default 0.5
  state.energy        float (quartic, pendulum level sets)
  state.a state.b     quartic potential coefficients, defaults 1, 0
  state.g             pendulum coefficient, default 1
  state.n             int (fock), default 0
  state.samples       int, curve sample count, default 1024

dynamics (evolve-chord, lwc, spectrum, positivity, husimi)
  hamiltonian.family  zero | free | harmonic | quartic | pendulum, default harmonic
  hamiltonian.omega   float, default 1 (harmonic)
  hamiltonian.mass    float, default 1 (free)
  hamiltonian.a/.b    floats, defaults 1, 0 (quartic)
  hamiltonian.g       float, default 1 (pendulum)
  channel             repeatable, four floats "l'_p l'_q l''_p l''_q"

grids
  grid.points         int, default 256 (128 for evolve-chord, husimi)
  grid.half_width     float, default auto from the state
  xi.points           int, default 1024: xi_q samples (even)
  xi.half_width       float, default auto

windows (lwc, spectrum)
  window.q            repeatable float: window centres (at least one)
  window.delta        float, default sqrt(hbar)
  lwc.route           auto | closed-form | chord | direct | sc-berry |
                      sc-quadratic | sc-markov, default auto

experiments
  coherent-demo   wigner.csv, chord.csv: coherent state round trip + errors
  evolve-chord    chord.csv: evolved chord function on a chord grid
  lwc             lwc.csv: windowed correlations C(xi_q, Q)
  spectrum        spectrum.csv: windowed momentum densities + peak tables
  positivity      positivity.csv: det Phi(t) curve and the threshold time
  husimi          husimi.csv: smoothed density of a number-basis state
  validate        validate.csv: built-in closed-form consistency checks
"""


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _write_table(path, meta: list, columns: list, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# chordlab schema_version = {SCHEMA_VERSION}\n")
        for k, v in meta:
            fh.write(f"# {k} = {v}\n")
        fh.write("# columns = " + ",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else _fmt(cell)
                              for cell in row) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=_json_default)
        fh.write("\n")


def _hamiltonian(cfg: Config):
    fam = cfg.str("hamiltonian.family", "harmonic",
                  choices={"zero", "free", "harmonic", "quartic", "pendulum"})
    if fam == "zero":
        return hamiltonians.zero()
    if fam == "free":
        return hamiltonians.free(cfg.float("hamiltonian.mass", 1.0))
    if fam == "harmonic":
        return hamiltonians.harmonic(cfg.float("hamiltonian.omega", 1.0))
    if fam == "quartic":
        return hamiltonians.quartic(cfg.float("hamiltonian.a", 1.0),
                                    cfg.float("hamiltonian.b", 0.0))
    return hamiltonians.pendulum(cfg.float("hamiltonian.g", 1.0))


def _channels(cfg: Config) -> list:
    return [LindbladChannel((v[0], v[1]), (v[2], v[3]))
            for v in cfg.vector_list("channel", 4)]


def _state_family(cfg: Config) -> str:
    return cfg.str("state.family", "coherent",
                   choices={"coherent", "circle", "quartic", "pendulum", "fock", "cat"})


def _curve(cfg: Config, family: str):
    samples = cfg.int("state.samples", 1024)
    if family == "circle":
        return harmonic_circle(cfg.float("state.action", 0.5), samples)
    if family == "quartic":
        return quartic_level_curve(cfg.float("state.energy"),
                                   cfg.float("state.a", 1.0),
                                   cfg.float("state.b", 0.0), samples)
    return pendulum_level_curve(cfg.float("state.energy"),
                                cfg.float("state.g", 1.0), samples)


def _coherent(cfg: Config, hbar: float) -> states.CoherentState:
    eta = cfg.floats("state.eta", 2, (0.0, 0.0))
    return states.CoherentState(eta, hbar)


def _auto_centre_half_width(cfg: Config, hbar: float) -> float:
    fam = _state_family(cfg)
    pad = 8.0 * math.sqrt(hbar)
    if fam in ("coherent", "cat"):
        eta = cfg.floats("state.eta", 2, (0.0, 0.0))
        return max(abs(eta[0]), abs(eta[1])) + pad
    if fam == "fock":
        n = cfg.int("state.n", 0)
        return math.sqrt(2.0 * hbar * (n + 1)) + pad
    curve = _curve(cfg, fam)
    return float(np.max(np.abs(curve.points))) + pad


def _capture(fn, *args, **kwargs):
    """Run fn recording every warning; returns (result, messages)."""
    with _warnings.catch_warnings(record=True) as rec:
        _warnings.simplefilter("always")
        result = fn(*args, **kwargs)
    return result, [f"{w.category.__name__}: {w.message}" for w in rec]


# ---------------------------------------------------------------------------
# experiments


def _exp_coherent_demo(cfg: Config, out: str, extra: dict) -> dict:
    hbar = extra["hbar"]
    state = _coherent(cfg, hbar)
    m = cfg.int("grid.points", 256)
    half = cfg.float("grid.half_width", 0.0) or _auto_centre_half_width(cfg, hbar)
    grid = CenteredGrid(half, half, m, hbar)
    pp, qq = grid.meshgrid()
    w_vals = states.coherent_wigner(state, pp, qq)
    (chi, cgrid), notes = _capture(chord_from_centre, w_vals, grid)
    xp, xq = cgrid.meshgrid()
    chi_err = float(np.max(np.abs(chi - states.coherent_chord_function(state, xp, xq))))
    (back, _), notes2 = _capture(centre_from_chord, chi, cgrid)
    round_err = float(np.max(np.abs(back - w_vals)))
    gridio.save_grid_csv(os.path.join(out, "wigner.csv"), w_vals, grid, "centre")
    gridio.save_grid_csv(os.path.join(out, "chord.csv"), chi, cgrid, "chord")
    extra["warnings"].extend(notes + notes2)
    return {
        "chi_closed_form_error": chi_err,
        "round_trip_error": round_err,
        "chi_at_zero": float(np.real(chi[m // 2, m // 2])),
        "expected_chi_at_zero": 1.0 / (2.0 * math.pi * hbar),
    }


def _chord_source(cfg: Config, hbar: float):
    """Initial data for evolve_chord_function: Wigner grid or sampled curve."""
    fam = _state_family(cfg)
    if fam == "coherent":
        state = _coherent(cfg, hbar)
        m = cfg.int("grid.points", 128)
        half = cfg.float("grid.half_width", 0.0) or _auto_centre_half_width(cfg, hbar)
        grid = CenteredGrid(half, half, m, hbar)
        pp, qq = grid.meshgrid()
        return (states.coherent_wigner(state, pp, qq), grid)
    if fam in _CURVE_FAMILIES:
        return _curve(cfg, fam)
    raise ConfigError(f"state.family {fam!r} has no chord-transport source")


def _exp_evolve_chord(cfg: Config, out: str, extra: dict) -> dict:
    hbar = extra["hbar"]
    source = _chord_source(cfg, hbar)
    model = _hamiltonian(cfg)
    channels = _channels(cfg)
    t = cfg.float("time.t", 0.0)
    dt = cfg.float("time.dt", 1e-3)
    chi_fn, notes = _capture(evolve_chord_function, source, model, channels,
                             t, dt=dt, hbar=hbar)
    extra["warnings"].extend(notes)
    extra["warnings"].extend(str(w) for w in chi_fn.warnings)
    m = cfg.int("xi.points", 0) or cfg.int("grid.points", 128)
    if m % 2:
        raise ConfigError("xi.points must be even")
    half = cfg.float("xi.half_width", 0.0) or 7.44 * math.sqrt(2.0 * hbar)
    cgrid = CenteredGrid(half, half, m, hbar)
    xp, xq = cgrid.meshgrid()
    vals = chi_fn(xp, xq)
    gridio.save_grid_csv(os.path.join(out, "chord.csv"), vals, cgrid, "chord")
    return {
        "gamma": total_gamma(channels),
        "time": t,
        "samples": int(chi_fn.weights.size),
        "chi_at_zero": float(np.real(vals[m // 2, m // 2])),
    }


def _xi_grid(cfg: Config, hbar: float) -> np.ndarray:
    pts = cfg.int("xi.points", 1024)
    if pts % 2:
        raise ConfigError("xi.points must be even")
    half = cfg.float("xi.half_width", 0.0)
    if half:
        return (np.arange(pts) - pts // 2) * (2.0 * half / pts)
    return suggest_xi_q_grid(hbar, points=pts)


def _pick_route(cfg: Config, fam: str, t: float) -> str:
    route = cfg.str("lwc.route", "auto",
                    choices={"auto", "closed-form", "chord", "direct",
                             "sc-berry", "sc-quadratic", "sc-markov"})
    if route != "auto":
        return route
    if fam == "coherent":
        return "closed-form" if t == 0.0 else "chord"
    if fam in _CURVE_FAMILIES:
        return "sc-markov" if t > 0.0 else "sc-quadratic"
    raise ConfigError(f"no lwc route for state.family {fam!r}")


def _lwc_samples(cfg: Config, extra: dict):
    """Shared by the lwc and spectrum experiments."""
    hbar = extra["hbar"]
    fam = _state_family(cfg)
    t = cfg.float("time.t", 0.0)
    dt = cfg.float("time.dt", 1e-3)
    q_centres = cfg.float_list("window.q")
    if not q_centres:
        raise ConfigError("need at least one window.q")
    delta = cfg.float("window.delta", math.sqrt(hbar))
    xi_q = _xi_grid(cfg, hbar)
    route = _pick_route(cfg, fam, t)
    model = _hamiltonian(cfg)
    channels = _channels(cfg)

    chi_fn = None
    curve = None
    coh = None
    if route in ("closed-form", "direct"):
        if fam != "coherent" or t != 0.0:
            raise ConfigError(f"route {route!r} needs state.family = coherent and time.t = 0")
        coh = _coherent(cfg, hbar)
    elif route == "chord":
        source = _chord_source(cfg, hbar)
        chi_fn, notes = _capture(evolve_chord_function, source, model, channels,
                                 t, dt=dt, hbar=hbar)
        extra["warnings"].extend(notes)
        extra["warnings"].extend(str(w) for w in chi_fn.warnings)
    else:
        if fam not in _CURVE_FAMILIES:
            raise ConfigError(f"route {route!r} needs a curve state")
        curve = _curve(cfg, fam)

    samples = []
    for q0 in q_centres:
        window = LwcWindow(q0, delta, hbar)
        if route == "closed-form":
            vals = lwc_coherent_closed_form(coh, window, xi_q)
            sample = lwc_mod.LwcSample(xi_q, vals, window, [])
        elif route == "direct":
            span = 6.0 * delta + 1.0
            q_axis = np.linspace(q0 - span, q0 + span, 801)
            slices = states.coherent_position_slices(coh, q_axis, xi_q)
            sample, notes = _capture(lwc_direct, slices, q_axis, xi_q, window, xi_q)
            extra["warnings"].extend(notes)
        elif route == "chord":
            sample, notes = _capture(lwc_from_chord, chi_fn, window, xi_q)
            extra["warnings"].extend(notes)
        elif route == "sc-berry":
            sample, notes = _capture(lwc_sc_berry, curve, q0, xi_q, hbar)
            extra["warnings"].extend(notes)
        elif route == "sc-quadratic":
            sample, notes = _capture(lwc_sc_quadratic, curve, window, xi_q)
            extra["warnings"].extend(notes)
        else:
            sample, notes = _capture(lwc_sc_markov, curve, model, channels, t,
                                     window, xi_q, dt=dt)
            extra["warnings"].extend(notes)
        extra["warnings"].extend(str(w) for w in sample.warnings)
        samples.append((q0, window, sample))
    return route, samples, (model, channels, t, dt)


def _exp_lwc(cfg: Config, out: str, extra: dict) -> dict:
    route, samples, _ = _lwc_samples(cfg, extra)
    rows = []
    info = []
    for q0, _, sample in samples:
        for x, v in zip(sample.xi_q, sample.values):
            rows.append((q0, x, v.real, v.imag))
        entry = {"Q": q0, "c0_re": float(np.real(sample.c0())),
                 "c0_im": float(np.imag(sample.c0()))}
        if sample.branches is not None and len(sample.branches):
            entry["branch_momenta"] = [float(p) for p in sample.branches.p]
        info.append(entry)
    _write_table(os.path.join(out, "lwc.csv"),
                 [("experiment", "lwc"), ("route", route)],
                 ["Q", "xi_q", "re", "im"], rows)
    return {"route": route, "windows": info}


def _exp_spectrum(cfg: Config, out: str, extra: dict) -> dict:
    hbar = extra["hbar"]
    route, samples, (model, channels, t, dt) = _lwc_samples(cfg, extra)
    rows = []
    info = []
    for q0, window, sample in samples:
        sd, notes = _capture(spectrum, sample, hbar)
        extra["warnings"].extend(notes)
        extra["warnings"].extend(str(w) for w in sd.warnings)
        for p, s in zip(sd.p, sd.values):
            rows.append((q0, p, s))
        peaks = fit_peaks(sd.p, sd.values, 1e-2)
        entry = {
            "Q": q0,
            "imag_residue": sd.imag_residue,
            "peaks": [{"position": pk.position, "height": pk.height,
                       "variance": pk.variance, "flagged": pk.flagged}
                      for pk in peaks[:6]],
        }
        if len(peaks) >= 2:
            v = resolution_verdict(peaks)
            entry["resolved"] = v.resolved
            entry["separation"] = v.separation
            entry["widths"] = list(v.widths)
        if route in ("sc-markov", "sc-quadratic"):
            sc, notes2 = _capture(sc_spectrum_closed_form,
                                  _curve(cfg, _state_family(cfg)), model, channels,
                                  t, window, sd.p, dt=dt)
            extra["warnings"].extend(notes2)
            entry["closed_form_peaks"] = [
                {"position": pk.position, "height": pk.height,
                 "variance": pk.variance, "flagged": pk.flagged}
                for pk in sc.peaks]
            if len(sc.peaks) >= 2:
                v = resolution_verdict(list(sc.peaks))
                entry["closed_form_resolved"] = v.resolved
        info.append(entry)
    _write_table(os.path.join(out, "spectrum.csv"),
                 [("experiment", "spectrum"), ("route", route)],
                 ["Q", "p", "s"], rows)
    return {"route": route, "windows": info}


def _exp_positivity(cfg: Config, out: str, extra: dict) -> dict:
    hbar = extra["hbar"]
    model = _hamiltonian(cfg)
    channels = _channels(cfg)
    if not channels:
        raise ConfigError("positivity needs at least one channel")
    dt = cfg.float("time.dt", 1e-3)
    tp, notes = _capture(positivity_time, model, channels, dt=dt)
    extra["warnings"].extend(notes)
    rows = []
    for tk in np.linspace(0.0, 2.0 * tp, 65)[1:]:
        dm = decoherence_matrix(model, channels, np.zeros(2), float(tk), dt=dt,
                                convergence_check=False)
        rows.append((tk, dm.det, dm.phi[0, 0], dm.phi[0, 1], dm.phi[1, 1]))
    _write_table(os.path.join(out, "positivity.csv"),
                 [("experiment", "positivity")],
                 ["t", "det_phi", "phi_pp", "phi_pq", "phi_qq"], rows)
    dm = decoherence_matrix(model, channels, np.zeros(2), tp, dt=dt,
                            convergence_check=False)
    return {
        "positivity_time": tp,
        "gamma": total_gamma(channels),
        "det_phi_at_tp": dm.det,
        "hbar": hbar,
    }


def _fock_state(cfg: Config, hbar: float, dim: int) -> fock.FockDensityMatrix:
    fam = _state_family(cfg)
    if fam == "coherent":
        return fock.coherent_density_matrix(cfg.floats("state.eta", 2, (0.0, 0.0)), hbar, dim)
    if fam == "fock":
        return fock.fock_density_matrix(cfg.int("state.n", 0), hbar, dim)
    if fam == "cat":
        return fock.cat_density_matrix(cfg.floats("state.eta", 2, (0.0, 0.0)), hbar, dim)
    raise ConfigError(f"state.family {fam!r} is not number-basis representable here")


def _exp_husimi(cfg: Config, out: str, extra: dict) -> dict:
    hbar = extra["hbar"]
    dim = cfg.int("fock.dim", 128)
    rho = _fock_state(cfg, hbar, dim)
    extra["warnings"].extend(str(w) for w in rho.warnings)
    t = cfg.float("time.t", 0.0)
    if t > 0.0:
        model = _hamiltonian(cfg)
        rho, notes = _capture(fock.evolve_state, rho, model, _channels(cfg), t,
                              cfg.float("time.dt", 1e-3))
        extra["warnings"].extend(notes)
        extra["warnings"].extend(str(w) for w in rho.warnings)
    m = cfg.int("grid.points", 128)
    half = cfg.float("grid.half_width", 0.0) or _auto_centre_half_width(cfg, hbar)
    grid = CenteredGrid(half, half, m, hbar)
    sink: list = []
    w_vals = fock.wigner_exact(rho, grid, sink)
    h_vals, notes = _capture(husimi_mod.husimi_from_wigner, w_vals, grid)
    extra["warnings"].extend(str(s) for s in sink)
    extra["warnings"].extend(notes)
    gridio.save_grid_csv(os.path.join(out, "husimi.csv"), h_vals, grid, "husimi")
    peak = int(np.argmax(h_vals))
    i, j = divmod(peak, m)
    return {
        "dim": dim,
        "mass": float(np.sum(h_vals) * grid.dp * grid.dq),
        "peak_value": float(h_vals[i, j]),
        "peak_p": float(grid.p_axis[i]),
        "peak_q": float(grid.q_axis[j]),
        "min_value": float(np.min(h_vals)),
    }


def _exp_validate(cfg: Config, out: str, extra: dict) -> dict:
    hbar = extra["hbar"]
    checks = []

    state = states.CoherentState((0.3, -0.4), hbar)
    grid = CenteredGrid(2.5, 2.5, 128, hbar)
    pp, qq = grid.meshgrid()
    w_vals = states.coherent_wigner(state, pp, qq)
    chi, cgrid = chord_from_centre(w_vals, grid)
    xp, xq = cgrid.meshgrid()
    checks.append(("coherent_chord_fft",
                   float(np.max(np.abs(chi - states.coherent_chord_function(state, xp, xq)))),
                   1e-10))
    back, _ = centre_from_chord(chi, cgrid)
    checks.append(("grid_round_trip", float(np.max(np.abs(back - w_vals))), 1e-12))

    damping = LindbladChannel((0.0, 1.0), (1.0, 0.0))
    model = hamiltonians.harmonic()
    tt = 0.3
    chi_fn = evolve_chord_function((w_vals, grid), model, [damping], tt,
                                   dt=1e-3, convergence_check=False)
    rot = np.array([[math.cos(tt), -math.sin(tt)], [math.sin(tt), math.cos(tt)]])
    eta_t = math.exp(-tt) * rot @ np.array(state.eta)
    moved = states.CoherentState((eta_t[0], eta_t[1]), hbar)
    probe = math.sqrt(hbar) * np.array([0.25, 0.8, 1.5, 2.2])
    got = chi_fn(probe, probe[::-1])
    want = states.coherent_chord_function(moved, probe, probe[::-1])
    checks.append(("damped_coherent_transport",
                   float(np.max(np.abs(got - want))) * 2.0 * math.pi * hbar, 1e-6))

    qchan = LindbladChannel((0.0, 1.0), (0.0, 0.0))
    dm = decoherence_matrix(model, [qchan], np.zeros(2), math.pi, dt=1e-3,
                            convergence_check=False)
    checks.append(("phi_harmonic_pi",
                   float(np.max(np.abs(dm.phi - 0.5 * math.pi * np.eye(2)))), 1e-8))

    pump = LindbladChannel((1.0, 0.0), (0.0, 1.0))
    tp = positivity_time(hamiltonians.zero(), [pump])
    checks.append(("positivity_time_pump", abs(tp - 0.5 * math.log(2.0)), 1e-6))

    window = LwcWindow.canonical(0.2, hbar)
    xi_q = suggest_xi_q_grid(hbar, points=512)
    closed = lwc_coherent_closed_form(state, window, xi_q)
    via_chord = lwc_from_chord(states.coherent_chord(state), window, xi_q)
    checks.append(("lwc_routes_coherent",
                   float(np.max(np.abs(closed - via_chord.values))), 1e-8))

    h_direct = husimi_mod.husimi_from_wigner(w_vals, grid)
    h_closed = states.coherent_husimi(state, pp, qq)
    checks.append(("husimi_smoothing",
                   float(np.max(np.abs(h_direct - h_closed))) * 2.0 * math.pi * hbar,
                   1e-6))

    rows = [(name, err, tol, "1" if err <= tol else "0")
            for name, err, tol in checks]
    _write_table(os.path.join(out, "validate.csv"),
                 [("experiment", "validate")],
                 ["check", "error", "tol", "passed"],
                 [(name, _fmt(err), _fmt(tol), ok) for name, err, tol, ok in rows])
    failures = [name for name, err, tol, ok in rows if ok == "0"]
    if failures:
        raise RuntimeError("validation failed: " + ", ".join(failures))
    return {"checks": [{"name": n, "error": e, "tol": tol} for n, e, tol in checks],
            "failures": failures}


_EXPERIMENTS = {
    "coherent-demo": _exp_coherent_demo,
    "evolve-chord": _exp_evolve_chord,
    "lwc": _exp_lwc,
    "spectrum": _exp_spectrum,
    "positivity": _exp_positivity,
    "husimi": _exp_husimi,
    "validate": _exp_validate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chordlab",
        description="phase-space experiments for open quantum evolution")
    parser.add_argument("--schema", action="store_true",
                        help="print the config schema and exit")
    sub = parser.add_subparsers(dest="experiment")
    for name in _EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", required=(name != "validate"),
                        help="path to a key = value config file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help="overrides the config seed (echoed in the sidecar)")
    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        print(SCHEMA_TEXT, end="")
        return 0
    if not args.experiment:
        parser.print_usage(sys.stderr)
        return 2

    try:
        if getattr(args, "config", None):
            cfg = Config.load(args.config)
        else:
            cfg = Config.from_text("")
        cfg.check_keys(EXPERIMENT_KEYS[args.experiment])
        hbar = cfg.float("hbar", 0.05)
        if hbar <= 0:
            raise ConfigError("hbar must be positive")
        seed = args.seed if args.seed is not None else cfg.int("seed", 0)
    except FileNotFoundError as exc:
        print(f"chordlab: config file not found: {exc.filename}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        where = f"{args.config}:{exc.line}" if exc.line else (args.config or "config")
        print(f"chordlab: {where}: {exc.message}", file=sys.stderr)
        return 2

    out = args.out
    os.makedirs(out, exist_ok=True)
    extra = {"hbar": hbar, "warnings": []}
    try:
        result = _EXPERIMENTS[args.experiment](cfg, out, extra)
    except ConfigError as exc:
        where = f"{args.config}:{exc.line}" if exc.line else (args.config or "config")
        print(f"chordlab: {where}: {exc.message}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure: report, nonzero exit
        print(f"chordlab: {args.experiment}: {exc}", file=sys.stderr)
        return 1

    payload = {
        "experiment": args.experiment,
        "schema_version": SCHEMA_VERSION,
        "hbar": hbar,
        "seed": seed,
        "config": cfg.echo(),
        "warnings": extra["warnings"],
        "result": result,
    }
    _write_json(os.path.join(out, f"{args.experiment}.json"), payload)
    return 0


def main() -> None:
    sys.exit(run())
