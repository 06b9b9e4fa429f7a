import json
import math
import subprocess
import sys

import numpy as np
import pytest

from chordlab import cli


def run_cli(*argv):
    return cli.run(list(argv))


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_json(tmp_path, name):
    with open(tmp_path / name) as fh:
        return json.load(fh)


def test_schema_prints_and_exits_zero(capsys):
    assert run_cli("--schema") == 0
    out = capsys.readouterr().out
    assert "chordlab config schema" in out
    for name in ("coherent-demo", "evolve-chord", "lwc", "spectrum",
                 "positivity", "husimi", "validate"):
        assert name in out


def test_no_experiment_is_usage_error(capsys):
    assert run_cli() == 2
    assert "usage" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert run_cli("lwc", "--config", str(tmp_path / "nope.cfg")) == 2
    assert "not found" in capsys.readouterr().err


def test_unknown_key_reports_path_and_line(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "hbar = 0.05\nwho = 1\n")
    assert run_cli("positivity", "--config", cfg, "--out", str(tmp_path)) == 2
    err = capsys.readouterr().err
    assert f"{cfg}:2:" in err and "unknown key" in err


def test_malformed_config_line(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "hbar 0.05\n")
    assert run_cli("validate", "--config", cfg, "--out", str(tmp_path)) == 2
    assert f"{cfg}:1:" in capsys.readouterr().err


def test_coherent_demo_and_determinism(tmp_path):
    cfg = write_cfg(tmp_path, "hbar = 0.05\nstate.eta = 0.2 0.1\ngrid.points = 64\n")
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert run_cli("coherent-demo", "--config", cfg, "--out", str(out1)) == 0
    assert run_cli("coherent-demo", "--config", cfg, "--out", str(out2)) == 0
    for name in ("wigner.csv", "chord.csv", "coherent-demo.json"):
        a = (out1 / name).read_bytes()
        b = (out2 / name).read_bytes()
        assert a == b and a

    payload = json.loads((out1 / "coherent-demo.json").read_text())
    assert payload["schema_version"] == 1
    assert payload["experiment"] == "coherent-demo"
    assert payload["config"]["state.eta"] == "0.2 0.1"
    res = payload["result"]
    assert res["chi_closed_form_error"] < 1e-10
    assert res["round_trip_error"] < 1e-12
    assert res["chi_at_zero"] == pytest.approx(res["expected_chi_at_zero"], rel=1e-10)


def test_seed_override_is_echoed(tmp_path):
    cfg = write_cfg(tmp_path, "hbar = 0.05\nseed = 3\ngrid.points = 32\n")
    out = tmp_path / "o"
    assert run_cli("coherent-demo", "--config", cfg, "--out", str(out), "--seed", "7") == 0
    assert json.loads((out / "coherent-demo.json").read_text())["seed"] == 7


def test_positivity_pump(tmp_path):
    cfg = write_cfg(tmp_path, "hamiltonian.family = zero\nchannel = 1 0 0 1\n")
    out = tmp_path / "o"
    assert run_cli("positivity", "--config", cfg, "--out", str(out)) == 0
    res = json.loads((out / "positivity.json").read_text())["result"]
    assert res["positivity_time"] == pytest.approx(0.5 * math.log(2.0), abs=1e-6)
    assert res["det_phi_at_tp"] == pytest.approx(0.25, abs=1e-6)
    assert res["gamma"] == pytest.approx(-1.0)
    rows = [line for line in (out / "positivity.csv").read_text().splitlines()
            if not line.startswith("#")]
    assert len(rows) == 64


def test_positivity_saturating_channel_fails(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "hamiltonian.family = zero\nchannel = 0 1 1 0\n")
    assert run_cli("positivity", "--config", cfg, "--out", str(tmp_path)) == 1
    assert "too weak" in capsys.readouterr().err


def test_positivity_requires_channel(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "hbar = 0.05\n")
    assert run_cli("positivity", "--config", cfg, "--out", str(tmp_path)) == 2
    assert "needs at least one channel" in capsys.readouterr().err


def test_validate_green(tmp_path):
    out = tmp_path / "o"
    assert run_cli("validate", "--out", str(out)) == 0
    res = json.loads((out / "validate.json").read_text())["result"]
    assert res["failures"] == []
    table = (out / "validate.csv").read_text().splitlines()
    data = [line for line in table if not line.startswith("#")]
    assert len(data) == 7
    assert all(line.endswith(",1") for line in data)


def test_lwc_closed_form_route(tmp_path):
    cfg = write_cfg(tmp_path, """\
hbar = 0.05
state.family = coherent
state.eta = 0.4 0.3
window.q = 0.0
window.q = 0.3
xi.points = 64
""")
    out = tmp_path / "o"
    assert run_cli("lwc", "--config", cfg, "--out", str(out)) == 0
    payload = json.loads((out / "lwc.json").read_text())
    assert payload["result"]["route"] == "closed-form"
    assert len(payload["result"]["windows"]) == 2
    rows = [line for line in (out / "lwc.csv").read_text().splitlines()
            if not line.startswith("#")]
    assert len(rows) == 2 * 64


def test_lwc_direct_route_matches_closed_form(tmp_path):
    base = """\
hbar = 0.05
state.family = coherent
state.eta = 0.1 0.2
window.q = 0.1
xi.points = 32
lwc.route = {route}
"""
    outs = {}
    for route in ("closed-form", "direct"):
        cfg = write_cfg(tmp_path, base.format(route=route), f"{route}.cfg")
        out = tmp_path / route
        assert run_cli("lwc", "--config", cfg, "--out", str(out)) == 0
        rows = [line.split(",") for line in (out / "lwc.csv").read_text().splitlines()
                if not line.startswith("#")]
        outs[route] = np.array([[float(c) for c in row] for row in rows])
    assert np.max(np.abs(outs["direct"] - outs["closed-form"])) < 1e-6


def test_lwc_chord_route_after_evolution(tmp_path):
    cfg = write_cfg(tmp_path, """\
hbar = 0.05
state.family = coherent
state.eta = 0.0 0.5
time.t = 0.2
channel = 0 1 1 0
grid.points = 32
window.q = 0.0
xi.points = 32
""")
    out = tmp_path / "o"
    assert run_cli("lwc", "--config", cfg, "--out", str(out)) == 0
    payload = json.loads((out / "lwc.json").read_text())
    assert payload["result"]["route"] == "chord"


def test_spectrum_circle_markov(tmp_path):
    cfg = write_cfg(tmp_path, """\
hbar = 0.05
state.family = circle
state.action = 0.5
state.samples = 512
hamiltonian.family = harmonic
channel = 0 0.5 0 0
time.t = 3.14159265358979
window.q = 0.0
xi.points = 256
""")
    out = tmp_path / "o"
    assert run_cli("spectrum", "--config", cfg, "--out", str(out)) == 0
    payload = json.loads((out / "spectrum.json").read_text())
    win = payload["result"]["windows"][0]
    assert payload["result"]["route"] == "sc-markov"
    pos = sorted(pk["position"] for pk in win["peaks"][:2])
    assert pos[0] == pytest.approx(-1.0, abs=0.02)
    assert pos[1] == pytest.approx(1.0, abs=0.02)
    assert win["resolved"] is True
    cf = sorted(pk["position"] for pk in win["closed_form_peaks"])
    assert cf[0] == pytest.approx(-1.0, abs=1e-6)
    assert cf[1] == pytest.approx(1.0, abs=1e-6)
    # fitted widths should track the decoherence prediction
    want_var = 0.05 * 0.25 * 0.5 * math.pi
    for pk in win["peaks"][:2]:
        assert pk["variance"] == pytest.approx(want_var, rel=0.1)


def test_evolve_chord_experiment(tmp_path):
    cfg = write_cfg(tmp_path, """\
hbar = 0.05
state.family = coherent
state.eta = 0.0 0.4
hamiltonian.family = harmonic
channel = 0 1 1 0
time.t = 0.1
grid.points = 32
xi.points = 32
""")
    out = tmp_path / "o"
    assert run_cli("evolve-chord", "--config", cfg, "--out", str(out)) == 0
    res = json.loads((out / "evolve-chord.json").read_text())["result"]
    assert res["gamma"] == pytest.approx(1.0)
    assert res["chi_at_zero"] == pytest.approx(1.0 / (2 * math.pi * 0.05), rel=1e-6)
    assert (out / "chord.csv").exists()


def test_evolve_chord_rejects_odd_xi_points(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "state.eta = 0 0\nxi.points = 31\ngrid.points = 32\n")
    assert run_cli("evolve-chord", "--config", cfg, "--out", str(tmp_path)) == 2
    assert "must be even" in capsys.readouterr().err


def test_husimi_fock_state(tmp_path):
    cfg = write_cfg(tmp_path, """\
hbar = 0.05
state.family = fock
state.n = 1
fock.dim = 32
grid.points = 64
grid.half_width = 2.0
""")
    out = tmp_path / "o"
    assert run_cli("husimi", "--config", cfg, "--out", str(out)) == 0
    res = json.loads((out / "husimi.json").read_text())["result"]
    assert res["mass"] == pytest.approx(1.0, abs=1e-6)
    assert res["min_value"] > -1e-9
    # smoothed n = 1 ring peaks at radius sqrt(2 hbar) with value e^-1 / 2 pi hbar
    want_peak = math.exp(-1.0) / (2.0 * math.pi * 0.05)
    assert res["peak_value"] == pytest.approx(want_peak, rel=2e-2)
    radius = math.hypot(res["peak_p"], res["peak_q"])
    assert 0.2 < radius < 0.45
    assert (out / "husimi.csv").exists()


def test_console_script_runs():
    proc = subprocess.run(["chordlab", "--schema"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "chordlab config schema" in proc.stdout


def test_module_main_matches(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.argv = ["chordlab", "--schema"]
        cli.main()
    assert exc.value.code == 0
