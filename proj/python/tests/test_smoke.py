import json
import math

import numpy as np
import pytest

import dopplerline as dl


def test_default_line():
    line = dl.default_line()
    assert line.propagation_time == pytest.approx(40e-9)
    assert line.impedance == pytest.approx(50.0)
    assert line.i_star == pytest.approx(6.15e-3)


def test_quadratic_law_matches_composed_ratio_at_small_current():
    line = dl.default_line()
    omega = 2 * math.pi * 4e9
    v0 = line.velocity
    i = 0.05 * line.i_star
    exact = dl.compose_doppler(omega, [(-v0, v0, dl.phase_velocity(i, line))]) - omega
    assert exact == pytest.approx(dl.shift_from_current(omega, i, line), rel=0.01)


def test_errors_are_typed():
    with pytest.raises(dl.ValidationError):
        dl.parse_current("3GHz")
    with pytest.raises(dl.ValidationError):
        dl.scenario_json("no_such_scenario")
    assert issubclass(dl.CriticalCurrentExceeded, dl.Error)


def test_catalog_and_json_round_trip():
    names = [name for name, _ in dl.catalog()]
    assert {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "edf2", "edf3"} <= set(names)
    cfg = json.loads(dl.scenario_json("fig2"))
    assert cfg["name"] == "fig2"


def test_boundaries_of_the_30ns_pulse():
    b = dl.condition_boundaries(1.62e-3, 30e-9)
    assert b["blue_start"] == pytest.approx(80e-9)
    assert b["red_start"] < b["cancel_start"] < b["blue_start"] < b["blue_end"]


def test_fit_recovers_i_star():
    omega = 2 * math.pi * 4e9
    i_star = 6.15e-3
    pts = [(i, -(omega / 4) * (i / i_star) ** 2) for i in np.linspace(0.2e-3, 2e-3, 8)]
    fit = dl.fit_amplitude_sweep(pts, omega)
    assert fit["i_star"] == pytest.approx(i_star, rel=1e-6)


def test_single_red_run():
    r = dl.run_scenario("fig2", delays=[14.65e-9])
    (run,) = r["runs"]
    assert run["condition"] == "red_only"
    assert run["phase_shift_hz"] == pytest.approx(run["oracle_centre_hz"], rel=0.01)
    assert run["global_shift_hz"] < -60e6
    assert len(run["right_out"]["t"]) == len(run["right_out"]["y"])


def test_critical_current_is_rejected():
    with pytest.raises(dl.CriticalCurrentExceeded):
        dl.run_scenario("fig5", cp_amplitudes=[3e-3])


def test_selftest_passes():
    results = dl.selftest()
    assert results and all(p["passed"] for p in results)
