import json
import math

import numpy as np
import pytest

from crw_router.analysis import (Engine, SweepAxis, evaluate_point, find_extrema,
                                 nonreciprocity, reverse_transmission, sweep)
from crw_router.errors import EngineMismatch
from crw_router.model import SystemParams


def test_axis_validation():
    with pytest.raises(ValueError):
        SweepAxis("Delta", [])
    with pytest.raises(ValueError):
        SweepAxis("Delta", [0.0, 0.2, 0.1])
    with pytest.raises(ValueError):
        SweepAxis("nonsense", [0.0, 1.0])
    assert SweepAxis("g_s", [0.1, 0.2]).grid == (0.1, 0.2)
    assert SweepAxis.linspace("l", 1, 4, 4).grid == (1, 2, 3, 4)


def test_engines_agree_on_symmetric_sweep():
    p = SystemParams.symmetric(l=3, phi=1.1, Omega2=0.3)
    ax = [SweepAxis.linspace("Delta", -1.9, 1.9, 41)]
    a = sweep(p, ax, ["L_a", "R_a", "L_b", "R_b", "T_lb", "N"], engine="closed", nudge=True)
    b = sweep(p, ax, ["L_a", "R_a", "L_b", "R_b", "T_lb", "N"], engine="solver")
    clean = a.reasons == ""
    assert list(a.reasons[~clean]) == ["near_pole_nudged"]  # Delta = 0
    for q in a.quantities:
        assert np.max(np.abs(a[q] - b[q])[clean]) < 1e-9
        assert np.max(np.abs(a[q] - b[q])) < 1e-5


def test_closed_engine_rejects_asymmetric(asym):
    with pytest.raises(EngineMismatch):
        sweep(asym, [SweepAxis.linspace("Delta", -1, 1, 3)], ["L_a"], engine="closed")


def test_auto_falls_back_to_solver_at_pole():
    vals, reason = evaluate_point(SystemParams.symmetric(l=2), 10.0, ["L_a"], Engine.AUTO)
    assert reason == "near_pole_solver"
    assert vals["L_a"] == pytest.approx(1.0, abs=1e-12)
    vals, reason = evaluate_point(SystemParams.symmetric(l=2), 10.0, ["L_a"], Engine.CLOSED,
                                  nudge=False)
    assert reason == "near_pole" and math.isnan(vals["L_a"])


def test_failures_are_recorded_per_point():
    res = sweep(SystemParams(), [SweepAxis("Delta", [-2.5, 0.3, 2.5])], ["L_a"])
    assert list(res.reasons) == ["out_of_band", "", "out_of_band"]
    assert math.isnan(res["L_a"][0]) and not math.isnan(res["L_a"][1])


def test_two_axis_shape_and_labels():
    p = SystemParams.symmetric(Omega1=0.5, Omega2=0.7, g_a=0.65, g_s=0.65, l=1)
    res = sweep(p, [SweepAxis.linspace("phi", 0, 2 * np.pi, 9)], ["L_a", "R_b"], energy=10.5)
    assert res.shape == (9,) and res.energy == 10.5
    assert res.labels["Delta_Omega"] == pytest.approx(0.2)
    grid = sweep(p, [SweepAxis.linspace("Delta", -1, 1, 5),
                     SweepAxis.linspace("phi", 0, np.pi, 3)], ["R_b"])
    assert grid["R_b"].shape == (5, 3)
    assert grid.columns() == ["Delta", "phi", "R_b", "reason"]


def test_threads_do_not_change_output(asym):
    ax = [SweepAxis.linspace("Delta", -1.9, 1.9, 60)]
    one = sweep(asym, ax, ["N"], threads=1).to_csv()
    four = sweep(asym, ax, ["N"], threads=4).to_csv()
    assert one == four


def test_csv_round_trips_floats():
    res = sweep(SystemParams(), [SweepAxis.linspace("Delta", -1, 1, 7)], ["R_a", "total"])
    lines = res.to_csv().splitlines()
    assert lines[0] == "Delta,R_a,total,reason"
    row = lines[3].split(",")
    assert float(row[1]) == res["R_a"][2]


def test_json_export():
    res = sweep(SystemParams(), [SweepAxis("Delta", [-3.0, 0.1])], ["L_a"])
    doc = json.loads(res.to_json())
    assert doc["quantities"]["L_a"][0] is None
    assert doc["reasons"] == ["out_of_band", ""]


def test_nonreciprocity_vanishes_at_zero_phase(asym):
    p = asym.with_values(phi=0.0)
    for E in np.linspace(8.2, 11.8, 9):
        assert abs(nonreciprocity(p, E)) < 1e-10


def test_nonreciprocity_odd_in_phase(asym):
    for E in (9.6, 9.85, 10.4):
        assert nonreciprocity(asym.with_values(phi=np.pi / 2), E) == pytest.approx(
            -nonreciprocity(asym.with_values(phi=3 * np.pi / 2), E), abs=1e-10)
    assert 0 <= reverse_transmission(asym, 10.0) <= 1


def test_find_extrema():
    res = sweep(SystemParams.symmetric(l=1), [SweepAxis.linspace("Delta", -1.9, 1.9, 201)],
                ["L_a"])
    ext = find_extrema(res, "L_a")
    assert any(e.kind == "max" for e in ext)
    assert all(not math.isnan(e.value) for e in ext)
