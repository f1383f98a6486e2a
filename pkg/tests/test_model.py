import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crw_router.errors import OutOfBand, ViolatedInvariant
from crw_router.model import (IncidencePort, SystemParams, complex_wavevector,
                              dispersion_energy, validate, wavevector_from_energy)


def test_defaults_are_symmetric(base):
    vp = validate(base)
    assert vp.symmetric
    assert vp.params is base


def test_aliases_expand():
    p = SystemParams().with_values(g_a=0.3, g_s=0.7, omega=9.0, Omega=0.2)
    assert (p.g_a1, p.g_b4, p.g_c1, p.g_d4) == (0.3, 0.3, 0.7, 0.7)
    assert p.omega_e3 == p.omega_s4_eff == p.omega_d == 9.0
    assert p.Omega1 == p.Omega2 == 0.2
    assert p.is_symmetric()


def test_specific_field_beats_alias():
    p = SystemParams().with_values(g_a=0.3, g_a2=0.9)
    assert p.g_a1 == 0.3 and p.g_a2 == 0.9
    assert not p.is_symmetric()


def test_level_shift_lowers_intermediate_level():
    p = SystemParams().with_values(delta_es1=0.2, delta_es4=-0.1)
    assert p.s1_level == pytest.approx(9.8)
    assert p.s4_level == pytest.approx(10.1)
    assert not p.is_symmetric()


@pytest.mark.parametrize("field, value", [
    ("xi", 0.0), ("xi", -1.0), ("l", 0), ("l", 2.5), ("g_c3", -0.1),
    ("Omega2", -0.2), ("omega_b", math.nan), ("phi", math.inf),
])
def test_invariant_violations(field, value):
    with pytest.raises(ViolatedInvariant) as err:
        validate(SystemParams().with_values(**{field: value}))
    assert err.value.field == field


def test_ports():
    assert IncidencePort.LeftB.guide == "b"
    assert IncidencePort.RightA.side == "right"
    assert IncidencePort("LeftA") is IncidencePort.LeftA


@given(st.floats(1e-6, math.pi - 1e-6), st.floats(-5, 5), st.floats(0.1, 3))
def test_dispersion_round_trip(k, omega, xi):
    E = dispersion_energy(k, omega, xi)
    if abs(E - omega) < 2 * xi * (1 - 1e-8):
        assert wavevector_from_energy(E, omega, xi) == pytest.approx(k, abs=1e-6)


def test_band_center_is_half_pi():
    assert wavevector_from_energy(10.0, 10.0, 1.0) == pytest.approx(np.pi / 2)


@pytest.mark.parametrize("E", [8.0, 12.0, 7.0])
def test_out_of_band(E):
    with pytest.raises(OutOfBand):
        wavevector_from_energy(E, 10.0, 1.0)


@pytest.mark.parametrize("E", [7.0, 13.0])
def test_evanescent_wavevector(E):
    k = complex_wavevector(E, 10.0, 1.0)
    assert k.imag > 0
    assert dispersion_energy(k, 10.0, 1.0) == pytest.approx(E)
    # outgoing solution e^{ikj} decays away from the node
    assert abs(np.exp(1j * k * 5)) < 1
