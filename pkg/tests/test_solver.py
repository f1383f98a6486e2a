import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crw_router.errors import OutOfBand, SingularSystem
from crw_router.model import IncidencePort, SystemParams
from crw_router.solver import (UNKNOWNS, build_scattering_system, lattice_amplitude,
                               local_hamiltonian, routing_rates, solve_scattering)
from crw_router.wavepacket import LatticeConfig, build_lattice_hamiltonian

from conftest import random_params


def stationary_residual(params, E, port):
    """Max |(H - E) psi| of the solver state on a finite lattice, edges excluded.

    The lattice Hamiltonian is assembled independently by the wavepacket
    module, so this checks every row of the scattering system at once.
    """
    sol = solve_scattering(params, E, port)
    j_min, n = -15, params.l + 31
    cfg = LatticeConfig(n_cells=n, packet_center_k=1.0, packet_width_sites=1.0,
                        launch_offset=5, dt=0.01, t_max=1.0, j_min=j_min, port=port.value)
    H = build_lattice_hamiltonian(params, cfg).toarray()
    js = range(j_min, j_min + n)
    psi = np.concatenate([[lattice_amplitude(sol, "a", j) for j in js],
                          [lattice_amplitude(sol, "b", j) for j in js], sol.raw[8:]])
    r = H @ psi - E * psi
    keep = np.ones(len(psi), bool)
    keep[[0, n - 1, n, 2 * n - 1]] = False
    return np.max(np.abs(r[keep]))


def test_unknown_layout():
    assert len(UNKNOWNS) == 18
    M, rhs = build_scattering_system(SystemParams(), 10.3)
    assert M.shape == (18, 18) and rhs.shape == (18,)


def test_local_block_hermitian(asym):
    H = local_hamiltonian(asym)
    assert np.array_equal(H, H.conj().T)
    assert H[5, 4] == pytest.approx(asym.Omega1 * np.exp(-1j * asym.phi))


@pytest.mark.parametrize("port", list(IncidencePort))
@pytest.mark.parametrize("E", [8.7, 9.85, 10.3, 11.6])
def test_solution_is_stationary(asym, port, E):
    assert stationary_residual(asym, E, port) < 1e-10


@pytest.mark.parametrize("l", [1, 2, 5])
def test_solution_is_stationary_symmetric(l):
    p = SystemParams.symmetric(l=l, phi=0.7, Omega2=0.3)
    assert stationary_residual(p, 10.42, IncidencePort.LeftA) < 1e-10


def test_free_chain_transmits():
    p = SystemParams().with_values(g_a=0.0, g_s=0.0, l=4)
    for port, expected in ((IncidencePort.LeftA, "R_a"), (IncidencePort.RightB, "L_b")):
        rates = routing_rates(solve_scattering(p, 10.7, port)).as_dict()
        assert rates[expected] == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans(), st.sampled_from(list(IncidencePort)))
def test_sum_rule_any_port(seed, symmetric, port):
    rng = np.random.default_rng(seed)
    p = random_params(rng, symmetric)
    E = p.omega + rng.uniform(-1.98, 1.98)
    try:
        sol = solve_scattering(p, E, port)
    except SingularSystem:
        return
    assert routing_rates(sol).total == pytest.approx(1.0, abs=1e-9)


def test_mirror_symmetry_maps_left_a_to_right_b():
    # a <-> b together with j -> l - j is a symmetry when phi = 0, Omega1 = Omega2
    p = SystemParams.symmetric(l=3, Omega1=0.4)
    for E in (9.3, 10.2, 10.9):
        fwd = routing_rates(solve_scattering(p, E, IncidencePort.LeftA))
        mir = routing_rates(solve_scattering(p, E, IncidencePort.RightB))
        assert (fwd.L_a, fwd.R_a, fwd.L_b, fwd.R_b) == pytest.approx(
            (mir.R_b, mir.L_b, mir.R_a, mir.L_a), abs=1e-12)


@pytest.mark.parametrize("phi", [0.3, np.pi / 2, 2.0, 4.4])
def test_duality(asym, phi):
    p = asym.with_values(phi=phi)
    q = asym.with_values(phi=-phi)
    for E in np.linspace(8.3, 11.7, 7):
        fwd = routing_rates(solve_scattering(p, E, IncidencePort.LeftA)).L_b
        rev = routing_rates(solve_scattering(q, E, IncidencePort.LeftB)).L_a
        assert fwd == pytest.approx(rev, abs=1e-10)


def test_evanescent_guide_carries_no_flux():
    p = SystemParams().with_values(omega_b=13.5)
    sol = solve_scattering(p, 10.8)
    assert sol.evanescent == ("b",)
    assert sol.k_b.imag > 0
    rates = routing_rates(sol)
    assert rates.L_b == rates.R_b == 0.0
    assert rates.total == pytest.approx(1.0, abs=1e-12)


def test_unequal_bands_flux_normalised():
    p = SystemParams().with_values(omega_b=10.6, g_a=0.4, g_s=0.6)
    for E in (9.9, 10.4, 11.1):
        assert routing_rates(solve_scattering(p, E)).total == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("E", [7.9, 12.0, 13.0])
def test_out_of_band(E):
    with pytest.raises(OutOfBand):
        solve_scattering(SystemParams(), E)


def test_right_incidence_out_of_band_uses_b_band():
    p = SystemParams().with_values(omega_b=13.0)
    solve_scattering(p, 11.5, IncidencePort.LeftB)
    with pytest.raises(OutOfBand):
        solve_scattering(p, 10.0, IncidencePort.RightB)
