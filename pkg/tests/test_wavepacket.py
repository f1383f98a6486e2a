import json
import math

import numpy as np
import pytest

from crw_router.errors import NormDrift, PacketNotCleared
from crw_router.model import IncidencePort, SystemParams, wavevector_from_energy
from crw_router.solver import routing_rates, solve_scattering
from crw_router.wavepacket import (LatticeConfig, build_lattice_hamiltonian, evolve,
                                   initial_packet, measure_ports, run_wavepacket)

K = math.pi / 3


def test_lattice_hamiltonian_hermitian(asym):
    cfg = LatticeConfig.for_carrier(asym, K, energy_spread=0.2)
    H = build_lattice_hamiltonian(asym, cfg)
    assert H.shape == (2 * cfg.n_cells + 10,) * 2
    assert abs(H - H.getH()).max() == 0


def test_initial_packet_normalised():
    p = SystemParams()
    psi = initial_packet(p, LatticeConfig.for_carrier(p, K, energy_spread=0.2))
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-14)


def test_free_chain_transmits():
    p = SystemParams().with_values(g_a=0.0, g_s=0.0)
    rep = run_wavepacket(p, LatticeConfig.for_carrier(p, K, energy_spread=0.1))
    assert rep.measurement.rates.R_a == pytest.approx(1.0, abs=1e-6)
    assert rep.norm_drift < 1e-10


@pytest.mark.parametrize("port", ["LeftA", "RightB"])
def test_matches_solver_at_smooth_point(port):
    # a broad packet suffices where the spectrum is flat over its bandwidth
    p = SystemParams.symmetric(l=2)
    delta = -0.9
    k = wavevector_from_energy(10 + delta, 10, 1)
    rep = run_wavepacket(p, LatticeConfig.for_carrier(p, k, energy_spread=0.05, port=port))
    ss = routing_rates(solve_scattering(p, 10 + delta, IncidencePort(port))).as_dict()
    wp = rep.measurement.rates.as_dict()
    assert max(abs(wp[q] - ss[q]) for q in ss) < 0.02
    assert rep.measurement.total == pytest.approx(1.0, abs=1e-6)


def test_uncleared_packet_rejected():
    p = SystemParams()
    cfg = LatticeConfig.for_carrier(p, K, energy_spread=0.2)
    psi = initial_packet(p, cfg)
    stuck = np.zeros_like(psi)
    stuck[-cfg.j_min] = 0.1          # a_0
    stuck[-1] = math.sqrt(0.99)      # atomic level
    with pytest.raises(PacketNotCleared):
        measure_ports(stuck, p, cfg)
    m = measure_ports(stuck, p, cfg, require_cleared=False)
    assert m.residual_local == pytest.approx(0.99)
    m = measure_ports(psi, p, cfg)
    assert m.rates.L_a == pytest.approx(1.0)


def test_norm_drift_detected():
    p = SystemParams()
    cfg = LatticeConfig.for_carrier(p, K, energy_spread=0.2, dt=0.5)
    H = build_lattice_hamiltonian(p, cfg)
    with pytest.raises(NormDrift):
        evolve(H, initial_packet(p, cfg), cfg)


def test_config_checks():
    p = SystemParams()
    good = LatticeConfig.for_carrier(p, K, energy_spread=0.2)
    good.check(p)
    from dataclasses import replace
    for bad in (replace(good, dt=0.05), replace(good, n_cells=150),
                replace(good, t_max=good.t_max * 3)):
        with pytest.raises(ValueError):
            bad.check(p)


def test_report_json():
    p = SystemParams().with_values(g_a=0.0, g_s=0.0)
    rep = run_wavepacket(p, LatticeConfig.for_carrier(p, K, energy_spread=0.2))
    doc = json.loads(rep.to_json())
    assert set(doc["port_probabilities"]) == {"L_a", "R_a", "L_b", "R_b"}
    assert doc["carrier_energy"] == pytest.approx(10 - 2 * math.cos(K))
