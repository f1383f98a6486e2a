"""Time-domain validation oracle.

A Gaussian single-photon packet is launched on a finite two-chain lattice
that carries the full router Hamiltonian, propagated with classical RK4,
and the probability in each asymptotic region is read off once the packet
has left the nodes.  Nothing here uses the plane-wave ansatz or the
closed-form amplitudes.

Chain sites are stored as ``j = j_min .. j_min + n_cells - 1`` with the
nodes at ``j = 0`` and ``j = l``.  The state vector is
``[chain a, chain b, C_a, C_b, D_a, D_b, s1, e1, e2, e3, s4, e4]``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NormDrift, PacketNotCleared
from .model import IncidencePort, SystemParams, dispersion_energy, validate
from .solver import RoutingRates

__all__ = [
    "LatticeConfig",
    "PortMeasurement",
    "WavepacketReport",
    "build_lattice_hamiltonian",
    "initial_packet",
    "evolve",
    "measure_ports",
    "run_wavepacket",
]

NORM_DRIFT_LIMIT = 1e-6
CLEAR_THRESHOLD = 1e-4
CLEAR_MARGIN = 10
_LOCAL = ("C_a", "C_b", "D_a", "D_b", "s1", "e1", "e2", "e3", "s4", "e4")


@dataclass(frozen=True)
class LatticeConfig:
    """Finite lattice and packet description.

    ``packet_width_sites`` is the standard deviation of ``|psi_j|^2`` in
    sites, so the spread in wave vector is ``1 / (2 * width)`` and the
    energy spread about ``2 xi sin(k) / (2 * width)``.
    """

    n_cells: int
    packet_center_k: float
    packet_width_sites: float
    launch_offset: int
    dt: float
    t_max: float
    j_min: int
    port: str = "LeftA"

    @classmethod
    def for_carrier(cls, params: SystemParams, k: float, energy_spread=0.02,
                    dt=0.01, port="LeftA", extra_time=0.0) -> "LatticeConfig":
        """Size a lattice for a packet at wave vector ``k``.

        The packet width follows from the requested energy spread; the
        launch point, lattice length and run time leave at least five widths
        between the packet and every wall, and let the slowest free part
        of the packet clear the nodes by ten sites plus five widths.
        """
        xi = params.xi
        v = 2 * xi * math.sin(k)
        width = v / (2 * energy_spread)
        offset = int(math.ceil(5 * width + CLEAR_MARGIN + 5))
        path = offset + params.l + 6 * width + 2 * CLEAR_MARGIN + 8 * width
        t_max = path / v + extra_time
        reach = v * t_max - offset
        j_min = -int(math.ceil(max(offset, reach) + 6 * width))
        j_max = int(math.ceil(max(reach, params.l + offset) + 6 * width)) + params.l
        return cls(n_cells=j_max - j_min + 1, packet_center_k=k,
                   packet_width_sites=width, launch_offset=offset, dt=dt,
                   t_max=t_max, j_min=j_min, port=port)

    @property
    def j_max(self) -> int:
        return self.j_min + self.n_cells - 1

    def check(self, params: SystemParams) -> None:
        """Raise ``ValueError`` if the configuration breaks its invariants."""
        p = validate(params).params
        w = self.packet_width_sites
        v = 2 * p.xi * math.sin(self.packet_center_k)
        if self.n_cells < 200:
            raise ValueError("n_cells must be >= 200")
        if self.dt > 0.02 / p.xi:
            raise ValueError("dt must be <= 0.02/xi")
        if not (self.j_min <= -1 and self.j_max >= p.l + 1):
            raise ValueError("lattice must contain both nodes")
        side = IncidencePort(self.port).side
        x0 = -self.launch_offset if side == "left" else p.l + self.launch_offset
        if x0 - 5 * w < self.j_min or x0 + 5 * w > self.j_max:
            raise ValueError("packet does not fit at launch with 5 sigma clearance")
        far = v * self.t_max - self.launch_offset
        if -far - 5 * w < self.j_min or p.l + far + 5 * w > self.j_max:
            raise ValueError("packet reaches a wall before t_max (5 sigma clearance)")


@dataclass(frozen=True)
class PortMeasurement:
    rates: RoutingRates
    residual_chain: float
    residual_local: float
    norm: float
    near_nodes: float

    @property
    def total(self) -> float:
        return self.rates.total + self.residual_chain + self.residual_local


@dataclass(frozen=True)
class WavepacketReport:
    config: LatticeConfig
    params: SystemParams
    carrier_energy: float
    measurement: PortMeasurement
    norm_drift: float

    def to_json(self) -> str:
        m = self.measurement
        doc = {
            "config": asdict(self.config),
            "params": self.params.to_dict(),
            "carrier_energy": self.carrier_energy,
            "port_probabilities": m.rates.as_dict(),
            "residuals": {"chain_nodes": m.residual_chain, "local": m.residual_local,
                          "near_nodes": m.near_nodes},
            "norm": m.norm,
            "norm_drift": self.norm_drift,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def build_lattice_hamiltonian(params: SystemParams, config: LatticeConfig) -> sp.csr_matrix:
    """Sparse Hermitian Hamiltonian of dimension ``2 n_cells + 10``."""
    p = validate(params).params
    n = config.n_cells
    dim = 2 * n + 10
    loc = {name: 2 * n + i for i, name in enumerate(_LOCAL)}
    rows, cols, vals = [], [], []

    def put(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    def bond(i, j, v):
        put(i, j, v)
        put(j, i, np.conj(v))

    for offset, w in ((0, p.omega_a), (n, p.omega_b)):
        for i in range(n):
            put(offset + i, offset + i, w)
        for i in range(n - 1):
            bond(offset + i + 1, offset + i, -p.xi)
    site0 = -config.j_min
    a0, al = site0, site0 + p.l
    b0, bl = n + site0, n + site0 + p.l

    for name, w in (("C_a", p.omega_c), ("C_b", p.omega_c), ("D_a", p.omega_d),
                    ("D_b", p.omega_d), ("s1", p.s1_level), ("e1", p.omega_e1),
                    ("e2", p.omega_e2), ("e3", p.omega_e3), ("s4", p.s4_level),
                    ("e4", p.omega_e4)):
        put(loc[name], loc[name], w)
    bond(loc["C_a"], loc["C_b"], -p.xi)
    bond(loc["D_a"], loc["D_b"], -p.xi)
    bond(a0, loc["s1"], p.g_a1)
    bond(al, loc["e2"], p.g_a2)
    bond(b0, loc["e3"], p.g_b3)
    bond(bl, loc["s4"], p.g_b4)
    bond(loc["C_a"], loc["e1"], p.g_c1)
    bond(loc["C_b"], loc["e3"], p.g_c3)
    bond(loc["D_a"], loc["e2"], p.g_d2)
    bond(loc["D_b"], loc["e4"], p.g_d4)
    bond(loc["e1"], loc["s1"], p.Omega1 * np.exp(-1j * p.phi))
    bond(loc["e4"], loc["s4"], p.Omega2)
    H = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)
    return H.tocsr()


def initial_packet(params: SystemParams, config: LatticeConfig) -> np.ndarray:
    """Normalised Gaussian packet moving towards the nodes."""
    n = config.n_cells
    port = IncidencePort(config.port)
    j = np.arange(config.j_min, config.j_min + n)
    k = config.packet_center_k
    w = config.packet_width_sites
    if port.side == "left":
        x0, sign = -config.launch_offset, 1.0
    else:
        x0, sign = params.l + config.launch_offset, -1.0
    chain = np.exp(-((j - x0) ** 2) / (4 * w * w) + 1j * sign * k * j)
    psi = np.zeros(2 * n + 10, dtype=complex)
    start = 0 if port.guide == "a" else n
    psi[start:start + n] = chain
    return psi / np.linalg.norm(psi)


def evolve(H, psi0: np.ndarray, config: LatticeConfig, reference_energy: float = 0.0):
    """Fixed-step RK4 propagation up to ``config.t_max``.

    ``reference_energy`` is subtracted from ``H`` (a global phase) to keep
    the step error small.  The norm is never renormalised.

    Returns
    -------
    psi, drift
        Final state and ``| ||psi|| - 1 |``.

    Raises
    ------
    NormDrift
        If the drift exceeds ``1e-6``.
    """
    A = H - reference_energy * sp.identity(H.shape[0], dtype=complex, format="csr")
    A = (-1j * A).tocsr()
    dt = config.dt
    steps = int(math.ceil(config.t_max / dt - 1e-9))
    psi = np.array(psi0, dtype=complex)
    norm0 = np.linalg.norm(psi)
    half = 0.5 * dt
    for _ in range(steps):
        k1 = A @ psi
        k2 = A @ (psi + half * k1)
        k3 = A @ (psi + half * k2)
        k4 = A @ (psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(np.linalg.norm(psi) - norm0)
    if drift > NORM_DRIFT_LIMIT:
        raise NormDrift(f"norm drift {drift:.3g} exceeds {NORM_DRIFT_LIMIT}; reduce dt")
    return psi, drift


def measure_ports(psi: np.ndarray, params: SystemParams, config: LatticeConfig,
                  require_cleared=True) -> PortMeasurement:
    """Probability in the four asymptotic regions (``j < 0`` and ``j > l``)."""
    n = config.n_cells
    l = params.l
    j = np.arange(config.j_min, config.j_min + n)
    prob = np.abs(psi) ** 2
    pa, pb, plocal = prob[:n], prob[n:2 * n], prob[2 * n:]
    left, right = j < 0, j > l
    inside = ~left & ~right
    near = (j >= -CLEAR_MARGIN) & (j <= l + CLEAR_MARGIN)
    near_nodes = float(pa[near].sum() + pb[near].sum() + plocal.sum())
    if require_cleared and near_nodes > CLEAR_THRESHOLD:
        raise PacketNotCleared(f"{near_nodes:.3g} probability still within "
                               f"{CLEAR_MARGIN} sites of the nodes")
    rates = RoutingRates(L_a=float(pa[left].sum()), R_a=float(pa[right].sum()),
                         L_b=float(pb[left].sum()), R_b=float(pb[right].sum()))
    return PortMeasurement(rates, float(pa[inside].sum() + pb[inside].sum()),
                           float(plocal.sum()), float(prob.sum()), near_nodes)


def run_wavepacket(params: SystemParams, config: LatticeConfig) -> WavepacketReport:
    config.check(params)
    H = build_lattice_hamiltonian(params, config)
    psi0 = initial_packet(params, config)
    port = IncidencePort(config.port)
    omega_in = params.omega_a if port.guide == "a" else params.omega_b
    carrier = float(dispersion_energy(config.packet_center_k, omega_in, params.xi))
    psi, drift = evolve(H, psi0, config, reference_energy=omega_in)
    m = measure_ports(psi, params, config)
    return WavepacketReport(config, params, carrier, m, drift)
