"""Direct steady-state scattering solver.

The eigen-equation ``H'|Psi> = E|Psi>`` is projected on the four node
cavities, the four vertical cavities and the six atomic levels.  Outside the
nodes the chain amplitudes are plane waves, so each waveguide carries three
regions (left of ``j=0``, between the nodes, right of ``j=l``) described by
two amplitudes each.  Continuity at ``j=0`` and ``j=l`` plus the 14
projected equations give an 18x18 complex linear system.

Unknown order::

    0..3    l_a, r_1, l_1, r_a      CRW-a: left-out, interior right/left, right-out
    4..7    l_b, r_2, l_2, r_b      CRW-b
    8..11   C_a, C_b, D_a, D_b      vertical cavities
    12..17  v1..v6                  |s1>, |e1>, |e2>, |e3>, |s4>, |e4>
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import OutOfBand, SingularSystem
from .model import (BAND_MARGIN, IncidencePort, SystemParams, complex_wavevector,
                    validate)

__all__ = [
    "ScatteringSolution",
    "RoutingRates",
    "UNKNOWNS",
    "LOCAL_STATES",
    "local_hamiltonian",
    "node_couplings",
    "build_scattering_system",
    "solve_scattering",
    "routing_rates",
    "lattice_amplitude",
]

UNKNOWNS = ("l_a", "r_1", "l_1", "r_a", "l_b", "r_2", "l_2", "r_b",
            "C_a", "C_b", "D_a", "D_b", "v1", "v2", "v3", "v4", "v5", "v6")
LOCAL_STATES = ("C_a", "C_b", "D_a", "D_b", "s1", "e1", "e2", "e3", "s4", "e4")
#: node cavities in the order a_0, a_l, b_0, b_l
NODES = ("a_0", "a_l", "b_0", "b_l")

COND_LIMIT = 1e14
RESIDUAL_LIMIT = 1e-10


@dataclass(frozen=True)
class RoutingRates:
    """Exit probabilities of the four ports."""

    L_a: float
    R_a: float
    L_b: float
    R_b: float

    @property
    def total(self) -> float:
        return self.L_a + self.R_a + self.L_b + self.R_b

    def as_dict(self) -> dict:
        return {"L_a": self.L_a, "R_a": self.R_a, "L_b": self.L_b, "R_b": self.R_b}


@dataclass(frozen=True)
class ScatteringSolution:
    """Full amplitude set for one energy and incidence port.

    ``outgoing`` holds ``l_a, r_a, l_b, r_b`` normalised to unit incoming
    flux, so their squared moduli are the routing rates even when the two
    waveguides have different wave vectors.  ``raw`` is the plain solution
    vector in :data:`UNKNOWNS` order.
    """

    outgoing: np.ndarray
    interior: np.ndarray
    vertical: np.ndarray
    atomic: np.ndarray
    energy: float
    port: IncidencePort
    k_a: complex
    k_b: complex
    evanescent: tuple[str, ...]
    raw: np.ndarray
    params: SystemParams

    @property
    def l_a(self):
        return self.outgoing[0]

    @property
    def r_a(self):
        return self.outgoing[1]

    @property
    def l_b(self):
        return self.outgoing[2]

    @property
    def r_b(self):
        return self.outgoing[3]


def local_hamiltonian(params: SystemParams) -> np.ndarray:
    """Hamiltonian block of the vertical cavities and atomic levels.

    Rows/columns follow :data:`LOCAL_STATES`.  The drive on atom 1 enters as
    ``<e1|H|s1> = Omega1 exp(-i phi)``.
    """
    p = params
    idx = {name: i for i, name in enumerate(LOCAL_STATES)}
    H = np.zeros((10, 10), dtype=complex)
    diag = {"C_a": p.omega_c, "C_b": p.omega_c, "D_a": p.omega_d, "D_b": p.omega_d,
            "s1": p.s1_level, "e1": p.omega_e1, "e2": p.omega_e2, "e3": p.omega_e3,
            "s4": p.s4_level, "e4": p.omega_e4}
    for name, value in diag.items():
        H[idx[name], idx[name]] = value

    def bond(row, col, amp):
        H[idx[row], idx[col]] = amp
        H[idx[col], idx[row]] = np.conj(amp)

    bond("C_a", "C_b", -p.xi)
    bond("D_a", "D_b", -p.xi)
    bond("C_a", "e1", p.g_c1)
    bond("C_b", "e3", p.g_c3)
    bond("D_a", "e2", p.g_d2)
    bond("D_b", "e4", p.g_d4)
    bond("e1", "s1", p.Omega1 * cmath.exp(-1j * p.phi))
    bond("e4", "s4", p.Omega2)
    return H


def node_couplings(params: SystemParams) -> np.ndarray:
    """``W[n, m] = <local n|H|node m>`` for nodes ``a_0, a_l, b_0, b_l``."""
    idx = {name: i for i, name in enumerate(LOCAL_STATES)}
    W = np.zeros((10, 4), dtype=complex)
    W[idx["s1"], 0] = params.g_a1
    W[idx["e2"], 1] = params.g_a2
    W[idx["e3"], 2] = params.g_b3
    W[idx["s4"], 3] = params.g_b4
    return W


def _wavevectors(params: SystemParams, E: float, port: IncidencePort):
    p = params
    in_omega = p.omega_a if port.guide == "a" else p.omega_b
    c = (in_omega - E) / (2.0 * p.xi)
    if not abs(c) < 1.0 - BAND_MARGIN:
        raise OutOfBand(E, in_omega, p.xi)
    k_a = complex_wavevector(E, p.omega_a, p.xi)
    k_b = complex_wavevector(E, p.omega_b, p.xi)
    evanescent = tuple(g for g, k in (("a", k_a), ("b", k_b)) if k.imag > 0)
    return k_a, k_b, evanescent


def build_scattering_system(params: SystemParams, E: float,
                            port: IncidencePort = IncidencePort.LeftA):
    """Assemble ``(M, rhs)`` of the 18-unknown scattering problem.

    Row order: continuity of CRW-a at ``j=0`` and ``j=l``, then CRW-b; node
    equations at ``a_0, a_l, b_0, b_l``; the ten local equations in
    :data:`LOCAL_STATES` order.

    Raises
    ------
    OutOfBand
        If ``E`` is not inside the band of the incidence waveguide.  A
        waveguide whose band misses ``E`` gets a decaying wave vector.
    """
    p = validate(params).params
    port = IncidencePort(port)
    k_a, k_b, _ = _wavevectors(p, E, port)
    M, rhs = _assemble(p, E, port, k_a, k_b)
    return M, rhs


def _assemble(p: SystemParams, E, port, k_a, k_b):
    l = int(p.l)
    xi = p.xi
    M = np.zeros((18, 18), dtype=complex)
    rhs = np.zeros(18, dtype=complex)

    # node amplitude, and sum of its two chain neighbours, as linear forms
    # over the wave unknowns: (coefficients[8], constant)
    node_amp = np.zeros((4, 8), dtype=complex)
    node_nbr = np.zeros((4, 8), dtype=complex)
    amp_c = np.zeros(4, dtype=complex)
    nbr_c = np.zeros(4, dtype=complex)
    onsite = np.array([p.omega_a, p.omega_a, p.omega_b, p.omega_b])

    for g, (k, base) in enumerate(((k_a, 0), (k_b, 4))):
        guide = "ab"[g]
        z = cmath.exp(1j * k)
        inc_left = 1.0 if (port.guide == guide and port.side == "left") else 0.0
        inc_right = 1.0 if (port.guide == guide and port.side == "right") else 0.0
        out_l, r_in, l_in, out_r = base, base + 1, base + 2, base + 3
        row0, rowl = 2 * g, 2 * g + 1

        # alpha_0 from the left region equals the interior form at j=0
        M[row0, out_l] = 1.0
        M[row0, r_in] = -1.0
        M[row0, l_in] = -1.0
        rhs[row0] = -inc_left
        # interior form at j=l equals the right region
        M[rowl, r_in] = z**l
        M[rowl, l_in] = z**-l
        M[rowl, out_r] = -z**l
        rhs[rowl] = inc_right * z**-l

        n0, nl = 2 * g, 2 * g + 1
        node_amp[n0, out_l] = 1.0
        amp_c[n0] = inc_left
        node_nbr[n0, out_l] = z          # left region at j=-1
        nbr_c[n0] = inc_left / z
        node_nbr[n0, r_in] = z           # interior at j=1
        node_nbr[n0, l_in] = 1 / z

        node_amp[nl, out_r] = z**l
        amp_c[nl] = inc_right * z**-l
        node_nbr[nl, r_in] = z**(l - 1)  # interior at j=l-1
        node_nbr[nl, l_in] = z**(1 - l)
        node_nbr[nl, out_r] = z**(l + 1)  # right region at j=l+1
        nbr_c[nl] = inc_right * z**-(l + 1)

    H_loc = local_hamiltonian(p)
    W = node_couplings(p)
    # node rows:  (E - w) x_n + xi (x_{n-1} + x_{n+1}) - W^H loc = 0
    for n in range(4):
        r = 4 + n
        M[r, :8] = (E - onsite[n]) * node_amp[n] + xi * node_nbr[n]
        M[r, 8:] = -W[:, n].conj()
        rhs[r] = -((E - onsite[n]) * amp_c[n] + xi * nbr_c[n])
    # local rows: (E - H_loc) loc - W x_nodes = 0
    M[8:, 8:] = E * np.eye(10) - H_loc
    M[8:, :8] = -W @ node_amp
    rhs[8:] = W @ amp_c
    return M, rhs


def solve_scattering(params: SystemParams, E: float,
                     port: IncidencePort = IncidencePort.LeftA) -> ScatteringSolution:
    """Solve the scattering problem at energy ``E`` for one incidence port.

    Raises
    ------
    OutOfBand
        See :func:`build_scattering_system`.
    SingularSystem
        If the one-norm condition number exceeds ``1e14`` (``E`` on a bound
        or dark state) or the solve residual is not small.
    """
    p = validate(params).params
    port = IncidencePort(port)
    k_a, k_b, evanescent = _wavevectors(p, E, port)
    M, rhs = _assemble(p, E, port, k_a, k_b)
    cond = np.linalg.cond(M, 1)
    if not cond < COND_LIMIT:
        raise SingularSystem(f"condition number {cond:.3g} at E={E!r}")
    x = np.linalg.solve(M, rhs)
    resid = np.max(np.abs(M @ x - rhs))
    if resid > RESIDUAL_LIMIT * max(np.max(np.abs(rhs)), 1.0):
        raise SingularSystem(f"residual {resid:.3g} at E={E!r}")

    k_in = k_a if port.guide == "a" else k_b
    v_in = np.sin(k_in.real)
    outgoing = np.empty(4, dtype=complex)
    for i, (guide, k) in enumerate(zip("aabb", (k_a, k_a, k_b, k_b))):
        amp = x[(0, 3, 4, 7)[i]]
        if guide in evanescent:
            outgoing[i] = amp
        else:
            outgoing[i] = amp * np.sqrt(np.sin(k.real) / v_in)
    return ScatteringSolution(
        outgoing=outgoing,
        interior=x[[1, 2, 5, 6]].copy(),
        vertical=x[8:12].copy(),
        atomic=x[12:18].copy(),
        energy=E, port=port, k_a=k_a, k_b=k_b,
        evanescent=evanescent, raw=x, params=p,
    )


def routing_rates(sol: ScatteringSolution) -> RoutingRates:
    """Squared moduli of the outgoing amplitudes; evanescent ports give 0."""
    rates = np.abs(sol.outgoing) ** 2
    for i, guide in enumerate("aabb"):
        if guide in sol.evanescent:
            rates[i] = 0.0
    return RoutingRates(*(float(r) for r in rates))


def lattice_amplitude(sol: ScatteringSolution, guide: str, j: int) -> complex:
    """Chain amplitude ``alpha_j`` (``guide='a'``) or ``beta_j`` rebuilt from
    the plane-wave ansatz (raw, not flux-normalised)."""
    x = sol.raw
    base = 0 if guide == "a" else 4
    k = sol.k_a if guide == "a" else sol.k_b
    z = cmath.exp(1j * k)
    port = sol.port
    inc_left = 1.0 if (port.guide == guide and port.side == "left") else 0.0
    inc_right = 1.0 if (port.guide == guide and port.side == "right") else 0.0
    l = int(sol.params.l)
    if j <= 0:
        return inc_left * z**j + x[base] * z**-j
    if j < l:
        return x[base + 1] * z**j + x[base + 2] * z**-j
    return x[base + 3] * z**j + inc_right * z**-j
