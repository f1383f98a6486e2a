"""Invariant checks run by ``crw-router validate``.

Each check returns ``(name, passed, detail)``.  The energies are a fixed
set of in-band points so that a report is reproducible.
"""
from __future__ import annotations

import numpy as np

from .closed_form import amplitudes_closed_form, frequency_report
from .errors import NearPole, RouterError
from .model import IncidencePort, SystemParams, validate
from .solver import local_hamiltonian, routing_rates, solve_scattering

SUM_TOL = 1e-9
AGREE_TOL = 1e-8
DUALITY_TOL = 1e-10
ROOT_TOL = 1e-8


def probe_energies(params: SystemParams, n: int = 7) -> np.ndarray:
    """Interior points of the band both guides share, or of guide a."""
    lo = max(params.omega_a, params.omega_b) - 2 * params.xi
    hi = min(params.omega_a, params.omega_b) + 2 * params.xi
    if hi <= lo:
        lo, hi = params.omega_a - 2 * params.xi, params.omega_a + 2 * params.xi
    # irrational offset keeps the probes off typical poles such as Delta = 0
    return lo + (hi - lo) * (np.arange(n) + 0.5 + 0.0137) / n


def _hermitian(params):
    H = local_hamiltonian(params)
    err = float(np.max(np.abs(H - H.conj().T)))
    return "hermitian local block", err == 0.0, f"max |H - H^dagger| = {err:.3g}"


def _sum_rule(params, energies):
    worst = 0.0
    for port in IncidencePort:
        for E in energies:
            worst = max(worst, abs(routing_rates(solve_scattering(params, E, port)).total - 1))
    return "probability sum rule", worst < SUM_TOL, f"max |sum - 1| = {worst:.3g} over 4 ports"


def _duality(params, energies):
    flipped = params.with_values(phi=-params.phi)
    worst = 0.0
    for E in energies:
        fwd = routing_rates(solve_scattering(params, E, IncidencePort.LeftA)).L_b
        rev = routing_rates(solve_scattering(flipped, E, IncidencePort.LeftB)).L_a
        worst = max(worst, abs(fwd - rev))
    return ("duality L_b(phi) = T_lb(-phi)", worst < DUALITY_TOL,
            f"max deviation = {worst:.3g}")


def _closed_vs_solver(params, energies):
    worst = 0.0
    skipped = 0
    for E in energies:
        try:
            closed = amplitudes_closed_form(params, E).as_array()
        except NearPole:
            skipped += 1
            continue
        sol = solve_scattering(params, E, IncidencePort.LeftA)
        direct = np.array([sol.l_a, sol.r_a, sol.l_b, sol.r_b])
        worst = max(worst, float(np.max(np.abs(closed - direct))))
    detail = f"max amplitude deviation = {worst:.3g}"
    if skipped:
        detail += f" ({skipped} pole points skipped)"
    return "closed form matches solver", worst < AGREE_TOL, detail


def _roots(params):
    report = frequency_report(params)
    worst = report["max_abs_V_at_roots"]
    tol = ROOT_TOL * params.xi ** 5
    readings = ", ".join(report["matching_readings"]) or "none"
    return ("scattering frequencies are roots of V", worst < tol,
            f"max |V| = {worst:.3g}; printed formula matches reading: {readings}")


def run_invariant_suite(params: SystemParams) -> list[tuple[str, bool, str]]:
    """Run every applicable check; symmetric-only checks are skipped otherwise."""
    vp = validate(params)
    energies = probe_energies(params)
    checks = [lambda: _hermitian(params), lambda: _sum_rule(params, energies),
              lambda: _duality(params, energies)]
    if vp.symmetric:
        checks += [lambda: _closed_vs_solver(params, energies), lambda: _roots(params)]
    results = []
    for check in checks:
        try:
            results.append(check())
        except RouterError as exc:
            results.append((getattr(check, "__name__", "check"), False, f"{exc.code}: {exc}"))
    return results
