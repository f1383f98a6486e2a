"""Closed-form scattering amplitudes of the symmetric router.

In the symmetric regime every node shares one CRW coupling ``g_a``, one
vertical coupling ``g_s`` and one frequency ``omega``.  Eliminating the
atomic and vertical-cavity amplitudes leaves two effective node potentials,
written as ratios of the polynomials ``X1..X5`` over the node determinants
``V1``/``V2``.  The four outgoing amplitudes follow from plane-wave matching;
they are all of the form ``C/G`` with one shared complex normalisation ``G``.

The polynomial expressions depend on ``E`` and ``omega`` only through
``E - omega``.  They are evaluated at ``(E - omega, 0)`` to avoid the
cancellation a direct evaluation at ``omega ~ 10 xi`` would suffer.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ComplexRoot, NearPole, NotSymmetric
from .model import SystemParams, validate, wavevector_from_energy

__all__ = [
    "CouplingCoefficients",
    "ScatteringFrequencies",
    "ClosedFormAmplitudes",
    "x_polynomials",
    "v_polynomial",
    "coupling_coefficients",
    "amplitudes_closed_form",
    "scattering_frequencies",
    "scattering_frequency_formula",
    "v_roots_numeric",
    "frequency_report",
    "POLE_THRESHOLD",
    "NUDGE",
]

#: |V| below this (units of xi**5) counts as sitting on a scattering frequency
POLE_THRESHOLD = 1e-10
#: energy offset (units of xi) applied in nudge mode
NUDGE = 1e-7
#: tolerance for accepting a printed scattering frequency as a root of V
ROOT_MATCH = 1e-6
#: a kept formula value must also leave |V| below this (in xi**5 units)
ROOT_RESIDUAL = 1e-8


@dataclass(frozen=True)
class CouplingCoefficients:
    x1: float
    x2: float
    x3: float
    x4: float
    x5: float
    v1: float
    v2: float
    g_big: complex


@dataclass(frozen=True)
class ScatteringFrequencies:
    """Scattering frequencies of both nodes.

    Index 1 belongs to the node driven by ``Omega1``, index 2 to ``Omega2``.
    ``replaced`` lists the fields whose printed value was not a root of the
    node determinant and was swapped for the nearest numeric root.
    """

    omega_0: float
    omega_plus_1: float
    omega_minus_1: float
    omega_plus_prime_1: float
    omega_minus_prime_1: float
    omega_plus_2: float
    omega_minus_2: float
    omega_plus_prime_2: float
    omega_minus_prime_2: float
    replaced: tuple[str, ...] = field(default=())

    def for_index(self, index: int) -> tuple[float, float, float, float, float]:
        s = str(index)
        return (self.omega_0,
                getattr(self, "omega_plus_" + s), getattr(self, "omega_minus_" + s),
                getattr(self, "omega_plus_prime_" + s),
                getattr(self, "omega_minus_prime_" + s))


@dataclass(frozen=True)
class ClosedFormAmplitudes:
    l_a: complex
    r_a: complex
    l_b: complex
    r_b: complex
    energy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.l_a, self.r_a, self.l_b, self.r_b])

    @property
    def total(self) -> float:
        return float(np.sum(np.abs(self.as_array()) ** 2))


def _symmetric_constants(params: SystemParams):
    vp = validate(params)
    if not vp.symmetric:
        raise NotSymmetric("closed-form amplitudes need equal couplings, "
                           "equal frequencies and zero level detunings")
    p = vp.params
    return p.omega_a, p.xi, p.g_a1, p.g_c1, p.Omega1, p.Omega2


def x_polynomials(E, omega, xi, g_a, g_s, Omega1, Omega2):
    """The five coupling polynomials ``X1..X5`` at energy ``E``."""
    X1 = g_a**2 * (-g_s**2 + (E - omega) * (E + xi - omega)) * (
        E**2 - g_s**2 + omega * (xi + omega) - E * (xi + 2 * omega))
    X2 = g_a**2 * g_s**2 * Omega1 * xi
    X3 = g_a**2 * (
        E**4 + Omega2**2 * xi**2 - 4 * E**3 * omega
        - (g_s**2 + Omega2**2 + xi**2) * omega**2 + omega**4
        - E**2 * (g_s**2 + Omega2**2 + xi**2 - 6 * omega**2)
        + 2 * E * omega * (g_s**2 + Omega2**2 + xi**2 - 2 * omega**2))
    X4 = g_a**2 * g_s**2 * Omega2 * xi
    X5 = g_a**2 * (
        E**4 + Omega1**2 * xi**2 - 4 * E**3 * omega
        - (g_s**2 + Omega1**2 + xi**2) * omega**2 + omega**4
        - E**2 * (g_s**2 + Omega1**2 + xi**2 - 6 * omega**2)
        + 2 * E * omega * (g_s**2 + Omega1**2 + xi**2 - 2 * omega**2))
    return X1, X2, X3, X4, X5


def v_polynomial(E, omega, xi, g_s, Omega):
    """Node determinant ``V`` (quintic in ``E``) for Rabi frequency ``Omega``."""
    return (E - omega) * (
        E**4 + g_s**4 - 4 * E**3 * omega
        + (Omega**2 - omega**2) * (xi**2 - omega**2)
        - E**2 * (2 * g_s**2 + Omega**2 + xi**2 - 6 * omega**2)
        + g_s**2 * (Omega**2 - 2 * omega**2)
        + 2 * E * omega * (2 * g_s**2 + Omega**2 + xi**2 - 2 * omega**2))


def _normalisation(X1, X2, X3, X4, X5, V1, V2, xi, s, e2, phi):
    q = e2 - 1
    D3 = X1 * X3 - X4**2
    D5 = X1 * X5 - X2**2
    return (q**2 * D3 * D5
            + 2j * q * xi * (V1 * D3 * (X1 + X5) + V2 * (X1 + X3) * D5) * s
            - 4 * xi**2 * (V1**2 * D3 + V1 * V2 * (X1 + X3) * (X1 + X5) + V2**2 * D5
                           - e2 * V1 * V2 * (X1 * (X3 + X5) + 2 * X2 * X4 * math.cos(phi))) * s**2
            + 8j * xi**3 * V1 * V2 * (V1 * (X1 + X3) + V2 * (X1 + X5)) * s**3
            + 16 * xi**4 * V1**2 * V2**2 * s**4)


def _coefficients(params: SystemParams, E: float):
    omega, xi, g_a, g_s, O1, O2 = _symmetric_constants(params)
    k = wavevector_from_energy(E, omega, xi)
    d = E - omega
    X = x_polynomials(d, 0.0, xi, g_a, g_s, O1, O2)
    V1 = v_polynomial(d, 0.0, xi, g_s, O1)
    V2 = v_polynomial(d, 0.0, xi, g_s, O2)
    return X, V1, V2, k, xi


def _check_pole(V1, V2, xi, E):
    scale = POLE_THRESHOLD * xi**5
    if abs(V1) < scale or abs(V2) < scale:
        raise NearPole(f"E={E!r} sits on a scattering frequency "
                       f"(|V1|={abs(V1):.3g}, |V2|={abs(V2):.3g})")


def _nudged(fn, params, E, nudge):
    try:
        return fn(params, E)
    except NearPole:
        if not nudge:
            raise
    xi = params.xi
    try:
        return fn(params, E + NUDGE * xi)
    except NearPole:
        return fn(params, E - NUDGE * xi)


def _coupling_coefficients(params, E, check_pole=True):
    (X1, X2, X3, X4, X5), V1, V2, k, xi = _coefficients(params, E)
    if check_pole:
        _check_pole(V1, V2, xi, E)
    G = _normalisation(X1, X2, X3, X4, X5, V1, V2, xi, math.sin(k),
                       cmath.exp(2j * k * params.l), params.phi)
    return CouplingCoefficients(X1, X2, X3, X4, X5, V1, V2, G)


def coupling_coefficients(params: SystemParams, E: float, nudge=False,
                          check_pole=True) -> CouplingCoefficients:
    """Evaluate ``X1..X5``, ``V1``, ``V2`` and the normalisation ``G``.

    All seven scalars stay finite on a scattering frequency; only the
    amplitudes built from them become ``0/0`` there.  ``check_pole=False``
    returns the raw values at such a point instead of raising.

    Raises
    ------
    NotSymmetric
        Outside the symmetric regime.
    OutOfBand
        If ``E`` is not strictly inside the band.
    NearPole
        If ``|V1|`` or ``|V2|`` is below ``POLE_THRESHOLD * xi**5`` (unless
        ``nudge`` moves ``E`` by ``NUDGE * xi``).
    """
    if not check_pole:
        return _coupling_coefficients(params, E, check_pole=False)
    return _nudged(_coupling_coefficients, params, E, nudge)


def _amplitudes(params, E):
    (X1, X2, X3, X4, X5), V1, V2, k, xi = _coefficients(params, E)
    _check_pole(V1, V2, xi, E)
    phi, l = params.phi, params.l
    s = math.sin(k)
    e2 = cmath.exp(2j * k * l)
    q = e2 - 1
    ep = cmath.exp(1j * phi)
    em = cmath.exp(-1j * phi)
    G = _normalisation(X1, X2, X3, X4, X5, V1, V2, xi, s, e2, phi)
    D3 = X1 * X3 - X4**2

    l_a = (2j * xi * V1 * s * (
        -q**2 * D3 * X5
        + 2 * xi * s * (-1j * q * (V1 * D3 + V2 * (X1 + X3) * X5)
                        + 2 * xi * V2 * s * (V1 * (X1 + X3 - e2 * X3) + V2 * X5
                                             - 2j * xi * V1 * V2 * s)))) / G - 1
    r_a = (4j * xi**2 * V1 * V2 * s**2 * (
        -1j * em * q * (X2 * X4 + ep * X1 * X5)
        + 2 * xi * s * (V1 * X1 + V2 * X5 - 2j * xi * V1 * V2 * s))) / G
    l_b = -(2j * em * xi * V1 * s * (
        q**2 * X2 * D3
        - 2 * xi * V2 * s * (-1j * q * X2 * (X1 + X3)
                             + 2 * xi * (V2 * X2 + cmath.exp(1j * (2 * k * l + phi)) * V1 * X4) * s))) / G
    r_b = (4j * em * xi**2 * V1 * V2 * s**2 * (
        -1j * q * (X2 * X3 + ep * X4 * X5)
        + 2 * xi * (V2 * X2 + ep * V1 * X4) * s)) / G
    return ClosedFormAmplitudes(l_a, r_a, l_b, r_b, E)


def amplitudes_closed_form(params: SystemParams, E: float, nudge=False) -> ClosedFormAmplitudes:
    """Outgoing amplitudes ``l_a, r_a, l_b, r_b`` for a photon entering CRW-a
    from the left.  Errors as for :func:`coupling_coefficients`."""
    return _nudged(_amplitudes, params, E, nudge)


# --- scattering frequencies -------------------------------------------------

def scattering_frequency_formula(omega, xi, g_s, Omega, radical="printed"):
    """The four nonzero-detuning scattering frequencies in closed form.

    ``radical="printed"`` uses ``Omega**2`` as the leading term of the inner
    square root, ``radical="quartic"`` uses ``Omega**4``; only the latter is
    dimensionally consistent.  Returns ``(w_plus, w_minus, w_plus_prime,
    w_minus_prime)`` as complex numbers so a negative radicand stays visible.
    """
    lead = Omega**2 if radical == "printed" else Omega**4
    inner = cmath.sqrt(lead + 4 * g_s**2 * xi**2 - 2 * Omega**2 * xi**2 + xi**4)
    outer = 2 * g_s**2 + Omega**2 + xi**2
    r2 = math.sqrt(2)
    lo = cmath.sqrt(outer - inner)
    hi = cmath.sqrt(outer + inner)
    return (0.5 * (r2 * lo + 2 * omega), 0.5 * (-r2 * lo + 2 * omega),
            0.5 * (r2 * hi + 2 * omega), 0.5 * (-r2 * hi + 2 * omega))


def v_roots_numeric(params: SystemParams, index: int) -> np.ndarray:
    """The five roots of the node determinant ``V1`` or ``V2``, ascending.

    The quintic's coefficients are recovered by exact interpolation of
    :func:`v_polynomial` at six detunings, and its roots come from the
    companion matrix.  The result is real unless a complex pair appears,
    in which case a complex array is returned.
    """
    omega, xi, _, g_s, O1, O2 = _symmetric_constants(params)
    if index not in (1, 2):
        raise ValueError("index must be 1 or 2")
    Omega = O1 if index == 1 else O2
    nodes = 3 * xi * np.cos(np.pi * (np.arange(6) + 0.5) / 6)
    values = [v_polynomial(d, 0.0, xi, g_s, Omega) for d in nodes]
    coef = np.linalg.solve(np.vander(nodes, 6, increasing=True), values)
    roots = P.polyroots(coef) + omega
    roots = roots[np.argsort(roots.real, kind="stable")]
    if np.all(np.abs(roots.imag) < 1e-9 * xi):
        return roots.real.copy()
    return roots


_FORMULA_FIELDS = ("omega_plus", "omega_minus", "omega_plus_prime", "omega_minus_prime")


def scattering_frequencies(params: SystemParams, strict=False,
                           radical="printed") -> ScatteringFrequencies:
    """Scattering frequencies, each verified as a root of ``V``.

    A formula value more than ``ROOT_MATCH`` away from every numeric root,
    complex, or leaving ``|V| > ROOT_RESIDUAL * xi**5`` is replaced by the
    nearest numeric root and its field name recorded in ``replaced``.  With ``strict=True`` a complex formula value
    raises :class:`ComplexRoot` instead.
    """
    omega, xi, _, g_s, O1, O2 = _symmetric_constants(params)
    values = {"omega_0": omega}
    replaced = []
    for index, Omega in ((1, O1), (2, O2)):
        roots = v_roots_numeric(params, index)
        formula = scattering_frequency_formula(omega, xi, g_s, Omega, radical)
        for name, value in zip(_FORMULA_FIELDS, formula):
            key = f"{name}_{index}"
            if abs(value.imag) > 0:
                if strict:
                    raise ComplexRoot(f"{key}: radicand negative for Omega={Omega!r}, g_s={g_s!r}")
            nearest = roots[np.argmin(np.abs(roots - value))]
            if (abs(value.imag) > 0 or abs(nearest - value) > ROOT_MATCH * xi
                    or abs(v_polynomial(value.real, omega, xi, g_s, Omega)) > ROOT_RESIDUAL * xi**5):
                replaced.append(key)
                values[key] = float(np.real(nearest))
            else:
                values[key] = float(value.real)
    return ScatteringFrequencies(**values, replaced=tuple(replaced))


def frequency_report(params: SystemParams) -> dict:
    """Side-by-side comparison of both radical readings with numeric roots.

    The output is a plain dict suited to JSON export; it depends only on
    ``params`` so repeated calls give identical reports.
    """
    omega, xi, _, g_s, O1, O2 = _symmetric_constants(params)
    report = {"omega_0": omega, "nodes": []}
    for index, Omega in ((1, O1), (2, O2)):
        roots = v_roots_numeric(params, index)
        entry = {"index": index, "Omega": Omega,
                 "numeric_roots": [float(np.real(r)) for r in roots]}
        for reading in ("printed", "quartic"):
            vals = scattering_frequency_formula(omega, xi, g_s, Omega, reading)
            rows = {}
            worst = 0.0
            for name, value in zip(_FORMULA_FIELDS, vals):
                dev = float(np.min(np.abs(roots - value)))
                worst = max(worst, dev)
                rows[name] = {"re": value.real, "im": value.imag, "root_distance": dev}
            entry[reading] = {"values": rows, "max_root_distance": worst,
                              "matches_roots": worst <= ROOT_MATCH * xi}
        resid = [abs(v_polynomial(r - omega, 0.0, xi, g_s, Omega)) for r in roots]
        entry["max_abs_V_at_roots"] = float(max(resid))
        report["nodes"].append(entry)
    matches = {r: all(n[r]["matches_roots"] for n in report["nodes"]) for r in ("printed", "quartic")}
    report["matching_readings"] = [r for r, ok in matches.items() if ok]
    report["max_abs_V_at_roots"] = max(n["max_abs_V_at_roots"] for n in report["nodes"])
    return report
