"""System parameters, incidence ports and the tight-binding dispersion.

All energies are in units of the hopping ``xi``; ``xi`` is still carried as
an explicit field so the formulas keep their dimensional form.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import OutOfBand, ViolatedInvariant

__all__ = [
    "SystemParams",
    "ValidatedParams",
    "IncidencePort",
    "validate",
    "dispersion_energy",
    "wavevector_from_energy",
    "complex_wavevector",
    "BAND_MARGIN",
    "CRW_COUPLINGS",
    "VERTICAL_COUPLINGS",
    "ALIASES",
]

#: strict-interior margin (in units of xi) for band membership
BAND_MARGIN = 1e-9

CRW_COUPLINGS = ("g_a1", "g_a2", "g_b3", "g_b4")
VERTICAL_COUPLINGS = ("g_c1", "g_c3", "g_d2", "g_d4")
_FREQUENCIES = (
    "omega_a", "omega_b", "omega_c", "omega_d",
    "omega_e1", "omega_e2", "omega_e3", "omega_e4",
    "omega_s1_eff", "omega_s4_eff",
)
_NONNEGATIVE = CRW_COUPLINGS + VERTICAL_COUPLINGS + ("Omega1", "Omega2")

#: shorthand keys that set several fields at once
ALIASES = {
    "omega": _FREQUENCIES,
    "g_a": CRW_COUPLINGS,
    "g_s": VERTICAL_COUPLINGS,
    "Omega": ("Omega1", "Omega2"),
}


class IncidencePort(enum.Enum):
    """Port carrying the unit-amplitude incoming wave."""

    LeftA = "LeftA"
    LeftB = "LeftB"
    RightA = "RightA"
    RightB = "RightB"

    @property
    def guide(self) -> str:
        return "a" if self.value.endswith("A") else "b"

    @property
    def side(self) -> str:
        return "left" if self.value.startswith("Left") else "right"


@dataclass(frozen=True)
class SystemParams:
    """All constants of the two-waveguide, four-node router.

    The defaults are the symmetric working point ``xi=1``, ``g=0.5``,
    ``Omega=0.5``, ``omega=10`` with the second node at ``l=6``.

    ``omega_s1_eff``/``omega_s4_eff`` are the rotating-frame intermediate
    level frequencies (drive frequency already absorbed).  ``delta_es1`` and
    ``delta_es4`` shift the intermediate level further down, so the
    rotating-frame splitting between ``|e_m>`` and ``|s_m>`` becomes
    ``omega_em - omega_sm_eff + delta_esm``.
    """

    omega_a: float = 10.0
    omega_b: float = 10.0
    omega_c: float = 10.0
    omega_d: float = 10.0
    xi: float = 1.0
    g_a1: float = 0.5
    g_a2: float = 0.5
    g_b3: float = 0.5
    g_b4: float = 0.5
    g_c1: float = 0.5
    g_c3: float = 0.5
    g_d2: float = 0.5
    g_d4: float = 0.5
    omega_e1: float = 10.0
    omega_e2: float = 10.0
    omega_e3: float = 10.0
    omega_e4: float = 10.0
    omega_s1_eff: float = 10.0
    omega_s4_eff: float = 10.0
    Omega1: float = 0.5
    Omega2: float = 0.5
    phi: float = 0.0
    l: int = 6
    delta_es1: float = 0.0
    delta_es4: float = 0.0

    @classmethod
    def symmetric(cls, omega=10.0, xi=1.0, g_a=0.5, g_s=0.5, Omega1=0.5,
                  Omega2=None, phi=0.0, l=6) -> "SystemParams":
        """Parameters of the equal-frequency, equal-coupling regime."""
        return cls().with_values(
            omega=omega, xi=xi, g_a=g_a, g_s=g_s, Omega1=Omega1,
            Omega2=Omega1 if Omega2 is None else Omega2, phi=phi, l=l,
        )

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    def with_values(self, **values) -> "SystemParams":
        """Copy with fields replaced; accepts the keys in :data:`ALIASES`."""
        return dataclasses.replace(self, **expand_aliases(values))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def omega(self) -> float:
        """Reference frequency used for the detuning ``Delta = E - omega``."""
        return self.omega_a

    @property
    def s1_level(self) -> float:
        return self.omega_s1_eff - self.delta_es1

    @property
    def s4_level(self) -> float:
        return self.omega_s4_eff - self.delta_es4

    def is_symmetric(self) -> bool:
        """True in the regime where the closed-form amplitudes apply."""
        ga = {getattr(self, n) for n in CRW_COUPLINGS}
        gs = {getattr(self, n) for n in VERTICAL_COUPLINGS}
        freqs = {getattr(self, n) for n in _FREQUENCIES}
        return (len(ga) == 1 and len(gs) == 1 and len(freqs) == 1
                and self.delta_es1 == 0 and self.delta_es4 == 0)


def expand_aliases(values: dict) -> dict:
    out = {}
    for key, value in values.items():
        if key in ALIASES:
            for name in ALIASES[key]:
                out.setdefault(name, value)
    for key, value in values.items():
        if key not in ALIASES:
            out[key] = value
    return out


class ValidatedParams(NamedTuple):
    params: SystemParams
    symmetric: bool


def validate(params: SystemParams | ValidatedParams) -> ValidatedParams:
    """Check the parameter invariants.

    Raises
    ------
    ViolatedInvariant
        For ``xi <= 0``, ``l < 1``, a negative coupling or Rabi frequency,
        or a non-finite value.
    """
    if isinstance(params, ValidatedParams):
        return params
    for name, value in params.to_dict().items():
        if not math.isfinite(value):
            raise ViolatedInvariant(name, "must be finite")
    if not params.xi > 0:
        raise ViolatedInvariant("xi", f"hopping must be positive, got {params.xi!r}")
    if int(params.l) != params.l:
        raise ViolatedInvariant("l", f"node separation must be an integer, got {params.l!r}")
    if params.l < 1:
        raise ViolatedInvariant("l", f"node separation must be >= 1, got {params.l!r}")
    for name in _NONNEGATIVE:
        if getattr(params, name) < 0:
            raise ViolatedInvariant(name, "must be >= 0 (signs live in the phase)")
    return ValidatedParams(params, params.is_symmetric())


def dispersion_energy(k, omega_x, xi):
    """Band energy ``omega_x - 2 xi cos k``."""
    return omega_x - 2.0 * xi * np.cos(k)


def wavevector_from_energy(E: float, omega_x: float, xi: float) -> float:
    """Real wave vector in ``(0, pi)`` of a propagating wave at energy ``E``.

    Raises
    ------
    OutOfBand
        If ``|E - omega_x| >= 2 xi (1 - BAND_MARGIN)``.
    """
    c = (omega_x - E) / (2.0 * xi)
    if not abs(c) < 1.0 - BAND_MARGIN:
        raise OutOfBand(E, omega_x, xi)
    return math.acos(c)


def complex_wavevector(E: float, omega_x: float, xi: float) -> complex:
    """Wave vector on the decaying branch (``Im k > 0``) outside the band.

    Below the band ``k = i kappa``; above it ``k = pi + i kappa``.  Inside
    the band this is the real wave vector.
    """
    c = (omega_x - E) / (2.0 * xi)
    if abs(c) < 1.0 - BAND_MARGIN:
        return complex(math.acos(c))
    if abs(c) <= 1.0 + BAND_MARGIN:
        raise OutOfBand(E, omega_x, xi)
    kappa = math.acosh(abs(c))
    return complex(0.0 if c > 0 else math.pi, kappa)
