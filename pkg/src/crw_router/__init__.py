"""Single-photon routing in a four-node coupled-resonator quantum router."""

__version__ = "0.1.0"

from .errors import (ComplexRoot, ConfigError, EngineMismatch, NearPole, NormDrift,
                     NotSymmetric, OutOfBand, PacketNotCleared, RouterError,
                     SingularSystem, ViolatedInvariant)
from .model import (IncidencePort, SystemParams, ValidatedParams, dispersion_energy,
                    validate, wavevector_from_energy)
from .closed_form import (amplitudes_closed_form, coupling_coefficients,
                          scattering_frequencies, v_roots_numeric)
from .solver import RoutingRates, ScatteringSolution, routing_rates, solve_scattering
from .analysis import (SweepAxis, SweepResult, find_extrema, nonreciprocity,
                       reverse_transmission, sweep)
