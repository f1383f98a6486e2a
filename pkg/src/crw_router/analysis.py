"""Routing spectra, non-reciprocity and parameter sweeps.

A sweep evaluates a set of quantities on a 1D or 2D grid.  Per-point
failures (out-of-band energies, poles, singular systems) do not abort the
sweep; the value is stored as NaN and the failure code goes into the
``reason`` array.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import closed_form
from .errors import EngineMismatch, NearPole, RouterError
from .model import IncidencePort, SystemParams, validate
from .solver import routing_rates, solve_scattering

__all__ = [
    "Engine",
    "SweepAxis",
    "SweepResult",
    "Extremum",
    "QUANTITIES",
    "reverse_transmission",
    "nonreciprocity",
    "sweep",
    "find_extrema",
    "evaluate_point",
]

#: canonical quantity order; also the CSV column order
QUANTITIES = ("L_a", "R_a", "L_b", "R_b", "T_lb", "N", "total")
_FORWARD = {"L_a", "R_a", "L_b", "R_b", "total"}
#: Reasons that annotate a valid value rather than a failure.
NOTE_REASONS = ("near_pole_nudged", "near_pole_solver")
_ENERGY_AXES = ("E", "Delta")


class Engine(enum.Enum):
    CLOSED = "closed"
    SOLVER = "solver"
    AUTO = "auto"


@dataclass(frozen=True)
class SweepAxis:
    """One grid axis: a parameter (or ``E``/``Delta``) and its values."""

    name: str
    grid: tuple

    def __init__(self, name: str, grid: Iterable):
        values = tuple(int(v) for v in grid) if name == "l" else tuple(float(v) for v in grid)
        if not values:
            raise ValueError(f"axis {name!r}: grid is empty")
        diffs = np.diff(np.asarray(values, dtype=float))
        if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError(f"axis {name!r}: grid must be strictly monotone")
        if name not in _ENERGY_AXES:
            probe = {name: values[0]}
            try:
                SystemParams().with_values(**probe)
            except TypeError:
                raise ValueError(f"unknown sweep axis {name!r}") from None
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "grid", values)

    @classmethod
    def linspace(cls, name, start, stop, count):
        if name == "l":
            return cls(name, np.unique(np.round(np.linspace(start, stop, int(count))).astype(int)))
        return cls(name, np.linspace(start, stop, int(count)))

    def __len__(self):
        return len(self.grid)


@dataclass(frozen=True)
class Extremum:
    point: float
    value: float
    kind: str  # "max" or "min"


@dataclass
class SweepResult:
    """Quantities on a grid.

    ``quantities[name]`` and ``reasons`` have shape ``(len(ax0),)`` or
    ``(len(ax0), len(ax1))``.  An empty reason means the point evaluated
    cleanly.
    """

    axes: tuple[SweepAxis, ...]
    quantities: dict[str, np.ndarray]
    reasons: np.ndarray
    params_snapshot: SystemParams
    engine: str
    energy: float | None = None
    labels: dict = field(default_factory=dict)

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    def __getitem__(self, name) -> np.ndarray:
        return self.quantities[name]

    def columns(self) -> list[str]:
        return [a.name for a in self.axes] + [q for q in QUANTITIES if q in self.quantities] + ["reason"]

    def rows(self):
        names = [q for q in QUANTITIES if q in self.quantities]
        for index in np.ndindex(*self.shape):
            coords = [ax.grid[i] for ax, i in zip(self.axes, index)]
            yield coords, [self.quantities[q][index] for q in names], self.reasons[index]

    def to_csv(self, stream=None) -> str:
        """Write CSV (shortest round-trip floats, NaN as empty) and return it."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns())
        for coords, vals, reason in self.rows():
            writer.writerow([_fmt(c) for c in coords] + [_fmt(v) for v in vals] + [reason])
        text = buf.getvalue()
        if stream is not None:
            stream.write(text)
        return text

    def to_json(self) -> str:
        doc = {
            "axes": [{"name": a.name, "grid": list(a.grid)} for a in self.axes],
            "engine": self.engine,
            "energy": self.energy,
            "params": self.params_snapshot.to_dict(),
            "labels": self.labels,
            "columns": self.columns(),
            "quantities": {k: [_json_num(v) for v in np.ravel(a)] for k, a in self.quantities.items()},
            "reasons": [str(r) for r in np.ravel(self.reasons)],
        }
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def _json_num(value):
    value = float(value)
    return None if math.isnan(value) else value


def reverse_transmission(params: SystemParams, E: float) -> float:
    """Probability that a photon entering CRW-b from the left exits CRW-a
    to the left."""
    return routing_rates(solve_scattering(params, E, IncidencePort.LeftB)).L_a


def nonreciprocity(params: SystemParams, E: float) -> float:
    """Forward minus reverse left-to-left transmission between the guides."""
    forward = routing_rates(solve_scattering(params, E, IncidencePort.LeftA)).L_b
    return forward - reverse_transmission(params, E)


def _closed_rates(params, E, nudge):
    amp = closed_form.amplitudes_closed_form(params, E, nudge=nudge)
    r = np.abs(amp.as_array()) ** 2
    return {"L_a": r[0], "R_a": r[1], "L_b": r[2], "R_b": r[3]}


def _solver_rates(params, E, port=IncidencePort.LeftA):
    return routing_rates(solve_scattering(params, E, port)).as_dict()


def evaluate_point(params: SystemParams, E: float, quantities: Sequence[str],
                   engine: Engine = Engine.AUTO, nudge=True):
    """Evaluate the requested quantities at one point.

    Returns ``(values, reason)``; ``reason`` is ``""`` on a clean
    evaluation, ``"near_pole_nudged"`` when the closed form had to shift
    the energy, ``"near_pole_solver"`` when the auto engine fell back to
    the solver at a pole, or an error code (values NaN) on failure.  With the closed
    engine ``T_lb`` uses ``T_lb(phi) = L_b(-phi)``, since the closed form
    only covers incidence from the left of CRW-a.
    """
    engine = Engine(engine)
    use_closed = engine is Engine.CLOSED or (engine is Engine.AUTO and params.is_symmetric())
    values = {q: math.nan for q in quantities}
    reason = ""
    try:
        validate(params)
        need_forward = any(q in _FORWARD or q == "N" for q in quantities)
        need_reverse = any(q in ("T_lb", "N") for q in quantities)
        fwd = rev = None
        if use_closed:
            try:
                if need_forward:
                    fwd = _closed_rates(params, E, nudge=False)
                if need_reverse:
                    rev = _closed_rates(params.with_values(phi=-params.phi), E, nudge=False)["L_b"]
            except NearPole:
                if engine is Engine.AUTO:
                    reason = "near_pole_solver"
                    use_closed = False
                elif not nudge:
                    raise
                else:
                    reason = "near_pole_nudged"
                    if need_forward:
                        fwd = _closed_rates(params, E, nudge=True)
                    if need_reverse:
                        rev = _closed_rates(params.with_values(phi=-params.phi), E,
                                            nudge=True)["L_b"]
        if not use_closed:
            if need_forward:
                fwd = _solver_rates(params, E)
            if need_reverse:
                rev = _solver_rates(params, E, IncidencePort.LeftB)["L_a"]
        for q in quantities:
            if q in ("L_a", "R_a", "L_b", "R_b"):
                values[q] = float(fwd[q])
            elif q == "total":
                values[q] = float(sum(fwd.values()))
            elif q == "T_lb":
                values[q] = float(rev)
            elif q == "N":
                values[q] = float(fwd["L_b"] - rev)
    except RouterError as exc:
        values = {q: math.nan for q in quantities}
        reason = exc.code
    return values, reason


def _point_setup(params, axes, index, energy):
    E = energy
    updates = {}
    for ax, i in zip(axes, index):
        if ax.name not in _ENERGY_AXES:
            updates[ax.name] = ax.grid[i]
    p = params.with_values(**updates) if updates else params
    for ax, i in zip(axes, index):
        if ax.name == "E":
            E = ax.grid[i]
        elif ax.name == "Delta":
            E = p.omega + ax.grid[i]
    return p, E


def sweep(params: SystemParams, axes: Sequence[SweepAxis], quantities: Iterable[str],
          engine: Engine | str = Engine.AUTO, energy: float | None = None,
          delta: float | None = None, nudge=True, threads: int = 1) -> SweepResult:
    """Evaluate ``quantities`` over a 1D or 2D grid.

    Parameters
    ----------
    params
        Base parameters; non-energy axes override single fields or aliases.
    axes
        One or two :class:`SweepAxis`.
    quantities
        Subset of :data:`QUANTITIES`.
    engine
        ``closed`` requires symmetric parameters at every grid point;
        ``auto`` uses the closed form where it applies and the solver
        elsewhere.
    energy, delta
        Fixed incident energy (or detuning) when no axis is ``E``/``Delta``.
    threads
        Worker threads; output order does not depend on scheduling.

    Raises
    ------
    EngineMismatch
        ``engine="closed"`` with non-symmetric parameters.
    """
    axes = tuple(axes)
    if not 1 <= len(axes) <= 2:
        raise ValueError("a sweep takes one or two axes")
    requested = set(quantities)
    unknown = requested - set(QUANTITIES)
    quantities = [q for q in QUANTITIES if q in requested]
    if not quantities or unknown:
        raise ValueError("quantities must be a nonempty subset of " + ", ".join(QUANTITIES))
    engine = Engine(engine)
    has_energy_axis = any(a.name in _ENERGY_AXES for a in axes)
    if not has_energy_axis:
        if energy is None and delta is None:
            raise ValueError("no E/Delta axis: pass energy= or delta=")
        if energy is None:
            energy = params.omega + delta

    shape = tuple(len(a) for a in axes)
    indices = list(np.ndindex(*shape))
    setups = [_point_setup(params, axes, idx, energy) for idx in indices]
    if engine is Engine.CLOSED and not all(p.is_symmetric() for p, _ in setups):
        raise EngineMismatch("closed-form engine requested for non-symmetric parameters")

    def work(setup):
        p, E = setup
        return evaluate_point(p, E, quantities, engine, nudge)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, setups))
    else:
        results = [work(s) for s in setups]

    data = {q: np.full(shape, math.nan) for q in quantities}
    reasons = np.empty(shape, dtype=object)
    for idx, (vals, reason) in zip(indices, results):
        for q in quantities:
            data[q][idx] = vals[q]
        reasons[idx] = reason
    labels = {}
    if params.Omega1 != params.Omega2 or any(a.name in ("Omega1", "Omega2", "Omega") for a in axes):
        labels["Delta_Omega"] = abs(params.Omega1 - params.Omega2)
    return SweepResult(axes, data, reasons, params, engine.value, energy, labels)


def find_extrema(series: SweepResult, quantity: str) -> list[Extremum]:
    """Strict interior local extrema of a 1D sweep (three-point test).

    Points next to a missing value are skipped.  No smoothing is applied, so
    the grid must resolve the features of interest.
    """
    if len(series.axes) != 1:
        raise ValueError("find_extrema needs a 1D sweep")
    y = np.asarray(series.quantities[quantity], dtype=float)
    x = series.axes[0].grid
    out = []
    for i in range(1, len(y) - 1):
        a, b, c = y[i - 1], y[i], y[i + 1]
        if np.isnan(a) or np.isnan(b) or np.isnan(c):
            continue
        if b > a and b > c:
            out.append(Extremum(x[i], float(b), "max"))
        elif b < a and b < c:
            out.append(Extremum(x[i], float(b), "min"))
    return out
