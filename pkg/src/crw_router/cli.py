"""Command-line front end for routing-rate sweeps and oracle runs.

Every command given ``--out`` also writes ``<out>.manifest.json``, which
holds enough to reproduce the output byte for byte with ``rerun``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, checks
from .analysis import NOTE_REASONS, Engine, SweepAxis, sweep
from .closed_form import frequency_report
from .config import (RunConfig, list_recipes, load_config, load_recipe, parse_config,
                     parse_grid)
from .errors import ConfigError, NotSymmetric, RouterError
from .model import SystemParams, wavevector_from_energy

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ALL_FAILED = 0, 1, 2, 3
DEFAULT_QUANTITIES = ("L_a", "R_a", "L_b", "R_b")
NONRECIPROCITY_QUANTITIES = ("L_b", "T_lb", "N")


@dataclass
class RunManifest:
    """Provenance record written next to an output file."""

    command: str
    parameters: dict
    engine: str | None
    grid: list
    outputs: list
    quantities: list = field(default_factory=list)
    options: dict = field(default_factory=dict)
    tool_version: str = __version__
    duration_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def write_atomic(path, text: str) -> None:
    """Write ``text`` through a temporary file and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _finish(text: str, out, manifest: RunManifest) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    write_atomic(out, text)
    manifest.outputs = [str(out)]
    write_atomic(f"{out}.manifest.json", manifest.to_json())


# -- configuration ---------------------------------------------------------

def load_run_config(config=None, recipe=None, overrides=()) -> RunConfig:
    """Resolve a config file or recipe, then apply ``name=value`` overrides."""
    if recipe:
        cfg = load_recipe(recipe)
    elif config:
        cfg = load_config(config)
    else:
        cfg = RunConfig(SystemParams())
    if overrides:
        extra = parse_config("\n".join(overrides), "--set", base=cfg.params)
        options = dict(cfg.options)
        for key, value in extra.options.items():
            options[key] = value
        cfg = RunConfig(extra.params, options, cfg.path)
    return cfg


def _config_from_args(args) -> RunConfig:
    return load_run_config(getattr(args, "config", None), getattr(args, "recipe", None),
                           getattr(args, "set", None) or ())


def _axes(specs) -> list[SweepAxis]:
    if len(specs) > 2:
        raise ConfigError("at most two --grid axes")
    axes = []
    for spec in specs:
        try:
            name, start, stop, count = parse_grid(spec)
            axes.append(SweepAxis.linspace(name, start, stop, count))
        except ValueError as exc:
            raise ConfigError(f"bad grid {spec!r}: {exc}") from None
    return axes


def _engine(value) -> Engine:
    try:
        return Engine(value)
    except ValueError:
        raise ConfigError(f"unknown engine {value!r}") from None


# -- commands --------------------------------------------------------------

def run_sweep(cfg: RunConfig, command: str, quantities, grid_specs, engine="auto",
              nudge_poles=False, threads=1, out=None) -> int:
    """Shared body of ``spectrum`` and ``nonreciprocity``."""
    axes = _axes(grid_specs)
    if not axes:
        raise ConfigError("no grid given (use --grid name:start:stop:count)")
    engine = _engine(engine)
    energy, delta = cfg.options.get("E"), cfg.options.get("Delta")
    start = time.perf_counter()
    try:
        result = sweep(cfg.params, axes, quantities, engine=engine, energy=energy,
                       delta=delta, nudge=nudge_poles, threads=threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    manifest = RunManifest(
        command=command, parameters=cfg.params.to_dict(), engine=engine.value,
        grid=list(grid_specs), outputs=[], quantities=list(quantities),
        options={"E": energy, "Delta": delta, "nudge_poles": nudge_poles},
        duration_s=time.perf_counter() - start)
    _finish(result.to_csv(), out, manifest)

    failed = [r for r in np.ravel(result.reasons) if r and r not in NOTE_REASONS]
    if len(failed) == result.reasons.size:
        print(f"all {len(failed)} grid points failed: {', '.join(sorted(set(failed)))}",
              file=sys.stderr)
        return EXIT_ALL_FAILED
    return EXIT_OK


def _split_quantities(items):
    return [q.strip() for item in items for q in item.split(",") if q.strip()]


def cmd_spectrum(args) -> int:
    cfg = _config_from_args(args)
    quantities = _split_quantities(args.quantity or cfg.quantities) or list(DEFAULT_QUANTITIES)
    return run_sweep(cfg, "spectrum", quantities, args.grid or cfg.grids,
                     args.engine or cfg.options.get("engine", "auto"),
                     args.nudge_poles, args.threads, args.out)


def cmd_nonreciprocity(args) -> int:
    cfg = _config_from_args(args)
    return run_sweep(cfg, "nonreciprocity", list(NONRECIPROCITY_QUANTITIES),
                     args.grid or cfg.grids, args.engine or cfg.options.get("engine", "auto"),
                     args.nudge_poles, args.threads, args.out)


def scatfreq_document(params: SystemParams, grid_specs=()) -> dict:
    """Printed-formula values next to the numeric roots, optionally over a grid."""
    axes = _axes(grid_specs)
    if any(a.name in ("E", "Delta") for a in axes):
        raise ConfigError("scattering frequencies do not depend on the incident energy; "
                          "sweep a parameter instead")
    try:
        if not axes:
            return {"params": params.to_dict(), "report": frequency_report(params)}
        points = []
        for idx in np.ndindex(*[len(a) for a in axes]):
            updates = {a.name: a.grid[i] for a, i in zip(axes, idx)}
            points.append({"point": {k: float(v) for k, v in updates.items()},
                           "report": frequency_report(params.with_values(**updates))})
    except NotSymmetric as exc:
        raise ConfigError(f"scattering frequencies need symmetric parameters: {exc}") from None
    return {"params": params.to_dict(),
            "axes": [{"name": a.name, "grid": [float(x) for x in a.grid]} for a in axes],
            "points": points}


def run_scatfreq(cfg: RunConfig, grid_specs, out=None) -> int:
    start = time.perf_counter()
    doc = scatfreq_document(cfg.params, grid_specs)
    manifest = RunManifest("scatfreq", cfg.params.to_dict(), None, list(grid_specs), [],
                           duration_s=time.perf_counter() - start)
    _finish(json.dumps(doc, indent=2, sort_keys=True) + "\n", out, manifest)
    return EXIT_OK


def cmd_scatfreq(args) -> int:
    cfg = _config_from_args(args)
    return run_scatfreq(cfg, args.grid or cfg.grids, args.out)


def cmd_validate(args) -> int:
    cfg = _config_from_args(args)
    ok = True
    for name, passed, detail in checks.run_invariant_suite(cfg.params):
        ok = ok and passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if ok else EXIT_FAIL


def run_wavepacket_command(cfg: RunConfig, delta=None, energy_spread=None, dt=0.01,
                           out=None) -> int:
    from .wavepacket import LatticeConfig, run_wavepacket

    delta = delta if delta is not None else cfg.options.get("carrier_Delta")
    if delta is None:
        raise ConfigError("no carrier detuning (use --delta or carrier_Delta)")
    p = cfg.params
    try:
        k = wavevector_from_energy(p.omega + delta, p.omega, p.xi)
    except RouterError as exc:
        raise ConfigError(str(exc)) from None
    spread = energy_spread or cfg.options.get("energy_spread", 0.02)
    start = time.perf_counter()
    report = run_wavepacket(p, LatticeConfig.for_carrier(p, k, energy_spread=spread, dt=dt))
    manifest = RunManifest("wavepacket", p.to_dict(), None, [], [],
                           options={"carrier_Delta": delta, "energy_spread": spread, "dt": dt},
                           duration_s=time.perf_counter() - start)
    _finish(report.to_json() + "\n", out, manifest)
    return EXIT_OK


def cmd_wavepacket(args) -> int:
    cfg = _config_from_args(args)
    return run_wavepacket_command(cfg, args.delta, args.energy_spread, args.dt, args.out)


def cmd_run(args) -> int:
    """Run a recipe (packaged name or path) with the command it names."""
    if args.recipe in list_recipes():
        cfg = load_recipe(args.recipe)
    else:
        cfg = load_config(args.recipe)
    command = cfg.options.get("command")
    engine = cfg.options.get("engine", "auto")
    if command == "spectrum":
        quantities = _split_quantities(cfg.quantities) or list(DEFAULT_QUANTITIES)
        return run_sweep(cfg, command, quantities, cfg.grids, engine, args.nudge_poles,
                         args.threads, args.out)
    if command == "nonreciprocity":
        return run_sweep(cfg, command, list(NONRECIPROCITY_QUANTITIES), cfg.grids, engine,
                         args.nudge_poles, args.threads, args.out)
    if command == "scatfreq":
        return run_scatfreq(cfg, cfg.grids, args.out)
    if command == "wavepacket":
        return run_wavepacket_command(cfg, out=args.out)
    raise ConfigError(f"recipe names no runnable command (got {command!r})", path=cfg.path)


def cmd_rerun(args) -> int:
    """Repeat a run recorded in a manifest."""
    try:
        manifest = RunManifest.from_json(Path(args.manifest).read_text())
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot read manifest: {exc}", path=args.manifest) from None
    names = set(SystemParams.field_names())
    params = SystemParams(**{k: v for k, v in manifest.parameters.items() if k in names})
    opts = manifest.options
    cfg = RunConfig(params, {k: opts[k] for k in ("E", "Delta") if opts.get(k) is not None})
    out = args.out or (manifest.outputs[0] if manifest.outputs else None)
    if manifest.command in ("spectrum", "nonreciprocity"):
        return run_sweep(cfg, manifest.command, manifest.quantities, manifest.grid,
                         manifest.engine, opts.get("nudge_poles", False), args.threads, out)
    if manifest.command == "scatfreq":
        return run_scatfreq(cfg, manifest.grid, out)
    if manifest.command == "wavepacket":
        return run_wavepacket_command(cfg, opts["carrier_Delta"], opts["energy_spread"],
                                      opts["dt"], out)
    raise ConfigError(f"cannot rerun command {manifest.command!r}", path=args.manifest)


def cmd_recipes(args) -> int:
    for name in list_recipes():
        cfg = load_recipe(name)
        print(f"{name:8s} {cfg.options.get('command', ''):15s} {cfg.options.get('source', '')}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crw-router", description="Single-photon routing in a coupled-resonator router.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p, grid=True):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--config", help="flat 'name = value' parameter file")
        group.add_argument("--recipe", help="packaged figure recipe, e.g. fig2a")
        p.add_argument("--set", action="append", metavar="NAME=VALUE",
                       help="override one config entry (repeatable)")
        p.add_argument("--out", help="output path (default: stdout, no manifest)")
        if grid:
            p.add_argument("--grid", action="append", metavar="NAME:START:STOP:COUNT",
                           help="sweep axis (repeatable, at most two)")

    def sweep_opts(p):
        p.add_argument("--engine", choices=[e.value for e in Engine])
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("--nudge-poles", action="store_true",
                       help="shift closed-form points that sit on a pole")

    p = sub.add_parser("spectrum", help="routing-rate sweep as CSV")
    source(p)
    sweep_opts(p)
    p.add_argument("--quantity", action="append",
                   help="L_a, R_a, L_b, R_b, T_lb, N or total (repeatable)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("nonreciprocity", help="L_b, T_lb and N sweep as CSV")
    source(p)
    sweep_opts(p)
    p.set_defaults(func=cmd_nonreciprocity)

    p = sub.add_parser("scatfreq", help="scattering frequencies and numeric roots as JSON")
    source(p)
    p.set_defaults(func=cmd_scatfreq)

    p = sub.add_parser("validate", help="invariant checks at the given parameters")
    source(p, grid=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("wavepacket", help="time-domain oracle run as JSON")
    source(p, grid=False)
    p.add_argument("--delta", type=float, help="carrier detuning")
    p.add_argument("--energy-spread", type=float, help="packet energy spread (default 0.02)")
    p.add_argument("--dt", type=float, default=0.01)
    p.set_defaults(func=cmd_wavepacket)

    p = sub.add_parser("run", help="run a recipe with the command it names")
    p.add_argument("recipe", help="recipe name or config path")
    p.add_argument("--out")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--nudge-poles", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("rerun", help="reproduce an output from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write somewhere other than the recorded path")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_rerun)

    p = sub.add_parser("recipes", help="list packaged recipes")
    p.set_defaults(func=cmd_recipes)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
